"""Kernel backend selection.

The compiled extension is preferred; set ``OSVP_PURE_PYTHON=1`` to force the
numpy fallback.
"""

import os

from . import _kernels_py

if os.environ.get("OSVP_PURE_PYTHON"):
    _impl = _kernels_py
    BACKEND = "python"
else:
    try:
        from . import _kernels as _impl
        BACKEND = "cython"
    except ImportError:
        _impl = _kernels_py
        BACKEND = "python"

trace_rays = _impl.trace_rays
held_karp = _impl.held_karp


def backends():
    """Available backends as a name -> module mapping."""
    out = {"python": _kernels_py}
    try:
        from . import _kernels
        out["cython"] = _kernels
    except ImportError:
        pass
    return out
