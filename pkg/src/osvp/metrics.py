"""Point-sample distances between two shapes: Hausdorff, Chamfer and Earth Mover's."""

from __future__ import annotations

import numpy as np
from scipy.optimize import linear_sum_assignment
from scipy.spatial import cKDTree

EMD_MAX_POINTS = 1024


def _as_points(a, name):
    pts = np.asarray(a, dtype=np.float64).reshape(-1, 3)
    if len(pts) == 0:
        raise ValueError(f"{name} is empty")
    if not np.all(np.isfinite(pts)):
        raise ValueError(f"{name} has non-finite coordinates")
    return pts


def _directed(a, b):
    d, _ = cKDTree(b).query(a, k=1)
    return d


def hausdorff(a, b) -> float:
    a, b = _as_points(a, "a"), _as_points(b, "b")
    return float(max(_directed(a, b).max(), _directed(b, a).max()))


def chamfer(a, b) -> float:
    """Half the sum of the two mean point-to-set distances (not squared)."""
    a, b = _as_points(a, "a"), _as_points(b, "b")
    return float(0.5 * (_directed(a, b).mean() + _directed(b, a).mean()))


def emd(a, b) -> float:
    """Mean matched distance of the optimal one-to-one assignment between equal-size samples."""
    a, b = _as_points(a, "a"), _as_points(b, "b")
    if len(a) != len(b):
        raise ValueError(f"EMD needs equal sample sizes, got {len(a)} and {len(b)}")
    if len(a) > EMD_MAX_POINTS:
        raise ValueError(f"EMD is capped at {EMD_MAX_POINTS} points, got {len(a)}")
    cost = np.linalg.norm(a[:, None, :] - b[None, :, :], axis=-1)
    rows, cols = linear_sum_assignment(cost)
    return float(cost[rows, cols].mean())


def evaluate_meshes(mesh_a, mesh_b, n_hd=10000, n_cd=10000, n_emd=1000, seed=0) -> dict:
    """HD / CD / EMD between two meshes from area-weighted surface samples."""
    from .geometry import sample_surface

    def pts(mesh, n, s):
        return sample_surface(mesh, n, s).positions

    return {
        "hd": hausdorff(pts(mesh_a, n_hd, seed), pts(mesh_b, n_hd, seed + 1)),
        "cd": chamfer(pts(mesh_a, n_cd, seed + 2), pts(mesh_b, n_cd, seed + 3)),
        "emd": emd(pts(mesh_a, n_emd, seed + 4), pts(mesh_b, n_emd, seed + 5)),
    }
