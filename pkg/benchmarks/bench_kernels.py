"""Compare the compiled and numpy kernel backends.

    python3 benchmarks/bench_kernels.py [--repeat 5]

Ray workload: the sphere-shell occupancy a 50^3 pipeline run produces, traced
from 144 hemisphere views. Path workload: Held-Karp on random points.
"""

import argparse
import time

import numpy as np

from osvp import kernels


def sphere_shell(n=50, radius=0.45):
    g = (np.arange(n) + 0.5) / n - 0.5
    x, y, z = np.meshgrid(g, g, g, indexing="ij")
    r = np.sqrt(x * x + y * y + z * z)
    return np.ascontiguousarray((np.abs(r - radius) < 1.0 / n).astype(np.uint8))


def view_origins(n_views=144, n=50, scale=3.0):
    rng = np.random.default_rng(0)
    d = rng.normal(size=(n_views, 3))
    d[:, 2] = np.abs(d[:, 2])
    d /= np.linalg.norm(d, axis=1, keepdims=True)
    return n / 2 + d * scale * 0.45 * n


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--views", type=int, default=144)
    ap.add_argument("--path-sizes", type=int, nargs="+", default=[10, 13, 16])
    args = ap.parse_args()

    backends = kernels.backends()
    if "cython" not in backends:
        print("compiled extension not built; only the numpy backend is available")

    occ = sphere_shell()
    targets = np.ascontiguousarray(np.argwhere(occ), dtype=np.int64)
    origins = view_origins(args.views)
    print(f"rays: {len(origins)} views x {len(targets)} surface voxels")
    ref = None
    for name, mod in backends.items():
        secs, out = best_of(lambda: [mod.trace_rays(occ, o, targets, 1) for o in origins], args.repeat)
        out = np.stack(out)
        ref = out if ref is None else ref
        agree = "identical" if np.array_equal(out, ref) else "MISMATCH"
        rate = out.size / secs / 1e6
        print(f"  {name:7s} {secs * 1e3:9.1f} ms  {rate:7.2f} Mrays/s  {agree}")

    rng = np.random.default_rng(1)
    for n in args.path_sizes:
        pts = rng.random((n, 3))
        dist = np.ascontiguousarray(np.linalg.norm(pts[:, None] - pts[None], axis=2))
        print(f"held-karp n={n}")
        ref = None
        for name, mod in backends.items():
            secs, out = best_of(lambda: mod.held_karp(dist, -1), args.repeat)
            ref = out if ref is None else ref
            agree = "identical" if out[1] == ref[1] else "MISMATCH"
            print(f"  {name:7s} {secs * 1e3:9.1f} ms  cost {out[0]:.6f}  {agree}")


if __name__ == "__main__":
    main()
