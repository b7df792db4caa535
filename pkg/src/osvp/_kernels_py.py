"""Numpy implementations of the compiled kernels, used when the extension is unavailable."""

import numpy as np


def trace_rays(occ, origin, targets, margin=0):
    """Visibility of each target voxel from ``origin`` (grid units), vectorized over rays.

    Occupied voxels within Chebyshev distance ``margin`` of the target are not
    treated as occluders.
    """
    occ = np.asarray(occ, dtype=np.uint8)
    targets = np.asarray(targets, dtype=np.int64).reshape(-1, 3)
    m = len(targets)
    out = np.ones(m, dtype=np.uint8)
    if m == 0:
        return out
    dim = np.asarray(occ.shape, dtype=np.int64)
    o = np.asarray(origin, dtype=np.float64)
    d = targets + 0.5 - o
    t0 = np.zeros(m)
    with np.errstate(divide="ignore", invalid="ignore"):
        for a in range(3):
            nz = d[:, a] != 0.0
            ta = (0.0 - o[a]) / d[nz, a]
            tb = (dim[a] - o[a]) / d[nz, a]
            t0[nz] = np.maximum(t0[nz], np.minimum(ta, tb))
        v = np.floor(o + t0[:, None] * d).astype(np.int64)
        v = np.clip(v, 0, dim - 1)
        step = np.sign(d).astype(np.int64)
        tdelta = np.where(d != 0.0, 1.0 / np.abs(d), np.inf)
        tmax = np.where(d > 0.0, (v + 1 - o) / d, np.where(d < 0.0, (v - o) / d, np.inf))

    active = np.arange(m)
    for _ in range(int(dim.sum()) + 3):
        if len(active) == 0:
            break
        va = v[active]
        hit_target = np.all(va == targets[active], axis=1)
        blocked = ~hit_target & (occ[va[:, 0], va[:, 1], va[:, 2]] != 0)
        if margin > 0:
            blocked &= np.abs(va - targets[active]).max(axis=1) > margin
        out[active[blocked]] = 0
        keep = ~(hit_target | blocked)
        active = active[keep]
        if len(active) == 0:
            break
        axis = np.argmin(tmax[active], axis=1)
        v[active, axis] += step[active, axis]
        tmax[active, axis] += tdelta[active, axis]
        inside = (v[active, axis] >= 0) & (v[active, axis] < dim[axis])
        active = active[inside]
    return out


def held_karp(dist, start):
    """Exact shortest open Hamiltonian path; ``start < 0`` leaves both endpoints free."""
    dist = np.asarray(dist, dtype=np.float64)
    n = len(dist)
    size = 1 << n
    dp = np.full((size, n), np.inf)
    par = np.full((size, n), -1, dtype=np.int64)
    if start >= 0:
        dp[1 << start, start] = 0.0
    else:
        dp[1 << np.arange(n), np.arange(n)] = 0.0
    masks = np.arange(size, dtype=np.int64)
    popcount = np.zeros(size, dtype=np.int64)
    for b in range(n):
        popcount += (masks >> b) & 1
    for s in range(2, n + 1):
        layer = masks[popcount == s]
        for k in range(n):
            sel = layer[(layer >> k) & 1 == 1]
            if len(sel) == 0:
                continue
            cand = dp[sel ^ (1 << k)] + dist[:, k][None, :]
            j = np.argmin(cand, axis=1)
            val = cand[np.arange(len(sel)), j]
            better = val < dp[sel, k]
            dp[sel[better], k] = val[better]
            par[sel[better], k] = j[better]
    full = size - 1
    best_j = int(np.argmin(dp[full]))
    best = float(dp[full, best_j])
    order = []
    mask, j = full, best_j
    while j >= 0:
        order.append(j)
        nxt = int(par[mask, j])
        mask ^= 1 << j
        j = nxt
    order.reverse()
    return best, order
