# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot loops: voxel ray traversal and subset DP for open Hamiltonian paths.

Semantics match ``_kernels_py`` exactly, including tie-breaking.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport floor, INFINITY, fabs
from libc.stdlib cimport labs

cnp.import_array()


cdef inline bint _trace(const unsigned char[:, :, ::1] occ, double ox, double oy, double oz,
                        long tx, long ty, long tz, long margin) noexcept nogil:
    cdef long nx = occ.shape[0], ny = occ.shape[1], nz = occ.shape[2]
    cdef double o[3]
    cdef double d[3]
    cdef long dim[3]
    cdef long tgt[3]
    cdef long v[3]
    cdef long step[3]
    cdef double tmax[3]
    cdef double tdelta[3]
    cdef double t0 = 0.0, t1 = 1.0, ta, tb, p
    cdef int a
    cdef long guard
    o[0] = ox; o[1] = oy; o[2] = oz
    tgt[0] = tx; tgt[1] = ty; tgt[2] = tz
    dim[0] = nx; dim[1] = ny; dim[2] = nz
    d[0] = tx + 0.5 - ox; d[1] = ty + 0.5 - oy; d[2] = tz + 0.5 - oz
    for a in range(3):
        if d[a] != 0.0:
            ta = (0.0 - o[a]) / d[a]
            tb = (dim[a] - o[a]) / d[a]
            if ta > tb:
                ta, tb = tb, ta
            if ta > t0:
                t0 = ta
            if tb < t1:
                t1 = tb
    for a in range(3):
        p = o[a] + t0 * d[a]
        v[a] = <long>floor(p)
        if v[a] < 0:
            v[a] = 0
        elif v[a] > dim[a] - 1:
            v[a] = dim[a] - 1
        if d[a] > 0.0:
            step[a] = 1
            tmax[a] = (v[a] + 1 - o[a]) / d[a]
            tdelta[a] = 1.0 / fabs(d[a])
        elif d[a] < 0.0:
            step[a] = -1
            tmax[a] = (v[a] - o[a]) / d[a]
            tdelta[a] = 1.0 / fabs(d[a])
        else:
            step[a] = 0
            tmax[a] = INFINITY
            tdelta[a] = INFINITY
    guard = nx + ny + nz + 3
    while guard > 0:
        guard -= 1
        if v[0] == tgt[0] and v[1] == tgt[1] and v[2] == tgt[2]:
            return True
        if occ[v[0], v[1], v[2]]:
            if margin <= 0 or labs(v[0] - tgt[0]) > margin or labs(v[1] - tgt[1]) > margin \
                    or labs(v[2] - tgt[2]) > margin:
                return False
        if tmax[0] <= tmax[1] and tmax[0] <= tmax[2]:
            a = 0
        elif tmax[1] <= tmax[2]:
            a = 1
        else:
            a = 2
        v[a] += step[a]
        tmax[a] += tdelta[a]
        if v[a] < 0 or v[a] >= dim[a]:
            return True
    return True


def trace_rays(const unsigned char[:, :, ::1] occ, origin, const long[:, ::1] targets, long margin=0):
    """Visibility of each target voxel from ``origin`` (grid units).

    Occupied voxels within Chebyshev distance ``margin`` of the target are not
    treated as occluders.
    """
    cdef Py_ssize_t i, m = targets.shape[0]
    cdef double ox = origin[0], oy = origin[1], oz = origin[2]
    out = np.zeros(m, dtype=np.uint8)
    cdef unsigned char[::1] res = out
    with nogil:
        for i in range(m):
            res[i] = _trace(occ, ox, oy, oz, targets[i, 0], targets[i, 1], targets[i, 2], margin)
    return out


def held_karp(const double[:, ::1] dist, long start):
    """Exact shortest open Hamiltonian path; ``start < 0`` leaves both endpoints free."""
    cdef long n = dist.shape[0]
    cdef long full = (1 << n) - 1
    cdef long mask, prev, j, k, best_j
    cdef double val, best
    dp_arr = np.full((1 << n, n), np.inf)
    par_arr = np.full((1 << n, n), -1, dtype=np.int64)
    cdef double[:, ::1] dp = dp_arr
    cdef long[:, ::1] par = par_arr
    if start >= 0:
        dp[1 << start, start] = 0.0
    else:
        for j in range(n):
            dp[1 << j, j] = 0.0
    # pull form: ties keep the lowest predecessor index, as in the numpy version
    with nogil:
        for mask in range(1, full + 1):
            if (mask & (mask - 1)) == 0:
                continue
            for k in range(n):
                if not (mask >> k) & 1:
                    continue
                prev = mask ^ (1 << k)
                for j in range(n):
                    if not (prev >> j) & 1 or dp[prev, j] == INFINITY:
                        continue
                    val = dp[prev, j] + dist[j, k]
                    if val < dp[mask, k]:
                        dp[mask, k] = val
                        par[mask, k] = j
    best = INFINITY
    best_j = -1
    for j in range(n):
        if dp[full, j] < best:
            best = dp[full, j]
            best_j = j
    order = []
    mask = full
    j = best_j
    while j >= 0:
        order.append(j)
        k = par[mask, j]
        mask ^= (1 << j)
        j = k
    order.reverse()
    return best, order
