"""Per-point geometric and textural complexity from PFHRGB-style histograms."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

from .geometry import VoxelizedSurface

N_SPLIT = 5
N_BINS = N_SPLIT ** 3
COMPLEXITY_FLOOR = 1e-3
RATIO_EPS = 1e-6
MAX_ENTROPY = 2.0 * math.log(N_BINS)


@dataclass(frozen=True)
class PfhrgbHistograms:
    geometric: np.ndarray
    textural: np.ndarray


@dataclass(frozen=True)
class ComplexityField:
    raw_entropy: np.ndarray
    normalized: np.ndarray

    def requirements(self, alpha: int) -> np.ndarray:
        """Per-point coverage requirement ceil(alpha * C(p)), clipped to [1, alpha]."""
        # the 1e-9 guard keeps e.g. 3 * (1/3) from rounding up to 2
        req = np.ceil(alpha * self.normalized - 1e-9).astype(np.int64)
        return np.clip(req, 1, alpha)


def pair_features(p1, n1, p2, n2):
    """Darboux-frame (theta, alpha, phi) features for arrays of point pairs.

    Follows the PFH convention: the source is the point whose normal makes the
    smaller angle with the connecting line. Degenerate pairs give zeros.
    """
    d = p2 - p1
    dist = np.linalg.norm(d, axis=-1)
    safe = np.where(dist > 0, dist, 1.0)
    a1 = np.einsum("...i,...i->...", n1, d) / safe
    a2 = np.einsum("...i,...i->...", n2, d) / safe
    swap = np.arccos(np.clip(np.abs(a1), 0, 1)) > np.arccos(np.clip(np.abs(a2), 0, 1))
    src = np.where(swap[..., None], n2, n1)
    tgt = np.where(swap[..., None], n1, n2)
    d = np.where(swap[..., None], -d, d)
    phi = np.where(swap, -a2, a1)
    v = np.cross(d, src)
    vn = np.linalg.norm(v, axis=-1)
    ok = (vn > 0) & (dist > 0)
    v = v / np.where(ok, vn, 1.0)[..., None]
    w = np.cross(src, v)
    alpha = np.einsum("...i,...i->...", v, tgt)
    theta = np.arctan2(np.einsum("...i,...i->...", w, tgt), np.einsum("...i,...i->...", src, tgt))
    zero = np.zeros_like(theta)
    return np.where(ok, theta, zero), np.where(ok, alpha, zero), np.where(ok, phi, zero)


def _bin(x, lo, hi):
    b = np.floor(N_SPLIT * (x - lo) / (hi - lo)).astype(np.int64)
    return np.clip(b, 0, N_SPLIT - 1)


def geometric_bins(theta, alpha, phi):
    return _bin(theta, -math.pi, math.pi) + N_SPLIT * _bin(alpha, -1.0, 1.0) + N_SPLIT ** 2 * _bin(phi, -1.0, 1.0)


def textural_bins(c_center, c_neighbor):
    ratio = c_neighbor / (c_center + c_neighbor + RATIO_EPS)
    b = _bin(ratio, 0.0, 1.0)
    return b[..., 0] + N_SPLIT * b[..., 1] + N_SPLIT ** 2 * b[..., 2]


def _neighbors(surface: VoxelizedSurface, k: int, query_idx=None):
    n = len(surface)
    if k < 1 or k >= n:
        raise ValueError(f"neighbour count k={k} must be in [1, {n - 1}]")
    pts = surface.positions
    q = pts if query_idx is None else pts[np.atleast_1d(query_idx)]
    _, idx = cKDTree(pts).query(q, k=k + 1)
    own = np.arange(n) if query_idx is None else np.atleast_1d(query_idx)
    idx = np.asarray(idx, dtype=np.int64).reshape(len(q), k + 1)
    if np.all(idx[:, 0] == own):
        return own, idx[:, 1:]
    # duplicate positions: drop the query point wherever the tree placed it
    out = np.empty((len(q), k), dtype=np.int64)
    for r in range(len(q)):
        out[r] = idx[r][idx[r] != own[r]][:k]
    return own, out


def _histograms(surface: VoxelizedSurface, centers, nbrs):
    p1 = surface.positions[centers][:, None, :]
    n1 = surface.normals[centers][:, None, :]
    p2, n2 = surface.positions[nbrs], surface.normals[nbrs]
    theta, alpha, phi = pair_features(np.broadcast_to(p1, p2.shape), np.broadcast_to(n1, n2.shape), p2, n2)
    gbin = geometric_bins(theta, alpha, phi)
    tbin = textural_bins(surface.colors[centers][:, None, :], surface.colors[nbrs])
    m = len(centers)
    rows = np.repeat(np.arange(m), nbrs.shape[1])
    geo = np.bincount(rows * N_BINS + gbin.ravel(), minlength=m * N_BINS).reshape(m, N_BINS)
    tex = np.bincount(rows * N_BINS + tbin.ravel(), minlength=m * N_BINS).reshape(m, N_BINS)
    return geo, tex


def pfhrgb_histograms(point_index: int, surface: VoxelizedSurface, k: int = 10) -> PfhrgbHistograms:
    """Geometric and textural 125-bin histograms over the point's k nearest neighbours."""
    own, nbrs = _neighbors(surface, k, point_index)
    geo, tex = _histograms(surface, own, nbrs)
    return PfhrgbHistograms(geo[0], tex[0])


def all_histograms(surface: VoxelizedSurface, k: int = 10) -> tuple[np.ndarray, np.ndarray]:
    own, nbrs = _neighbors(surface, k)
    return _histograms(surface, own, nbrs)


def _shannon(counts):
    counts = np.asarray(counts, dtype=np.float64)
    total = counts.sum(axis=-1, keepdims=True)
    q = counts / total
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(q > 0, q * np.log(q), 0.0)
    return -terms.sum(axis=-1)


def entropy(h: PfhrgbHistograms) -> float:
    """Sum of the natural-log Shannon entropies of both histograms."""
    g, t = np.asarray(h.geometric), np.asarray(h.textural)
    if g.sum() <= 0 or t.sum() <= 0:
        raise ValueError("histogram with zero total")
    return float(_shannon(g) + _shannon(t))


def complexity_field(surface: VoxelizedSurface, k: int = 10) -> ComplexityField:
    """Raw entropy per point and its per-object max-normalization floored at 1e-3."""
    geo, tex = all_histograms(surface, k)
    raw = _shannon(geo) + _shannon(tex)
    top = float(raw.max())
    if top <= 0:
        norm = np.ones_like(raw)
    else:
        norm = np.maximum(raw / top, COMPLEXITY_FLOOR)
    return ComplexityField(raw, norm)
