"""Occlusion-aware point visibility from candidate views."""

from __future__ import annotations

import json
import math
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import kernels
from .geometry import VoxelGrid, VoxelizedSurface
from .viewspace import ViewSpace


@dataclass(frozen=True)
class VisibilityMatrix:
    """Boolean ``bits[v, p]``: surface point ``p`` is observable from view ``v``."""

    bits: np.ndarray

    def __post_init__(self):
        bits = np.ascontiguousarray(self.bits, dtype=bool)
        if bits.ndim != 2:
            raise ValueError("visibility bits must be 2-D (views x points)")
        object.__setattr__(self, "bits", bits)

    @property
    def n_views(self) -> int:
        return self.bits.shape[0]

    @property
    def n_points(self) -> int:
        return self.bits.shape[1]

    @property
    def view_counts(self) -> np.ndarray:
        return self.bits.sum(axis=0)

    def observable(self, view: int) -> np.ndarray:
        """Indices of the points observable from ``view``."""
        return np.flatnonzero(self.bits[view])


def _grid_coords(grid: VoxelGrid, points) -> np.ndarray:
    return (np.asarray(points, dtype=np.float64) - grid.origin) / grid.voxel_size


def cast_ray(grid: VoxelGrid, origin, target_key, occupancy=None, margin: int = 0) -> bool:
    """True when no occupied voxel lies on the segment before the target voxel."""
    key = tuple(int(k) for k in target_key)
    if key not in grid.occupied:
        raise ValueError(f"ray target {key} is not an occupied voxel")
    occ = grid.occupancy() if occupancy is None else occupancy
    res = kernels.trace_rays(occ, _grid_coords(grid, origin), np.array([key], dtype=np.int64), margin)
    return bool(res[0])


def _in_frustum(view_pos, forward, targets, fov_deg):
    if fov_deg >= 360.0:
        return np.ones(len(targets), dtype=bool)
    rel = targets - view_pos
    dist = np.linalg.norm(rel, axis=1)
    cos_half = math.cos(math.radians(fov_deg / 2.0))
    with np.errstate(invalid="ignore", divide="ignore"):
        cosang = (rel @ forward) / dist
    return (dist > 0) & (cosang >= cos_half)


def compute_visibility(surface: VoxelizedSurface, space: ViewSpace, fov_deg: float = 60.0,
                       backface: bool = True, occlusion_margin: int = 0) -> VisibilityMatrix:
    """Visibility of every surface voxel from every reachable view.

    A point counts as visible when its voxel center is inside the view's cone
    of half-angle ``fov_deg / 2``, the ray to it is unobstructed and, with
    ``backface``, its normal faces the camera. Unreachable rows stay empty.
    ``occlusion_margin > 0`` ignores occluders within that many voxels of the
    target, which suppresses self-occlusion by the surface shell at grazing
    angles.
    """
    if len(surface) == 0:
        raise ValueError("empty surface")
    cand = space.candidate_ids
    if len(cand) == 0:
        raise ValueError("no candidate views: every view is unreachable")
    occ = surface.grid.occupancy()
    keys = np.ascontiguousarray(surface.keys, dtype=np.int64)
    bits = np.zeros((len(space), len(surface)), dtype=bool)
    for vid in cand:
        view = space.views[vid]
        ok = _in_frustum(view.position, view.forward, surface.positions, fov_deg)
        if backface:
            ok &= np.einsum("ij,ij->i", surface.normals, view.position - surface.positions) > 0
        idx = np.flatnonzero(ok)
        if len(idx):
            vis = kernels.trace_rays(occ, _grid_coords(surface.grid, view.position), keys[idx], occlusion_margin)
            bits[vid, idx[vis.astype(bool)]] = True
    return VisibilityMatrix(bits)


def filter_unsatisfiable(matrix: VisibilityMatrix, requirements):
    """Drop points observable from fewer views than they require."""
    req = np.asarray(requirements, dtype=np.int64)
    if req.shape != (matrix.n_points,):
        raise ValueError("requirements length does not match point count")
    kept = np.flatnonzero(matrix.view_counts >= req)
    return kept, VisibilityMatrix(matrix.bits[:, kept])


def dump_matrix(path, matrix: VisibilityMatrix, keys=None) -> None:
    """Binary dump: u32 header length, JSON header, then row-major packed bits."""
    header = {"n_views": matrix.n_views, "n_points": matrix.n_points,
              "keys": None if keys is None else np.asarray(keys).astype(int).tolist()}
    head = json.dumps(header).encode("utf-8")
    Path(path).write_bytes(struct.pack("<I", len(head)) + head + np.packbits(matrix.bits, axis=None).tobytes())


def load_matrix(path):
    data = Path(path).read_bytes()
    (n,) = struct.unpack_from("<I", data, 0)
    header = json.loads(data[4:4 + n])
    total = header["n_views"] * header["n_points"]
    bits = np.unpackbits(np.frombuffer(data, dtype=np.uint8, offset=4 + n), count=total).astype(bool)
    keys = None if header["keys"] is None else np.asarray(header["keys"], dtype=np.int64)
    return VisibilityMatrix(bits.reshape(header["n_views"], header["n_points"])), keys
