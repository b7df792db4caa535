"""Shape-from-silhouette voxel carving for rough object localization."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .geometry import VoxelGrid, make_grid, min_bounding_sphere


class CarvingError(RuntimeError):
    pass


@dataclass(frozen=True)
class Camera:
    """Pinhole camera; ``pose`` is the 4x4 world-from-camera transform (camera looks along +z)."""

    fx: float
    fy: float
    cx: float
    cy: float
    width: int
    height: int
    pose: np.ndarray

    def __post_init__(self):
        pose = np.asarray(self.pose, dtype=np.float64).reshape(4, 4)
        if not (self.fx > 0 and self.fy > 0):
            raise ValueError("focal lengths must be positive")
        if self.width <= 0 or self.height <= 0:
            raise ValueError("resolution must be positive")
        rot = pose[:3, :3]
        if not np.allclose(rot @ rot.T, np.eye(3), atol=1e-6) or np.linalg.det(rot) < 0:
            raise ValueError("camera rotation is not orthonormal")
        object.__setattr__(self, "pose", pose)

    @classmethod
    def look_at(cls, eye, target, up, fx, fy, width, height, cx=None, cy=None):
        eye, target, up = (np.asarray(x, dtype=np.float64) for x in (eye, target, up))
        z = target - eye
        z /= np.linalg.norm(z)
        y = -(up - (up @ z) * z)
        if np.linalg.norm(y) < 1e-9:
            y = np.cross(z, [1.0, 0.0, 0.0]) if abs(z[0]) < 0.9 else np.cross(z, [0.0, 1.0, 0.0])
        y /= np.linalg.norm(y)
        x = np.cross(y, z)
        pose = np.eye(4)
        pose[:3, :3] = np.stack([x, y, z], axis=1)
        pose[:3, 3] = eye
        return cls(fx, fy, (width / 2.0) if cx is None else cx, (height / 2.0) if cy is None else cy,
                   width, height, pose)

    def project(self, points):
        """Pixel coordinates (u, v) and camera-frame depth of world points."""
        pts = np.asarray(points, dtype=np.float64).reshape(-1, 3)
        rot, t = self.pose[:3, :3], self.pose[:3, 3]
        pc = (pts - t) @ rot
        z = pc[:, 2]
        with np.errstate(divide="ignore", invalid="ignore"):
            u = self.fx * pc[:, 0] / z + self.cx
            v = self.fy * pc[:, 1] / z + self.cy
        return u, v, z

    def to_dict(self):
        return {"fx": self.fx, "fy": self.fy, "cx": self.cx, "cy": self.cy,
                "width": self.width, "height": self.height, "pose": self.pose.reshape(-1).tolist()}

    @classmethod
    def from_dict(cls, d):
        return cls(float(d["fx"]), float(d["fy"]), float(d["cx"]), float(d["cy"]),
                   int(d["width"]), int(d["height"]), np.asarray(d["pose"], dtype=np.float64).reshape(4, 4))


@dataclass(frozen=True)
class Silhouette:
    mask: np.ndarray  # bool, shape (height, width)
    camera: Camera

    def __post_init__(self):
        mask = np.asarray(self.mask, dtype=bool)
        if mask.shape != (self.camera.height, self.camera.width):
            raise ValueError(f"mask shape {mask.shape} does not match camera resolution "
                             f"{(self.camera.height, self.camera.width)}")
        object.__setattr__(self, "mask", mask)


@dataclass(frozen=True)
class CarvingResult:
    grid: VoxelGrid
    surface_keys: np.ndarray
    centroid: np.ndarray
    size: float

    def to_dict(self):
        return {"centroid": self.centroid.tolist(), "size": self.size,
                "n_voxels": len(self.grid.occupied), "n_surface": int(len(self.surface_keys)),
                "voxel_size": self.grid.voxel_size}


def carve(silhouettes, workspace, dims=(50, 50, 50)) -> CarvingResult:
    """Intersect back-projected silhouette cones over the voxelized workspace box."""
    silhouettes = list(silhouettes)
    if not silhouettes:
        raise ValueError("carving needs at least one silhouette")
    lo, hi = (np.asarray(b, dtype=np.float64) for b in workspace)
    if np.any(hi <= lo):
        raise ValueError("workspace box is empty")
    grid = make_grid(dims, (lo, hi))
    nx, ny, nz = grid.dims
    keys = np.stack(np.meshgrid(np.arange(nx), np.arange(ny), np.arange(nz), indexing="ij"), axis=-1).reshape(-1, 3)
    centers = grid.centers(keys)
    alive = np.ones(len(keys), dtype=bool)
    for sil in silhouettes:
        cam = sil.camera
        u, v, z = cam.project(centers)
        ok = (z > 0) & (u >= 0) & (u < cam.width) & (v >= 0) & (v < cam.height)
        ok &= alive
        iu = np.floor(np.where(ok, u, 0)).astype(np.int64)
        iv = np.floor(np.where(ok, v, 0)).astype(np.int64)
        ok &= sil.mask[iv, iu]
        alive = ok
    if not alive.any():
        raise CarvingError("empty carving: no voxel survives all silhouettes")
    vol = alive.reshape(nx, ny, nz)
    padded = np.pad(vol, 1)
    interior = vol.copy()
    for axis in range(3):
        for shift in (-1, 1):
            interior &= np.roll(padded, shift, axis=axis)[1:-1, 1:-1, 1:-1]
    surface = vol & ~interior
    skeys = np.argwhere(surface).astype(np.int64)
    occupied = frozenset(map(tuple, np.argwhere(vol).tolist()))
    out_grid = VoxelGrid(grid.origin, grid.voxel_size, grid.dims, occupied)
    scenters = out_grid.centers(skeys)
    _, radius = min_bounding_sphere(scenters)
    return CarvingResult(out_grid, skeys, scenters.mean(axis=0), float(radius))


def carving_convergence(results):
    """Centroid displacement and absolute size change between consecutive carving results."""
    results = list(results)
    if len(results) < 2:
        raise ValueError("need at least two carving results")
    return [(float(np.linalg.norm(b.centroid - a.centroid)), abs(b.size - a.size))
            for a, b in zip(results, results[1:])]


def render_sphere_silhouette(camera: Camera, center, radius) -> np.ndarray:
    """Conservative binary silhouette of a sphere.

    A pixel is foreground when any point of its footprint may see the sphere,
    so carving with these masks never removes a voxel whose center lies inside.
    """
    center = np.asarray(center, dtype=np.float64)
    h, w = camera.height, camera.width
    uu, vv = np.meshgrid(np.arange(w) + 0.5, np.arange(h) + 0.5)
    dirs_c = np.stack([(uu - camera.cx) / camera.fx, (vv - camera.cy) / camera.fy, np.ones_like(uu)], axis=-1)
    dirs_c /= np.linalg.norm(dirs_c, axis=-1, keepdims=True)
    rot, eye = camera.pose[:3, :3], camera.pose[:3, 3]
    dirs = dirs_c @ rot.T
    rel = center - eye
    along = dirs @ rel
    perp = np.sqrt(np.maximum(rel @ rel - along ** 2, 0.0))
    dist = float(np.linalg.norm(rel))
    half_pixel = 0.5 * np.hypot(1.0 / camera.fx, 1.0 / camera.fy)
    margin = 1.01 * (dist + radius) * half_pixel
    return (perp <= radius + margin) & (along > 0)


# ---------------------------------------------------------------- IO

def read_mask(path) -> np.ndarray:
    """Binary mask from PGM (P5/P2) or PNG, thresholded at 128."""
    path = Path(path)
    data = path.read_bytes()
    if data[:2] in (b"P5", b"P2"):
        img = _read_pgm(data)
    else:
        from PIL import Image
        with Image.open(path) as im:
            img = np.asarray(im.convert("L"))
    return np.asarray(img) >= 128


def _read_pgm(data: bytes) -> np.ndarray:
    magic = data[:2]
    fields, pos = [], 2
    while len(fields) < 3:
        while data[pos:pos + 1].isspace():
            pos += 1
        if data[pos:pos + 1] == b"#":
            pos = data.index(b"\n", pos) + 1
            continue
        start = pos
        while not data[pos:pos + 1].isspace():
            pos += 1
        fields.append(int(data[start:pos]))
    w, h, maxval = fields
    if magic == b"P2":
        vals = np.array(data[pos:].split(), dtype=np.int64)[: w * h]
    else:
        pos += 1
        dt = np.uint8 if maxval < 256 else np.dtype(">u2")
        vals = np.frombuffer(data, dtype=dt, count=w * h, offset=pos)
    img = vals.reshape(h, w).astype(np.float64)
    return np.rint(img * (255.0 / maxval))


def write_pgm(path, mask) -> None:
    img = np.where(np.asarray(mask, dtype=bool), 255, 0).astype(np.uint8)
    h, w = img.shape
    Path(path).write_bytes(f"P5\n{w} {h}\n255\n".encode("ascii") + img.tobytes())


def read_cameras(path):
    doc = json.loads(Path(path).read_text())
    if isinstance(doc, dict):
        doc = doc.get("cameras", [doc])
    return [Camera.from_dict(d) for d in doc]
