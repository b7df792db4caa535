"""Object-centric hemispherical candidate view space and reachability filtering."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.spatial.transform import Rotation

WORLD_UP = (0.0, 0.0, 1.0)
GOLDEN_ANGLE = math.pi * (3.0 - math.sqrt(5.0))


@dataclass(frozen=True)
class View:
    id: int
    position: np.ndarray
    quaternion: np.ndarray  # scalar-last (x, y, z, w), camera +z is the optical axis

    def rotation(self) -> np.ndarray:
        """World-from-camera rotation matrix."""
        return Rotation.from_quat(self.quaternion).as_matrix()

    @property
    def forward(self) -> np.ndarray:
        return self.rotation()[:, 2]


@dataclass(frozen=True)
class ViewSpace:
    center: np.ndarray
    radius: float
    views: tuple
    reachable: np.ndarray = field(default=None)

    def __post_init__(self):
        if not self.radius > 0:
            raise ValueError("view-space radius must be positive")
        object.__setattr__(self, "center", np.asarray(self.center, dtype=np.float64))
        object.__setattr__(self, "views", tuple(self.views))
        if [v.id for v in self.views] != list(range(len(self.views))):
            raise ValueError("view ids must be dense 0..n-1")
        reach = np.ones(len(self.views), dtype=bool) if self.reachable is None else np.asarray(self.reachable, dtype=bool)
        if reach.shape != (len(self.views),):
            raise ValueError("reachability flags do not match view count")
        object.__setattr__(self, "reachable", reach)

    def __len__(self):
        return len(self.views)

    @property
    def positions(self) -> np.ndarray:
        return np.array([v.position for v in self.views]).reshape(-1, 3)

    @property
    def candidate_ids(self) -> np.ndarray:
        return np.flatnonzero(self.reachable)

    def to_dict(self):
        return {
            "center": self.center.tolist(),
            "radius": self.radius,
            "views": [{"id": v.id, "position": v.position.tolist(), "quaternion": v.quaternion.tolist(),
                       "reachable": bool(self.reachable[v.id])} for v in self.views],
        }

    @classmethod
    def from_dict(cls, d):
        views = [View(int(v["id"]), np.asarray(v["position"], dtype=np.float64),
                      np.asarray(v["quaternion"], dtype=np.float64)) for v in d["views"]]
        reach = [bool(v.get("reachable", True)) for v in d["views"]]
        return cls(np.asarray(d["center"], dtype=np.float64), float(d["radius"]), views, np.array(reach, dtype=bool))

    def save(self, path):
        Path(path).write_text(json.dumps(self.to_dict(), indent=1))

    @classmethod
    def load(cls, path):
        return cls.from_dict(json.loads(Path(path).read_text()))


def look_at_quaternion(position, center, up=WORLD_UP) -> np.ndarray:
    """Camera orientation with +z toward ``center`` and image-up along projected ``up``."""
    position, center, up = (np.asarray(x, dtype=np.float64) for x in (position, center, up))
    z = center - position
    z /= np.linalg.norm(z)
    up_proj = up - (up @ z) * z
    if np.linalg.norm(up_proj) < 1e-9:
        # looking along up: fix roll with the world axis least aligned with it
        alt = np.eye(3)[int(np.argmin(np.abs(up)))]
        up_proj = alt - (alt @ z) * z
    y = -up_proj / np.linalg.norm(up_proj)
    x = np.cross(y, z)
    q = Rotation.from_matrix(np.stack([x, y, z], axis=1)).as_quat()
    return -q if q[3] < 0 else q


def _frame(up):
    up = np.asarray(up, dtype=np.float64)
    up = up / np.linalg.norm(up)
    alt = np.eye(3)[int(np.argmin(np.abs(up)))]
    e1 = np.cross(up, alt)
    e1 /= np.linalg.norm(e1)
    e2 = np.cross(up, e1)
    return np.stack([e1, e2, up], axis=1)


def fibonacci_hemisphere(n: int) -> np.ndarray:
    """Unit vectors on the z >= 0 hemisphere; the first one is the pole."""
    i = np.arange(n, dtype=np.float64)
    z = 1.0 - i / n
    r = np.sqrt(np.maximum(1.0 - z * z, 0.0))
    phi = i * GOLDEN_ANGLE
    return np.stack([r * np.cos(phi), r * np.sin(phi), z], axis=1)


def min_separation(units) -> float:
    """Minimum pairwise chord distance."""
    u = np.asarray(units, dtype=np.float64)
    if len(u) < 2:
        return math.inf
    d = np.linalg.norm(u[:, None, :] - u[None, :, :], axis=-1)
    np.fill_diagonal(d, np.inf)
    return float(d.min())


def tammes_hemisphere(n: int, iterations: int = 1000, power: float = 8.0, step: float = 0.05,
                      decay: float | None = None) -> np.ndarray:
    """Spread ``n`` unit vectors over the upper hemisphere by tangent-plane repulsion.

    Returns the configuration with the largest minimum separation seen,
    starting from the Fibonacci initialization.
    """
    pts = fibonacci_hemisphere(n)
    if n < 2 or iterations <= 0:
        return pts
    if decay is None:
        decay = 0.01 ** (1.0 / iterations)
    best, best_sep = pts.copy(), -1.0
    spacing = math.sqrt(2.0 * math.pi / n)
    lr = step * spacing
    eye = np.eye(n, dtype=bool)
    for _ in range(iterations + 1):
        diff = pts[:, None, :] - pts[None, :, :]
        dist = np.sqrt(np.einsum("ijk,ijk->ij", diff, diff))
        dist[eye] = np.inf
        sep = float(dist.min())
        if sep > best_sep:
            best, best_sep = pts.copy(), sep
        w = (spacing / dist) ** (power + 1) / dist
        force = np.einsum("ij,ijk->ik", w, diff)
        force -= np.einsum("ik,ik->i", force, pts)[:, None] * pts
        fn = np.linalg.norm(force, axis=1, keepdims=True)
        move = np.where(fn > 0, force / np.maximum(fn, 1e-300), 0.0) * np.minimum(fn, 1.0)
        pts = pts + lr * move
        pts[:, 2] = np.maximum(pts[:, 2], 0.0)
        pts /= np.linalg.norm(pts, axis=1, keepdims=True)
        lr *= decay
    return best


def generate_view_space(center, radius: float, n: int, up=WORLD_UP, iterations: int = 1000) -> ViewSpace:
    if n < 1:
        raise ValueError("n must be at least 1")
    if not radius > 0:
        raise ValueError("radius must be positive")
    center = np.asarray(center, dtype=np.float64)
    units = tammes_hemisphere(n, iterations) @ _frame(up).T
    views = []
    for i, u in enumerate(units):
        pos = center + radius * u
        views.append(View(i, pos, look_at_quaternion(pos, center, up)))
    return ViewSpace(center, float(radius), views)


def place_view_space(carving, n: int = 144, iterations: int = 1000, up=WORLD_UP) -> ViewSpace:
    """View space centered on the carved object with radius three times its size."""
    if not carving.size > 0:
        raise ValueError("carved object size must be positive")
    return generate_view_space(carving.centroid, 3.0 * carving.size, n, up, iterations)


def apply_reachability(space: ViewSpace, mask) -> ViewSpace:
    mask = np.asarray(mask, dtype=bool).reshape(-1)
    if len(mask) != len(space):
        raise ValueError(f"reachability mask has {len(mask)} entries for {len(space)} views")
    return ViewSpace(space.center, space.radius, space.views, mask)


def read_reachability(path) -> np.ndarray:
    doc = json.loads(Path(path).read_text())
    if isinstance(doc, dict):
        doc = doc["reachable"]
    return np.asarray(doc, dtype=bool)
