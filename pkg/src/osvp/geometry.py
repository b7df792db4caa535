"""Mesh ingestion, surface sampling, voxelization, normals and bounding spheres."""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.spatial import ConvexHull, QhullError, cKDTree


class MeshError(ValueError):
    """Raised for unreadable or invalid mesh data."""


@dataclass(frozen=True)
class TriangleMesh:
    vertices: np.ndarray
    faces: np.ndarray
    colors: np.ndarray | None = None

    def __post_init__(self):
        v = np.ascontiguousarray(self.vertices, dtype=np.float64).reshape(-1, 3)
        f = np.ascontiguousarray(self.faces, dtype=np.int64).reshape(-1, 3)
        if len(f) == 0:
            raise MeshError("mesh has zero faces")
        if f.min() < 0 or f.max() >= len(v):
            raise MeshError(f"face index out of range (vertex count {len(v)})")
        if np.any((f[:, 0] == f[:, 1]) | (f[:, 1] == f[:, 2]) | (f[:, 0] == f[:, 2])):
            raise MeshError("face with repeated vertex index")
        if not np.all(np.isfinite(v)):
            raise MeshError("non-finite vertex coordinate")
        c = self.colors
        if c is not None:
            c = np.ascontiguousarray(c, dtype=np.float64).reshape(-1, 3)
            if len(c) != len(v):
                raise MeshError("color count does not match vertex count")
        object.__setattr__(self, "vertices", v)
        object.__setattr__(self, "faces", f)
        object.__setattr__(self, "colors", c)

    def face_areas(self) -> np.ndarray:
        a, b, c = (self.vertices[self.faces[:, i]] for i in range(3))
        return 0.5 * np.linalg.norm(np.cross(b - a, c - a), axis=1)

    def bounds(self) -> tuple[np.ndarray, np.ndarray]:
        used = self.vertices[np.unique(self.faces)]
        return used.min(axis=0), used.max(axis=0)


@dataclass(frozen=True)
class SurfacePointSet:
    positions: np.ndarray
    normals: np.ndarray
    colors: np.ndarray

    def __len__(self):
        return len(self.positions)


@dataclass(frozen=True)
class VoxelGrid:
    origin: np.ndarray
    voxel_size: float
    dims: tuple[int, int, int]
    occupied: frozenset = field(default_factory=frozenset)

    def __post_init__(self):
        if not self.voxel_size > 0:
            raise ValueError("voxel_size must be positive")
        dims = tuple(int(d) for d in self.dims)
        if len(dims) != 3 or min(dims) <= 0:
            raise ValueError("dims must be three positive integers")
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "origin", np.asarray(self.origin, dtype=np.float64))
        occ = frozenset(tuple(int(i) for i in k) for k in self.occupied)
        for k in occ:
            if not all(0 <= k[i] < dims[i] for i in range(3)):
                raise ValueError(f"occupied key {k} outside dims {dims}")
        object.__setattr__(self, "occupied", occ)

    @property
    def upper(self) -> np.ndarray:
        return self.origin + self.voxel_size * np.asarray(self.dims, dtype=np.float64)

    def centers(self, keys) -> np.ndarray:
        keys = np.asarray(keys, dtype=np.float64).reshape(-1, 3)
        return self.origin + (keys + 0.5) * self.voxel_size

    def keys_of(self, points) -> np.ndarray:
        """Integer voxel keys of world points (boundary points on the upper face snap inward)."""
        g = (np.asarray(points, dtype=np.float64).reshape(-1, 3) - self.origin) / self.voxel_size
        k = np.floor(g).astype(np.int64)
        upper = np.asarray(self.dims) - 1
        on_face = (k == np.asarray(self.dims)) & np.isclose(g, np.asarray(self.dims))
        k[on_face] = np.broadcast_to(upper, k.shape)[on_face]
        return k

    def occupancy(self) -> np.ndarray:
        """Dense uint8 occupancy array indexed [x, y, z]."""
        occ = np.zeros(self.dims, dtype=np.uint8)
        if self.occupied:
            k = np.array(sorted(self.occupied), dtype=np.int64)
            occ[k[:, 0], k[:, 1], k[:, 2]] = 1
        return occ


@dataclass(frozen=True)
class VoxelizedSurface:
    grid: VoxelGrid
    keys: np.ndarray
    positions: np.ndarray
    normals: np.ndarray
    colors: np.ndarray

    def __len__(self):
        return len(self.keys)

    def with_normals(self, normals) -> "VoxelizedSurface":
        return VoxelizedSurface(self.grid, self.keys, self.positions, np.asarray(normals, dtype=np.float64), self.colors)


# ---------------------------------------------------------------- mesh IO

def load_mesh(path) -> TriangleMesh:
    path = Path(path)
    try:
        data = path.read_bytes()
    except OSError as exc:
        raise MeshError(f"cannot read mesh {path}: {exc}") from exc
    suffix = path.suffix.lower()
    if suffix == ".obj":
        return _parse_obj(data.decode("utf-8", errors="replace"))
    if suffix == ".ply":
        return _parse_ply(data)
    raise MeshError(f"unsupported mesh format {suffix!r} (expected .obj or .ply)")


def _parse_obj(text: str) -> TriangleMesh:
    verts, colors, faces = [], [], []
    for lineno, raw in enumerate(text.splitlines(), 1):
        parts = raw.split("#", 1)[0].split()
        if not parts:
            continue
        try:
            if parts[0] == "v":
                vals = [float(x) for x in parts[1:]]
                if len(vals) not in (3, 4, 6, 7):
                    raise ValueError
                verts.append(vals[:3])
                if len(vals) >= 6:
                    colors.append(vals[-3:])
            elif parts[0] == "f":
                idx = []
                for tok in parts[1:]:
                    i = int(tok.split("/")[0])
                    idx.append(i - 1 if i > 0 else len(verts) + i)
                if len(idx) < 3:
                    raise ValueError
                for j in range(1, len(idx) - 1):
                    faces.append((idx[0], idx[j], idx[j + 1]))
        except ValueError:
            raise MeshError(f"malformed OBJ record at line {lineno}: {raw.strip()!r}") from None
    if colors and len(colors) != len(verts):
        raise MeshError("OBJ vertex colors present on only some vertices")
    return TriangleMesh(np.array(verts, dtype=np.float64).reshape(-1, 3),
                        np.array(faces, dtype=np.int64).reshape(-1, 3),
                        np.array(colors) if colors else None)


_PLY_TYPES = {
    "char": "b", "int8": "b", "uchar": "B", "uint8": "B",
    "short": "h", "int16": "h", "ushort": "H", "uint16": "H",
    "int": "i", "int32": "i", "uint": "I", "uint32": "I",
    "float": "f", "float32": "f", "double": "d", "float64": "d",
}


def _parse_ply(data: bytes) -> TriangleMesh:
    end = data.find(b"end_header")
    if not data.startswith(b"ply") or end < 0:
        raise MeshError("not a PLY file")
    body_start = data.index(b"\n", end) + 1
    header = data[:end].decode("ascii", errors="replace").splitlines()
    fmt = None
    elements = []  # (name, count, [(prop, type, list_count_type or None)])
    for line in header[1:]:
        tok = line.split()
        if not tok or tok[0] in ("comment", "obj_info"):
            continue
        if tok[0] == "format":
            fmt = tok[1]
        elif tok[0] == "element":
            elements.append((tok[1], int(tok[2]), []))
        elif tok[0] == "property":
            if not elements:
                raise MeshError("PLY property before element")
            if tok[1] == "list":
                elements[-1][2].append((tok[4], _ply_type(tok[3]), _ply_type(tok[2])))
            else:
                elements[-1][2].append((tok[2], _ply_type(tok[1]), None))
    if fmt not in ("ascii", "binary_little_endian"):
        raise MeshError(f"unsupported PLY format {fmt!r}")

    tables = {}
    if fmt == "ascii":
        tokens = data[body_start:].decode("ascii", errors="replace").split()
        pos = 0
        for name, count, props in elements:
            rows = []
            try:
                for _ in range(count):
                    row = []
                    for _, typ, ltyp in props:
                        if ltyp is None:
                            row.append(_ply_cast(tokens[pos], typ))
                            pos += 1
                        else:
                            n = int(tokens[pos])
                            row.append([_ply_cast(t, typ) for t in tokens[pos + 1:pos + 1 + n]])
                            if len(row[-1]) != n:
                                raise IndexError
                            pos += 1 + n
                    rows.append(row)
            except (IndexError, ValueError):
                raise MeshError(f"malformed PLY record in element {name!r}") from None
            tables[name] = (props, rows)
    else:
        pos = body_start
        for name, count, props in elements:
            if all(ltyp is None for _, _, ltyp in props):
                dt = np.dtype([(p, "<" + t) for p, t, _ in props])
                nbytes = dt.itemsize * count
                if pos + nbytes > len(data):
                    raise MeshError(f"truncated PLY element {name!r}")
                arr = np.frombuffer(data, dtype=dt, count=count, offset=pos)
                pos += nbytes
                rows = [list(r) for r in arr.tolist()] if count else []
            else:
                rows = []
                try:
                    for _ in range(count):
                        row = []
                        for _, typ, ltyp in props:
                            if ltyp is None:
                                (val,), pos = struct.unpack_from("<" + typ, data, pos), pos + struct.calcsize(typ)
                                row.append(val)
                            else:
                                (n,) = struct.unpack_from("<" + ltyp, data, pos)
                                pos += struct.calcsize(ltyp)
                                vals = struct.unpack_from(f"<{n}{typ}", data, pos)
                                pos += struct.calcsize(typ) * n
                                row.append(list(vals))
                        rows.append(row)
                except struct.error:
                    raise MeshError(f"truncated PLY element {name!r}") from None
            tables[name] = (props, rows)

    if "vertex" not in tables:
        raise MeshError("PLY has no vertex element")
    vprops, vrows = tables["vertex"]
    names = [p for p, _, _ in vprops]
    try:
        xyz = np.array([[r[names.index(a)] for a in "xyz"] for r in vrows], dtype=np.float64).reshape(-1, 3)
    except ValueError:
        raise MeshError("PLY vertex element lacks x/y/z") from None
    colors = None
    for cn in (("red", "green", "blue"), ("r", "g", "b"), ("diffuse_red", "diffuse_green", "diffuse_blue")):
        if all(c in names for c in cn):
            ctype = vprops[names.index(cn[0])][1]
            colors = np.array([[r[names.index(c)] for c in cn] for r in vrows], dtype=np.float64).reshape(-1, 3)
            if ctype in "bBhHiI":
                colors = colors / 255.0
            break
    faces = []
    if "face" in tables:
        fprops, frows = tables["face"]
        fi = next((i for i, (p, _, l) in enumerate(fprops) if l is not None), None)
        if fi is None:
            raise MeshError("PLY face element has no index list")
        for r in frows:
            idx = [int(i) for i in r[fi]]
            if len(idx) < 3:
                raise MeshError("PLY face with fewer than 3 indices")
            for j in range(1, len(idx) - 1):
                faces.append((idx[0], idx[j], idx[j + 1]))
    return TriangleMesh(xyz, np.array(faces, dtype=np.int64).reshape(-1, 3), colors)


def _ply_type(name):
    try:
        return _PLY_TYPES[name]
    except KeyError:
        raise MeshError(f"unknown PLY type {name!r}") from None


def _ply_cast(tok, typ):
    return float(tok) if typ in "fd" else int(tok)


def write_obj(path, mesh: TriangleMesh) -> None:
    """Write an OBJ, with per-vertex colors appended to ``v`` records when present."""
    rows = mesh.vertices if mesh.colors is None else np.hstack([mesh.vertices, mesh.colors])
    lines = ["v " + " ".join(repr(float(x)) for x in row) for row in rows]
    lines += [f"f {a + 1} {b + 1} {c + 1}" for a, b, c in mesh.faces]
    Path(path).write_text("\n".join(lines) + "\n")


def write_ply(path, positions, colors=None, normals=None, edges=None, faces=None, scalars=None) -> None:
    """Write a binary little-endian PLY point set, optionally with polyline edges or faces.

    ``colors`` are RGB in [0, 1] and stored as uchar; ``scalars`` adds a float
    ``quality`` property per vertex.
    """
    positions = np.asarray(positions, dtype=np.float64).reshape(-1, 3)
    n = len(positions)
    fields = [("x", "<f4"), ("y", "<f4"), ("z", "<f4")]
    if normals is not None:
        fields += [("nx", "<f4"), ("ny", "<f4"), ("nz", "<f4")]
    if colors is not None:
        fields += [("red", "u1"), ("green", "u1"), ("blue", "u1")]
    if scalars is not None:
        fields += [("quality", "<f4")]
    arr = np.zeros(n, dtype=fields)
    for i, a in enumerate("xyz"):
        arr[a] = positions[:, i]
    if normals is not None:
        nrm = np.asarray(normals, dtype=np.float64).reshape(-1, 3)
        for i, a in enumerate(("nx", "ny", "nz")):
            arr[a] = nrm[:, i]
    if colors is not None:
        col = np.clip(np.rint(np.asarray(colors, dtype=np.float64).reshape(-1, 3) * 255.0), 0, 255)
        for i, a in enumerate(("red", "green", "blue")):
            arr[a] = col[:, i]
    if scalars is not None:
        arr["quality"] = np.asarray(scalars, dtype=np.float64)
    typ = {"<f4": "float", "u1": "uchar"}
    head = ["ply", "format binary_little_endian 1.0", f"element vertex {n}"]
    head += [f"property {typ[t]} {name}" for name, t in fields]
    tail = b""
    if edges is not None:
        e = np.asarray(edges, dtype="<i4").reshape(-1, 2)
        head += [f"element edge {len(e)}", "property int vertex1", "property int vertex2"]
        tail += e.tobytes()
    if faces is not None:
        f = np.asarray(faces, dtype="<i4").reshape(-1, 3)
        head += [f"element face {len(f)}", "property list uchar int vertex_indices"]
        rec = np.zeros(len(f), dtype=[("n", "u1"), ("i", "<i4", (3,))])
        rec["n"] = 3
        rec["i"] = f
        tail += rec.tobytes()
    head.append("end_header")
    Path(path).write_bytes(("\n".join(head) + "\n").encode("ascii") + arr.tobytes() + tail)


# ---------------------------------------------------------------- primitives

def uv_sphere(radius=1.0, n_lat=32, n_lon=64, center=(0.0, 0.0, 0.0), color_fn=None) -> TriangleMesh:
    """Closed UV sphere; ``color_fn(unit_dirs) -> (n, 3)`` sets per-vertex colors."""
    center = np.asarray(center, dtype=np.float64)
    theta = np.linspace(0.0, math.pi, n_lat + 1)[1:-1]
    phi = np.linspace(0.0, 2 * math.pi, n_lon, endpoint=False)
    t, p = np.meshgrid(theta, phi, indexing="ij")
    ring = np.stack([np.sin(t) * np.cos(p), np.sin(t) * np.sin(p), np.cos(t)], axis=-1).reshape(-1, 3)
    dirs = np.vstack([[0, 0, 1], ring, [0, 0, -1]])
    faces = []
    top, bottom = 0, len(dirs) - 1

    def idx(i, j):
        return 1 + i * n_lon + (j % n_lon)

    for j in range(n_lon):
        faces.append((top, idx(0, j), idx(0, j + 1)))
        faces.append((bottom, idx(n_lat - 2, j + 1), idx(n_lat - 2, j)))
    for i in range(n_lat - 2):
        for j in range(n_lon):
            a, b, c, d = idx(i, j), idx(i, j + 1), idx(i + 1, j), idx(i + 1, j + 1)
            faces.append((a, c, b))
            faces.append((b, c, d))
    colors = None if color_fn is None else np.asarray(color_fn(dirs), dtype=np.float64)
    return TriangleMesh(center + radius * dirs, np.array(faces), colors)


# ---------------------------------------------------------------- sampling

def sample_surface(mesh: TriangleMesh, n: int, seed: int = 0) -> SurfacePointSet:
    """Area-weighted uniform sampling; normals are face normals."""
    if n <= 0:
        raise ValueError("n must be positive")
    areas = mesh.face_areas()
    valid = np.flatnonzero(areas > 0)
    if len(valid) == 0:
        raise MeshError("all triangles are degenerate (zero area)")
    rng = np.random.default_rng(seed)
    w = areas[valid] / areas[valid].sum()
    tri = valid[rng.choice(len(valid), size=n, p=w)]
    u = rng.random(n)
    v = rng.random(n)
    flip = u + v > 1.0
    u[flip], v[flip] = 1.0 - u[flip], 1.0 - v[flip]
    f = mesh.faces[tri]
    a, b, c = mesh.vertices[f[:, 0]], mesh.vertices[f[:, 1]], mesh.vertices[f[:, 2]]
    pos = a + u[:, None] * (b - a) + v[:, None] * (c - a)
    nrm = np.cross(b - a, c - a)
    nrm /= np.linalg.norm(nrm, axis=1, keepdims=True)
    if mesh.colors is None:
        col = np.ones((n, 3))
    else:
        ca, cb, cc = mesh.colors[f[:, 0]], mesh.colors[f[:, 1]], mesh.colors[f[:, 2]]
        col = (1.0 - u - v)[:, None] * ca + u[:, None] * cb + v[:, None] * cc
    return SurfacePointSet(pos, nrm, col)


# ---------------------------------------------------------------- voxelization

def padded_bounds(points, pad=0.05) -> tuple[np.ndarray, np.ndarray]:
    """Axis-aligned bounding box inflated by ``pad`` of the largest extent per side."""
    pts = np.asarray(points, dtype=np.float64).reshape(-1, 3)
    lo, hi = pts.min(axis=0), pts.max(axis=0)
    margin = pad * max(float((hi - lo).max()), 1e-9)
    return lo - margin, hi + margin


def make_grid(dims, bounds) -> VoxelGrid:
    """Cubic-voxel grid of ``dims`` centered on ``bounds`` and covering it."""
    lo, hi = (np.asarray(b, dtype=np.float64) for b in bounds)
    dims = tuple(int(d) for d in dims)
    if len(dims) != 3 or min(dims) <= 0:
        raise ValueError("dims must be three positive integers")
    if np.any(hi < lo):
        raise ValueError("empty bounds")
    size = float(np.max((hi - lo) / np.asarray(dims)))
    if size <= 0:
        size = 1e-6
    origin = 0.5 * (lo + hi) - 0.5 * size * np.asarray(dims)
    return VoxelGrid(origin, size, dims)


def voxelize(points: SurfacePointSet, dims=(50, 50, 50), bounds=None) -> VoxelizedSurface:
    pos = np.asarray(points.positions, dtype=np.float64)
    if len(pos) == 0:
        raise ValueError("cannot voxelize an empty point set")
    if bounds is None:
        bounds = padded_bounds(pos)
    lo, hi = (np.asarray(b, dtype=np.float64) for b in bounds)
    tol = 1e-9 * max(1.0, float(np.abs(np.concatenate([lo, hi])).max()))
    if np.any(pos < lo - tol) or np.any(pos > hi + tol):
        raise ValueError("point outside voxelization bounds")
    grid = make_grid(dims, (lo, hi))
    keys = np.clip(grid.keys_of(pos), 0, np.asarray(grid.dims) - 1)
    nx, ny, nz = grid.dims
    lin = (keys[:, 0] * ny + keys[:, 1]) * nz + keys[:, 2]
    uniq, inv = np.unique(lin, return_inverse=True)
    m = len(uniq)
    counts = np.bincount(inv, minlength=m).astype(np.float64)
    col = np.stack([np.bincount(inv, weights=points.colors[:, i], minlength=m) for i in range(3)], axis=1)
    col /= counts[:, None]
    nsum = np.stack([np.bincount(inv, weights=points.normals[:, i], minlength=m) for i in range(3)], axis=1)
    norm = np.linalg.norm(nsum, axis=1)
    degenerate = norm < 1e-12
    if np.any(degenerate):
        # opposing normals cancelled: fall back to the first member's normal
        first = np.full(m, -1)
        first[inv[::-1]] = np.arange(len(inv))[::-1]
        nsum[degenerate] = points.normals[first[degenerate]]
        norm[degenerate] = np.linalg.norm(nsum[degenerate], axis=1)
    nrm = nsum / norm[:, None]
    ukeys = np.stack([uniq // (ny * nz), (uniq // nz) % ny, uniq % nz], axis=1).astype(np.int64)
    grid = VoxelGrid(grid.origin, grid.voxel_size, grid.dims, frozenset(map(tuple, ukeys.tolist())))
    return VoxelizedSurface(grid, ukeys, grid.centers(ukeys), nrm, col)


# ---------------------------------------------------------------- normals

def estimate_normals(points, k: int = 10, orientation_anchor=None, reference=None) -> np.ndarray:
    """k-NN PCA normals.

    Each normal is the smallest-eigenvalue direction of the covariance of the
    point and its ``k`` nearest neighbours. Signs point away from
    ``orientation_anchor``; when ``reference`` normals are given instead, signs
    agree with them.
    """
    pts = np.asarray(points, dtype=np.float64).reshape(-1, 3)
    if k < 3:
        raise ValueError("k must be at least 3")
    if len(pts) < k + 1:
        raise ValueError(f"need at least k+1={k + 1} points, got {len(pts)}")
    _, idx = cKDTree(pts).query(pts, k=k + 1)
    nb = pts[idx]
    centered = nb - nb.mean(axis=1, keepdims=True)
    cov = np.einsum("nki,nkj->nij", centered, centered)
    _, vecs = np.linalg.eigh(cov)
    nrm = vecs[:, :, 0]
    if reference is not None:
        s = np.einsum("ij,ij->i", nrm, np.asarray(reference, dtype=np.float64))
    else:
        anchor = np.zeros(3) if orientation_anchor is None else np.asarray(orientation_anchor, dtype=np.float64)
        s = np.einsum("ij,ij->i", nrm, pts - anchor)
    nrm = np.where((s < 0)[:, None], -nrm, nrm)
    return nrm / np.linalg.norm(nrm, axis=1, keepdims=True)


# ---------------------------------------------------------------- bounding sphere

def _circumsphere(support):
    """Smallest sphere with every point of ``support`` (1 to 4 points) on its boundary."""
    s = len(support)
    a = support[0]
    if s == 1:
        return a.copy(), 0.0
    if s == 2:
        c = 0.5 * (support[0] + support[1])
        return c, float(np.linalg.norm(support[1] - c))
    if s == 3:
        ab, ac = support[1] - a, support[2] - a
        n = np.cross(ab, ac)
        nn = float(n @ n)
        if nn < 1e-30:
            # collinear: the two extreme points span the sphere
            pairs = [(0, 1), (0, 2), (1, 2)]
            i, j = max(pairs, key=lambda p: np.linalg.norm(support[p[0]] - support[p[1]]))
            return _circumsphere([support[i], support[j]])
        off = (np.cross(n, ab) * (ac @ ac) + np.cross(ac, n) * (ab @ ab)) / (2.0 * nn)
        return a + off, float(np.linalg.norm(off))
    m = np.stack([support[1] - a, support[2] - a, support[3] - a])
    rhs = 0.5 * np.einsum("ij,ij->i", m, m)
    try:
        off = np.linalg.solve(m, rhs)
    except np.linalg.LinAlgError:
        off = np.linalg.lstsq(m, rhs, rcond=None)[0]
    return a + off, float(np.linalg.norm(off))


def _welzl(pts):
    def inside(p, c, r):
        return float(np.linalg.norm(p - c)) <= r * (1.0 + 1e-12) + 1e-12

    c, r = pts[0].copy(), 0.0
    for i in range(1, len(pts)):
        if inside(pts[i], c, r):
            continue
        c, r = pts[i].copy(), 0.0
        for j in range(i):
            if inside(pts[j], c, r):
                continue
            c, r = _circumsphere([pts[i], pts[j]])
            for k in range(j):
                if inside(pts[k], c, r):
                    continue
                c, r = _circumsphere([pts[i], pts[j], pts[k]])
                for m in range(k):
                    if inside(pts[m], c, r):
                        continue
                    c, r = _circumsphere([pts[i], pts[j], pts[k], pts[m]])
    return c, r


def min_bounding_sphere(points, seed: int = 0) -> tuple[np.ndarray, float]:
    """Exact minimum enclosing sphere via randomized incremental (Welzl) construction."""
    pts = np.asarray(points, dtype=np.float64).reshape(-1, 3)
    if len(pts) == 0:
        raise ValueError("min_bounding_sphere of an empty point set")
    pts = np.unique(pts, axis=0)
    if len(pts) > 64:
        try:
            pts = pts[ConvexHull(pts).vertices]
        except (QhullError, ValueError):
            pass  # flat or degenerate input; run on all points
    pts = pts[np.random.default_rng(seed).permutation(len(pts))]
    c, r = _welzl(pts)
    # absorb round-off so every input point is enclosed
    r = max(r, float(np.linalg.norm(np.asarray(points, dtype=np.float64).reshape(-1, 3) - c, axis=1).max()))
    return c, r
