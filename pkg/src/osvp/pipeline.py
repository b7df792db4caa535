"""End-to-end planning: localization, view space, visibility, complexity, covering, path."""

from __future__ import annotations

import dataclasses
import json
import logging
import time
from contextlib import contextmanager
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import carving as carving_mod
from . import geometry, planner
from .complexity import complexity_field
from .pathing import shortest_hamiltonian_path
from .viewspace import WORLD_UP, apply_reachability, generate_view_space, place_view_space, read_reachability
from .visibility import compute_visibility

log = logging.getLogger(__name__)


class StageError(RuntimeError):
    """Pipeline failure tagged with the stage that raised it."""

    def __init__(self, stage, message, exit_code=2):
        super().__init__(f"[{stage}] {message}")
        self.stage = stage
        self.exit_code = exit_code


@dataclass
class PipelineConfig:
    alpha: int = 6
    beta: str | float = "auto"
    beta_step: float = 0.1
    view_count: int = 144
    grid_dims: tuple = (50, 50, 50)
    fov_deg: float = 60.0
    backface: bool = True
    occlusion_margin: int = 1
    k_neighbors: int = 10
    sample_count: int = 20000
    seed: int = 0
    planner: str = "setcover"
    coverage_fraction: float = 0.95
    exclusion: str = "per_point"
    time_limit: float | None = 600.0
    repulsion_iterations: int = 1000
    up: tuple = WORLD_UP
    center: tuple | None = None
    size: float | None = None
    carving_dims: tuple = (50, 50, 50)
    workspace: tuple | None = None
    start_view: int | None = None

    def __post_init__(self):
        self.grid_dims = _triple(self.grid_dims, int)
        self.carving_dims = _triple(self.carving_dims, int)
        self.up = _triple(self.up, float)
        if self.center is not None:
            self.center = _triple(self.center, float)
        if self.workspace is not None:
            ws = tuple(float(x) for x in np.asarray(self.workspace, dtype=np.float64).reshape(-1))
            if len(ws) != 6:
                raise ValueError("workspace needs six numbers: x0,y0,z0,x1,y1,z1")
            self.workspace = ws
        if isinstance(self.beta, str) and self.beta != "auto":
            self.beta = float(self.beta)
        if int(self.alpha) != self.alpha or self.alpha < 1:
            raise ValueError("alpha must be a positive integer")
        self.alpha = int(self.alpha)
        if self.planner not in ("setcover", "uniform"):
            raise ValueError(f"unknown planner {self.planner!r}")
        if self.view_count < 1:
            raise ValueError("view_count must be positive")

    def to_dict(self):
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, d):
        if "config" in d and isinstance(d["config"], dict):
            d = d["config"]  # accept a run manifest
        names = {f.name for f in dataclasses.fields(cls)}
        unknown = set(d) - names
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        return cls(**d)


def _triple(x, typ):
    if isinstance(x, (int, float)):
        return (typ(x),) * 3
    t = tuple(typ(v) for v in x)
    if len(t) != 3:
        raise ValueError(f"expected three values, got {x!r}")
    return t


@dataclass
class PipelineInputs:
    mesh: str
    reachability: str | None = None
    masks: list = field(default_factory=list)
    cameras: str | None = None

    def to_dict(self):
        return dataclasses.asdict(self)


class _Timer:
    def __init__(self):
        self.times = {}

    @contextmanager
    def stage(self, name, exit_code=2):
        t0 = time.perf_counter()
        try:
            yield
        except StageError:
            raise
        except planner.PlanningError as exc:
            raise StageError(name, str(exc), 1) from exc
        except (OSError, ValueError, RuntimeError) as exc:
            raise StageError(name, str(exc), exit_code) from exc
        finally:
            self.times[name] = self.times.get(name, 0.0) + time.perf_counter() - t0


def prepare_surface(mesh, cfg: PipelineConfig):
    """Sample, voxelize and re-estimate normals (PCA oriented by the averaged face normals)."""
    pts = geometry.sample_surface(mesh, cfg.sample_count, cfg.seed)
    surf = geometry.voxelize(pts, cfg.grid_dims)
    if len(surf) > cfg.k_neighbors:
        surf = surf.with_normals(geometry.estimate_normals(surf.positions, cfg.k_neighbors, reference=surf.normals))
    return surf


def plan_views(matrix, field, space, cfg: PipelineConfig):
    """Run the configured planner; returns (solution, beta_star or None, instance or None)."""
    if cfg.planner == "uniform":
        sol = planner.uniform_planner(matrix, field, space, cfg.alpha, cfg.coverage_fraction, cfg.exclusion)
        if sol.status == planner.INFEASIBLE:
            raise planner.PlanningError("uniform planner never reached the coverage fraction")
        return sol, None, None
    if cfg.beta == "auto":
        beta, sol = planner.max_feasible_beta(matrix, field, space, cfg.alpha, cfg.beta_step, cfg.time_limit,
                                              cfg.exclusion)
    else:
        beta = float(cfg.beta)
        sol = planner.solve_set_cover(planner.build_instance(matrix, field, space, cfg.alpha, beta, cfg.exclusion),
                                      cfg.time_limit)
    if sol.status in (planner.INFEASIBLE, planner.UNKNOWN):
        raise planner.PlanningError(f"set covering is {sol.status} at beta={beta}")
    inst = planner.build_instance(matrix, field, space, cfg.alpha, beta, cfg.exclusion)
    problems = planner.check_solution(inst, sol.selected)
    if problems:
        raise planner.PlanningError("solution failed the constraint check: " + "; ".join(problems))
    return sol, beta, inst


def order_views(space, selected, start_view=None):
    ids = sorted(int(v) for v in selected)
    start = None
    if start_view is not None:
        if start_view not in ids:
            ids = [int(start_view)] + ids
        start = ids.index(int(start_view))
    return shortest_hamiltonian_path(space.positions[ids], start, ids)


def plan_document(space, sol, path, cfg: PipelineConfig, beta):
    views = [{"id": int(v), "position": space.views[v].position.tolist(),
              "quaternion": space.views[v].quaternion.tolist()} for v in sorted(sol.selected)]
    return {
        "views": views,
        "order": list(path.ordered_view_ids),
        "movement_cost": path.movement_cost,
        "path_optimal": path.optimal,
        "alpha": cfg.alpha,
        "beta_star": beta,
        "objective": sol.objective,
        "status": sol.status,
        "planner": cfg.planner,
    }


def run_pipeline(cfg: PipelineConfig, inputs: PipelineInputs, out_dir=None):
    """Execute every stage and, with ``out_dir``, write plan.json, debug PLYs and manifest.json."""
    timer = _Timer()
    with timer.stage("geometry"):
        mesh = geometry.load_mesh(inputs.mesh)

    carve_info = None
    with timer.stage("carving"):
        if inputs.masks:
            if inputs.cameras is None or cfg.workspace is None:
                raise ValueError("carving needs cameras and a workspace box")
            cams = carving_mod.read_cameras(inputs.cameras)
            if len(cams) != len(inputs.masks):
                raise ValueError(f"{len(inputs.masks)} masks but {len(cams)} cameras")
            sils = [carving_mod.Silhouette(carving_mod.read_mask(m), c) for m, c in zip(inputs.masks, cams)]
            ws = np.asarray(cfg.workspace).reshape(2, 3)
            carved = carving_mod.carve(sils, (ws[0], ws[1]), cfg.carving_dims)
            carve_info = carved.to_dict()
        elif cfg.center is None or cfg.size is None:
            raise ValueError("without carving inputs an explicit center and size must be configured")

    with timer.stage("viewspace"):
        if carve_info is not None:
            space = place_view_space(carved, cfg.view_count, cfg.repulsion_iterations, cfg.up)
        else:
            if not cfg.size > 0:
                raise ValueError("object size must be positive")
            space = generate_view_space(cfg.center, 3.0 * cfg.size, cfg.view_count, cfg.up, cfg.repulsion_iterations)
        if inputs.reachability:
            space = apply_reachability(space, read_reachability(inputs.reachability))
        if len(space.candidate_ids) == 0:
            raise planner.PlanningError("no candidate views: every view is unreachable")

    with timer.stage("surface"):
        surface = prepare_surface(mesh, cfg)
    with timer.stage("visibility"):
        matrix = compute_visibility(surface, space, cfg.fov_deg, cfg.backface, cfg.occlusion_margin)
    with timer.stage("complexity"):
        field = complexity_field(surface, cfg.k_neighbors)
    with timer.stage("planning"):
        sol, beta, _ = plan_views(matrix, field, space, cfg)
        if not sol.selected:
            raise planner.PlanningError("planner selected no views")
    with timer.stage("path"):
        path = order_views(space, sol.selected, cfg.start_view)

    doc = plan_document(space, sol, path, cfg, beta)
    manifest = {
        "config": cfg.to_dict(),
        "inputs": inputs.to_dict(),
        "stage_seconds": timer.times,
        "solver": sol.to_dict(),
        "carving": carve_info,
        "surface_points": len(surface),
        "candidate_views": int(len(space.candidate_ids)),
        "finished_at": time.strftime("%Y-%m-%dT%H:%M:%S"),
    }
    if out_dir is not None:
        out = Path(out_dir)
        with timer.stage("output"):
            out.mkdir(parents=True, exist_ok=True)
            (out / "plan.json").write_text(json.dumps(doc, indent=1) + "\n")
            space.save(out / "viewspace.json")
            gray = np.repeat(field.normalized[:, None], 3, axis=1)
            geometry.write_ply(out / "surface_complexity.ply", surface.positions, colors=gray,
                               normals=surface.normals, scalars=field.raw_entropy)
            pos = path.positions
            geometry.write_ply(out / "views_path.ply", pos, edges=[(i, i + 1) for i in range(len(pos) - 1)])
            manifest["stage_seconds"] = timer.times
            (out / "manifest.json").write_text(json.dumps(manifest, indent=1) + "\n")
    return doc, manifest
