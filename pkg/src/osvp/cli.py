"""Command-line interface.

Exit codes: 0 success, 1 infeasible planning, 2 IO or configuration error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import carving, geometry, metrics, planner
from .complexity import complexity_field
from .pathing import shortest_hamiltonian_path
from .pipeline import PipelineConfig, PipelineInputs, StageError, plan_views, prepare_surface, run_pipeline
from .viewspace import ViewSpace, apply_reachability, generate_view_space, read_reachability
from .visibility import compute_visibility

log = logging.getLogger("osvp")


def _floats(text, n=None):
    vals = [float(x) for x in text.replace(" ", "").split(",") if x]
    if n is not None and len(vals) != n:
        raise argparse.ArgumentTypeError(f"expected {n} comma-separated numbers, got {text!r}")
    return vals


def _vec3(text):
    return _floats(text, 3)


def _box(text):
    return _floats(text, 6)


def _dims(text):
    vals = [int(x) for x in text.split(",")]
    if len(vals) == 1:
        vals *= 3
    if len(vals) != 3:
        raise argparse.ArgumentTypeError("dims take one or three integers")
    return vals


def _emit(doc, out):
    text = json.dumps(doc, indent=1) + "\n"
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _add_planning_options(p):
    p.add_argument("--alpha", type=int)
    p.add_argument("--beta", help="'auto' or a fixed non-negative value")
    p.add_argument("--planner", choices=["setcover", "uniform"])
    p.add_argument("--fov", type=float, dest="fov_deg")
    p.add_argument("--no-backface", action="store_false", dest="backface", default=None)
    p.add_argument("--occlusion-margin", type=int)
    p.add_argument("--samples", type=int, dest="sample_count")
    p.add_argument("--dims", type=_dims, dest="grid_dims")
    p.add_argument("--k", type=int, dest="k_neighbors")
    p.add_argument("--seed", type=int)
    p.add_argument("--time-limit", type=float)
    p.add_argument("--coverage-fraction", type=float)
    p.add_argument("--config", help="JSON config or a previous run manifest")


_CONFIG_FLAGS = ("alpha", "beta", "planner", "fov_deg", "backface", "occlusion_margin", "sample_count", "grid_dims",
                 "k_neighbors", "seed", "time_limit", "coverage_fraction", "view_count", "center", "size",
                 "workspace", "carving_dims", "start_view", "repulsion_iterations")


def _config(args) -> PipelineConfig:
    base = {}
    if getattr(args, "config", None):
        base = json.loads(Path(args.config).read_text())
        if "config" in base:
            base = base["config"]
    for name in _CONFIG_FLAGS:
        val = getattr(args, name, None)
        if val is not None:
            base[name] = val
    return PipelineConfig.from_dict(base)


# ---------------------------------------------------------------- subcommands

def cmd_carve(args):
    cams = carving.read_cameras(args.cameras)
    if len(cams) != len(args.masks):
        raise ValueError(f"{len(args.masks)} masks but {len(cams)} cameras")
    sils = [carving.Silhouette(carving.read_mask(m), c) for m, c in zip(args.masks, cams)]
    ws = np.asarray(args.workspace).reshape(2, 3)
    res = carving.carve(sils, (ws[0], ws[1]), args.dims)
    _emit(res.to_dict(), args.output)


def cmd_viewspace(args):
    if args.carving:
        doc = json.loads(Path(args.carving).read_text())
        center, radius = doc["centroid"], 3.0 * float(doc["size"])
    else:
        if args.center is None or args.radius is None:
            raise ValueError("give --center and --radius, or --carving")
        center, radius = args.center, args.radius
    space = generate_view_space(center, radius, args.n, args.up, args.iterations)
    if args.reachability:
        space = apply_reachability(space, read_reachability(args.reachability))
    _emit(space.to_dict(), args.output)


def cmd_complexity(args):
    cfg = _config(args)
    surf = prepare_surface(geometry.load_mesh(args.mesh), cfg)
    field = complexity_field(surf, cfg.k_neighbors)
    if args.ply:
        gray = np.repeat(field.normalized[:, None], 3, axis=1)
        geometry.write_ply(args.ply, surf.positions, colors=gray, normals=surf.normals, scalars=field.raw_entropy)
    _emit({"points": len(surf), "raw_mean": float(field.raw_entropy.mean()),
           "raw_max": float(field.raw_entropy.max()), "normalized_mean": float(field.normalized.mean())},
          args.output)


def cmd_plan(args):
    cfg = _config(args)
    space = ViewSpace.load(args.viewspace)
    if args.reachability:
        space = apply_reachability(space, read_reachability(args.reachability))
    surf = prepare_surface(geometry.load_mesh(args.mesh), cfg)
    matrix = compute_visibility(surf, space, cfg.fov_deg, cfg.backface, cfg.occlusion_margin)
    field = complexity_field(surf, cfg.k_neighbors)
    sol, beta, inst = plan_views(matrix, field, space, cfg)
    doc = {
        "alpha": cfg.alpha, "beta_star": beta, "objective": sol.objective, "status": sol.status,
        "planner": cfg.planner, "selected": list(sol.selected),
        "views": [{"id": int(v), "position": space.views[v].position.tolist(),
                   "quaternion": space.views[v].quaternion.tolist()} for v in sol.selected],
    }
    if args.instance and inst is not None:
        Path(args.instance).write_text(json.dumps({**inst.to_dict(), **sol.to_dict()}) + "\n")
    _emit(doc, args.output)


def cmd_path(args):
    doc = json.loads(Path(args.plan).read_text())
    views = sorted(doc["views"], key=lambda v: v["id"])
    ids = [int(v["id"]) for v in views]
    pos = np.array([v["position"] for v in views], dtype=np.float64)
    start = None
    if args.start is not None:
        if args.start not in ids:
            raise ValueError(f"start view {args.start} is not in the plan")
        start = ids.index(args.start)
    path = shortest_hamiltonian_path(pos, start, ids)
    _emit(path.to_dict(), args.output)


def cmd_eval(args):
    a, b = geometry.load_mesh(args.mesh_a), geometry.load_mesh(args.mesh_b)
    _emit(metrics.evaluate_meshes(a, b, args.n_hd, args.n_cd, args.n_emd, args.seed), args.output)


def cmd_pipeline(args):
    cfg = _config(args)
    mesh = args.mesh
    inputs = PipelineInputs(mesh=mesh, reachability=args.reachability, masks=args.masks or [], cameras=args.cameras)
    if args.config and mesh is None:
        manifest = json.loads(Path(args.config).read_text())
        if "inputs" not in manifest:
            raise ValueError("no mesh given and the config is not a run manifest")
        inputs = PipelineInputs(**manifest["inputs"])
    if inputs.mesh is None:
        raise ValueError("a mesh path is required")
    doc, manifest = run_pipeline(cfg, inputs, args.out)
    log.info("planned %d views, beta*=%s, movement cost %.4f", doc["objective"], doc["beta_star"],
             doc["movement_cost"])
    if args.out is None:
        _emit(doc, None)


def build_parser():
    ap = argparse.ArgumentParser(prog="osvp", description="One-shot object-centric view planning")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("carve", help="voxel carving from silhouettes")
    p.add_argument("--masks", nargs="+", required=True)
    p.add_argument("--cameras", required=True, help="JSON list of {fx, fy, cx, cy, width, height, pose}")
    p.add_argument("--workspace", type=_box, required=True, help="x0,y0,z0,x1,y1,z1 (write --workspace=-1,... when it starts with a minus)")
    p.add_argument("--dims", type=_dims, default=[50, 50, 50])
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_carve)

    p = sub.add_parser("viewspace", help="hemispherical candidate views")
    p.add_argument("--n", type=int, default=144)
    p.add_argument("--center", type=_vec3)
    p.add_argument("--radius", type=float)
    p.add_argument("--carving", help="carve output; radius becomes 3x the carved size")
    p.add_argument("--up", type=_vec3, default=[0.0, 0.0, 1.0])
    p.add_argument("--iterations", type=int, default=1000)
    p.add_argument("--reachability")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_viewspace)

    p = sub.add_parser("complexity", help="per-point complexity of a mesh")
    p.add_argument("mesh")
    _add_planning_options(p)
    p.add_argument("--ply", help="write the surface with complexity as gray vertex colors")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_complexity)

    p = sub.add_parser("plan", help="select views for a mesh and view space")
    p.add_argument("mesh")
    p.add_argument("--viewspace", required=True)
    p.add_argument("--reachability")
    _add_planning_options(p)
    p.add_argument("--instance", help="also dump the covering instance and solution as JSON")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_plan)

    p = sub.add_parser("path", help="order planned views along the shortest open path")
    p.add_argument("plan")
    p.add_argument("--start", type=int)
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_path)

    p = sub.add_parser("eval", help="HD / CD / EMD between two meshes")
    p.add_argument("mesh_a")
    p.add_argument("mesh_b")
    p.add_argument("--n-hd", type=int, default=10000)
    p.add_argument("--n-cd", type=int, default=10000)
    p.add_argument("--n-emd", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("pipeline", help="full run with plan, debug PLYs and manifest")
    p.add_argument("mesh", nargs="?")
    p.add_argument("--out", help="output directory (plan JSON goes to stdout when omitted)")
    p.add_argument("--reachability")
    p.add_argument("--masks", nargs="+")
    p.add_argument("--cameras")
    p.add_argument("--workspace", type=_box, help="carving box x0,y0,z0,x1,y1,z1")
    p.add_argument("--carving-dims", type=_dims)
    p.add_argument("--center", type=_vec3)
    p.add_argument("--size", type=float)
    p.add_argument("--views", type=int, dest="view_count")
    p.add_argument("--start-view", type=int)
    p.add_argument("--repulsion-iterations", type=int)
    _add_planning_options(p)
    p.set_defaults(func=cmd_pipeline)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO, format="%(levelname)s %(message)s")
    try:
        args.func(args)
    except StageError as exc:
        print(f"error {exc}", file=sys.stderr)
        return exc.exit_code
    except planner.PlanningError as exc:
        print(f"error [planning] {exc}", file=sys.stderr)
        return 1
    except (OSError, ValueError, RuntimeError, KeyError, json.JSONDecodeError) as exc:
        print(f"error [{args.command}] {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
