import json
import subprocess
import sys

import numpy as np
import pytest

from osvp import carving, cli
from osvp.pipeline import PipelineConfig, PipelineInputs, StageError, run_pipeline

FAST = dict(center=(0, 0, 0), size=1.0, view_count=40, sample_count=8000, grid_dims=(30, 30, 30),
            repulsion_iterations=200, alpha=3)


def run_cli(*args):
    return subprocess.run([sys.executable, "-m", "osvp.cli", *map(str, args)], capture_output=True, text=True)


@pytest.fixture(scope="module")
def fast_run(tmp_path_factory, sphere_obj):
    out = tmp_path_factory.mktemp("run")
    doc, manifest = run_pipeline(PipelineConfig(**FAST), PipelineInputs(str(sphere_obj)), out)
    return out, doc, manifest


def test_pipeline_outputs(fast_run):
    out, doc, manifest = fast_run
    for name in ("plan.json", "viewspace.json", "surface_complexity.ply", "views_path.ply", "manifest.json"):
        assert (out / name).exists()
    assert sorted(doc["order"]) == [v["id"] for v in doc["views"]]
    assert doc["objective"] == len(doc["views"]) and doc["status"] == "optimal"
    pos = np.array([v["position"] for v in sorted(doc["views"], key=lambda v: doc["order"].index(v["id"]))])
    assert doc["movement_cost"] == pytest.approx(np.linalg.norm(np.diff(pos, axis=0), axis=1).sum())
    for v in doc["views"]:
        assert np.linalg.norm(v["position"]) == pytest.approx(3.0)
        assert np.linalg.norm(v["quaternion"]) == pytest.approx(1.0)
    assert set(manifest["stage_seconds"]) >= {"visibility", "complexity", "planning", "path"}
    assert (out / "views_path.ply").read_bytes().startswith(b"ply\nformat binary_little_endian")


def test_pipeline_is_deterministic(fast_run, tmp_path, sphere_obj):
    out, _, _ = fast_run
    run_pipeline(PipelineConfig(**FAST), PipelineInputs(str(sphere_obj)), tmp_path)
    assert (tmp_path / "plan.json").read_bytes() == (out / "plan.json").read_bytes()


def test_manifest_reruns_the_same_plan(fast_run, tmp_path):
    out, _, _ = fast_run
    manifest = json.loads((out / "manifest.json").read_text())
    cfg = PipelineConfig.from_dict(manifest)
    run_pipeline(cfg, PipelineInputs(**manifest["inputs"]), tmp_path)
    assert (tmp_path / "plan.json").read_bytes() == (out / "plan.json").read_bytes()


def test_start_view_is_honoured(sphere_obj):
    doc, _ = run_pipeline(PipelineConfig(**FAST, start_view=5, beta=0), PipelineInputs(str(sphere_obj)))
    assert doc["order"][0] == 5


def test_pipeline_with_carving(tmp_path, sphere_obj):
    cams = [carving.Camera.look_at(e, [0, 0, 0], up, 300, 300, 320, 240)
            for e, up in [([4, 0, 0], [0, 0, 1]), ([0, 4, 0], [0, 0, 1]), ([0, 0, 4], [0, 1, 0])]]
    masks = []
    for i, c in enumerate(cams):
        carving.write_pgm(tmp_path / f"m{i}.pgm", carving.render_sphere_silhouette(c, [0, 0, 0], 1.0))
        masks.append(str(tmp_path / f"m{i}.pgm"))
    (tmp_path / "cams.json").write_text(json.dumps([c.to_dict() for c in cams]))
    cfg = dict(FAST, center=None, size=None, workspace=(-2, -2, -2, 2, 2, 2), carving_dims=(30, 30, 30))
    doc, manifest = run_pipeline(PipelineConfig(**cfg), PipelineInputs(str(sphere_obj), None, masks,
                                                                       str(tmp_path / "cams.json")))
    assert np.linalg.norm(manifest["carving"]["centroid"]) < 0.15
    # the three-view hull keeps corners beyond the sphere (about 1.22 r for orthogonal cylinders)
    assert 1.0 <= manifest["carving"]["size"] <= 1.4
    assert doc["objective"] > 0


def test_stage_errors(sphere_obj, tmp_path):
    with pytest.raises(StageError) as e:
        run_pipeline(PipelineConfig(**FAST), PipelineInputs(str(tmp_path / "none.obj")))
    assert e.value.stage == "geometry" and e.value.exit_code == 2
    with pytest.raises(StageError) as e:
        run_pipeline(PipelineConfig(**dict(FAST, beta=100.0)), PipelineInputs(str(sphere_obj)))
    assert e.value.stage == "planning" and e.value.exit_code == 1
    (tmp_path / "r.json").write_text(json.dumps([False] * 40))
    with pytest.raises(StageError) as e:
        run_pipeline(PipelineConfig(**FAST), PipelineInputs(str(sphere_obj), str(tmp_path / "r.json")))
    assert e.value.exit_code == 1
    with pytest.raises(StageError) as e:
        run_pipeline(PipelineConfig(**dict(FAST, center=None)), PipelineInputs(str(sphere_obj)))
    assert e.value.stage == "carving"


def test_config_validation():
    with pytest.raises(ValueError):
        PipelineConfig(alpha=0)
    with pytest.raises(ValueError):
        PipelineConfig(planner="random")
    with pytest.raises(ValueError, match="unknown config keys"):
        PipelineConfig.from_dict({"alpah": 3})
    cfg = PipelineConfig.from_dict({"beta": "0.5", "grid_dims": 20})
    assert cfg.beta == 0.5 and cfg.grid_dims == (20, 20, 20)


def test_uniform_planner_in_pipeline(sphere_obj):
    doc, _ = run_pipeline(PipelineConfig(**dict(FAST, planner="uniform")), PipelineInputs(str(sphere_obj)))
    assert doc["status"] == "feasible" and doc["beta_star"] is None


# ---------------------------------------------------------------- command line

def test_cli_pipeline_and_exit_codes(tmp_path, sphere_obj):
    fast = ["--center", "0,0,0", "--size", "1", "--views", "30", "--samples", "6000", "--dims", "25",
            "--repulsion-iterations", "100"]
    ok = run_cli("pipeline", sphere_obj, "--out", tmp_path / "o", "--alpha", "2", *fast)
    assert ok.returncode == 0, ok.stderr
    assert json.loads((tmp_path / "o" / "plan.json").read_text())["alpha"] == 2
    bad = run_cli("pipeline", sphere_obj, "--beta", "100", *fast)
    assert bad.returncode == 1 and "[planning]" in bad.stderr
    missing = run_cli("pipeline", tmp_path / "none.obj", *fast)
    assert missing.returncode == 2 and "[geometry]" in missing.stderr
    rerun = run_cli("pipeline", "--config", tmp_path / "o" / "manifest.json", "--out", tmp_path / "p")
    assert rerun.returncode == 0, rerun.stderr
    assert (tmp_path / "p" / "plan.json").read_bytes() == (tmp_path / "o" / "plan.json").read_bytes()


def test_cli_stepwise(tmp_path, sphere_obj, capsys):
    vs = tmp_path / "vs.json"
    assert cli.main(["viewspace", "--center", "0,0,0", "--radius", "3", "--n", "25", "--iterations", "100",
                     "-o", str(vs)]) == 0
    plan = tmp_path / "plan.json"
    assert cli.main(["plan", str(sphere_obj), "--viewspace", str(vs), "--alpha", "2", "--beta", "0",
                     "--samples", "6000", "--dims", "25", "-o", str(plan), "--instance",
                     str(tmp_path / "inst.json")]) == 0
    doc = json.loads(plan.read_text())
    assert doc["objective"] == len(doc["selected"])
    assert json.loads((tmp_path / "inst.json").read_text())["alpha"] == 2
    assert cli.main(["path", str(plan), "-o", str(tmp_path / "path.json")]) == 0
    path = json.loads((tmp_path / "path.json").read_text())
    assert sorted(path["order"]) == sorted(doc["selected"])
    assert cli.main(["path", str(plan), "--start", "999"]) == 2
    capsys.readouterr()
    assert cli.main(["complexity", str(sphere_obj), "--samples", "6000", "--dims", "25"]) == 0
    assert json.loads(capsys.readouterr().out)["points"] > 0
    assert cli.main(["eval", str(sphere_obj), str(sphere_obj), "--n-hd", "500", "--n-cd", "500",
                     "--n-emd", "100"]) == 0
    assert set(json.loads(capsys.readouterr().out)) == {"hd", "cd", "emd"}


def test_cli_carve(tmp_path):
    cam = carving.Camera.look_at([0, 0, 4], [0, 0, 0], [0, 1, 0], 200, 200, 120, 100)
    carving.write_pgm(tmp_path / "m.pgm", carving.render_sphere_silhouette(cam, [0, 0, 0], 0.5))
    (tmp_path / "c.json").write_text(json.dumps([cam.to_dict()]))
    args = ["carve", "--masks", str(tmp_path / "m.pgm"), "--cameras", str(tmp_path / "c.json"),
            "--workspace=-1,-1,-1,1,1,1", "--dims", "20"]
    assert cli.main(args + ["-o", str(tmp_path / "carve.json")]) == 0
    assert json.loads((tmp_path / "carve.json").read_text())["n_voxels"] > 0
    assert cli.main(["viewspace", "--carving", str(tmp_path / "carve.json"), "--n", "5", "--iterations", "5",
                     "-o", str(tmp_path / "vs.json")]) == 0
    assert cli.main(["carve", "--masks", str(tmp_path / "m.pgm"), "--cameras", str(tmp_path / "missing.json"),
                     "--workspace=-1,-1,-1,1,1,1"]) == 2
