import numpy as np
import pytest

from osvp import geometry, kernels
from osvp.complexity import complexity_field
from osvp.pipeline import PipelineConfig, prepare_surface
from osvp.viewspace import generate_view_space
from osvp.visibility import compute_visibility


def checker(p, cells=4):
    c = (np.floor(p[:, 0] * cells) + np.floor(p[:, 1] * cells) + np.floor(p[:, 2] * cells)) % 2
    return np.repeat(c[:, None], 3, axis=1) * 0.8 + 0.1


def flat_gray(p):
    return np.full((len(p), 3), 0.5)


@pytest.fixture(scope="session")
def checker_sphere():
    return geometry.uv_sphere(1.0, 48, 96, color_fn=checker)


@pytest.fixture(scope="session")
def gray_sphere():
    return geometry.uv_sphere(1.0, 48, 96, color_fn=flat_gray)


@pytest.fixture(scope="session")
def sphere_obj(tmp_path_factory, checker_sphere):
    path = tmp_path_factory.mktemp("mesh") / "sphere.obj"
    geometry.write_obj(path, checker_sphere)
    return path


@pytest.fixture(scope="session")
def sphere_scene(checker_sphere):
    """Surface, 144-view space, visibility and complexity of the checkered unit sphere."""
    cfg = PipelineConfig(center=(0, 0, 0), size=1.0)
    surf = prepare_surface(checker_sphere, cfg)
    space = generate_view_space((0, 0, 0), 3.0, 144)
    matrix = compute_visibility(surf, space, cfg.fov_deg, cfg.backface, cfg.occlusion_margin)
    field = complexity_field(surf, cfg.k_neighbors)
    return surf, space, matrix, field


@pytest.fixture(params=sorted(kernels.backends()))
def backend(request):
    return kernels.backends()[request.param]


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for n in sorted(RESULTS):
            terminalreporter.write_line(RESULTS[n])
