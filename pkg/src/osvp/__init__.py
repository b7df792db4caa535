"""One-shot object-centric view planning.

Candidate views on a hemisphere around a localized object are scored against
a proxy mesh (occlusion-aware visibility and per-point surface complexity),
the smallest view set meeting per-point multi-view requirements is selected
by exact set covering, and the selected views are ordered along the shortest
open path.
"""

from .geometry import TriangleMesh, load_mesh, voxelize
from .kernels import BACKEND
from .pipeline import PipelineConfig, PipelineInputs, StageError, run_pipeline
from .planner import CoverInstance, CoverSolution, PlanningError, solve_set_cover
from .pathing import ViewPlan, shortest_hamiltonian_path
from .viewspace import View, ViewSpace, generate_view_space

__version__ = "0.1.0"

__all__ = [
    "BACKEND", "CoverInstance", "CoverSolution", "PipelineConfig", "PipelineInputs", "PlanningError",
    "StageError", "TriangleMesh", "View", "ViewPlan", "ViewSpace", "generate_view_space", "load_mesh",
    "run_pipeline", "shortest_hamiltonian_path", "solve_set_cover", "voxelize",
]
