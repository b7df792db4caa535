import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

import oracles
from osvp import planner
from osvp.complexity import ComplexityField
from osvp.planner import CoverInstance, PlanningError
from osvp.viewspace import View, ViewSpace, look_at_quaternion
from osvp.visibility import VisibilityMatrix


def make_instance(cover, req, pos=None, beta=0.0, alpha=3):
    n = len(cover)
    pairs = oracles.forbidden_pairs(pos, beta) if pos is not None else ()
    return CoverInstance(np.arange(n), cover, req, pairs, alpha, beta)


def synthetic_space(positions, reachable=None):
    pos = np.asarray(positions, dtype=np.float64)
    views = tuple(View(i, p, look_at_quaternion(p, [0, 0, 0])) for i, p in enumerate(pos))
    return ViewSpace(np.zeros(3), float(np.linalg.norm(pos, axis=1).max()), views, reachable)


def synthetic_problem(rng, n_views, n_points, alpha):
    """Matrix, field and space whose requirements are an arbitrary 1..alpha vector."""
    bits = rng.random((n_views, n_points)) < rng.uniform(0.3, 0.8)
    req = rng.integers(1, alpha + 1, size=n_points)
    field = ComplexityField(req.astype(float), req / alpha)
    pos = rng.normal(size=(n_views, 3))
    pos[:, 2] = np.abs(pos[:, 2]) + 0.1
    return VisibilityMatrix(bits), field, synthetic_space(pos)


def test_toy_instance_needs_two_sets():
    # P1 = {p1, p2}, P2 = {p2, p3}, P3 = {p1, p3}
    cover = np.array([[1, 1, 0], [0, 1, 1], [1, 0, 1]], dtype=bool)
    sol = planner.solve_set_cover(make_instance(cover, [1, 1, 1]))
    assert sol.objective == 2 and sol.status == planner.OPTIMAL
    assert planner.check_solution(make_instance(cover, [1, 1, 1]), sol.selected) == []
    assert planner.solve_set_cover(make_instance(cover, [2, 2, 2])).objective == 3


def test_matches_enumeration_on_random_instances():
    rng = np.random.default_rng(1234)
    for _ in range(60):
        cover, req, pos, alpha, beta = oracles.random_cover_instance(rng)
        inst = make_instance(cover, req, pos, beta, alpha)
        sol = planner.solve_set_cover(inst)
        ref = oracles.min_cover_size(cover, req, inst.forbidden_pairs)
        if ref is None:
            assert sol.status == planner.INFEASIBLE
        else:
            assert sol.status == planner.OPTIMAL and sol.objective == ref
            assert planner.check_solution(inst, sol.selected) == []


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**31 - 1))
def test_raising_requirements_never_lowers_optimum(seed):
    rng = np.random.default_rng(seed)
    cover, req, _, _, _ = oracles.random_cover_instance(rng, max_views=10)
    bumped = np.minimum(req + rng.integers(0, 2, size=len(req)), cover.sum(axis=0))
    a = planner.solve_set_cover(make_instance(cover, req))
    b = planner.solve_set_cover(make_instance(cover, bumped))
    assert a.objective <= b.objective


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**31 - 1))
def test_more_conflicts_never_lower_optimum(seed):
    rng = np.random.default_rng(seed)
    cover, req, pos, _, _ = oracles.random_cover_instance(rng, max_views=10)
    lo = planner.solve_set_cover(make_instance(cover, req, pos, 1.0))
    hi = planner.solve_set_cover(make_instance(cover, req, pos, 1.6))
    if hi.status == planner.OPTIMAL:
        assert lo.status == planner.OPTIMAL and lo.objective <= hi.objective


def test_feasibility_mode_returns_valid_selection():
    rng = np.random.default_rng(7)
    cover, req, pos, alpha, _ = oracles.random_cover_instance(rng)
    inst = make_instance(cover, req, pos, 0.0, alpha)
    sol = planner.solve_set_cover(inst, feasibility_only=True)
    assert sol.status == planner.FEASIBLE
    assert planner.check_solution(inst, sol.selected) == []


def test_time_limit_reports_incumbent_or_unknown():
    rng = np.random.default_rng(0)
    cover = rng.random((40, 300)) < 0.3
    req = np.minimum(rng.integers(1, 4, size=300), cover.sum(axis=0))
    req = np.maximum(req, 1)
    keep = cover.sum(axis=0) >= req
    inst = make_instance(cover[:, keep], req[keep])
    sol = planner.solve_set_cover(inst, time_limit=0.0)
    assert sol.status in (planner.FEASIBLE, planner.UNKNOWN, planner.OPTIMAL)
    if sol.selected:
        assert planner.check_solution(inst, sol.selected) == []


def test_forbidden_pairs_match_oracle():
    rng = np.random.default_rng(2)
    for beta in (0.0, 0.5, 1.0, 1.4, 2.2):
        pos = rng.normal(size=(9, 3))
        assert list(planner.forbidden_pairs_for(pos, np.arange(9), beta)) == oracles.forbidden_pairs(pos, beta)


def test_forbidden_pairs_use_candidate_spacing_and_global_ids():
    pos = np.array([[0, 0, 0], [1, 0, 0], [1.1, 0, 0], [3, 0, 0]], dtype=float)
    # at beta = 1 every view conflicts with its nearest candidate
    assert planner.forbidden_pairs_for(pos, [0, 1, 2, 3], 1.0) == ((0, 1), (1, 2), (2, 3))
    # without view 2, view 3's nearest candidate becomes view 1
    assert planner.forbidden_pairs_for(pos, [0, 1, 3], 1.0) == ((0, 1), (1, 3))


def test_check_solution_reports_each_violation():
    cover = np.array([[1, 0], [0, 1], [1, 1]], dtype=bool)
    inst = CoverInstance([4, 5, 6], cover, [1, 1], [(4, 6)])
    assert planner.check_solution(inst, [6]) == []
    probs = planner.check_solution(inst, [4, 6, 9])
    assert any("not candidates" in p for p in probs) and any("forbidden pair" in p for p in probs)
    assert any("under-covered" in p for p in planner.check_solution(inst, [4]))


def test_instance_validation_and_roundtrip():
    cover = np.array([[1, 0, 1], [0, 1, 1]], dtype=bool)
    with pytest.raises(ValueError, match="forbidden pair"):
        CoverInstance([0, 1], cover, [1, 1, 1], [(0, 7)])
    with pytest.raises(ValueError, match="requirements"):
        CoverInstance([0, 1], cover, [1, 1])
    inst = CoverInstance([3, 8], cover, [1, 1, 2], [(8, 3)], 2, 1.5, [4, 9, 11])
    back = CoverInstance.from_dict(inst.to_dict())
    np.testing.assert_array_equal(back.cover, inst.cover)
    np.testing.assert_array_equal(back.point_ids, [4, 9, 11])
    assert back.forbidden_pairs == ((3, 8),) and back.beta == 1.5 and back.alpha == 2


def test_build_instance_filters_and_excludes_unreachable():
    bits = np.array([[1, 1, 0, 1], [1, 0, 0, 1], [0, 1, 1, 1]], dtype=bool)
    field = ComplexityField(np.zeros(4), np.array([1.0, 1.0, 0.5, 0.1]))
    space = synthetic_space([[1, 0, 1], [0, 1, 1], [-1, 0, 1]], reachable=[True, True, False])
    inst = planner.build_instance(VisibilityMatrix(bits), field, space, alpha=2)
    np.testing.assert_array_equal(inst.view_ids, [0, 1])
    # point 1 needs 2 views but only view 0 sees it; point 2 is seen by no reachable view
    np.testing.assert_array_equal(inst.point_ids, [0, 3])
    np.testing.assert_array_equal(inst.requirements, [2, 1])
    alt = planner.build_instance(VisibilityMatrix(bits), field, space, alpha=2, exclusion="alpha")
    np.testing.assert_array_equal(alt.point_ids, [0, 3])
    with pytest.raises(PlanningError, match="filtered out"):
        planner.build_instance(VisibilityMatrix(bits[:, 2:3]), ComplexityField(np.zeros(1), np.ones(1)),
                               space, alpha=1)


# ---------------------------------------------------------------- beta search

def test_beta_search_matches_linear_sweep():
    rng = np.random.default_rng(99)
    for _ in range(8):
        n = int(rng.integers(3, 11))
        matrix, field, space = synthetic_problem(rng, n, int(rng.integers(3, 20)), 2)
        req = field.requirements(2)
        ref = oracles.sweep_beta_star(matrix.bits, req, space.positions)
        beta, sol = planner.max_feasible_beta(matrix, field, space, 2)
        assert beta == ref
        inst = planner.build_instance(matrix, field, space, 2, beta)
        assert sol.objective == oracles.min_cover_size(inst.cover, inst.requirements, inst.forbidden_pairs,
                                                       inst.view_ids)


def test_beta_below_one_adds_no_constraints():
    rng = np.random.default_rng(4)
    pos = rng.normal(size=(8, 3))
    assert planner.forbidden_pairs_for(pos, np.arange(8), 0.99) == ()
    assert len(planner.forbidden_pairs_for(pos, np.arange(8), 1.0)) >= 4


def test_grid_beta_is_exact_decimal():
    assert planner.grid_beta(3, 0.1) == 0.3
    assert planner.grid_beta(7, 0.1) == 0.7


def test_beta_search_raises_when_infeasible_at_zero():
    bits = np.array([[1, 0], [0, 0]], dtype=bool)
    field = ComplexityField(np.zeros(2), np.ones(2))
    space = synthetic_space([[1, 0, 1], [0, 1, 1]])
    # point 1 is unobservable and gets filtered; point 0 needs 2 views but only one sees it
    with pytest.raises(PlanningError):
        planner.max_feasible_beta(VisibilityMatrix(bits), field, space, 2)


# ---------------------------------------------------------------- uniform baseline

def test_uniform_two_views_are_the_farthest_pair():
    rng = np.random.default_rng(8)
    for _ in range(10):
        n = int(rng.integers(3, 12))
        pos = rng.normal(size=(n, 3))
        space = synthetic_space(pos)
        bits = np.ones((n, 5), dtype=bool)
        field = ComplexityField(np.ones(5), np.ones(5))
        sol = planner.uniform_planner(VisibilityMatrix(bits), field, space, alpha=2, coverage_fraction=1.0)
        assert sol.objective == 2
        best = max(np.linalg.norm(pos[a] - pos[b]) for a, b in itertools.combinations(range(n), 2))
        a, b = sol.selected
        assert np.linalg.norm(pos[a] - pos[b]) == pytest.approx(best)


def test_uniform_drops_unreachable_views():
    pos = np.array([[1, 0, 0.1], [-1, 0, 0.1], [0, 1, 0.1], [0, -1, 0.1]])
    space = synthetic_space(pos, reachable=[False, True, True, True])
    bits = np.ones((4, 3), dtype=bool)
    field = ComplexityField(np.ones(3), np.ones(3))
    sol = planner.uniform_planner(VisibilityMatrix(bits), field, space, alpha=1, coverage_fraction=1.0)
    assert 0 not in sol.selected and sol.objective >= 1


def test_uniform_reports_infeasible():
    bits = np.array([[1, 0], [0, 1]], dtype=bool)
    field = ComplexityField(np.ones(2), np.ones(2))
    space = synthetic_space([[1, 0, 1], [0, 1, 1]], reachable=[True, False])
    sol = planner.uniform_planner(VisibilityMatrix(bits), field, space, alpha=1, coverage_fraction=1.0)
    # unreachable view 1 is never kept, so point 1 is filtered and point 0 is covered
    assert sol.status == planner.FEASIBLE
    bits = np.array([[1, 1], [1, 1]], dtype=bool)
    field = ComplexityField(np.ones(2), np.ones(2))
    sol = planner.uniform_planner(VisibilityMatrix(bits), field, synthetic_space([[1, 0, 1], [0, 1, 1]]),
                                  alpha=1, coverage_fraction=1.01)
    assert sol.status == planner.INFEASIBLE


def test_alpha_monotone_on_sphere(sphere_scene):
    _, space, matrix, field = sphere_scene
    counts = [planner.solve_set_cover(planner.build_instance(matrix, field, space, a)).objective
              for a in (1, 3, 6)]
    assert counts == sorted(counts) and counts[0] < counts[-1]


def test_beta_search_stops_at_cap_when_one_view_suffices():
    pos = np.array([[1, 0, 1], [0, 1, 1], [-1, 0, 1.0]])
    space = synthetic_space(pos)
    bits = np.array([[1, 1], [1, 0], [0, 1]], dtype=bool)
    field = ComplexityField(np.ones(2), np.ones(2))
    beta, sol = planner.max_feasible_beta(VisibilityMatrix(bits), field, space, 1)
    assert beta == planner.grid_beta(int(np.ceil(planner.beta_cap(space) / 0.1 - 1e-9)), 0.1)
    assert sol.selected == (0,)
    assert beta == oracles.sweep_beta_star(bits, field.requirements(1), pos)
