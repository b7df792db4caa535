import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from oracles import open_path_brute
from osvp import pathing


def dist_matrix(pts):
    return np.ascontiguousarray(np.linalg.norm(pts[:, None] - pts[None], axis=-1))


def test_held_karp_matches_permutations(backend):
    rng = np.random.default_rng(0)
    for _ in range(15):
        n = int(rng.integers(2, 8))
        d = dist_matrix(rng.random((n, 3)))
        cost, order = backend.held_karp(d, -1)
        assert sorted(order) == list(range(n))
        assert cost == pytest.approx(open_path_brute(d))
        s = int(rng.integers(0, n))
        cost_s, order_s = backend.held_karp(d, s)
        assert order_s[0] == s and cost_s == pytest.approx(open_path_brute(d, s))


def test_held_karp_backends_agree_with_ties():
    from osvp import kernels
    b = kernels.backends()
    if len(b) < 2:
        pytest.skip("compiled backend not built")
    rng = np.random.default_rng(1)
    for _ in range(100):
        n = int(rng.integers(2, 10))
        # integer lattice points give many equal-length paths
        d = dist_matrix(rng.integers(0, 3, size=(n, 3)).astype(float))
        s = int(rng.integers(-1, n))
        assert b["python"].held_karp(d, s) == b["cython"].held_karp(d, s)


def test_collinear_points_visit_in_order():
    pts = np.array([[3, 0, 0], [0, 0, 0], [2, 0, 0], [1, 0, 0]], dtype=float)
    plan = pathing.shortest_hamiltonian_path(pts)
    assert plan.ordered_view_ids == (0, 2, 3, 1)  # x = 3, 2, 1, 0; first id <= last id
    assert plan.movement_cost == pytest.approx(3.0) and plan.optimal
    fixed = pathing.shortest_hamiltonian_path(pts, start_index=2)
    assert fixed.ordered_view_ids[0] == 2
    assert fixed.movement_cost == pytest.approx(4.0)


def test_ids_and_positions_follow_order():
    pts = np.array([[0, 0, 0], [5, 0, 0], [1, 0, 0]], dtype=float)
    plan = pathing.shortest_hamiltonian_path(pts, ids=[30, 10, 20])
    # free endpoints are oriented so the smaller id comes first
    assert plan.ordered_view_ids == (10, 20, 30)
    np.testing.assert_array_equal(plan.positions, pts[[1, 2, 0]])
    assert pathing.movement_cost(plan) == pytest.approx(plan.movement_cost)


def test_degenerate_inputs():
    one = pathing.shortest_hamiltonian_path([[1, 2, 3]], ids=[7])
    assert one.ordered_view_ids == (7,) and one.movement_cost == 0.0
    with pytest.raises(ValueError):
        pathing.shortest_hamiltonian_path(np.zeros((0, 3)))
    with pytest.raises(ValueError, match="out of range"):
        pathing.shortest_hamiltonian_path(np.zeros((3, 3)), start_index=3)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**31 - 1), st.booleans())
def test_two_opt_is_locally_optimal(seed, fixed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(3, 25))
    d = dist_matrix(rng.random((n, 3)))
    order = pathing.two_opt(d, list(rng.permutation(n)), fixed)
    base = sum(d[order[i], order[i + 1]] for i in range(n - 1))
    first = 1 if fixed else 0
    for i in range(first, n - 1):
        for j in range(i + 1, n):
            cand = order[:i] + order[i:j + 1][::-1] + order[j + 1:]
            assert sum(d[cand[k], cand[k + 1]] for k in range(n - 1)) >= base - 1e-9


def test_heuristic_never_beats_exact_and_stays_close():
    rng = np.random.default_rng(3)
    for _ in range(10):
        pts = rng.random((12, 3))
        exact = pathing.shortest_hamiltonian_path(pts)
        heur = pathing.shortest_hamiltonian_path(pts, exact_limit=0)
        assert not heur.optimal
        assert exact.movement_cost <= heur.movement_cost + 1e-12
        assert heur.movement_cost <= 1.15 * exact.movement_cost


def test_large_inputs_use_the_heuristic():
    pts = np.random.default_rng(0).random((25, 3))
    plan = pathing.shortest_hamiltonian_path(pts, start_index=4)
    assert not plan.optimal and plan.ordered_view_ids[0] == 4
    assert sorted(plan.ordered_view_ids) == list(range(25))
