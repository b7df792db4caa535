"""Shortest open Hamiltonian path through the selected views."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels

EXACT_LIMIT = 18


@dataclass(frozen=True)
class ViewPlan:
    ordered_view_ids: tuple
    positions: np.ndarray
    movement_cost: float
    optimal: bool

    def to_dict(self):
        return {"order": list(self.ordered_view_ids), "positions": self.positions.tolist(),
                "movement_cost": self.movement_cost, "optimal": self.optimal}


def path_length(points, order) -> float:
    pts = np.asarray(points, dtype=np.float64)[list(order)]
    return float(np.linalg.norm(np.diff(pts, axis=0), axis=1).sum()) if len(pts) > 1 else 0.0


def movement_cost(plan: ViewPlan) -> float:
    """Cumulative Euclidean length of the plan."""
    return path_length(plan.positions, range(len(plan.positions)))


def _distances(pts):
    return np.ascontiguousarray(np.linalg.norm(pts[:, None, :] - pts[None, :, :], axis=-1))


def _canonical(order, start, ids):
    if start is None and len(order) > 1 and ids[order[-1]] < ids[order[0]]:
        return order[::-1]
    return order


def nearest_neighbor(dist, start):
    n = len(dist)
    seen = np.zeros(n, dtype=bool)
    order = [start]
    seen[start] = True
    for _ in range(n - 1):
        row = np.where(seen, np.inf, dist[order[-1]])
        nxt = int(np.argmin(row))
        order.append(nxt)
        seen[nxt] = True
    return order


def two_opt(dist, order, fixed_start: bool):
    """Segment reversals on an open path until no exchange shortens it.

    Reversing ``order[i:j+1]`` swaps edges (i-1, i) and (j, j+1); a missing
    neighbour at either end of the path contributes no edge.
    """
    order = list(order)
    n = len(order)
    first = 1 if fixed_start else 0
    improved = True
    while improved:
        improved = False
        for i in range(first, n - 1):
            for j in range(i + 1, n):
                a = order[i - 1] if i > 0 else None
                b, c = order[i], order[j]
                d = order[j + 1] if j + 1 < n else None
                before = (dist[a, b] if a is not None else 0.0) + (dist[c, d] if d is not None else 0.0)
                after = (dist[a, c] if a is not None else 0.0) + (dist[b, d] if d is not None else 0.0)
                if after < before - 1e-12:
                    order[i:j + 1] = order[i:j + 1][::-1]
                    improved = True
    return order


def shortest_hamiltonian_path(points, start_index: int | None = None, ids=None,
                              exact_limit: int = EXACT_LIMIT) -> ViewPlan:
    """Exact subset DP for up to ``exact_limit`` points, nearest-neighbour + 2-opt beyond.

    Without ``start_index`` both endpoints are free; ties prefer the order
    whose first id is smaller.
    """
    pts = np.asarray(points, dtype=np.float64).reshape(-1, 3)
    n = len(pts)
    if n == 0:
        raise ValueError("cannot plan a path through zero points")
    if start_index is not None and not 0 <= start_index < n:
        raise ValueError(f"start index {start_index} out of range")
    ids = list(range(n)) if ids is None else [int(i) for i in ids]
    if n == 1:
        return ViewPlan((ids[0],), pts.copy(), 0.0, True)
    dist = _distances(pts)
    if n <= exact_limit:
        _, order = kernels.held_karp(dist, -1 if start_index is None else int(start_index))
        optimal = True
    else:
        starts = [start_index] if start_index is not None else range(n)
        best = None
        for s in starts:
            cand = two_opt(dist, nearest_neighbor(dist, s), start_index is not None)
            cost = path_length(pts, cand)
            if best is None or cost < best[0] - 1e-12:
                best = (cost, cand)
        order = best[1]
        optimal = False
    order = _canonical(list(order), start_index, ids)
    return ViewPlan(tuple(ids[i] for i in order), pts[order], path_length(pts, order), optimal)
