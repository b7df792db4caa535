"""Complexity-weighted multi-view set covering with distance constraints.

The exact solver is a depth-first branch-and-bound over binary view
variables. Each node runs unit propagation (forced selections and conflict
exclusions), bounds with the LP relaxation (HiGHS through scipy) strengthened
by clique inequalities from the conflict graph, and branches on the
fractional view covering the most deficient points.
"""

from __future__ import annotations

import base64
import logging
import math
import time
from dataclasses import dataclass

import numpy as np
from scipy import sparse
from scipy.optimize import linprog

from .complexity import ComplexityField
from .viewspace import ViewSpace
from .visibility import VisibilityMatrix, filter_unsatisfiable

log = logging.getLogger(__name__)

OPTIMAL = "optimal"
FEASIBLE = "feasible"  # valid selection without an optimality proof
INFEASIBLE = "infeasible"
UNKNOWN = "unknown"  # time limit hit before any feasible selection was found

_TOL = 1e-6


class PlanningError(RuntimeError):
    pass


@dataclass(frozen=True)
class CoverInstance:
    """Set-cover instance over candidate views.

    ``cover[i, p]`` tells whether candidate ``view_ids[i]`` observes point
    ``p``; forbidden pairs use global view ids.
    """

    view_ids: np.ndarray
    cover: np.ndarray
    requirements: np.ndarray
    forbidden_pairs: tuple = ()
    alpha: int = 1
    beta: float = 0.0
    point_ids: np.ndarray | None = None

    def __post_init__(self):
        ids = np.asarray(self.view_ids, dtype=np.int64).reshape(-1)
        cover = np.asarray(self.cover, dtype=bool).reshape(len(ids), -1)
        req = np.asarray(self.requirements, dtype=np.int64).reshape(-1)
        if cover.shape[1] != len(req):
            raise ValueError("requirements do not match the point count")
        pairs = tuple(sorted({(min(a, b), max(a, b)) for a, b in self.forbidden_pairs}))
        known = set(ids.tolist())
        for a, b in pairs:
            if a == b or a not in known or b not in known:
                raise ValueError(f"forbidden pair {(a, b)} does not reference two candidate views")
        object.__setattr__(self, "view_ids", ids)
        object.__setattr__(self, "cover", cover)
        object.__setattr__(self, "requirements", req)
        object.__setattr__(self, "forbidden_pairs", tuple((int(a), int(b)) for a, b in pairs))
        pids = np.arange(len(req)) if self.point_ids is None else np.asarray(self.point_ids, dtype=np.int64)
        object.__setattr__(self, "point_ids", pids)

    @property
    def n_views(self) -> int:
        return len(self.view_ids)

    @property
    def n_points(self) -> int:
        return len(self.requirements)

    def to_dict(self):
        packed = np.packbits(self.cover, axis=None).tobytes()
        return {
            "alpha": int(self.alpha), "beta": float(self.beta),
            "view_ids": self.view_ids.tolist(), "point_ids": self.point_ids.tolist(),
            "requirements": self.requirements.tolist(),
            "visibility": base64.b64encode(packed).decode("ascii"),
            "forbidden_pairs": [list(p) for p in self.forbidden_pairs],
        }

    @classmethod
    def from_dict(cls, d):
        ids = np.asarray(d["view_ids"], dtype=np.int64)
        req = np.asarray(d["requirements"], dtype=np.int64)
        raw = np.frombuffer(base64.b64decode(d["visibility"]), dtype=np.uint8)
        cover = np.unpackbits(raw, count=len(ids) * len(req)).astype(bool).reshape(len(ids), len(req))
        return cls(ids, cover, req, [tuple(p) for p in d["forbidden_pairs"]], int(d["alpha"]), float(d["beta"]),
                   np.asarray(d.get("point_ids", range(len(req))), dtype=np.int64))


@dataclass(frozen=True)
class CoverSolution:
    selected: tuple
    objective: int
    status: str
    proof_gap: float = 0.0
    nodes: int = 0
    beta: float | None = None

    def to_dict(self):
        gap = self.proof_gap if math.isfinite(self.proof_gap) else None  # keep the JSON strict
        return {"selected": list(self.selected), "objective": self.objective, "status": self.status,
                "proof_gap": gap, "nodes": self.nodes, "beta": self.beta}


# ---------------------------------------------------------------- instance construction

def _nearest_spacing(pos):
    d = np.linalg.norm(pos[:, None, :] - pos[None, :, :], axis=-1)
    np.fill_diagonal(d, np.inf)
    return d, d.min(axis=1)


def forbidden_pairs_for(positions, view_ids, beta: float):
    """Unordered pairs {v, w} with d(v, w) <= beta * d_min of either view."""
    ids = np.asarray(view_ids, dtype=np.int64)
    if len(ids) < 2 or beta <= 0:
        return ()
    pos = np.asarray(positions, dtype=np.float64)[ids]
    d, dmin = _nearest_spacing(pos)
    hit = (d <= beta * dmin[:, None]) | (d <= beta * dmin[None, :])
    np.fill_diagonal(hit, False)
    a, b = np.nonzero(np.triu(hit))
    return tuple(zip(ids[a].tolist(), ids[b].tolist()))


def build_instance(matrix: VisibilityMatrix, field: ComplexityField, space: ViewSpace, alpha: int,
                   beta: float = 0.0, exclusion: str = "per_point") -> CoverInstance:
    """Assemble the covering instance for reachable views.

    ``exclusion="per_point"`` drops points seen by fewer views than their own
    requirement; ``"alpha"`` drops points seen by fewer than ``alpha`` views.
    """
    if alpha < 1:
        raise ValueError("alpha must be a positive integer")
    if beta < 0:
        raise ValueError("beta must be non-negative")
    if matrix.n_views != len(space) or matrix.n_points != len(field.normalized):
        raise ValueError("visibility matrix, complexity field and view space are inconsistent")
    cand = space.candidate_ids
    if len(cand) == 0:
        raise PlanningError("no candidate views: every view is unreachable")
    sub = VisibilityMatrix(matrix.bits[cand])
    req = field.requirements(alpha)
    if exclusion == "per_point":
        kept, reduced = filter_unsatisfiable(sub, req)
    elif exclusion == "alpha":
        kept, reduced = filter_unsatisfiable(sub, np.full(sub.n_points, alpha))
    else:
        raise ValueError(f"unknown exclusion mode {exclusion!r}")
    if len(kept) == 0:
        raise PlanningError("every surface point was filtered out as unsatisfiable")
    pairs = forbidden_pairs_for(space.positions, cand, beta)
    return CoverInstance(cand, reduced.bits, req[kept], pairs, alpha, beta, kept)


def check_solution(inst: CoverInstance, selected) -> list[str]:
    """Independent constraint check; returns human-readable violations (empty when valid)."""
    sel = set(int(v) for v in selected)
    problems = []
    unknown = sel - set(inst.view_ids.tolist())
    if unknown:
        problems.append(f"selected views {sorted(unknown)} are not candidates")
    rows = [i for i, v in enumerate(inst.view_ids) if int(v) in sel]
    counts = inst.cover[rows].sum(axis=0) if rows else np.zeros(inst.n_points, dtype=np.int64)
    short = np.flatnonzero(counts < inst.requirements)
    if len(short):
        problems.append(f"{len(short)} points under-covered (first: point {int(inst.point_ids[short[0]])})")
    for a, b in inst.forbidden_pairs:
        if a in sel and b in sel:
            problems.append(f"forbidden pair ({a}, {b}) both selected")
    return problems


# ---------------------------------------------------------------- exact solver

def _reduce_rows(cover, req):
    """Drop duplicate and dominated coverage rows (points x views)."""
    rows = cover.T
    if rows.shape[0] == 0:
        return rows.astype(np.int8), req
    uniq, inv = np.unique(rows, axis=0, return_inverse=True)
    inv = np.asarray(inv).reshape(-1)
    ureq = np.zeros(len(uniq), dtype=np.int64)
    np.maximum.at(ureq, inv, req)
    m = uniq.astype(np.float32)  # BLAS path; counts <= n_views are exact in float32
    if len(m) > 1:
        inter = m @ m.T
        size = m.sum(axis=1)
        # row j implies row i when S_j is a subset of S_i and r_j >= r_i
        implied = (inter == size[None, :]) & (ureq[None, :] >= ureq[:, None])
        np.fill_diagonal(implied, False)
        keep = ~implied.any(axis=1)
        uniq, ureq = uniq[keep], ureq[keep]
    return uniq.astype(np.int8), ureq


def _cliques(n, adj):
    """Greedy clique cover of the conflict graph edges."""
    cliques = set()
    for v in range(n):
        nb = np.flatnonzero(adj[v])
        if len(nb) == 0:
            continue
        clique = [v]
        for u in nb:
            if all(adj[u, w] for w in clique):
                clique.append(int(u))
        cliques.add(tuple(sorted(clique)))
    covered = np.zeros_like(adj)
    for c in cliques:
        idx = np.array(c)
        covered[np.ix_(idx, idx)] = True
    a, b = np.nonzero(np.triu(adj & ~covered))
    cliques.update(zip(a.tolist(), b.tolist()))
    return sorted(cliques)


class _Timeout(Exception):
    pass


class _BranchAndBound:
    def __init__(self, inst: CoverInstance, time_limit, feasibility_only):
        self.n = inst.n_views
        self.A, self.r = _reduce_rows(inst.cover, inst.requirements)  # rows: points, cols: views
        index = {int(v): i for i, v in enumerate(inst.view_ids)}
        self.adj = np.zeros((self.n, self.n), dtype=bool)
        for a, b in inst.forbidden_pairs:
            self.adj[index[a], index[b]] = self.adj[index[b], index[a]] = True
        self.cliques = _cliques(self.n, self.adj)
        if self.cliques:
            rows = np.repeat(np.arange(len(self.cliques)), [len(c) for c in self.cliques])
            cols = np.concatenate([np.array(c) for c in self.cliques])
            self.C = sparse.csr_matrix((np.ones(len(cols)), (rows, cols)), shape=(len(self.cliques), self.n))
        else:
            self.C = None
        self.deadline = None if time_limit is None else time.monotonic() + time_limit
        self.feasibility_only = feasibility_only
        self.best = None
        self.best_cost = math.inf
        self.nodes = 0
        self.timed_out = False

    # -- helpers
    def _check_time(self):
        if self.deadline is not None and time.monotonic() > self.deadline:
            raise _Timeout

    def _propagate(self, state):
        """Unit propagation; ``state`` is int8 per view (-1 free, 0, 1). Returns False on conflict."""
        A, r = self.A, self.r
        while True:
            ones = state == 1
            if np.any(self.adj[ones][:, ones]):
                return False
            excl = self.adj[ones].any(axis=0) & (state == -1)
            state[excl] = 0
            avail = A[:, state != 0].sum(axis=1)
            if np.any(avail < r):
                return False
            tight = (avail == r) & (A[:, state == 1].sum(axis=1) < r)
            if not tight.any():
                return True
            force = (A[tight].any(axis=0)) & (state == -1)
            if not force.any():
                return True
            state[force] = 1

    def _greedy(self, state):
        """Greedy completion honoring fixings and conflicts; None when it gets stuck."""
        sel = state == 1
        blocked = (state == 0) | self.adj[sel].any(axis=0)
        deficit = np.maximum(self.r - self.A[:, sel].sum(axis=1), 0)
        while deficit.any():
            gain = (self.A[deficit > 0]).sum(axis=0).astype(np.int64)
            gain[sel | blocked] = -1
            v = int(np.argmax(gain))
            if gain[v] <= 0:
                return None
            sel[v] = True
            blocked |= self.adj[v]
            deficit = np.maximum(deficit - self.A[:, v], 0)
        # drop redundant picks, highest index first
        fixed = state == 1
        for v in np.flatnonzero(sel)[::-1]:
            if fixed[v]:
                continue
            sel[v] = False
            if np.any(self.A[:, sel].sum(axis=1) < self.r):
                sel[v] = True
        return sel

    def _offer(self, sel):
        cost = int(sel.sum())
        if cost < self.best_cost:
            self.best_cost = cost
            self.best = sel.copy()

    def _lp(self, state):
        free = np.flatnonzero(state == -1)
        ones = state == 1
        deficit = np.maximum(self.r - self.A[:, ones].sum(axis=1), 0)
        rows = deficit > 0
        if not rows.any():
            return float(ones.sum()), np.where(ones, 1.0, 0.0)
        A = self.A[rows][:, free]
        b = deficit[rows]
        a_ub = [sparse.csr_matrix(-A.astype(np.float64))]
        b_ub = [-b.astype(np.float64)]
        if self.C is not None:
            Cf = self.C[:, free]
            nz = np.asarray((Cf != 0).sum(axis=1)).ravel() >= 2
            if nz.any():
                a_ub.append(Cf[nz])
                b_ub.append(np.ones(int(nz.sum())))
        res = linprog(np.ones(len(free)), A_ub=sparse.vstack(a_ub, format="csr"), b_ub=np.concatenate(b_ub),
                      bounds=(0, 1), method="highs")
        if res.status == 2:
            return None
        if res.status != 0:
            raise PlanningError(f"LP relaxation failed: {res.message}")
        x = np.where(ones, 1.0, 0.0)
        x[free] = res.x
        return float(ones.sum()) + float(res.fun), x

    # -- search
    def _node(self, state):
        self._check_time()
        self.nodes += 1
        if not self._propagate(state):
            return
        if self.feasibility_only and self.best is not None:
            return
        lp = self._lp(state)
        if lp is None:
            return
        value, x = lp
        bound = math.ceil(value - _TOL)
        if bound >= self.best_cost:
            return
        frac = np.flatnonzero((x > _TOL) & (x < 1 - _TOL))
        if len(frac) == 0:
            self._offer(x > 0.5)
            return
        heur = self._greedy(np.where(x > 1 - _TOL, 1, state).astype(np.int8))
        if heur is not None:
            self._offer(heur)
            if bound >= self.best_cost or self.feasibility_only:
                return
        deficient = (self.A[:, state == 1].sum(axis=1) < self.r)
        score = self.A[deficient][:, frac].sum(axis=0)
        v = int(frac[int(np.argmax(score))])  # argmax keeps the lowest index on ties
        for val in (1, 0):
            child = state.copy()
            child[v] = val
            self._node(child)
            if self.feasibility_only and self.best is not None:
                return

    def run(self):
        state = np.full(self.n, -1, dtype=np.int8)
        if self.A.shape[0] == 0:
            self.best, self.best_cost = np.zeros(self.n, dtype=bool), 0
            return
        root = state.copy()
        if self._propagate(root):
            g = self._greedy(root.copy())
            if g is not None:
                self._offer(g)
        try:
            self._node(state)
        except _Timeout:
            self.timed_out = True


def solve_set_cover(inst: CoverInstance, time_limit: float | None = None,
                    feasibility_only: bool = False) -> CoverSolution:
    """Minimum-cardinality view selection meeting every point requirement and distance constraint.

    With ``feasibility_only`` the search stops at the first valid selection
    (status ``feasible``). On timeout the best incumbent is returned with
    status ``feasible``, or ``unknown`` when none was found.
    """
    bb = _BranchAndBound(inst, time_limit, feasibility_only)
    bb.run()
    if bb.best is None:
        status = UNKNOWN if bb.timed_out else INFEASIBLE
        return CoverSolution((), 0, status, math.inf, bb.nodes, inst.beta)
    selected = tuple(int(v) for v in inst.view_ids[np.flatnonzero(bb.best)])
    proven = not bb.timed_out and not feasibility_only
    status = OPTIMAL if proven else FEASIBLE
    return CoverSolution(selected, len(selected), status, 0.0 if proven else math.nan, bb.nodes, inst.beta)


# ---------------------------------------------------------------- beta search

def beta_cap(space: ViewSpace) -> float:
    """Upper end of the beta search: 2 * diameter / smallest nearest-neighbour spacing."""
    cand = space.candidate_ids
    if len(cand) < 2:
        return 0.0
    d, dmin = _nearest_spacing(space.positions[cand])
    return 2.0 * float(d[np.isfinite(d)].max()) / float(dmin.min())


def grid_beta(k: int, step: float) -> float:
    return round(k * step, 10)


def max_feasible_beta(matrix, field, space, alpha: int, step: float = 0.1, time_limit: float | None = None,
                      exclusion: str = "per_point"):
    """Largest grid value of beta keeping the covering problem feasible.

    Doubling from beta = 1 brackets the feasibility boundary (capped at
    ``beta_cap``), then binary search on the ``step`` grid locates it. Returns
    ``(beta_star, optimal solution at beta_star)``.
    """
    cache = {}

    def feasible(k):
        if k not in cache:
            inst = build_instance(matrix, field, space, alpha, grid_beta(k, step), exclusion)
            sol = solve_set_cover(inst, time_limit, feasibility_only=True)
            cache[k] = sol.status in (OPTIMAL, FEASIBLE)
            log.debug("beta %.2f feasible=%s (%d nodes)", grid_beta(k, step), cache[k], sol.nodes)
        return cache[k]

    if not feasible(0):
        raise PlanningError("covering problem is infeasible even without distance constraints")
    k_cap = max(0, math.ceil(beta_cap(space) / step - 1e-9))
    lo, hi = 0, None
    k = max(1, round(1.0 / step))
    while True:
        k = min(k, k_cap)
        if k <= lo:
            break
        if feasible(k):
            lo = k
            if k == k_cap:
                break
            k *= 2
        else:
            hi = k
            break
    if hi is not None:
        while hi - lo > 1:
            mid = (lo + hi) // 2
            if feasible(mid):
                lo = mid
            else:
                hi = mid
    beta = grid_beta(lo, step)
    sol = solve_set_cover(build_instance(matrix, field, space, alpha, beta, exclusion), time_limit)
    return beta, sol


# ---------------------------------------------------------------- uniform baseline

def _dispersion_orders(dist):
    """Greedy max-sum-distance insertion order from every seed (rows)."""
    n = len(dist)
    orders = np.empty((n, n), dtype=np.int64)
    orders[:, 0] = np.arange(n)
    acc = dist.copy()  # acc[s, u] = total distance from u to seed s's selection
    chosen = np.zeros((n, n), dtype=bool)
    chosen[np.arange(n), np.arange(n)] = True
    for step in range(1, n):
        masked = np.where(chosen, -np.inf, acc)
        nxt = np.argmax(masked, axis=1)
        orders[:, step] = nxt
        chosen[np.arange(n), nxt] = True
        acc += dist[nxt]
    return orders


def _total_distance(dist, sel):
    idx = np.asarray(sel)
    return float(dist[np.ix_(idx, idx)].sum()) / 2.0


def _swap_refine(dist, sel):
    """Best-improvement single swaps until no swap increases total pairwise distance."""
    sel = list(sel)
    n = len(dist)
    while True:
        inside = np.zeros(n, dtype=bool)
        inside[sel] = True
        to_sel = dist[:, sel].sum(axis=1)  # distance from each view to the whole selection
        best_gain, best_move = 1e-12, None
        for i, s in enumerate(sel):
            # removing s then adding u: gain = (to_sel[u] - d(u, s)) - (to_sel[s] - 0)
            gain = to_sel - dist[:, s] - to_sel[s]
            gain[inside] = -np.inf
            u = int(np.argmax(gain))
            if gain[u] > best_gain:
                best_gain, best_move = float(gain[u]), (i, u)
        if best_move is None:
            return sorted(sel)
        sel[best_move[0]] = best_move[1]


def uniform_planner(matrix, field, space, alpha: int, coverage_fraction: float = 0.95,
                    exclusion: str = "per_point") -> CoverSolution:
    """Dispersion-first baseline: grow N until the reachable part of the most spread
    N-view selection meets point requirements for ``coverage_fraction`` of points."""
    inst = build_instance(matrix, field, space, alpha, 0.0, exclusion)
    bits = matrix.bits[:, inst.point_ids]
    req = inst.requirements
    pos = space.positions
    dist = np.linalg.norm(pos[:, None, :] - pos[None, :, :], axis=-1)
    orders = _dispersion_orders(dist)
    n = len(space)
    prefix_sum = np.zeros(n)
    for N in range(1, n + 1):
        if N > 1:
            last = orders[:, N - 1]
            prev = orders[:, :N - 1]
            prefix_sum += dist[last[:, None], prev].sum(axis=1)
        seed = int(np.argmax(prefix_sum))  # lowest seed on ties
        sel = _swap_refine(dist, orders[seed, :N])
        kept = [v for v in sel if space.reachable[v]]
        counts = bits[kept].sum(axis=0) if kept else np.zeros(len(req))
        frac = float(np.mean(counts >= req))
        if frac >= coverage_fraction:
            return CoverSolution(tuple(int(v) for v in kept), len(kept), FEASIBLE, math.nan, 0, None)
    return CoverSolution((), 0, INFEASIBLE, math.inf, n, None)
