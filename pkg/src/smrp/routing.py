"""Single-robot routing with the team fixed.

Given the demand ``d[i]`` (how many team members asked for POI ``i``), a robot
picks and orders a subset of POIs to minimise

    weight_dropped * (unserved demand) + weight_time * E[(t - threshold)^+]

subject to ``E[t] <= time_limit``.  :func:`solve_routing` is a greedy insertion
plus local search heuristic; :func:`exact_routing` is a label-setting dynamic
program for small POI counts.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .model import Instance, Matching, Route, SizeGuardError, route_moments
from .stochastic import overtime_from_moments, overtime_from_moments_array

log = logging.getLogger(__name__)

EXACT_MAX_POIS = 12

# moves must beat the incumbent by this much; guards against float churn
_IMPROVE_EPS = 1e-9
# delta-evaluated candidates keep this relative distance from the time limit so
# that the canonical re-evaluation cannot land on the other side of it
_LIMIT_SLACK = 1e-12


def build_demand(inst: Instance, m: Matching, k: int) -> np.ndarray:
    team = [l for l, r in enumerate(m.assignment) if r == k]
    if not team:
        return np.zeros(inst.n_pois, dtype=np.int64)
    return inst.requests[team].sum(axis=0).astype(np.int64)


def route_cost(inst: Instance, k: int, d, pois: Sequence[int]) -> float:
    """Routing objective of visiting ``pois`` in order with demand ``d``."""
    d = np.asarray(d)
    dropped = int(d.sum()) - int(d[list(pois)].sum()) if pois else int(d.sum())
    mean, var = route_moments(inst, k, pois)
    penalty = overtime_from_moments(mean, var ** 0.5, inst.threshold(k))
    return inst.weight_dropped * dropped + inst.weight_time * penalty


def route_feasible(inst: Instance, k: int, pois: Sequence[int]) -> bool:
    return route_moments(inst, k, pois)[0] <= inst.time_limit[k]


def tie_tolerance(cost: float) -> float:
    return 1e-9 * max(1.0, abs(cost))


def select_best(candidates: Iterable[tuple[float, tuple[int, ...]]]) -> tuple[float, tuple[int, ...]]:
    """Pick the cheapest route; near-equal costs go to fewer POIs, then the
    lexicographically smallest sequence."""
    pool = list(candidates)
    best = min(c for c, _ in pool)
    tol = tie_tolerance(best)
    near = [(len(p), p, c) for c, p in pool if c <= best + tol]
    _, pois, cost = min(near)
    return cost, pois


# ---------------------------------------------------------------------------
# exact dynamic program


@dataclass(frozen=True)
class Label:
    mean: float
    var: float
    path: tuple[int, ...]

    def dominates(self, other: "Label") -> bool:
        """True if ``other`` can be dropped in favour of ``self``.

        Besides being no worse in mean and variance, ``self`` must come first
        lexicographically: the penalty is flat below the threshold, so a
        dominated label can still tie on final cost and win the tie-break.
        """
        return (self.mean <= other.mean and self.var <= other.var
                and self.path < other.path)


def pareto_insert(frontier: list[Label], label: Label) -> bool:
    """Insert ``label`` into the frontier of one DP state.

    Returns False (frontier unchanged) if an existing label dominates it.
    """
    for other in frontier:
        if other.dominates(label):
            return False
    frontier[:] = [o for o in frontier if not label.dominates(o)]
    frontier.append(label)
    return True


def exact_routing(inst: Instance, k: int, d) -> Route:
    """Globally optimal route by dynamic programming over (visited set, last POI).

    Each state keeps a frontier of (mean, variance) of elapsed time: the
    overtime penalty grows in both, so a dominated label can never finish
    cheaper, and if it ties it loses the lexicographic tie-break.  Partial
    routes whose expected time already exceeds the limit are discarded since
    times are non-negative.
    """
    n = inst.n_pois
    if n > EXACT_MAX_POIS:
        raise SizeGuardError(f"exact routing supports at most {EXACT_MAX_POIS} POIs, got {n}")
    d = np.asarray(d)
    if not d.any():
        return Route(k, ())

    tm, tv = inst.travel_mean[k], inst.travel_std[k] ** 2
    vm, vv = inst.visit_mean[k], inst.visit_std[k] ** 2
    s, u = inst.start, inst.terminal
    limit = float(inst.time_limit[k])

    states: dict[tuple[int, int], list[Label]] = {}
    for p in range(n):
        mean = tm[s, p] + vm[p]
        if mean <= limit:
            states[(1 << p, p)] = [Label(float(mean), float(tv[s, p] + vv[p]), (p,))]

    for mask in range(1, 1 << n):
        for j in range(n):
            frontier = states.get((mask, j))
            if not frontier:
                continue
            for q in range(n):
                if mask >> q & 1:
                    continue
                step_m = tm[j, q] + vm[q]
                step_v = tv[j, q] + vv[q]
                key = (mask | 1 << q, q)
                for lab in frontier:
                    mean = lab.mean + step_m
                    if mean > limit:
                        continue
                    pareto_insert(states.setdefault(key, []),
                                  Label(float(mean), float(lab.var + step_v), lab.path + (q,)))

    candidates = [(route_cost(inst, k, d, ()), ())]
    for (mask, j), frontier in states.items():
        for lab in frontier:
            if lab.mean + tm[j, u] <= limit and route_feasible(inst, k, lab.path):
                candidates.append((route_cost(inst, k, d, lab.path), lab.path))
    _, pois = select_best(candidates)
    return Route(k, pois)


# ---------------------------------------------------------------------------
# heuristic


class _Search:
    """Greedy best insertion followed by first-improvement local search."""

    def __init__(self, inst: Instance, k: int, d: np.ndarray, rng: np.random.Generator):
        self.inst, self.k, self.d, self.rng = inst, k, d, rng
        self.tm = inst.travel_mean[k]
        self.tv = inst.travel_std[k] ** 2
        self.vm = inst.visit_mean[k]
        self.vv = inst.visit_std[k] ** 2
        self.limit = float(inst.time_limit[k])
        self.cap = self.limit * (1.0 - _LIMIT_SLACK)
        self.thr = inst.threshold(k)
        self.demand_total = int(d.sum())
        self.wanted = np.flatnonzero(d > 0)

    def cost_of(self, mean, var, served):
        pen = overtime_from_moments_array(mean, var, self.thr)
        return self.inst.weight_dropped * (self.demand_total - served) + self.inst.weight_time * pen

    def canonical(self, route):
        mean, var = route_moments(self.inst, self.k, route)
        served = int(self.d[route].sum()) if route else 0
        cost = self.inst.weight_dropped * (self.demand_total - served) \
            + self.inst.weight_time * overtime_from_moments(mean, var ** 0.5, self.thr)
        return mean, var, cost

    def seq(self, route):
        return np.array([self.inst.start, *route, self.inst.terminal], dtype=np.int64)

    def insertion_table(self, route, cands):
        """Mean/var increase of inserting each candidate at each gap: shape (gaps, cands)."""
        sq = self.seq(route)
        a, b = sq[:-1, None], sq[1:, None]
        c = np.asarray(cands, dtype=np.int64)[None, :]
        dm = self.tm[a, c] + self.vm[c] + self.tm[c, b] - self.tm[a, b]
        dv = self.tv[a, c] + self.vv[c] + self.tv[c, b] - self.tv[a, b]
        return dm, dv

    def unrouted(self, route):
        on = set(route)
        return [q for q in self.wanted if q not in on]

    # -- construction --------------------------------------------------------

    def greedy(self):
        route: list[int] = []
        cost = self.canonical(route)[2]
        while True:
            cands = self.unrouted(route)
            if not cands:
                break
            dm, dv = self.insertion_table(route, cands)
            base_m, base_v = route_moments(self.inst, self.k, route)
            dm = np.where(base_m + dm <= self.cap, dm, np.inf)
            pos = dm.argmin(axis=0)
            col = np.arange(len(cands))
            best_dm, best_dv = dm[pos, col], dv[pos, col]
            ok = np.isfinite(best_dm)
            if not ok.any():
                break
            served = int(self.d[route].sum()) if route else 0
            new_cost = self.cost_of(base_m + best_dm, base_v + best_dv,
                                    served + self.d[cands])
            ok &= new_cost < cost - _IMPROVE_EPS
            if not ok.any():
                break
            density = np.where(ok, self.d[cands] / np.maximum(best_dm, 1e-12), -np.inf)
            pick = int(density.argmax())
            trial = route[:]
            trial.insert(int(pos[pick]), int(cands[pick]))
            t_mean, _, t_cost = self.canonical(trial)
            if t_mean > self.limit or t_cost >= cost - _IMPROVE_EPS:
                break
            route, cost = trial, t_cost
        return route

    # -- neighbourhoods ------------------------------------------------------

    def _best_from_table(self, base_route, base_served, cands, extra_served, exclude_pos=None):
        """Best single insertion of ``cands`` into ``base_route``; returns (cost, route) or None."""
        if not cands:
            return None
        base_m, base_v = route_moments(self.inst, self.k, base_route)
        dm, dv = self.insertion_table(base_route, cands)
        mean = base_m + dm
        var = base_v + dv
        cost = self.cost_of(mean, var, base_served + extra_served[None, :])
        cost = np.where(mean <= self.cap, cost, np.inf)
        if exclude_pos is not None:
            cost[exclude_pos[0], exclude_pos[1]] = np.inf
        flat = int(cost.argmin())
        g, c = divmod(flat, cost.shape[1])
        if not np.isfinite(cost[g, c]):
            return None
        trial = list(base_route)
        trial.insert(g, int(cands[c]))
        return float(cost[g, c]), trial

    def moves_for(self, route, p, served):
        """Candidate routes from insert/remove/relocate/swap moves touching POI ``p``."""
        out = []
        if p in route:
            i = route.index(p)
            reduced = route[:i] + route[i + 1:]
            red_served = served - int(self.d[p])
            out.append(reduced)
            hit = self._best_from_table(reduced, red_served, [p], np.zeros(1, dtype=np.int64),
                                        exclude_pos=(i, 0))
            if hit:
                out.append(hit[1])
            others = self.unrouted(route)
            if others:
                hit = self._best_from_table(reduced, red_served, others, self.d[others])
                if hit:
                    out.append(hit[1])
        elif self.d[p] > 0:
            hit = self._best_from_table(route, served, [p], self.d[[p]])
            if hit:
                out.append(hit[1])
        return out

    def best_two_opt(self, route):
        n = len(route)
        if n < 2:
            return None
        sq = self.seq(route)
        base_m, base_v = route_moments(self.inst, self.k, route)
        fwd_m = self.tm[sq[:-1], sq[1:]]
        bwd_m = self.tm[sq[1:], sq[:-1]]
        fwd_v = self.tv[sq[:-1], sq[1:]]
        bwd_v = self.tv[sq[1:], sq[:-1]]
        cf_m, cb_m = np.concatenate(([0.0], np.cumsum(fwd_m))), np.concatenate(([0.0], np.cumsum(bwd_m)))
        cf_v, cb_v = np.concatenate(([0.0], np.cumsum(fwd_v))), np.concatenate(([0.0], np.cumsum(bwd_v)))
        # reverse sq[i..j] for 1 <= i < j <= n
        i, j = np.triu_indices(n + 1, k=1)
        keep = i >= 1
        i, j = i[keep], j[keep]
        a, b = sq[i - 1], sq[j + 1]
        dm = (self.tm[a, sq[j]] + self.tm[sq[i], b] - fwd_m[i - 1] - fwd_m[j]
              + (cb_m[j] - cb_m[i]) - (cf_m[j] - cf_m[i]))
        dv = (self.tv[a, sq[j]] + self.tv[sq[i], b] - fwd_v[i - 1] - fwd_v[j]
              + (cb_v[j] - cb_v[i]) - (cf_v[j] - cf_v[i]))
        served = int(self.d[route].sum())
        mean = base_m + dm
        cost = np.where(mean <= self.cap, self.cost_of(mean, base_v + dv, served), np.inf)
        t = int(cost.argmin())
        if not np.isfinite(cost[t]):
            return None
        lo, hi = int(i[t]) - 1, int(j[t])  # route indices
        return route[:lo] + route[lo:hi][::-1] + route[hi:]

    def improve(self, route):
        cost = self.canonical(route)[2]
        n = self.inst.n_pois
        while True:
            improved = False
            for p in self.rng.permutation(n):
                p = int(p)
                served = int(self.d[route].sum()) if route else 0
                best = None
                for trial in self.moves_for(route, p, served):
                    t_mean, _, t_cost = self.canonical(trial)
                    if t_mean > self.limit:
                        continue
                    if best is None or t_cost < best[0]:
                        best = (t_cost, trial)
                if best is not None and best[0] < cost - _IMPROVE_EPS:
                    cost, route = best
                    improved = True
            trial = self.best_two_opt(route)
            if trial is not None:
                t_mean, _, t_cost = self.canonical(trial)
                if t_mean <= self.limit and t_cost < cost - _IMPROVE_EPS:
                    cost, route = t_cost, trial
                    improved = True
            if not improved:
                return route


def solve_routing(inst: Instance, k: int, d, seed: int = 0) -> Route:
    """Heuristic routing: greedy insertion by demand per expected second, then
    insert/remove/relocate/swap/2-opt local search to a local optimum.

    The returned route always satisfies the expected time limit.  Output is a
    deterministic function of ``(inst, k, d, seed)``.
    """
    d = np.asarray(d, dtype=np.int64)
    if not d.any():
        return Route(k, ())
    direct = inst.travel_mean[k, inst.start, inst.terminal]
    if direct > inst.time_limit[k]:
        log.warning("robot %d: start->terminal leg %.6g exceeds time limit %.6g; degenerate",
                    k, direct, inst.time_limit[k])
    rng = np.random.Generator(np.random.PCG64(seed))
    search = _Search(inst, k, d, rng)
    route = search.improve(search.greedy())
    return Route(k, tuple(route))
