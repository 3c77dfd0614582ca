"""Exhaustive solver for tiny instances.

Every cap-feasible matching is enumerated in lexicographic order of the
assignment vector.  For a fixed matching the objective splits into independent
per-robot routing problems, each solved exactly; those solves are memoised on
``(robot, demand vector)`` because demand vectors repeat across matchings.
"""

from __future__ import annotations

import itertools
import time
from dataclasses import dataclass

import numpy as np

from .model import (Instance, InfeasibleError, Matching, ObjectiveBreakdown, Route, Solution,
                    SizeGuardError, evaluate_objective)
from .routing import exact_routing, route_cost

GUARD_ROBOTS = 3
GUARD_HUMANS = 6
GUARD_POIS = 6


@dataclass
class ExactResult:
    solution: Solution
    objective: ObjectiveBreakdown
    optimal: bool
    evaluated: int
    expected: int

    @property
    def nontrivial(self) -> bool:
        return any(not r.empty for r in self.solution.routes)


def within_guard(inst: Instance) -> bool:
    return (inst.n_robots <= GUARD_ROBOTS and inst.n_humans <= GUARD_HUMANS
            and inst.n_pois <= GUARD_POIS)


def cap_feasible_assignments(n_humans: int, caps) -> list[tuple[int, ...]]:
    caps = list(caps)
    out = []
    for a in itertools.product(range(len(caps)), repeat=n_humans):
        if all(a.count(k) <= c for k, c in enumerate(caps)):
            out.append(a)
    return out


def exact_solve(inst: Instance, time_budget: float = 120.0) -> ExactResult:
    """Global optimum by enumeration, or the best found when the budget runs out.

    If the budget expires before any matching is evaluated the trivial
    solution (no tours, every request dropped) is returned.
    """
    if not within_guard(inst):
        raise SizeGuardError(
            f"exact solver guard is {GUARD_ROBOTS} robots, {GUARD_HUMANS} humans, "
            f"{GUARD_POIS} POIs; got {inst.n_robots}, {inst.n_humans}, {inst.n_pois}")
    if int(inst.team_cap.sum()) < inst.n_humans:
        raise InfeasibleError(
            f"team caps hold {int(inst.team_cap.sum())} humans but {inst.n_humans} must be matched")

    started = time.perf_counter()
    assignments = cap_feasible_assignments(inst.n_humans, inst.team_cap)
    memo: dict[tuple[int, tuple[int, ...]], tuple[float, Route]] = {}
    best: tuple[float, tuple[int, ...], tuple[Route, ...]] | None = None
    evaluated = 0

    for a in assignments:
        if time.perf_counter() - started > time_budget:
            break
        a_arr = np.asarray(a)
        total = 0.0
        routes = []
        for k in range(inst.n_robots):
            demand = tuple(int(x) for x in inst.requests[a_arr == k].sum(axis=0))
            key = (k, demand)
            if key not in memo:
                r = exact_routing(inst, k, np.array(demand))
                memo[key] = (route_cost(inst, k, demand, r.pois), r)
            cost, r = memo[key]
            total += cost
            routes.append(r)
        evaluated += 1
        if best is None or total < best[0]:
            best = (total, a, tuple(routes))

    if best is None:
        sol = Solution(tuple(Route(k, ()) for k in range(inst.n_robots)),
                       Matching(tuple(assignments[0])))
    else:
        sol = Solution(best[2], Matching(best[1]))
    return ExactResult(sol, evaluate_objective(inst, sol), evaluated == len(assignments),
                       evaluated, len(assignments))
