"""Large neighbourhood search alternating exact matching and per-robot routing."""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .matching import build_cost_matrix, solve_matching
from .model import (Instance, InfeasibleError, Matching, ObjectiveBreakdown, Route, Solution,
                    evaluate_objective)
from .routing import build_demand, route_cost, solve_routing

log = logging.getLogger(__name__)

PENALTY_TOL = 1e-9


@dataclass(frozen=True)
class LnsConfig:
    max_iterations: int = 50
    seed: int = 0
    accept_only_improving: bool = True
    jobs: int = 1

    def __post_init__(self):
        if self.max_iterations < 1:
            raise ValueError(f"max_iterations must be >= 1, got {self.max_iterations}")
        if self.jobs < 1:
            raise ValueError(f"jobs must be >= 1, got {self.jobs}")


@dataclass
class LnsResult:
    solution: Solution
    objective: ObjectiveBreakdown
    trace: list[ObjectiveBreakdown] = field(default_factory=list)
    iterations: int = 0
    converged: bool = False

    @property
    def totals(self) -> list[float]:
        return [o.total for o in self.trace]


def _check_caps(inst: Instance) -> None:
    total = int(inst.team_cap.sum())
    if total < inst.n_humans:
        raise InfeasibleError(
            f"team caps hold {total} humans but {inst.n_humans} must be matched "
            f"(deficit {inst.n_humans - total})")


def initialize(inst: Instance, seed: int) -> Solution:
    """Random cap-feasible matching with every route empty.

    Humans are shuffled and dealt round-robin to robots that still have room.
    """
    _check_caps(inst)
    rng = np.random.Generator(np.random.PCG64(seed))
    order = rng.permutation(inst.n_humans)
    room = inst.team_cap.astype(np.int64).copy()
    assignment = np.empty(inst.n_humans, dtype=np.int64)
    k = 0
    for l in order:
        while room[k] == 0:
            k = (k + 1) % inst.n_robots
        assignment[l] = k
        room[k] -= 1
        k = (k + 1) % inst.n_robots
    routes = tuple(Route(r, ()) for r in range(inst.n_robots))
    return Solution(routes, Matching(tuple(int(a) for a in assignment)))


def _same_objective(a: ObjectiveBreakdown, b: ObjectiveBreakdown) -> bool:
    return (a.dropped_requests == b.dropped_requests
            and abs(a.expected_overtime_penalty - b.expected_overtime_penalty) <= PENALTY_TOL)


def routing_seed(seed: int, iteration: int, k: int) -> int:
    return int(np.random.SeedSequence([seed, iteration, k]).generate_state(1, np.uint64)[0])


def lns_solve(inst: Instance, cfg: LnsConfig = LnsConfig()) -> LnsResult:
    """Run the matching/routing alternation until the objective stops changing.

    ``trace[0]`` is the objective of the random start, ``trace[i]`` the
    objective after iteration ``i``.  Routing sub-problems of one iteration can
    run on ``cfg.jobs`` threads; results are merged in robot order, so the
    output does not depend on ``jobs``.
    """
    sol = initialize(inst, cfg.seed)
    current = evaluate_objective(inst, sol)
    result = LnsResult(sol, current, [current])
    routes = list(sol.routes)

    pool = ThreadPoolExecutor(cfg.jobs) if cfg.jobs > 1 else None
    try:
        for it in range(1, cfg.max_iterations + 1):
            c = build_cost_matrix(inst, routes)
            matching = solve_matching(c, inst.team_cap)

            demands = [build_demand(inst, matching, k) for k in range(inst.n_robots)]

            def solve_one(k):
                return solve_routing(inst, k, demands[k], routing_seed(cfg.seed, it, k))

            if pool is None:
                proposals = [solve_one(k) for k in range(inst.n_robots)]
            else:
                proposals = list(pool.map(solve_one, range(inst.n_robots)))

            for k, new in enumerate(proposals):
                if new.pois == routes[k].pois:
                    continue
                if cfg.accept_only_improving:
                    old_cost = route_cost(inst, k, demands[k], routes[k].pois)
                    if route_cost(inst, k, demands[k], new.pois) > old_cost:
                        continue
                routes[k] = new

            sol = Solution(tuple(routes), matching)
            obj = evaluate_objective(inst, sol)
            result.trace.append(obj)
            result.iterations = it
            log.debug("iteration %d: total %.6f (dropped %d)", it, obj.total, obj.dropped_requests)
            unchanged = _same_objective(obj, current)
            current = obj
            if obj.total <= result.objective.total:
                result.solution, result.objective = sol, obj
            if unchanged:
                result.converged = True
                break
    finally:
        if pool is not None:
            pool.shutdown()
    return result
