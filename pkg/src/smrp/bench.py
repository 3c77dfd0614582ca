"""Solver dispatch and the randomized benchmark grid."""

from __future__ import annotations

import csv
import io
import itertools
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields

from .exact import exact_solve, within_guard
from .generator import GeneratorParams, generate_instance
from .lns import LnsConfig, lns_solve
from .model import Instance, ObjectiveBreakdown, Solution, evaluate_objective

SOLVERS = ("d-lns", "s-lns", "d-es", "s-es")
REPORT_HEADER = ("robots", "humans", "pois", "seed", "solver", "objective", "dropped",
                 "wall_ms", "nontrivial")


@dataclass
class SolveOutcome:
    solution: Solution
    objective: ObjectiveBreakdown
    info: dict = field(default_factory=dict)


def solve(inst: Instance, solver: str, seed: int = 0, max_iter: int = 50,
          time_budget: float = 120.0, jobs: int = 1) -> SolveOutcome:
    """Run one of the named solvers.

    ``d-*`` solvers plan on the deterministic version of the instance (all
    standard deviations zero), ``s-*`` solvers on the instance as given.  The
    reported objective is always evaluated on the instance as given.
    """
    if solver not in SOLVERS:
        raise ValueError(f"unknown solver {solver!r}; choose from {', '.join(SOLVERS)}")
    plan_inst = inst.deterministic() if solver.startswith("d-") else inst
    if solver.endswith("lns"):
        res = lns_solve(plan_inst, LnsConfig(max_iterations=max_iter, seed=seed, jobs=jobs))
        sol = res.solution
        info = {"iterations": res.iterations, "converged": res.converged,
                "trace": [o.total for o in res.trace]}
    else:
        res = exact_solve(plan_inst, time_budget)
        sol = res.solution
        info = {"optimal": res.optimal, "evaluated": res.evaluated, "expected": res.expected}
    return SolveOutcome(sol, evaluate_objective(inst, sol), info)


@dataclass(frozen=True)
class BenchmarkGrid:
    robot_counts: tuple[int, ...]
    human_counts: tuple[int, ...]
    poi_counts: tuple[int, ...]
    solvers: tuple[str, ...] = ("d-lns",)
    time_budget: float = 120.0
    seeds: tuple[int, ...] = (0,)
    max_iterations: int = 50
    generator: GeneratorParams = GeneratorParams()

    def __post_init__(self):
        for name in ("robot_counts", "human_counts", "poi_counts", "solvers", "seeds"):
            value = tuple(getattr(self, name))
            if not value:
                raise ValueError(f"{name} must be non-empty")
            object.__setattr__(self, name, value)
        bad = [s for s in self.solvers if s not in SOLVERS]
        if bad:
            raise ValueError(f"unknown solvers {bad}")
        if not self.time_budget > 0:
            raise ValueError(f"time_budget must be positive, got {self.time_budget}")

    @classmethod
    def from_dict(cls, obj: dict) -> "BenchmarkGrid":
        obj = dict(obj)
        gen = obj.pop("generator", None) or {}
        known = {f.name for f in fields(cls)}
        unknown = set(obj) - known
        if unknown:
            raise ValueError(f"unknown grid fields: {sorted(unknown)}")
        return cls(**obj, generator=GeneratorParams(**gen))

    def to_dict(self) -> dict:
        out = asdict(self)
        out = {k: list(v) if isinstance(v, tuple) else v for k, v in out.items()}
        return out

    def cases(self):
        """(robots, humans, pois, solver, seed) in report order."""
        for r, h, p in itertools.product(self.robot_counts, self.human_counts, self.poi_counts):
            for solver in self.solvers:
                for seed in self.seeds:
                    yield r, h, p, solver, seed


def _run_case(grid: BenchmarkGrid, case) -> tuple:
    r, h, p, solver, seed = case
    inst = generate_instance(r, h, p, seed, grid.generator)
    if solver.endswith("-es") and not within_guard(inst):
        return (r, h, p, seed, solver, "", "", 0, "skipped:size-guard")
    started = time.perf_counter()
    try:
        out = solve(inst, solver, seed=seed, max_iter=grid.max_iterations,
                    time_budget=grid.time_budget)
    except Exception as exc:  # recorded as a row, the grid carries on
        wall = round((time.perf_counter() - started) * 1000)
        return (r, h, p, seed, solver, "", "", wall, f"error:{type(exc).__name__}")
    wall = round((time.perf_counter() - started) * 1000)
    obj = out.objective
    nontrivial = obj.dropped_requests < inst.total_requests
    return (r, h, p, seed, solver, repr(obj.total), obj.dropped_requests, wall,
            "true" if nontrivial else "false")


def run_benchmark(grid: BenchmarkGrid, jobs: int = 1) -> list[tuple]:
    """One row per (sizes, solver, seed), in grid order whatever ``jobs`` is."""
    cases = list(grid.cases())
    if jobs <= 1:
        return [_run_case(grid, c) for c in cases]
    with ProcessPoolExecutor(jobs) as pool:
        return list(pool.map(_run_case, itertools.repeat(grid), cases))


def report_to_csv(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(REPORT_HEADER)
    w.writerows(rows)
    return buf.getvalue()
