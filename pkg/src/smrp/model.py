"""Domain types for the matching-and-routing problem, objective evaluation
and an independent constraint checker.

Node indexing is 0-based: POIs are ``0 .. n_pois-1``, the start node is
``n_pois`` and the terminal node is ``n_pois + 1``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .stochastic import TimeDist, expected_overtime

__all__ = [
    "TimeDist", "Instance", "Route", "Matching", "Solution", "ObjectiveBreakdown",
    "Violation", "StructureError", "InfeasibleError", "SizeGuardError",
    "validate_instance", "route_time_distribution", "route_moments",
    "evaluate_objective", "check_feasibility", "dropped_requests",
]

DEFAULT_WEIGHT_RATIO = 100.0


class StructureError(ValueError):
    """A solution or route does not fit the instance it is evaluated against."""


class InfeasibleError(ValueError):
    """The instance admits no solution (team caps cannot hold every human)."""


class SizeGuardError(ValueError):
    """An exact method was asked to solve an instance above its size guard."""


def _frozen(a, dtype) -> np.ndarray:
    arr = np.array(a, dtype=dtype)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class Instance:
    """A problem instance.

    Time tables are stored as separate mean/std arrays:
    ``travel_mean[k, i, j]`` is the expected time for robot ``k`` to travel
    node ``i`` to node ``j`` and ``visit_mean[k, i]`` the expected time to visit
    POI ``i``.  Diagonal travel entries are unused.
    """

    n_robots: int
    n_humans: int
    n_pois: int
    requests: np.ndarray
    travel_mean: np.ndarray
    travel_std: np.ndarray
    visit_mean: np.ndarray
    visit_std: np.ndarray
    time_limit: np.ndarray
    time_margin: np.ndarray
    team_cap: np.ndarray
    weight_dropped: float = 1000.0
    weight_time: float = 1.0

    def __post_init__(self):
        set_ = object.__setattr__
        set_(self, "requests", _frozen(self.requests, np.int64))
        for name in ("travel_mean", "travel_std", "visit_mean", "visit_std",
                     "time_limit", "time_margin"):
            set_(self, name, _frozen(getattr(self, name), np.float64))
        set_(self, "team_cap", _frozen(self.team_cap, np.int64))
        set_(self, "weight_dropped", float(self.weight_dropped))
        set_(self, "weight_time", float(self.weight_time))

    @property
    def start(self) -> int:
        return self.n_pois

    @property
    def terminal(self) -> int:
        return self.n_pois + 1

    @property
    def n_nodes(self) -> int:
        return self.n_pois + 2

    def travel(self, k: int, i: int, j: int) -> TimeDist:
        return TimeDist(float(self.travel_mean[k, i, j]), float(self.travel_std[k, i, j]))

    def visit(self, k: int, i: int) -> TimeDist:
        return TimeDist(float(self.visit_mean[k, i]), float(self.visit_std[k, i]))

    def threshold(self, k: int) -> float:
        """Tour time beyond which the overtime penalty starts."""
        return float(self.time_limit[k] - self.time_margin[k])

    @property
    def total_requests(self) -> int:
        return int(self.requests.sum())

    def deterministic(self) -> "Instance":
        """Copy with every time standard deviation set to zero."""
        return Instance(
            self.n_robots, self.n_humans, self.n_pois, self.requests,
            self.travel_mean, np.zeros_like(self.travel_std),
            self.visit_mean, np.zeros_like(self.visit_std),
            self.time_limit, self.time_margin, self.team_cap,
            self.weight_dropped, self.weight_time,
        )


@dataclass(frozen=True)
class Route:
    robot: int
    pois: tuple[int, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "pois", tuple(int(p) for p in self.pois))

    def __len__(self):
        return len(self.pois)

    @property
    def empty(self) -> bool:
        return not self.pois


@dataclass(frozen=True)
class Matching:
    assignment: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "assignment", tuple(int(k) for k in self.assignment))

    def team(self, k: int) -> list[int]:
        return [l for l, r in enumerate(self.assignment) if r == k]

    def team_sizes(self, n_robots: int) -> np.ndarray:
        return np.bincount(np.asarray(self.assignment, dtype=np.int64), minlength=n_robots)


@dataclass(frozen=True)
class Solution:
    routes: tuple[Route, ...]
    matching: Matching

    def __post_init__(self):
        object.__setattr__(self, "routes", tuple(self.routes))

    @classmethod
    def from_lists(cls, routes: Sequence[Sequence[int]], assignment: Sequence[int]) -> "Solution":
        return cls(tuple(Route(k, r) for k, r in enumerate(routes)), Matching(assignment))

    def route_lists(self) -> list[list[int]]:
        return [list(r.pois) for r in self.routes]


@dataclass(frozen=True)
class ObjectiveBreakdown:
    dropped_requests: int
    expected_overtime_penalty: float
    total: float

    def to_json(self) -> dict:
        return {
            "dropped_requests": self.dropped_requests,
            "expected_overtime_penalty": self.expected_overtime_penalty,
            "total": self.total,
        }


@dataclass(frozen=True)
class Violation:
    constraint: str
    index: int | None
    detail: str = field(default="", compare=False)

    def __str__(self):
        where = "" if self.index is None else f"[{self.index}]"
        return f"{self.constraint}{where}: {self.detail}"

    def to_json(self) -> dict:
        return {"constraint": self.constraint, "index": self.index, "detail": self.detail}


def validate_instance(inst: Instance, min_weight_ratio: float = DEFAULT_WEIGHT_RATIO) -> list[str]:
    """Return every structural problem with ``inst``; an empty list means valid.

    A weight ratio ``weight_dropped / weight_time`` below ``min_weight_ratio``
    only raises a ``UserWarning``.
    """
    out: list[str] = []
    nr, nh, npoi = inst.n_robots, inst.n_humans, inst.n_pois
    for name, value in (("n_robots", nr), ("n_humans", nh), ("n_pois", npoi)):
        if int(value) != value or value < 1:
            out.append(f"{name} must be a positive integer, got {value}")
    if out:
        return out
    nn = npoi + 2

    expected_shapes = {
        "requests": (nh, npoi),
        "travel_mean": (nr, nn, nn),
        "travel_std": (nr, nn, nn),
        "visit_mean": (nr, npoi),
        "visit_std": (nr, npoi),
        "time_limit": (nr,),
        "time_margin": (nr,),
        "team_cap": (nr,),
    }
    shape_ok = True
    for name, shape in expected_shapes.items():
        got = getattr(inst, name).shape
        if got != shape:
            out.append(f"{name} has shape {got}, expected {shape}")
            shape_ok = False
    if not shape_ok:
        return out

    if not np.isin(inst.requests, (0, 1)).all():
        out.append("requests must be a binary matrix")
    off_diag = ~np.eye(nn, dtype=bool)
    for name in ("travel_mean", "travel_std"):
        arr = getattr(inst, name)[:, off_diag]
        if not np.isfinite(arr).all() or (arr < 0).any():
            out.append(f"{name} must be finite and non-negative off the diagonal")
    for name in ("visit_mean", "visit_std"):
        arr = getattr(inst, name)
        if not np.isfinite(arr).all() or (arr < 0).any():
            out.append(f"{name} must be finite and non-negative")
    for k in range(nr):
        lim, margin = inst.time_limit[k], inst.time_margin[k]
        if not lim > 0:
            out.append(f"robot {k}: time_limit must be positive, got {lim}")
        if not margin >= 0:
            out.append(f"robot {k}: time_margin must be non-negative, got {margin}")
        elif not margin < lim:
            out.append(f"robot {k}: time_margin {margin} must be below time_limit {lim}")
        if inst.team_cap[k] < 1:
            out.append(f"robot {k}: team_cap must be a positive integer, got {inst.team_cap[k]}")
    if not inst.weight_dropped > 0:
        out.append(f"weight_dropped must be positive, got {inst.weight_dropped}")
    if not inst.weight_time > 0:
        out.append(f"weight_time must be positive, got {inst.weight_time}")
    elif inst.weight_dropped < min_weight_ratio * inst.weight_time:
        warnings.warn(
            f"weight_dropped={inst.weight_dropped} is less than {min_weight_ratio:g}x "
            f"weight_time={inst.weight_time}; dropped requests may no longer dominate",
            UserWarning, stacklevel=2,
        )
    return out


def _check_route(inst: Instance, k: int, pois: Sequence[int]) -> None:
    seen = set()
    for p in pois:
        if not 0 <= p < inst.n_pois:
            raise StructureError(f"robot {k}: POI index {p} out of range")
        if p in seen:
            raise StructureError(f"robot {k}: POI {p} appears twice in the route")
        seen.add(p)


def route_moments(inst: Instance, k: int, pois: Sequence[int]) -> tuple[float, float]:
    """(mean, variance) of the tour time along ``s -> pois... -> u``.

    Terms are accumulated in path order; every other component that needs a
    canonical tour time goes through here.
    """
    if not pois:
        return 0.0, 0.0
    tm, tv = inst.travel_mean[k], inst.travel_std[k]
    vm, vs = inst.visit_mean[k], inst.visit_std[k]
    mean = 0.0
    var = 0.0
    prev = inst.start
    for p in pois:
        mean += float(tm[prev, p])
        var += float(tv[prev, p]) ** 2
        mean += float(vm[p])
        var += float(vs[p]) ** 2
        prev = p
    mean += float(tm[prev, inst.terminal])
    var += float(tv[prev, inst.terminal]) ** 2
    return mean, var


def route_time_distribution(inst: Instance, k: int, r: Route | Sequence[int]) -> TimeDist:
    pois = r.pois if isinstance(r, Route) else tuple(r)
    _check_route(inst, k, pois)
    mean, var = route_moments(inst, k, pois)
    return TimeDist(mean, math.sqrt(var))


def _check_solution_shape(inst: Instance, sol: Solution) -> None:
    if len(sol.routes) != inst.n_robots:
        raise StructureError(f"solution has {len(sol.routes)} routes for {inst.n_robots} robots")
    if len(sol.matching.assignment) != inst.n_humans:
        raise StructureError(
            f"assignment has {len(sol.matching.assignment)} entries for {inst.n_humans} humans")
    for k, r in enumerate(sol.routes):
        if r.robot != k:
            raise StructureError(f"route at position {k} belongs to robot {r.robot}")


def dropped_requests(inst: Instance, routes: Sequence[Route], assignment: Sequence[int]) -> int:
    visited = np.zeros((inst.n_robots, inst.n_pois), dtype=bool)
    for k, r in enumerate(routes):
        visited[k, list(r.pois)] = True
    rows = visited[np.asarray(assignment, dtype=np.int64)]
    return int((inst.requests.astype(bool) & ~rows).sum())


def evaluate_objective(inst: Instance, sol: Solution) -> ObjectiveBreakdown:
    _check_solution_shape(inst, sol)
    for l, k in enumerate(sol.matching.assignment):
        if not 0 <= k < inst.n_robots:
            raise StructureError(f"human {l} assigned to unknown robot {k}")
    penalty = 0.0
    for k, r in enumerate(sol.routes):
        dist = route_time_distribution(inst, k, r)
        penalty += expected_overtime(dist, inst.threshold(k))
    dropped = dropped_requests(inst, sol.routes, sol.matching.assignment)
    total = inst.weight_dropped * dropped + inst.weight_time * penalty
    return ObjectiveBreakdown(dropped, penalty, total)


def check_feasibility(inst: Instance, sol: Solution) -> list[Violation]:
    """Report every violated constraint of ``sol``; an empty list means feasible.

    Routes are POI sequences, so flow conservation, the single-path rule and
    x/y consistency hold whenever each route lists valid, distinct POIs; those
    preconditions are what gets checked here.
    """
    out: list[Violation] = []
    if len(sol.routes) != inst.n_robots:
        out.append(Violation("structure", None,
                             f"{len(sol.routes)} routes for {inst.n_robots} robots"))
    for k, r in enumerate(sol.routes[:inst.n_robots]):
        if r.robot != k:
            out.append(Violation("structure", k, f"route belongs to robot {r.robot}"))
        bad = [p for p in r.pois if not 0 <= p < inst.n_pois]
        if bad:
            out.append(Violation("flow", k, f"POI indices out of range: {bad}"))
            continue
        if len(set(r.pois)) != len(r.pois):
            out.append(Violation("flow", k, "route visits a POI more than once"))
            continue
        mean, _ = route_moments(inst, k, r.pois)
        if mean > inst.time_limit[k]:
            out.append(Violation("time_limit", k,
                                 f"expected tour time {mean:.6g} exceeds limit {inst.time_limit[k]:.6g}"))

    assignment = sol.matching.assignment
    if len(assignment) != inst.n_humans:
        out.append(Violation("assignment", None,
                             f"{len(assignment)} assignments for {inst.n_humans} humans"))
    for l, k in enumerate(assignment):
        if not 0 <= k < inst.n_robots:
            out.append(Violation("assignment", l, f"assigned to unknown robot {k}"))
    counts = np.bincount([k for k in assignment if 0 <= k < inst.n_robots],
                         minlength=inst.n_robots)
    for k in range(inst.n_robots):
        if counts[k] > inst.team_cap[k]:
            out.append(Violation("team_cap", k,
                                 f"team of {counts[k]} exceeds cap {inst.team_cap[k]}"))
    return out
