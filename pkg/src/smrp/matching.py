"""Exact capacitated assignment of humans to robots.

The matching sub-problem is a transportation problem: every human supplies one
unit, robot ``k`` absorbs at most ``caps[k]`` units and sending human ``l`` to
robot ``k`` costs ``c[l, k]`` (the number of that human's requests the robot's
route misses).  It is solved by successive shortest augmenting paths, adding
one human at a time.

With humans ``0..l-1`` optimally placed, the residual network has no negative
cycle.  Adding human ``l`` amounts to finding the cheapest way to absorb one
more unit, i.e. a shortest path from ``l`` through a chain of reassignments
(robot ``k`` hands one of its humans to robot ``k'``) ending at a robot with
spare capacity.  Paths only ever pass through robot nodes, so each step is a
Bellman-Ford pass on an ``n_robots x n_robots`` graph whose arc ``k -> k'``
weighs ``min over l' in team(k) of c[l', k'] - c[l', k]``.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np

from .model import Instance, InfeasibleError, Matching, Route


def build_cost_matrix(inst: Instance, routes: Sequence[Route]) -> np.ndarray:
    """``c[l, k]`` = number of human ``l``'s requested POIs missing from robot ``k``'s route."""
    on_route = np.zeros((inst.n_robots, inst.n_pois), dtype=np.int64)
    for k, r in enumerate(routes):
        on_route[k, list(r.pois)] = 1
    req = inst.requests
    return req.sum(axis=1, keepdims=True) - req @ on_route.T


def _reassignment_arcs(c: np.ndarray, teams: list[list[int]], n_robots: int):
    """Cheapest single reassignment between every ordered pair of robots.

    Returns ``(weight, via)`` where ``weight[k, k2]`` is the cost change of
    moving one human from ``k`` to ``k2`` and ``via[k, k2]`` that human (lowest
    index on ties).  Missing arcs have weight ``inf``.
    """
    weight = np.full((n_robots, n_robots), np.inf)
    via = np.full((n_robots, n_robots), -1, dtype=np.int64)
    for k, members in enumerate(teams):
        if not members:
            continue
        idx = np.asarray(members)
        delta = c[idx] - c[idx, k][:, None]
        best = delta.argmin(axis=0)
        weight[k] = delta[best, np.arange(n_robots)]
        via[k] = idx[best]
    np.fill_diagonal(weight, np.inf)
    return weight, via


def solve_matching(c, caps) -> Matching:
    """Minimum-cost assignment of every human to a robot under team caps.

    Ties are broken toward the lowest robot index, then the lowest human index.

    >>> solve_matching([[0, 5], [5, 0]], [1, 1]).assignment
    (0, 1)
    """
    c = np.asarray(c)
    caps = np.asarray(caps, dtype=np.int64)
    n_humans, n_robots = c.shape
    if caps.shape != (n_robots,):
        raise ValueError(f"caps has shape {caps.shape}, expected ({n_robots},)")
    deficit = n_humans - int(caps.sum())
    if deficit > 0:
        raise InfeasibleError(
            f"team caps hold {int(caps.sum())} humans but {n_humans} must be matched "
            f"(deficit {deficit})")

    cf = c.astype(np.float64)
    assignment = np.full(n_humans, -1, dtype=np.int64)
    teams: list[list[int]] = [[] for _ in range(n_robots)]
    load = np.zeros(n_robots, dtype=np.int64)

    for l in range(n_humans):
        weight, via = _reassignment_arcs(cf, teams, n_robots)
        dist = cf[l].copy()
        pred = np.full(n_robots, -1, dtype=np.int64)
        # Bellman-Ford over robots; strict improvements keep the lowest-index
        # predecessor among equal-cost paths
        for _ in range(n_robots):
            cand = dist[:, None] + weight
            src = cand.argmin(axis=0)
            best = cand[src, np.arange(n_robots)]
            better = best < dist
            if not better.any():
                break
            dist = np.where(better, best, dist)
            pred = np.where(better, src, pred)

        open_ = load < caps
        target = int(np.flatnonzero(open_)[dist[open_].argmin()])

        # walk the chain back: each hop moves one human forward
        k = target
        moved = set()
        while pred[k] >= 0:
            k_prev = int(pred[k])
            h = int(via[k_prev, k])
            if h in moved:  # pragma: no cover - would mean a negative cycle
                raise RuntimeError("negative cycle in matching residual network")
            moved.add(h)
            teams[k_prev].remove(h)
            teams[k].append(h)
            assignment[h] = k
            k = k_prev
        teams[k].append(l)
        assignment[l] = k
        load[target] += 1

    return Matching(tuple(int(a) for a in assignment))


def matching_cost(c, m: Matching) -> float:
    c = np.asarray(c)
    return c[np.arange(len(m.assignment)), list(m.assignment)].sum().item()
