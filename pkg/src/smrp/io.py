"""JSON encoding of instances and solutions (``format_version`` 1).

Instance files use the field names of :class:`~smrp.model.Instance`; every
time entry is a ``{"mean": m, "std": s}`` object and the travel table is
indexed ``[robot][from_node][to_node]`` with the start and terminal nodes as
the last two node indices.  Solution files hold ``routes`` (one POI list per
robot) and ``assignment`` (one robot index per human).
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .model import Instance, Solution, StructureError

FORMAT_VERSION = 1


def _dist_table(mean: np.ndarray, std: np.ndarray):
    if mean.ndim == 1:
        return [{"mean": float(m), "std": float(s)} for m, s in zip(mean, std)]
    return [_dist_table(m, s) for m, s in zip(mean, std)]


def _split_table(table, shape) -> tuple[np.ndarray, np.ndarray]:
    flat = np.asarray(table, dtype=object).reshape(-1)
    if flat.size != int(np.prod(shape)):
        raise StructureError(f"time table has {flat.size} entries, expected shape {shape}")
    mean = np.array([float(d["mean"]) for d in flat]).reshape(shape)
    std = np.array([float(d["std"]) for d in flat]).reshape(shape)
    return mean, std


def instance_to_dict(inst: Instance) -> dict:
    return {
        "format_version": FORMAT_VERSION,
        "n_robots": inst.n_robots,
        "n_humans": inst.n_humans,
        "n_pois": inst.n_pois,
        "requests": inst.requests.tolist(),
        "travel": _dist_table(inst.travel_mean, inst.travel_std),
        "visit": _dist_table(inst.visit_mean, inst.visit_std),
        "time_limit": inst.time_limit.tolist(),
        "time_margin": inst.time_margin.tolist(),
        "team_cap": inst.team_cap.tolist(),
        "weight_dropped": inst.weight_dropped,
        "weight_time": inst.weight_time,
    }


def _check_version(obj: dict) -> None:
    version = obj.get("format_version")
    if version != FORMAT_VERSION:
        raise StructureError(f"unsupported format_version {version!r}, expected {FORMAT_VERSION}")


def instance_from_dict(obj: dict) -> Instance:
    _check_version(obj)
    nr, nh, npoi = int(obj["n_robots"]), int(obj["n_humans"]), int(obj["n_pois"])
    travel_mean, travel_std = _split_table(obj["travel"], (nr, npoi + 2, npoi + 2))
    visit_mean, visit_std = _split_table(obj["visit"], (nr, npoi))
    return Instance(
        n_robots=nr, n_humans=nh, n_pois=npoi,
        requests=obj["requests"],
        travel_mean=travel_mean, travel_std=travel_std,
        visit_mean=visit_mean, visit_std=visit_std,
        time_limit=obj["time_limit"], time_margin=obj["time_margin"],
        team_cap=obj["team_cap"],
        weight_dropped=obj["weight_dropped"], weight_time=obj["weight_time"],
    )


def solution_to_dict(sol: Solution) -> dict:
    return {
        "format_version": FORMAT_VERSION,
        "routes": sol.route_lists(),
        "assignment": list(sol.matching.assignment),
    }


def solution_from_dict(obj: dict) -> Solution:
    _check_version(obj)
    return Solution.from_lists(obj["routes"], obj["assignment"])


def dumps(obj: dict) -> str:
    return json.dumps(obj, separators=(",", ":")) + "\n"


def save_instance(inst: Instance, path: str | Path) -> None:
    Path(path).write_text(dumps(instance_to_dict(inst)))


def load_instance(path: str | Path) -> Instance:
    return instance_from_dict(json.loads(Path(path).read_text()))


def save_solution(sol: Solution, path: str | Path) -> None:
    Path(path).write_text(dumps(solution_to_dict(sol)))


def load_solution(path: str | Path) -> Solution:
    return solution_from_dict(json.loads(Path(path).read_text()))
