"""Random instance generator.

POIs, the start and the terminal are placed uniformly in the unit square;
travel time is Euclidean distance times ``seconds_per_unit`` (the same table
for every robot), visit times are uniform in ``[visit_min, visit_max]`` and every
standard deviation is ``std_frac`` times its mean.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .model import Instance


@dataclass(frozen=True)
class GeneratorParams:
    std_frac: float = 0.0
    req_prob: float = 0.3
    seconds_per_unit: float = 100.0
    visit_min: float = 20.0
    visit_max: float = 60.0
    time_limit: float = 600.0
    margin_frac: float = 0.1
    cap_slack: int = 1
    weight_dropped: float = 1000.0
    weight_time: float = 1.0


def generate_instance(n_robots: int, n_humans: int, n_pois: int, seed: int,
                      params: GeneratorParams = GeneratorParams()) -> Instance:
    if min(n_robots, n_humans, n_pois) < 1:
        raise ValueError("instance sizes must be positive")
    rng = np.random.Generator(np.random.PCG64(seed))
    xy = rng.random((n_pois + 2, 2))  # POIs, then start, then terminal
    dist = np.sqrt(((xy[:, None, :] - xy[None, :, :]) ** 2).sum(axis=-1))
    travel = dist * params.seconds_per_unit
    np.fill_diagonal(travel, 0.0)
    visit = rng.uniform(params.visit_min, params.visit_max, size=n_pois)
    requests = (rng.random((n_humans, n_pois)) < params.req_prob).astype(np.int64)

    travel_mean = np.broadcast_to(travel, (n_robots, n_pois + 2, n_pois + 2))
    visit_mean = np.broadcast_to(visit, (n_robots, n_pois))
    cap = math.ceil(n_humans / n_robots) + params.cap_slack
    return Instance(
        n_robots=n_robots, n_humans=n_humans, n_pois=n_pois,
        requests=requests,
        travel_mean=travel_mean, travel_std=travel_mean * params.std_frac,
        visit_mean=visit_mean, visit_std=visit_mean * params.std_frac,
        time_limit=np.full(n_robots, params.time_limit),
        time_margin=np.full(n_robots, params.time_limit * params.margin_frac),
        team_cap=np.full(n_robots, cap),
        weight_dropped=params.weight_dropped, weight_time=params.weight_time,
    )
