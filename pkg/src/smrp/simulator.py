"""Abstract stochastic execution of a plan.

A travel leg with nominal time ``m`` is walked as ``n = ceil(m / step_seconds)``
useful actions.  Each action is correct with probability ``correct_action_rate``;
wasted actions before the ``n``-th correct one follow a negative binomial law,
and the leg takes ``m * (1 + wasted / n)``, i.e. ``m / rate`` on average.  Visit
times are drawn from ``N(m, (visit_std_fraction * m)^2)`` and clipped at zero.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from .model import Instance, Solution

CSV_HEADER = ("rate", "robot", "mean_time", "std_time", "satisfy_fraction")


@dataclass(frozen=True)
class SimConfig:
    correct_action_rate: float = 1.0
    visit_std_fraction: float = 0.0
    trials: int = 1000
    seed: int = 0
    step_seconds: float = 1.0

    def __post_init__(self):
        if not 0.0 <= self.correct_action_rate <= 1.0:
            raise ValueError(f"correct_action_rate must lie in [0, 1], got {self.correct_action_rate}")
        if self.visit_std_fraction < 0:
            raise ValueError(f"visit_std_fraction must be >= 0, got {self.visit_std_fraction}")
        if self.trials < 1:
            raise ValueError(f"trials must be >= 1, got {self.trials}")
        if not self.step_seconds > 0:
            raise ValueError(f"step_seconds must be positive, got {self.step_seconds}")


@dataclass(frozen=True)
class SimResult:
    times: np.ndarray       # (n_robots, trials) realised tour times in seconds
    satisfied: np.ndarray   # (n_robots, trials) tour time <= time limit

    def mean_time(self, k: int) -> float:
        return float(self.times[k].mean())

    def std_time(self, k: int) -> float:
        return float(self.times[k].std())

    def satisfy_fraction(self, k: int) -> float:
        return float(self.satisfied[k].mean())


def _robot_times(inst: Instance, k: int, pois: Sequence[int], cfg: SimConfig) -> np.ndarray:
    trials = cfg.trials
    t = np.zeros(trials)
    if not pois:
        return t
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence([cfg.seed, k])))
    rate = cfg.correct_action_rate
    tm, vm = inst.travel_mean[k], inst.visit_mean[k]
    nodes = [inst.start, *pois, inst.terminal]
    # accumulate in path order so that a noise-free run reproduces the
    # planner's expected tour time exactly
    for idx, (a, b) in enumerate(zip(nodes[:-1], nodes[1:])):
        leg = float(tm[a, b])
        if rate < 1.0 and leg > 0.0:
            steps = max(1, math.ceil(leg / cfg.step_seconds))
            wasted = rng.negative_binomial(steps, rate, size=trials)
            t += leg * (1.0 + wasted / steps)
        else:
            t += leg
        if idx < len(pois):
            nominal = float(vm[b])
            if cfg.visit_std_fraction > 0.0 and nominal > 0.0:
                draw = rng.normal(nominal, cfg.visit_std_fraction * nominal, size=trials)
                t += np.maximum(draw, 0.0)
            else:
                t += nominal
    return t


def simulate(inst: Instance, sol: Solution, cfg: SimConfig) -> SimResult:
    """Realised tour times for every robot over ``cfg.trials`` trials.

    Each robot uses its own stream derived from ``(seed, robot)``.
    """
    if cfg.correct_action_rate == 0.0:
        raise ValueError("correct_action_rate 0 never completes a travel leg")
    times = np.stack([_robot_times(inst, k, r.pois, cfg) for k, r in enumerate(sol.routes)])
    satisfied = times <= inst.time_limit[:, None]
    return SimResult(times, satisfied)


def parametric_study(inst: Instance, sol: Solution, rates: Sequence[float],
                     template: SimConfig = SimConfig()) -> list[tuple[float, int, float, float, float]]:
    """One summary row ``(rate, robot, mean_time, std_time, satisfy_fraction)``
    per rate and robot, rates in the given order."""
    if not rates:
        raise ValueError("rates must be non-empty")
    rows = []
    for rate in rates:
        res = simulate(inst, sol, replace(template, correct_action_rate=float(rate)))
        for k in range(inst.n_robots):
            rows.append((float(rate), k, res.mean_time(k), res.std_time(k), res.satisfy_fraction(k)))
    return rows


def rows_to_csv(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for rate, robot, mean, std, frac in rows:
        w.writerow([f"{rate:.6g}", robot, f"{mean:.6g}", f"{std:.6g}", f"{frac:.6g}"])
    return buf.getvalue()
