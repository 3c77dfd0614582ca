import numpy as np
import pytest

from smrp.model import Instance


def make_instance(travel, visit, requests, time_limit, time_margin=0.0, team_cap=None,
                  travel_std=None, visit_std=None, weight_dropped=1000.0, weight_time=1.0):
    """Build a single-table instance from plain nested lists (shared by all robots)."""
    travel = np.asarray(travel, dtype=float)
    visit = np.asarray(visit, dtype=float)
    if travel.ndim == 2:
        travel = travel[None]
    if visit.ndim == 1:
        visit = visit[None]
    requests = np.asarray(requests)
    nr = travel.shape[0]
    return Instance(
        n_robots=nr, n_humans=requests.shape[0], n_pois=visit.shape[1],
        requests=requests,
        travel_mean=travel,
        travel_std=np.zeros_like(travel) if travel_std is None else np.broadcast_to(travel_std, travel.shape),
        visit_mean=visit,
        visit_std=np.zeros_like(visit) if visit_std is None else np.broadcast_to(visit_std, visit.shape),
        time_limit=np.broadcast_to(np.asarray(time_limit, float), (nr,)),
        time_margin=np.broadcast_to(np.asarray(time_margin, float), (nr,)),
        team_cap=np.full(nr, requests.shape[0]) if team_cap is None else team_cap,
        weight_dropped=weight_dropped, weight_time=weight_time,
    )


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)


_VERDICTS: list[str] = []


@pytest.fixture
def verdict():
    """Record one PASS/FAIL line; all lines are echoed in the terminal summary."""
    def record(label, ok, detail=""):
        line = f"{'PASS' if ok else 'FAIL'}  {label}" + (f"  ({detail})" if detail else "")
        _VERDICTS.append(line)
        print(line)
        return ok
    return record


def pytest_terminal_summary(terminalreporter):
    if _VERDICTS:
        terminalreporter.section("acceptance criteria")
        for line in _VERDICTS:
            terminalreporter.write_line(line)
