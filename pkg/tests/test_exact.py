import numpy as np
import pytest

from conftest import make_instance
from oracles import exact_by_double_enumeration
from smrp.exact import cap_feasible_assignments, exact_solve
from smrp.generator import GeneratorParams, generate_instance
from smrp.model import SizeGuardError, check_feasibility


def test_single_robot_everything_fits():
    inst = generate_instance(1, 3, 4, seed=1, params=GeneratorParams(time_limit=2000))
    res = exact_solve(inst)
    assert res.optimal
    assert res.objective.dropped_requests == 0
    assert check_feasibility(inst, res.solution) == []


def test_limit_below_every_single_visit():
    travel = [[0, 9, 30, 30], [9, 0, 30, 30], [30, 30, 0, 1], [30, 30, 1, 0]]
    inst = make_instance(travel, [5, 5], [[1, 1], [0, 1]], time_limit=60)
    res = exact_solve(inst)
    assert res.optimal
    assert all(r.empty for r in res.solution.routes)
    assert res.objective.dropped_requests == 3
    assert not res.nontrivial


def test_size_guard():
    with pytest.raises(SizeGuardError):
        exact_solve(generate_instance(4, 2, 2, seed=0))
    with pytest.raises(SizeGuardError):
        exact_solve(generate_instance(1, 2, 7, seed=0))


def test_matches_double_enumeration():
    rng = np.random.default_rng(314)
    for _ in range(8):
        params = GeneratorParams(std_frac=float(rng.choice([0.0, 0.3])),
                                 time_limit=float(rng.uniform(150, 350)), req_prob=0.5)
        inst = generate_instance(2, 4, 4, int(rng.integers(2**31)), params)
        res = exact_solve(inst)
        assert res.optimal
        assert res.objective.total == pytest.approx(exact_by_double_enumeration(inst), rel=1e-12)


def test_enumeration_count_audit():
    inst = generate_instance(3, 5, 3, seed=4, params=GeneratorParams(cap_slack=0))
    res = exact_solve(inst)
    caps = inst.team_cap
    assert res.expected == len(cap_feasible_assignments(5, caps))
    assert res.evaluated == res.expected and res.optimal
    # caps of 2 each: 3^5 assignments minus those putting 3+ humans on one robot
    assert res.expected == 90


def test_zero_budget_returns_trivial():
    inst = generate_instance(2, 3, 3, seed=0)
    res = exact_solve(inst, time_budget=-1.0)
    assert not res.optimal
    assert not res.nontrivial
    assert res.evaluated == 0
    assert res.objective.dropped_requests == inst.total_requests
