import dataclasses

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from oracles import brute_force_matching, random_small_instance, recount_cost_matrix
from smrp.generator import generate_instance
from smrp.matching import build_cost_matrix, matching_cost, solve_matching
from smrp.model import InfeasibleError, Route, Solution, check_feasibility


def test_cost_superset_route_is_zero():
    inst = generate_instance(1, 1, 3, seed=0)
    req = np.array([[1, 1, 0]])  # human requests POIs 0 and 1
    inst = dataclasses.replace(inst, requests=req)
    assert build_cost_matrix(inst, [Route(0, (0, 1, 2))])[0, 0] == 0
    assert build_cost_matrix(inst, [Route(0, ())])[0, 0] == 2


def test_cost_matrix_matches_recount(rng):
    for _ in range(20):
        inst = random_small_instance(rng)
        routes = [tuple(rng.permutation(inst.n_pois)[:rng.integers(0, inst.n_pois + 1)])
                  for _ in range(inst.n_robots)]
        c = build_cost_matrix(inst, [Route(k, r) for k, r in enumerate(routes)])
        np.testing.assert_array_equal(c, recount_cost_matrix(inst, routes))
        assert (c >= 0).all() and (c <= inst.requests.sum(axis=1)[:, None]).all()


def test_zero_costs_any_feasible_matching():
    m = solve_matching(np.zeros((5, 2), dtype=int), [3, 3])
    assert len(m.assignment) == 5
    assert max(m.team_sizes(2)) <= 3


def test_forced_by_caps():
    m = solve_matching([[0, 5], [5, 0]], [1, 1])
    assert m.assignment == (0, 1)


def test_cap_deficit_raises():
    with pytest.raises(InfeasibleError, match="deficit 1"):
        solve_matching(np.zeros((3, 2)), [1, 1])


def test_tie_break_prefers_low_robot_index():
    m = solve_matching(np.zeros((3, 3), dtype=int), [3, 3, 3])
    assert m.assignment == (0, 0, 0)


def test_reassignment_chain_is_used():
    # human 0 is cheap anywhere; human 1 only fits robot 0 which has one slot
    c = [[0, 1], [0, 9]]
    m = solve_matching(c, [1, 1])
    assert m.assignment == (1, 0)
    assert matching_cost(c, m) == 1


def test_matches_brute_force(rng):
    for _ in range(300):
        nh, nr = int(rng.integers(1, 7)), int(rng.integers(1, 4))
        c = rng.integers(0, 6, size=(nh, nr))
        caps = rng.integers(1, nh + 1, size=nr)
        if caps.sum() < nh:
            caps[0] += nh - caps.sum()
        m = solve_matching(c, caps)
        assert max(m.team_sizes(nr)) <= caps.max()
        assert all(m.team_sizes(nr) <= caps)
        assert matching_cost(c, m) == brute_force_matching(c, caps)


def test_output_passes_model_checker(rng):
    for _ in range(30):
        inst = random_small_instance(rng)
        if inst.team_cap.sum() < inst.n_humans:
            continue
        routes = [Route(k, ()) for k in range(inst.n_robots)]
        m = solve_matching(build_cost_matrix(inst, routes), inst.team_cap)
        assert check_feasibility(inst, Solution(tuple(routes), m)) == []


cost_problems = st.integers(1, 6).flatmap(lambda nh: st.integers(1, 3).flatmap(
    lambda nr: st.tuples(
        st.lists(st.lists(st.integers(0, 5), min_size=nr, max_size=nr), min_size=nh, max_size=nh),
        st.lists(st.integers(1, nh), min_size=nr, max_size=nr),
    )))


def _feasible(caps, nh):
    caps = list(caps)
    caps[0] += max(0, nh - sum(caps))
    return caps


@settings(max_examples=150, deadline=None)
@given(cost_problems, st.sampled_from([2, 3, 7]))
def test_scaling_costs_keeps_assignment(problem, factor):
    c, caps = problem
    c = np.array(c)
    caps = _feasible(caps, len(c))
    base = solve_matching(c, caps)
    scaled = solve_matching(c * factor, caps)
    assert scaled.assignment == base.assignment
    assert matching_cost(c * factor, scaled) == factor * matching_cost(c, base)


@settings(max_examples=150, deadline=None)
@given(cost_problems, st.data())
def test_row_shift_keeps_assignment(problem, data):
    c, caps = problem
    c = np.array(c)
    caps = _feasible(caps, len(c))
    row = data.draw(st.integers(0, len(c) - 1))
    shift = data.draw(st.integers(1, 20))
    shifted = c.copy()
    shifted[row] += shift
    assert solve_matching(shifted, caps).assignment == solve_matching(c, caps).assignment
