import dataclasses
import itertools

import numpy as np
import pytest

from conftest import make_instance
from oracles import brute_force_routing, oracle_route_cost, random_small_instance
from smrp.generator import GeneratorParams, generate_instance
from smrp.model import Matching, SizeGuardError, check_feasibility, route_time_distribution
from smrp.routing import (Label, build_demand, exact_routing, pareto_insert, route_cost,
                          route_feasible, solve_routing)


def two_poi_instance(limit=1000.0):
    # POIs 0, 1; start 2; terminal 3.  Symmetric, deterministic.
    travel = [[0, 5, 10, 30],
              [5, 0, 40, 10],
              [10, 40, 0, 0],
              [30, 10, 0, 0]]
    return make_instance(travel, [1, 1], [[1, 1]], time_limit=limit, time_margin=0.0)


def test_demand_counts_team_requests():
    inst = generate_instance(2, 4, 5, seed=3)
    req = np.zeros((4, 5), dtype=int)
    req[0, 3] = req[2, 3] = req[2, 1] = 1
    inst = dataclasses.replace(inst, requests=req)
    m = Matching((0, 1, 0, 1))
    np.testing.assert_array_equal(build_demand(inst, m, 0), [0, 1, 0, 2, 0])
    np.testing.assert_array_equal(build_demand(inst, m, 1), [0, 0, 0, 0, 0])


def test_demand_matches_recount(rng):
    for _ in range(20):
        inst = random_small_instance(rng)
        m = Matching(tuple(rng.integers(0, inst.n_robots, size=inst.n_humans)))
        for k in range(inst.n_robots):
            want = [sum(inst.requests[l, i] for l in range(inst.n_humans) if m.assignment[l] == k)
                    for i in range(inst.n_pois)]
            np.testing.assert_array_equal(build_demand(inst, m, k), want)


def test_zero_demand_gives_empty_route():
    inst = two_poi_instance()
    assert solve_routing(inst, 0, [0, 0], seed=1).pois == ()
    assert exact_routing(inst, 0, [0, 0]).pois == ()


def test_single_forced_poi():
    inst = two_poi_instance()
    r = solve_routing(inst, 0, [1, 0], seed=0)
    assert r.pois == (0,)
    assert route_cost(inst, 0, [1, 0], r.pois) == 0


def test_exact_two_poi_orders():
    inst = two_poi_instance()
    # s->0->1->u = 10+1+5+1+10 = 27, s->1->0->u = 40+1+5+1+30 = 77
    r = exact_routing(inst, 0, [1, 1])
    assert r.pois == (0, 1)
    assert route_cost(inst, 0, [1, 1], r.pois) == 0
    assert solve_routing(inst, 0, [1, 1], seed=3).pois == (0, 1)


def test_exact_respects_time_limit():
    # every s -> i -> u path exceeds 26; the cheapest pair tour takes 27
    assert exact_routing(two_poi_instance(limit=26), 0, [1, 1]).pois == ()
    assert exact_routing(two_poi_instance(limit=27), 0, [1, 1]).pois == (0, 1)
    assert solve_routing(two_poi_instance(limit=26), 0, [1, 1], 0).pois == ()


def test_exact_size_guard():
    inst = generate_instance(1, 1, 13, seed=0)
    with pytest.raises(SizeGuardError):
        exact_routing(inst, 0, np.ones(13, dtype=int))


def test_exact_equals_ordered_subset_enumeration(rng):
    for trial in range(40):
        inst = random_small_instance(rng, max_robots=1, max_humans=4, max_pois=6, min_pois=3)
        d = inst.requests.sum(axis=0)
        got = exact_routing(inst, 0, d).pois
        want = brute_force_routing(inst, 0, d)
        assert route_cost(inst, 0, d, got) == route_cost(inst, 0, d, want)
        assert got == want


def test_exact_on_six_stochastic_pois():
    inst = generate_instance(1, 3, 6, seed=77, params=GeneratorParams(std_frac=0.4, time_limit=350))
    d = inst.requests.sum(axis=0)
    got = exact_routing(inst, 0, d)
    want = brute_force_routing(inst, 0, d)
    assert got.pois == want
    assert route_cost(inst, 0, d, got.pois) == pytest.approx(oracle_route_cost(inst, 0, d, want),
                                                             rel=1e-12)


def test_heuristic_never_beats_exact_and_stays_feasible(rng):
    for seed in range(60):
        inst = random_small_instance(rng, max_robots=1, max_humans=5, max_pois=8)
        d = inst.requests.sum(axis=0)
        h = solve_routing(inst, 0, d, seed)
        e = exact_routing(inst, 0, d)
        assert route_cost(inst, 0, d, h.pois) >= route_cost(inst, 0, d, e.pois) - 1e-9
        assert route_time_distribution(inst, 0, h).mean <= inst.time_limit[0]


def test_heuristic_has_no_removable_zero_demand_poi(rng):
    for seed in range(40):
        inst = random_small_instance(rng, max_robots=1, max_humans=3, max_pois=8)
        d = inst.requests.sum(axis=0)
        r = list(solve_routing(inst, 0, d, seed).pois)
        base = route_cost(inst, 0, d, r)
        for p in r:
            if d[p] == 0:
                rest = [q for q in r if q != p]
                assert not (route_feasible(inst, 0, rest) and route_cost(inst, 0, d, rest) <= base)


def test_heuristic_deterministic_per_seed():
    inst = generate_instance(1, 6, 20, seed=5, params=GeneratorParams(std_frac=0.3))
    d = inst.requests.sum(axis=0)
    assert solve_routing(inst, 0, d, 42) == solve_routing(inst, 0, d, 42)


def test_heuristic_large_instance_feasible():
    inst = generate_instance(1, 10, 50, seed=2, params=GeneratorParams(std_frac=0.4))
    d = inst.requests.sum(axis=0)
    r = solve_routing(inst, 0, d, 0)
    assert len(set(r.pois)) == len(r.pois)
    assert route_feasible(inst, 0, r.pois)


def test_degenerate_direct_leg_returns_empty(caplog):
    travel = [[0, 50, 50], [50, 0, 500], [50, 500, 0]]
    inst = make_instance(travel, [1], [[1]], time_limit=90)
    r = solve_routing(inst, 0, [1], 0)
    assert r.pois == ()
    assert "degenerate" in caplog.text


def test_pareto_frontier_keeps_non_dominated():
    front = []
    assert pareto_insert(front, Label(10, 5, (1, 2)))
    assert pareto_insert(front, Label(8, 9, (2, 1)))  # trade-off, kept
    assert not pareto_insert(front, Label(11, 6, (2, 3)))  # dominated by (1, 2)
    assert pareto_insert(front, Label(12, 6, (0, 3)))  # worse but lexicographically first
    assert pareto_insert(front, Label(7, 4, (0, 1)))  # dominates everything
    assert front == [Label(7, 4, (0, 1))]


def test_pareto_audit_never_drops_dominating_label(rng):
    for _ in range(200):
        front = []
        labels = [Label(float(rng.integers(0, 6)), float(rng.integers(0, 6)), (int(i),))
                  for i in rng.permutation(12)]
        for lab in labels:
            pareto_insert(front, lab)
        for lab in labels:
            if lab in front:
                continue
            # a label left out is weakly dominated by a kept, lexicographically smaller one
            assert any(f.mean <= lab.mean and f.var <= lab.var and f.path < lab.path
                       for f in front)
        for a, b in itertools.permutations(front, 2):
            # nothing kept was pruned in favour of a label it dominates
            assert not (a.mean <= b.mean and a.var <= b.var and a.path < b.path)
