import numpy as np
import pytest

from conftest import random_ce_graph, random_ce_instance, random_sets
from mttsp.graph import (
    SamplePoint,
    SamplePointGraph,
    add_samples,
    build_graph,
    scale_costs,
    scaled_matrix,
    tour_raw_cost,
    tour_scaled_cost,
)
from mttsp.model import AgentModel, Instance, LinearTrajectory, Target, edge_cost_raw
from mttsp.oracle import all_assemblies


def one_target():
    agent = AgentModel("close-enough", 5.0, (0.0, 0.0))
    inst = Instance(agent, [Target(1, LinearTrajectory((3, 4), (0, 0)), (0, 10), 0.0)])
    return inst, [[SamplePoint(1, (3.0, 4.0), 2.0)]]


def test_single_target_graph():
    inst, sets = one_target()
    g = build_graph(inst, sets)
    assert g.n == 2 and g.feasible.sum() == 1 and g.feasible[0, 1]
    assert tour_raw_cost(g, [0, 1]) == 5.0


def test_backward_and_same_time_edges_are_infeasible(rng):
    inst = random_ce_instance(rng, 3)
    g = build_graph(inst, random_sets(inst, rng, 4))
    times = np.array([p.time for p in g.nodes])
    assert not g.feasible[times[None, :] <= times[:, None]].any()
    assert not g.feasible[:, 0].any()
    same = g.owner[:, None] == g.owner[None, :]
    assert not g.feasible[same].any()


def test_edges_match_pairwise_kernel(rng):
    inst = random_ce_instance(rng, 4)
    g = build_graph(inst, random_sets(inst, rng, 4))
    for a in range(g.n):
        for b in range(1, g.n):
            pa, pb = g.nodes[a], g.nodes[b]
            if pa.owner == pb.owner or pb.time <= pa.time:
                continue
            c = edge_cost_raw(inst.agent, pa.config, pa.time, pb.config, pb.time)
            assert g.feasible[a, b] == (c is not None)
            if c is not None:
                assert g.raw_cost[a, b] == pytest.approx(c, abs=1e-12)


def test_parallel_build_and_incremental_growth_match(rng):
    inst = random_ce_instance(rng, 6)
    first = random_sets(inst, rng, 5)
    more = random_sets(inst, rng, 5)
    seq = build_graph(inst, [a + b for a, b in zip(first, more)], workers=1)
    par = build_graph(inst, [a + b for a, b in zip(first, more)], workers=4)
    grown = add_samples(inst, build_graph(inst, first), more, workers=3)
    assert np.array_equal(seq.feasible, par.feasible) and np.array_equal(seq.raw_cost, par.raw_cost)
    # grown graphs append new points after all old ones, so compare through the node identities
    perm = np.array([grown.nodes.index(p) for p in seq.nodes])
    assert np.array_equal(seq.feasible, grown.feasible[np.ix_(perm, perm)])
    assert np.array_equal(seq.raw_cost, grown.raw_cost[np.ix_(perm, perm)])
    for i, c in enumerate(grown.clusters):
        assert all(grown.nodes[v].owner == i for v in c)


def test_build_rejects_empty_or_foreign_sets():
    inst, sets = one_target()
    with pytest.raises(ValueError):
        build_graph(inst, [[]])
    with pytest.raises(ValueError):
        build_graph(inst, [[SamplePoint(2, (0.0, 0.0), 1.0)]])


@pytest.mark.parametrize("raw, scaled", [(3.14159, 314), (2.005, 201), (0.125, 13), (0.0, 0), (7.0, 700)])
def test_scale_examples(raw, scaled):
    assert int(scale_costs(raw)) == scaled


def test_big_cost_without_incumbent():
    n = 5
    owner = np.arange(n)
    feas = np.zeros((n, n), bool)
    feas[0, 1] = feas[1, 2] = True
    raw = np.full((n, n), np.inf)
    raw[0, 1], raw[1, 2] = 5.0, 1.0
    g = SamplePointGraph([None] * n, [np.array([i]) for i in range(n)], owner, raw, feas)
    m = scaled_matrix(g)
    assert m.big_cost == 2500 and m.cost[0, 1] == 500 and m.cost[3, 4] == 2500
    assert scaled_matrix(g, 777).big_cost == 778


def test_all_infeasible_matrix_is_big_cost():
    n = 3
    g = SamplePointGraph([None] * n, [np.array([i]) for i in range(n)], np.arange(n), np.full((n, n), np.inf),
                         np.zeros((n, n), bool))
    m = scaled_matrix(g)
    assert (m.cost == m.big_cost).all()


def test_tour_cost_errors(rng):
    inst, g = random_ce_graph(rng, 3, 2, min_clusters=3)
    with pytest.raises(ValueError):
        tour_raw_cost(g, [0, 1])
    with pytest.raises(ValueError):
        tour_raw_cost(g, [1, 0, 2, 3])


@pytest.mark.parametrize("seed", range(40))
def test_priced_infeasible_tours_dominated(seed):
    rng = np.random.default_rng([3, seed])
    _, g = random_ce_graph(rng, 5, 3)
    feasible = []
    infeasible = []
    for tour in all_assemblies(g):
        (feasible if tour_raw_cost(g, tour) is not None else infeasible).append(tour)
    m0 = scaled_matrix(g)
    for tour in infeasible:
        assert tour_scaled_cost(m0, tour) > 0
    if not feasible:
        return
    inc = min(tour_scaled_cost(m0, t) for t in feasible)
    m = scaled_matrix(g, inc)
    for tour in infeasible:
        assert tour_scaled_cost(m, tour) > inc
    for tour in feasible:
        assert tour_scaled_cost(m, tour) == tour_scaled_cost(m0, tour)
