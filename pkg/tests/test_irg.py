import math
import time

import numpy as np
import pytest
from scipy import stats

from conftest import synthetic_graph
from mttsp.graph import SamplePoint, build_graph
from mttsp.instances import GenParams, generate_instance
from mttsp.irg import (
    Algo,
    Incumbent,
    IrgParams,
    _sets_with,
    default_params,
    generate_initial_tour,
    random_samples,
    random_tour,
    run,
    solve_on_graph,
    streams,
    tour_via_gtsp,
)
from mttsp.metrics import is_monotone
from mttsp.model import AgentModel, Instance, LinearTrajectory, Target, interception_check


def stationary_instance(positions, windows, v_max=5.0, radius=0.0):
    agent = AgentModel("close-enough", v_max, (0.0, 0.0))
    targets = [Target(i, LinearTrajectory(p, (0.0, 0.0)), w, radius)
               for i, (p, w) in enumerate(zip(positions, windows), start=1)]
    return Instance(agent, targets)


def test_tuned_defaults():
    p = default_params("irg-pglns", "close-enough")
    assert (p.n_rand, p.alpha_term, p.n_rand_init, p.budget_s) == (16, 4, 8, 30.0)
    p = default_params("irg-pglns", "dubins")
    assert (p.n_rand, p.alpha_term, p.n_rand_init, p.budget_s) == (32, 64, 42, 60.0)
    assert (default_params("pdg", "close-enough").n_rand, default_params("pdg", "dubins").alpha_term) == (8, 4)
    assert default_params("pcg", "linear", n_rand=3, alpha_term=None).n_rand == 3
    assert default_params("irg-glns", "dubins", eval_removals=True).lns(11).max_removal_fraction == pytest.approx(10 / 11)


def test_random_samples_are_uniform_in_window(rng):
    inst = generate_instance(GenParams(n_tar=2, seed=3))
    assert random_samples(inst, 1, 0, rng) == []
    pts = random_samples(inst, 1, 2000, rng)
    lo, hi = inst.target(1).window
    assert all(p.owner == 1 and interception_check(inst.target(1), p.config, p.time) for p in pts)
    assert stats.kstest([p.time for p in pts], stats.uniform(lo, hi - lo).cdf).pvalue > 1e-3


def test_random_tour_is_uniform(rng):
    g = synthetic_graph(rng, 3, 2, p_edge=1.0)
    counts = {}
    for _ in range(6000):
        t = tuple(random_tour(g, rng))
        counts[t] = counts.get(t, 0) + 1
    n_tours = math.factorial(3) * np.prod([len(c) for c in g.clusters[1:]])
    assert len(counts) == n_tours
    assert stats.chisquare(list(counts.values())).pvalue > 1e-3


def test_random_tour_infeasible_marker(rng):
    g = synthetic_graph(rng, 3, 2, p_edge=0.0)
    assert random_tour(g, rng) is None


def test_initial_tour_trivial_and_infeasible(rng):
    easy = stationary_instance([(1.0, 0.0)], [(0.0, 100.0)])
    inc, sizes = generate_initial_tour(easy, IrgParams(n_rand_init=1), None, rng)
    assert inc is not None and sizes == [1] and inc.order == [1]
    hard = stationary_instance([(100.0, 0.0)], [(0.0, 1.0)])
    inc, sizes = generate_initial_tour(hard, IrgParams(n_rand_init=4), time.monotonic() + 0.3, rng)
    assert inc is None and sizes[0] >= 4 and sizes[0] % 4 == 0


def test_improvement_graph_size(rng):
    inst = generate_instance(GenParams(n_tar=5, seed=11))
    inc, _ = generate_initial_tour(inst, IrgParams(), None, rng)
    n_rand = 7
    base = [random_samples(inst, i, n_rand, rng) for i in range(1, 6)]
    sets = _sets_with(inc, inst, base)
    assert all(s[0] == inc.point_for(i) for i, s in enumerate(sets, start=1))
    assert build_graph(inst, sets).n == 1 + 5 * (n_rand + 1)
    # duplicates of the incumbent point are not added twice
    again = _sets_with(inc, inst, sets)
    assert [len(s) for s in again] == [len(s) for s in sets]


def test_seed_must_be_in_the_sets(rng):
    inst = generate_instance(GenParams(n_tar=3, seed=2))
    inc, _ = generate_initial_tour(inst, IrgParams(), None, rng)
    sets = [random_samples(inst, i, 3, rng) for i in range(1, 4)]
    with pytest.raises(AssertionError):
        tour_via_gtsp(inst, sets, inc, IrgParams(), None, rng)


def two_order_instance():
    inst = stationary_instance([(10.0, 0.0), (20.0, 0.0)], [(0.0, 40.0), (0.0, 40.0)])
    sets = [[SamplePoint(1, (10.0, 0.0), 10.0), SamplePoint(1, (10.0, 0.0), 30.0)],
            [SamplePoint(2, (20.0, 0.0), 10.0), SamplePoint(2, (20.0, 0.0), 20.0)]]
    return inst, sets


def test_seed_returned_when_nothing_beats_it():
    inst, sets = two_order_instance()
    g = build_graph(inst, sets)
    best = Incumbent((g.nodes[0], sets[0][0], sets[1][1]), 20.0)
    for s in range(20):
        out = solve_on_graph(g, best, IrgParams(algo="irg-glns"), None, np.random.default_rng(s))
        assert out.raw_cost == 20.0 and out.points == best.points


def test_random_tour_wins_when_the_solver_is_starved():
    inst, sets = two_order_instance()
    g = build_graph(inst, sets)
    seed = Incumbent((g.nodes[0], sets[1][0], sets[0][1]), 30.0)
    wins = 0
    for s in range(40):
        rng = np.random.default_rng(s)
        probe = np.random.default_rng(s)
        probe.spawn(1)
        rand = random_tour(g, probe)
        out = solve_on_graph(g, seed, IrgParams(algo="irg-glns"), 0.0, rng)
        if rand is not None and [g.nodes[v] for v in rand] == [g.nodes[0], sets[0][0], sets[1][1]]:
            assert out.raw_cost == 20.0
            wins += 1
        else:
            assert out.raw_cost == 30.0
    assert wins > 0


def small_params(algo, **kw):
    base = dict(n_rand=4, alpha_term=4, n_proc=1, budget_s=60.0, max_iters=4, graph_workers=1)
    base.update(kw)
    return IrgParams(algo=algo, **base)


def test_single_process_decoupled_run_matches_serial_loop():
    inst = generate_instance(GenParams(n_tar=8, seed=5))
    a = run(inst, small_params("irg-glns"), seed=3)
    b = run(inst, small_params("pdg"), seed=3)
    assert a.log.costs() == b.log.costs() and a.incumbent.points == b.incumbent.points
    assert a.iterations == b.iterations == 4


def test_single_process_pcg_round_is_one_serial_iteration():
    inst = generate_instance(GenParams(n_tar=8, seed=6))
    a = run(inst, small_params("irg-glns"), seed=4)
    b = run(inst, small_params("pcg"), seed=4)
    assert a.incumbent.raw_cost == b.incumbent.raw_cost
    assert a.log.costs() == b.log.costs()


def test_pcg_informed_sets():
    inst = generate_instance(GenParams(n_tar=6, seed=8))
    res = run(inst, small_params("pcg", n_proc=3, max_iters=3), seed=1)
    assert len(res.info["informed_sizes"]) == 3
    assert all(1 <= k <= 3 for k in res.info["informed_sizes"])


def test_streams_are_reproducible():
    a = [g.random() for g in streams(7, 3)]
    b = [g.random() for g in streams(7, 3)]
    assert a == b and len(set(a)) == 4


@pytest.mark.parametrize("algo", [a.value for a in Algo])
@pytest.mark.parametrize("variant", ["close-enough", "dubins"])
def test_all_modes_are_monotone_and_feasible(algo, variant):
    inst = generate_instance(GenParams(n_tar=10, variant=variant, seed=21))
    params = default_params(algo, variant, budget_s=2.5, n_proc=2)
    res = run(inst, params, seed=0)
    assert res.incumbent is not None
    costs = res.log.costs()
    assert is_monotone(costs) and costs[-1] == res.incumbent.raw_cost
    assert res.trajectory.length == pytest.approx(res.incumbent.raw_cost, rel=1e-9)
    for p in res.incumbent.points[1:]:
        assert interception_check(inst.target(p.owner), p.config, p.time)
