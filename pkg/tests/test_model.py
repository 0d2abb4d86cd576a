import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from mttsp import dubins
from mttsp.bspline import de_boor
from mttsp.model import (
    AgentModel,
    AgentTrajectory,
    BSplineTrajectory,
    LinearTrajectory,
    Target,
    edge_cost_raw,
    eval_target,
    get_traj,
    interception_check,
    min_feasible_speed,
    rand_config,
    traj_exists,
)

CE = AgentModel("close-enough", 5.0, (0.0, 0.0))


def dubins_agent(speeds, omega=1.0):
    return AgentModel("dubins", max(speeds), (0.0, 0.0, 0.0), min(speeds), omega, tuple(speeds))


def test_eval_linear_and_constant_spline():
    assert np.allclose(eval_target(Target(1, LinearTrajectory((0, 0), (1, 0)), (0, 5)), 2.0), (2, 0))
    const = BSplineTrajectory((0, 0, 0, 0, 4, 4, 4, 4), ((3, -1),) * 4)
    assert np.allclose(const(1.7), (3, -1))


def test_clamped_bezier_span_against_naive_casteljau():
    ctrl = np.array([(0, 0), (1, 0), (1, 1), (0, 1)], float)
    traj = BSplineTrajectory((0, 0, 0, 0, 1, 1, 1, 1), tuple(map(tuple, ctrl)))
    pts = ctrl.copy()
    while len(pts) > 1:
        pts = 0.5 * pts[:-1] + 0.5 * pts[1:]
    assert np.allclose(traj(0.5), pts[0])
    assert np.allclose(traj(0.5), (0.75, 0.5))
    assert np.allclose(de_boor(traj.knots, traj.control_points, 0.5), (0.75, 0.5))


def test_spline_outside_domain():
    traj = BSplineTrajectory((0, 0, 0, 0, 1, 1, 1, 1), ((0, 0),) * 4)
    with pytest.raises(ValueError):
        traj(1.5)
    with pytest.raises(ValueError):
        Target(1, traj, (0, 2))


def test_rand_config_examples(rng):
    tgt = Target(1, LinearTrajectory((1, 2), (0, 0)), (0, 10), 12.0)
    assert np.allclose(rand_config(CE, tgt, 3.0, rng, theta=0.0), (13, 2))
    lin = AgentModel("linear", 5.0, (0, 0))
    point = Target(1, LinearTrajectory((5, 5), (0, 0)), (0, 10))
    assert rand_config(lin, point, 1.0, rng) == (5.0, 5.0)
    with pytest.raises(ValueError):
        rand_config(CE, tgt, 11.0, rng)


@given(st.floats(0, 10), st.integers(0, 2**32 - 1))
def test_rand_config_intercepts(t, seed):
    rng = np.random.default_rng(seed)
    tgt = Target(1, LinearTrajectory((1, 2), (0.3, -0.7)), (0, 10), 12.0)
    q = rand_config(CE, tgt, t, rng)
    assert interception_check(tgt, q, t)
    assert math.dist(q, eval_target(tgt, t)) == pytest.approx(12.0)
    dub = dubins_agent((2, 5))
    qd = rand_config(dub, Target(1, tgt.traj, tgt.window), t, rng)
    assert len(qd) == 3 and interception_check(Target(1, tgt.traj, tgt.window), qd, t)


def test_interception_boundary_and_window():
    tgt = Target(1, LinearTrajectory((0, 0), (0, 0)), (1, 2), 12.0)
    assert interception_check(tgt, (12.0, 0.0), 1.5)
    assert not interception_check(tgt, (12.0 + 1e-6, 0.0), 1.5)
    assert not interception_check(tgt, (0.0, 0.0), 2.5)


def test_traj_exists_examples():
    assert traj_exists(CE, (0, 0), 0, (3, 4), 1)
    assert not traj_exists(CE, (0, 0), 0, (6, 8), 1)
    assert traj_exists(dubins_agent((5,)), (0, 0, 0), 0, (10, 0, 0), 2)
    with pytest.raises(ValueError):
        traj_exists(CE, (0, 0), 1, (0, 0), 0)


def test_edge_cost_examples():
    assert edge_cost_raw(CE, (0, 0), 0, (3, 4), 1) == 5.0
    assert edge_cost_raw(CE, (0, 0), 0, (6, 8), 1) is None
    agent = dubins_agent((2, 5))
    # the shortest path is the straight line of length 10 and speed 2 covers it in exactly 5 s
    assert float(dubins.shortest_lengths(0, 0, 0, 10, 0, 0, 1.0)) == pytest.approx(10.0)
    assert min_feasible_speed(agent, (0, 0, 0), 0, (10, 0, 0), 5) == 2
    assert edge_cost_raw(agent, (0, 0, 0), 0, (10, 0, 0), 5) == pytest.approx(10.0)


def test_dubins_needs_full_loiter_circle():
    agent = dubins_agent((1,))
    # shortest is 10; 11 s at speed 1 leaves 1 of slack, less than one 2*pi circle
    assert not traj_exists(agent, (0, 0, 0), 0, (10, 0, 0), 11)
    assert traj_exists(agent, (0, 0, 0), 0, (10, 0, 0), 10 + 2 * math.pi)


@given(st.integers(0, 2**32 - 1))
def test_get_traj_matches_edge(seed):
    rng = np.random.default_rng(seed)
    agent = dubins_agent((2.0, 3.0, 4.0, 5.0), omega=0.25)
    q = (*rng.uniform(-30, 30, 2), rng.uniform(0, 2 * math.pi))
    q2 = (*rng.uniform(-30, 30, 2), rng.uniform(0, 2 * math.pi))
    dt = float(rng.uniform(1, 80))
    leg = get_traj(agent, q, 0.0, q2, dt)
    cost = edge_cost_raw(agent, q, 0.0, q2, dt)
    assert (leg is None) == (cost is None)
    if leg is not None:
        assert leg.length == pytest.approx(cost, rel=1e-9)
        end = leg.at(dt)
        assert math.hypot(end[0] - q2[0], end[1] - q2[1]) <= 1e-9 + 1e-9 * max(1.0, cost)
        assert leg.at(0.0)[:2] == pytest.approx(q[:2])


def test_straight_leg_endpoints_exact():
    leg = get_traj(CE, (0.1, 0.2), 0.3, (3.7, 1.9), 2.9)
    assert leg.at(2.9) == (3.7, 1.9) and leg.at(0.3) == (0.1, 0.2)
    traj = AgentTrajectory((leg,))
    samples = traj.samples(10)
    assert len(samples) == 12 and samples[-1] == (2.9, (3.7, 1.9))


def test_agent_validation():
    with pytest.raises(ValueError):
        AgentModel("dubins", 5.0, (0, 0))
    with pytest.raises(ValueError):
        AgentModel("close-enough", 0.0, (0, 0))
    a = AgentModel("dubins", 5.0, (0, 0, 7.0), 2.0, 0.25)
    assert a.speed_set == pytest.approx((2, 3, 4, 5)) and 0 <= a.q0[2] < 2 * math.pi
