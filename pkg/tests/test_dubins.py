import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.optimize import fsolve

from mttsp import dubins

coord = st.floats(-30, 30, allow_nan=False)
heading = st.floats(0, 2 * math.pi - 1e-9, allow_nan=False)
radius = st.floats(0.5, 10, allow_nan=False)


def _end_pose(word, params, q, r):
    pose = q
    for kind, p in zip(word, params):
        pose = dubins.advance(pose, kind, p * r, r)
    return pose


def numeric_shortest(q, q2, r):
    """Independent check: solve each word's endpoint equations from many starting guesses."""
    best = math.inf
    guesses = np.linspace(0.05, 2 * math.pi - 0.05, 7)
    d = math.hypot(q2[0] - q[0], q2[1] - q[1]) / r
    for word in dubins.WORDS:
        for g1 in guesses:
            for g3 in guesses[::2]:
                g2 = d if word[1] == "S" else math.pi
                def resid(x, word=word):
                    x, y, h = _end_pose(word, x, q, r)
                    dh = (h - q2[2] + math.pi) % (2 * math.pi) - math.pi
                    return [x - q2[0], y - q2[1], dh]
                sol, info, ok, _ = fsolve(resid, [g1, g2, g3], full_output=True)
                if ok == 1 and np.all(sol >= -1e-9) and np.max(np.abs(info["fvec"])) < 1e-8:
                    best = min(best, float(np.sum(sol)) * r)
    return best


def test_straight_and_half_circle():
    assert float(dubins.shortest_lengths(0, 0, 0, 10, 0, 0, 1.0)) == pytest.approx(10.0)
    assert float(dubins.shortest_lengths(0, 0, 0, 0, 2, math.pi, 1.0)) == pytest.approx(math.pi)


def test_coincident_configs_have_zero_length():
    assert float(dubins.shortest_lengths(1, 2, 0.3, 1, 2, 0.3, 2.0)) == 0.0
    assert dubins.shortest_path((1, 2, 0.3), (1, 2, 0.3), 2.0).length == 0.0


@pytest.mark.parametrize("seed", range(12))
def test_shortest_matches_numeric_word_solutions(seed):
    rng = np.random.default_rng(seed)
    q = (*rng.uniform(-5, 5, 2), rng.uniform(0, 2 * math.pi))
    q2 = (*rng.uniform(-5, 5, 2), rng.uniform(0, 2 * math.pi))
    r = rng.uniform(0.5, 2.0)
    closed = float(dubins.shortest_lengths(*q, *q2, r))
    assert closed == pytest.approx(numeric_shortest(q, q2, r), rel=1e-6, abs=1e-6)


@given(coord, coord, heading, coord, coord, heading, radius)
def test_shortest_path_reaches_goal(x0, y0, h0, x1, y1, h1, r):
    path = dubins.shortest_path((x0, y0, h0), (x1, y1, h1), r)
    x, y, h = path.pose_at(path.length)
    assert math.hypot(x - x1, y - y1) < 1e-7
    assert abs((h - h1 + math.pi) % (2 * math.pi) - math.pi) < 1e-7
    assert path.length == pytest.approx(float(dubins.shortest_lengths(x0, y0, h0, x1, y1, h1, r)), abs=1e-9)
    assert path.length >= math.hypot(x1 - x0, y1 - y0) - 1e-9


@given(coord, coord, heading, coord, coord, heading, radius, st.floats(0, 50))
def test_path_of_exact_length(x0, y0, h0, x1, y1, h1, r, extra):
    q, q2 = (x0, y0, h0), (x1, y1, h1)
    d = float(dubins.shortest_lengths(*q, *q2, r))
    length = d + 2 * math.pi * r + extra
    path = dubins.path_of_length(q, q2, r, length)
    assert path is not None
    assert path.length == pytest.approx(length, rel=1e-12)
    assert all(seg[2] >= r - 1e-12 for seg in path.segments if seg[0] != "S")
    x, y, _ = path.pose_at(path.length)
    assert math.hypot(x - x1, y - y1) < 1e-7


def test_length_feasibility_band():
    q, q2, r = (0, 0, 0), (10, 0, 0), 1.0
    assert dubins.length_feasible(q, q2, r, 10.0)
    assert not dubins.length_feasible(q, q2, r, 12.0)
    assert dubins.length_feasible(q, q2, r, 10 + 2 * math.pi)
    assert dubins.path_of_length(q, q2, r, 12.0) is None


def test_vectorized_matches_scalar(rng):
    q = rng.uniform(-10, 10, (50, 3))
    q2 = rng.uniform(-10, 10, (50, 3))
    vec = dubins.shortest_lengths(q[:, 0], q[:, 1], q[:, 2], q2[:, 0], q2[:, 1], q2[:, 2], 1.5)
    for k in range(50):
        assert vec[k] == dubins.shortest_path(q[k], q2[k], 1.5).length or vec[k] == pytest.approx(
            dubins.shortest_path(q[k], q2[k], 1.5).length, abs=1e-12)
