"""Problem data model and the per-variant operations used by the planners.

Agent configurations are plain tuples: ``(x, y)`` for the close-enough and
linear variants, ``(x, y, heading)`` for the variable-speed Dubins car. The
scalar operations here are thin wrappers over the vectorized kernels in
``edge_kernel`` so that graph construction and one-off queries always agree
bit for bit.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import bspline, dubins

TWO_PI = 2.0 * math.pi
POSITION_TOL = 1e-9


class Variant(str, enum.Enum):
    CLOSE_ENOUGH = "close-enough"
    LINEAR = "linear"
    DUBINS = "dubins"


def default_speed_set(v_min: float, v_max: float) -> tuple:
    return (
        v_min,
        2.0 / 3.0 * v_min + 1.0 / 3.0 * v_max,
        1.0 / 3.0 * v_min + 2.0 / 3.0 * v_max,
        v_max,
    )


@dataclass(frozen=True)
class AgentModel:
    variant: Variant
    v_max: float
    q0: tuple
    v_min: float | None = None
    omega_max: float | None = None
    speed_set: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "variant", Variant(self.variant))
        object.__setattr__(self, "q0", tuple(float(c) for c in self.q0))
        if self.v_max <= 0:
            raise ValueError("v_max must be positive")
        if self.variant is Variant.DUBINS:
            if len(self.q0) != 3:
                raise ValueError("Dubins initial configuration needs a heading")
            if self.v_min is None or self.omega_max is None:
                raise ValueError("Dubins agent needs v_min and omega_max")
            if not 0 < self.v_min <= self.v_max or self.omega_max <= 0:
                raise ValueError("need 0 < v_min <= v_max and omega_max > 0")
            speeds = tuple(self.speed_set) or default_speed_set(self.v_min, self.v_max)
            if list(speeds) != sorted(speeds):
                raise ValueError("speed_set must be sorted ascending")
            if speeds[0] < self.v_min - 1e-12 or speeds[-1] > self.v_max + 1e-12:
                raise ValueError("speed_set must lie within [v_min, v_max]")
            object.__setattr__(self, "speed_set", tuple(float(v) for v in speeds))
            object.__setattr__(self, "q0", self.q0[:2] + (self.q0[2] % TWO_PI,))
        elif len(self.q0) != 2:
            raise ValueError("point-agent initial configuration is (x, y)")

    @property
    def is_dubins(self) -> bool:
        return self.variant is Variant.DUBINS


@dataclass(frozen=True)
class LinearTrajectory:
    """Constant-velocity motion ``p0 + vel * t``."""

    p0: tuple
    vel: tuple

    kind = "linear"
    domain = (-math.inf, math.inf)

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        p0, vel = np.asarray(self.p0), np.asarray(self.vel)
        if t.ndim == 0:
            return p0 + vel * float(t)
        return p0[None, :] + vel[None, :] * t[:, None]

    def max_speed_bound(self) -> float:
        return float(math.hypot(*self.vel))


@dataclass(frozen=True)
class BSplineTrajectory:
    """Clamped cubic B-spline in time; evaluable on ``[knots[0], knots[-1]]``."""

    knots: tuple
    control_points: tuple
    degree: int = 3

    kind = "bspline"

    def __post_init__(self):
        if self.degree != 3:
            raise ValueError("only cubic splines are supported")
        knots = np.asarray(self.knots, dtype=float)
        if len(knots) != len(self.control_points) + self.degree + 1:
            raise ValueError("#knots must equal #control_points + degree + 1")
        if np.any(np.diff(knots) < 0):
            raise ValueError("knots must be nondecreasing")
        d = self.degree + 1
        if np.any(knots[:d] != knots[0]) or np.any(knots[-d:] != knots[-1]):
            raise ValueError("spline must be clamped")

    @property
    def domain(self):
        return (self.knots[0], self.knots[-1])

    def __call__(self, t):
        lo, hi = self.domain
        t_arr = np.asarray(t, dtype=float)
        if np.any(t_arr < lo) or np.any(t_arr > hi):
            raise ValueError(f"t outside spline domain [{lo}, {hi}]")
        return bspline.de_boor(self.knots, self.control_points, t_arr)

    def max_speed_bound(self) -> float:
        _, d_ctrl = bspline.derivative(self.knots, self.control_points)
        return bspline.max_control_norm(d_ctrl)

    @classmethod
    def through(cls, times, points) -> "BSplineTrajectory":
        knots, ctrl = bspline.interpolate(times, points)
        return cls(tuple(float(k) for k in knots), tuple(tuple(map(float, c)) for c in ctrl))


@dataclass(frozen=True)
class Target:
    id: int
    traj: LinearTrajectory | BSplineTrajectory
    window: tuple
    radius: float = 0.0

    def __post_init__(self):
        lo, hi = self.window
        if not 0 <= lo <= hi:
            raise ValueError(f"target {self.id}: need 0 <= t_lo <= t_hi")
        if self.radius < 0:
            raise ValueError(f"target {self.id}: negative radius")
        d_lo, d_hi = self.traj.domain
        if lo < d_lo or hi > d_hi:
            raise ValueError(f"target {self.id}: trajectory not evaluable on its window")


@dataclass(frozen=True)
class Instance:
    agent: AgentModel
    targets: tuple
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "targets", tuple(self.targets))
        ids = [t.id for t in self.targets]
        if ids != list(range(1, len(ids) + 1)):
            raise ValueError("target ids must be 1..n_tar in order")
        if self.agent.variant is not Variant.CLOSE_ENOUGH:
            if any(t.radius != 0 for t in self.targets):
                raise ValueError("only close-enough targets may have a radius")

    @property
    def n_tar(self) -> int:
        return len(self.targets)

    @property
    def variant(self) -> Variant:
        return self.agent.variant

    def target(self, i: int) -> Target:
        return self.targets[i - 1]


def eval_target(target: Target, t):
    return target.traj(t)


def rand_config(agent: AgentModel, target: Target, t: float, rng, theta: float | None = None) -> tuple:
    """Random configuration intercepting ``target`` at time ``t``.

    Close-enough samples the disc boundary; Dubins samples a heading at the
    target's position. ``theta`` forces the sampled angle.
    """
    lo, hi = target.window
    if not lo <= t <= hi:
        raise ValueError(f"t={t} outside window of target {target.id}")
    x, y = (float(c) for c in target.traj(t))
    if theta is None:
        theta = float(rng.uniform(0.0, TWO_PI))
    if agent.is_dubins:
        return (x, y, theta % TWO_PI)
    if target.radius == 0:
        return (x, y)
    return (x + target.radius * math.cos(theta), y + target.radius * math.sin(theta))


def interception_check(target: Target, q: Sequence[float], t: float) -> bool:
    lo, hi = target.window
    if not lo <= t <= hi:
        return False
    p = target.traj(t)
    return math.hypot(q[0] - p[0], q[1] - p[1]) <= target.radius + POSITION_TOL


def edge_kernel(agent: AgentModel, qa: np.ndarray, ta: np.ndarray, qb: np.ndarray, tb: np.ndarray):
    """Vectorized feasibility and raw cost for transitions (qa, ta) -> (qb, tb).

    ``qa``/``qb`` are (n, dim) arrays; returns ``(feasible, cost)`` with cost
    ``inf`` where infeasible. Callers must only pass pairs with ``tb >= ta``.
    """
    dt = tb - ta
    dx = qb[:, 0] - qa[:, 0]
    dy = qb[:, 1] - qa[:, 1]
    dist = np.sqrt(dx * dx + dy * dy)
    if not agent.is_dubins:
        feasible = dist <= agent.v_max * dt
        return feasible, np.where(feasible, dist, np.inf)
    cost = np.full(len(dt), np.inf)
    feasible = np.zeros(len(dt), dtype=bool)
    for v in agent.speed_set:
        todo = ~feasible
        if not todo.any():
            break
        r = v / agent.omega_max
        length = v * dt[todo]
        shortest = dubins.shortest_lengths(
            qa[todo, 0], qa[todo, 1], qa[todo, 2], qb[todo, 0], qb[todo, 1], qb[todo, 2], r
        )
        ok = dubins.feasible_mask(length, shortest, r)
        idx = np.flatnonzero(todo)[ok]
        feasible[idx] = True
        cost[idx] = length[ok]
    return feasible, cost


def _pair(agent, q, t, q2, t2):
    if t2 < t:
        raise ValueError("transitions must go forward in time")
    qa = np.asarray([q], dtype=float)
    qb = np.asarray([q2], dtype=float)
    return edge_kernel(agent, qa, np.array([t], float), qb, np.array([t2], float))


def traj_exists(agent: AgentModel, q, t: float, q2, t2: float) -> bool:
    feasible, _ = _pair(agent, q, t, q2, t2)
    return bool(feasible[0])


def edge_cost_raw(agent: AgentModel, q, t: float, q2, t2: float) -> float | None:
    """Raw travel cost of an edge, or None when no trajectory exists."""
    if t2 == t and tuple(q) != tuple(q2):
        return None
    feasible, cost = _pair(agent, q, t, q2, t2)
    return float(cost[0]) if feasible[0] else None


def min_feasible_speed(agent: AgentModel, q, t, q2, t2) -> float | None:
    dt = t2 - t
    for v in agent.speed_set:
        r = v / agent.omega_max
        if dubins.length_feasible(q, q2, r, v * dt):
            return v
    return None


@dataclass(frozen=True)
class Leg:
    """Agent motion between two timed configurations."""

    t0: float
    t1: float
    q0: tuple
    q1: tuple
    speed: float
    path: dubins.DubinsPath | None = None

    def at(self, t: float) -> tuple:
        if self.t1 == self.t0:
            return self.q0
        s = min(max((t - self.t0) / (self.t1 - self.t0), 0.0), 1.0)
        if self.path is None:
            if s == 1.0:
                return self.q1
            return tuple(a + (b - a) * s for a, b in zip(self.q0, self.q1))
        return self.path.pose_at(s * self.path.length)

    @property
    def length(self) -> float:
        if self.path is not None:
            return self.path.length
        return math.hypot(self.q1[0] - self.q0[0], self.q1[1] - self.q0[1])


def get_traj(agent: AgentModel, q, t: float, q2, t2: float) -> Leg | None:
    """A kinematically feasible leg from (q, t) to (q2, t2), or None if none is found."""
    if t2 < t:
        raise ValueError("transitions must go forward in time")
    q, q2 = tuple(map(float, q)), tuple(map(float, q2))
    if not agent.is_dubins:
        if not traj_exists(agent, q, t, q2, t2):
            return None
        dist = math.hypot(q2[0] - q[0], q2[1] - q[1])
        speed = dist / (t2 - t) if t2 > t else 0.0
        return Leg(t, t2, q, q2, speed)
    v = min_feasible_speed(agent, q, t, q2, t2)
    if v is None:
        return None
    path = dubins.path_of_length(q, q2, v / agent.omega_max, v * (t2 - t))
    if path is None:
        return None
    return Leg(t, t2, q, q2, v, path)


@dataclass(frozen=True)
class AgentTrajectory:
    legs: tuple

    def at(self, t: float) -> tuple:
        for leg in self.legs:
            if t <= leg.t1:
                return leg.at(t)
        return self.legs[-1].at(t)

    @property
    def length(self) -> float:
        return float(sum(leg.length for leg in self.legs))

    def samples(self, per_leg: int = 1000):
        """Timed configurations: ``per_leg`` interior samples per leg plus the endpoints."""
        out = []
        for leg in self.legs:
            for t in np.linspace(leg.t0, leg.t1, per_leg + 2)[:-1]:
                out.append((float(t), leg.at(float(t))))
        if self.legs:
            last = self.legs[-1]
            out.append((last.t1, last.at(last.t1)))
        return out
