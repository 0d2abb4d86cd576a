"""Random instances that are feasible by construction.

A random agent tour (waypoints with reachable arrival times) is drawn first;
each target is then routed through its tour waypoint at the arrival time, so
the construction tour is a witness that the instance can be solved. Targets
follow two straight segments, smoothed by a cubic B-spline through the
segment ends, or a single constant-velocity line for linear instances.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from . import dubins
from .model import (
    AgentModel,
    BSplineTrajectory,
    Instance,
    LinearTrajectory,
    Target,
    Variant,
    interception_check,
    traj_exists,
)

GENERATOR_VERSION = "1"
TWO_PI = 2.0 * math.pi
_MIN_KNOT_GAP = 1e-6


@dataclass
class GenParams:
    n_tar: int = 200
    variant: str = "close-enough"
    window_len: float | None = None  # 108 s, or 54 s for linear instances
    arena: tuple = (-50.0, 50.0)
    target_speed_range: tuple = (0.5, 1.0)
    v_max: float = 5.0
    radius: float = 12.0
    v_min: float = 2.0
    omega_max: float = 0.25
    arrival_slack_frac: float = 0.2
    max_retries: int = 200
    seed: int = 0

    def __post_init__(self):
        self.variant = Variant(self.variant).value
        if self.window_len is None:
            self.window_len = 54.0 if self.variant == Variant.LINEAR.value else 108.0
        if self.n_tar < 1 or self.window_len <= 0:
            raise ValueError("need n_tar >= 1 and a positive window")
        lo, hi = self.target_speed_range
        if not 0 <= lo <= hi:
            raise ValueError("bad target speed range")

    def agent(self, q0) -> AgentModel:
        v = Variant(self.variant)
        if v is Variant.DUBINS:
            return AgentModel(v, self.v_max, q0, self.v_min, self.omega_max)
        return AgentModel(v, self.v_max, q0)

    @property
    def target_radius(self) -> float:
        return self.radius if self.variant == Variant.CLOSE_ENOUGH.value else 0.0


def _uniform_point(rng, arena) -> tuple:
    lo, hi = arena
    return (float(rng.uniform(lo, hi)), float(rng.uniform(lo, hi)))


def _earliest_dt(agent: AgentModel, q, q2) -> float:
    """Shortest travel time for which any later arrival stays feasible."""
    if not agent.is_dubins:
        return math.hypot(q2[0] - q[0], q2[1] - q[1]) / agent.v_max
    best = math.inf
    for v in agent.speed_set:
        r = v / agent.omega_max
        d = float(dubins.shortest_lengths(q[0], q[1], q[2], q2[0], q2[1], q2[2], r))
        best = min(best, (d + TWO_PI * r) / v)
    return best


def construction_tour(params: GenParams, rng) -> tuple[AgentModel, list]:
    """Agent model plus a list of (config, time) waypoints reachable in sequence."""
    dub = params.variant == Variant.DUBINS.value
    q0 = _uniform_point(rng, params.arena)
    if dub:
        q0 = q0 + (float(rng.uniform(0, TWO_PI)),)
    agent = params.agent(q0)
    tour, q, t = [], agent.q0, 0.0
    for _ in range(params.n_tar):
        q2 = _uniform_point(rng, params.arena)
        if dub:
            q2 = q2 + (float(rng.uniform(0, TWO_PI)),)
        dt = _earliest_dt(agent, q, q2) + float(rng.uniform(0, params.arrival_slack_frac * params.window_len))
        dt = max(dt, 1e-3)
        t2 = t + dt
        if not traj_exists(agent, q, t, q2, t2):
            raise RuntimeError(f"construction leg infeasible (seed {params.seed})")
        tour.append((q2, t2))
        q, t = q2, t2
    return agent, tour


def _window(t_i: float, length: float, rng) -> tuple:
    lo = max(0.0, t_i - float(rng.uniform(0, 1)) * length)
    return (lo, lo + length)


def _random_velocity(rng, speed_range) -> np.ndarray:
    heading = rng.uniform(0, TWO_PI)
    speed = rng.uniform(*speed_range)
    return speed * np.array([math.cos(heading), math.sin(heading)])


def two_segment_spline(p_i, t_i: float, window, speed_range, rng) -> BSplineTrajectory:
    """Spline through a random two-segment path that passes ``p_i`` at ``t_i``."""
    lo, hi = window
    t_b = float(rng.uniform(lo, hi))
    v_a = _random_velocity(rng, speed_range)
    v_b = _random_velocity(rng, speed_range)
    p_i = np.asarray(p_i, dtype=float)
    # the segment holding t_i keeps its velocity through p_i; the other one starts at the breakpoint
    if t_i <= t_b:
        p_b = p_i + v_a * (t_b - t_i)
        pos = lambda t: p_i + v_a * (t - t_i) if t <= t_b else p_b + v_b * (t - t_b)  # noqa: E731
    else:
        p_b = p_i - v_b * (t_i - t_b)
        pos = lambda t: p_b + v_a * (t - t_b) if t <= t_b else p_i + v_b * (t - t_i)  # noqa: E731
    times = [lo, t_i, hi]
    if min(abs(t_b - t) for t in times) > _MIN_KNOT_GAP:
        times.append(t_b)
    times = sorted(set(times))
    pts = [p_i if t == t_i else pos(t) for t in times]
    return BSplineTrajectory.through(times, pts)


def fit_cubic_spline(through) -> BSplineTrajectory:
    """Clamped cubic spline through ``[(position, time), ...]``."""
    pts = [p for p, _ in through]
    times = [t for _, t in through]
    return BSplineTrajectory.through(times, pts)


def max_speed_bound(traj) -> float:
    return traj.max_speed_bound()


def _meta(params: GenParams, tour) -> dict:
    return {
        "generator": {"version": GENERATOR_VERSION, "seed": params.seed, "params": asdict(params)},
        "witness": [
            {"target": i, "config": list(q), "time": t} for i, (q, t) in enumerate(tour, start=1)
        ],
    }


def generate_instance(params: GenParams) -> Instance:
    """Close-enough or Dubins instance with spline targets."""
    if params.variant == Variant.LINEAR.value:
        return generate_linear_instance(params)
    rng = np.random.default_rng(params.seed)
    agent, tour = construction_tour(params, rng)
    targets = []
    for i, (q, t_i) in enumerate(tour, start=1):
        window = _window(t_i, params.window_len, rng)
        for _ in range(params.max_retries):
            traj = two_segment_spline(q[:2], t_i, window, params.target_speed_range, rng)
            if traj.max_speed_bound() <= params.v_max:
                break
        else:
            raise RuntimeError(f"target {i}: spline speed bound above v_max after retries (seed {params.seed})")
        targets.append(Target(i, traj, window, params.target_radius))
    inst = Instance(agent, targets, _meta(params, tour))
    _check_witness(inst, tour)
    return inst


def generate_linear_instance(params: GenParams) -> Instance:
    """Constant-velocity point targets (radius 0)."""
    if params.variant != Variant.LINEAR.value:
        # a window left at the spline default falls back to the linear default
        window = None if params.window_len == 108.0 else params.window_len
        params = GenParams(**{**asdict(params), "variant": Variant.LINEAR.value, "window_len": window})
    rng = np.random.default_rng(params.seed)
    agent, tour = construction_tour(params, rng)
    targets = []
    for i, (q, t_i) in enumerate(tour, start=1):
        window = _window(t_i, params.window_len, rng)
        vel = _random_velocity(rng, params.target_speed_range)
        p0 = np.asarray(q, dtype=float) - vel * t_i
        targets.append(Target(i, LinearTrajectory(tuple(map(float, p0)), tuple(map(float, vel))), window, 0.0))
    inst = Instance(agent, targets, _meta(params, tour))
    _check_witness(inst, tour)
    return inst


def _check_witness(inst: Instance, tour) -> None:
    for i, (q, t) in enumerate(tour, start=1):
        if not interception_check(inst.target(i), q, t):
            raise RuntimeError(f"construction point misses target {i}")
