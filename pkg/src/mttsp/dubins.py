"""Dubins path geometry: shortest curvature-bounded paths and exact-length elongation.

Lengths are computed in closed form for the six CSC/CCC words. The vectorized
``shortest_lengths`` is what the graph builder calls on whole blocks of node
pairs; ``shortest_path`` returns the word and segment lengths for one pair.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

TWO_PI = 2.0 * math.pi
WORDS = ("LSL", "RSR", "LSR", "RSL", "RLR", "LRL")

# absolute tolerance for "length equals shortest length"
EXACT_LENGTH_TOL = 1e-9


def mod2pi(a):
    return np.mod(a, TWO_PI)


def _normalized(x0, y0, h0, x1, y1, h1, r):
    dx = np.asarray(x1, dtype=float) - x0
    dy = np.asarray(y1, dtype=float) - y0
    d = np.hypot(dx, dy) / r
    theta = mod2pi(np.arctan2(dy, dx))
    alpha = mod2pi(np.asarray(h0, dtype=float) - theta)
    beta = mod2pi(np.asarray(h1, dtype=float) - theta)
    return d, alpha, beta


def _word_params(d, alpha, beta):
    """Return an array of shape (6, 3, ...) of normalized (t, p, q) per word; NaN where invalid."""
    sa, sb = np.sin(alpha), np.sin(beta)
    ca, cb = np.cos(alpha), np.cos(beta)
    c_ab = np.cos(alpha - beta)
    d_sq = d * d
    nan = np.full(np.shape(d), np.nan)
    out = np.empty((6, 3) + np.shape(d))

    with np.errstate(invalid="ignore"):
        # LSL
        p_sq = 2 + d_sq - 2 * c_ab + 2 * d * (sa - sb)
        tmp = np.arctan2(cb - ca, d + sa - sb)
        ok = p_sq >= 0
        out[0, 0] = np.where(ok, mod2pi(tmp - alpha), nan)
        out[0, 1] = np.where(ok, np.sqrt(np.maximum(p_sq, 0)), nan)
        out[0, 2] = np.where(ok, mod2pi(beta - tmp), nan)

        # RSR
        p_sq = 2 + d_sq - 2 * c_ab + 2 * d * (sb - sa)
        tmp = np.arctan2(ca - cb, d - sa + sb)
        ok = p_sq >= 0
        out[1, 0] = np.where(ok, mod2pi(alpha - tmp), nan)
        out[1, 1] = np.where(ok, np.sqrt(np.maximum(p_sq, 0)), nan)
        out[1, 2] = np.where(ok, mod2pi(tmp - beta), nan)

        # LSR
        p_sq = -2 + d_sq + 2 * c_ab + 2 * d * (sa + sb)
        ok = p_sq >= 0
        p = np.sqrt(np.maximum(p_sq, 0))
        tmp = np.arctan2(-ca - cb, d + sa + sb) - np.arctan2(-2.0, p)
        out[2, 0] = np.where(ok, mod2pi(tmp - alpha), nan)
        out[2, 1] = np.where(ok, p, nan)
        out[2, 2] = np.where(ok, mod2pi(tmp - beta), nan)

        # RSL
        p_sq = -2 + d_sq + 2 * c_ab - 2 * d * (sa + sb)
        ok = p_sq >= 0
        p = np.sqrt(np.maximum(p_sq, 0))
        tmp = np.arctan2(ca + cb, d - sa - sb) - np.arctan2(2.0, p)
        out[3, 0] = np.where(ok, mod2pi(alpha - tmp), nan)
        out[3, 1] = np.where(ok, p, nan)
        out[3, 2] = np.where(ok, mod2pi(beta - tmp), nan)

        # RLR
        tmp = (6.0 - d_sq + 2 * c_ab + 2 * d * (sa - sb)) / 8.0
        phi = np.arctan2(ca - cb, d - sa + sb)
        ok = np.abs(tmp) <= 1
        p = mod2pi(TWO_PI - np.arccos(np.clip(tmp, -1, 1)))
        t = mod2pi(alpha - phi + mod2pi(p / 2.0))
        out[4, 0] = np.where(ok, t, nan)
        out[4, 1] = np.where(ok, p, nan)
        out[4, 2] = np.where(ok, mod2pi(alpha - beta - t + mod2pi(p)), nan)

        # LRL
        tmp = (6.0 - d_sq + 2 * c_ab + 2 * d * (sb - sa)) / 8.0
        phi = np.arctan2(ca - cb, d + sa - sb)
        ok = np.abs(tmp) <= 1
        p = mod2pi(TWO_PI - np.arccos(np.clip(tmp, -1, 1)))
        t = mod2pi(-alpha - phi + p / 2.0)
        out[5, 0] = np.where(ok, t, nan)
        out[5, 1] = np.where(ok, p, nan)
        out[5, 2] = np.where(ok, mod2pi(beta - alpha - t + mod2pi(p)), nan)
    return out


def _coincident(d, alpha, beta):
    return (d == 0) & (alpha == beta)


def shortest_lengths(x0, y0, h0, x1, y1, h1, r):
    """Vectorized Dubins distance between start poses and goal poses for turning radius ``r``."""
    d, alpha, beta = _normalized(x0, y0, h0, x1, y1, h1, r)
    params = _word_params(d, alpha, beta)
    lengths = np.nansum(params, axis=1)
    lengths = np.where(np.isnan(params).any(axis=1), np.inf, lengths)
    best = lengths.min(axis=0) * r
    return np.where(_coincident(d, alpha, beta), 0.0, best)


@dataclass(frozen=True)
class DubinsPath:
    """A path from ``start`` made of (kind, length, radius) segments, kind in L/R/S."""

    start: tuple
    segments: tuple

    @property
    def length(self) -> float:
        return float(sum(seg[1] for seg in self.segments))

    def pose_at(self, s: float) -> tuple:
        """Pose after travelling arc length ``s`` (clamped to the path)."""
        x, y, h = self.start
        remaining = min(max(s, 0.0), self.length)
        for kind, seg_len, radius in self.segments:
            step = min(remaining, seg_len)
            x, y, h = advance((x, y, h), kind, step, radius)
            remaining -= step
            if remaining <= 0.0:
                break
        return (x, y, float(mod2pi(h)))


def advance(pose, kind, s, radius):
    x, y, h = pose
    if kind == "S":
        return (x + s * math.cos(h), y + s * math.sin(h), h)
    if kind == "L":
        cx, cy = x - radius * math.sin(h), y + radius * math.cos(h)
        h2 = h + s / radius
        return (cx + radius * math.sin(h2), cy - radius * math.cos(h2), h2)
    if kind == "R":
        cx, cy = x + radius * math.sin(h), y - radius * math.cos(h)
        h2 = h - s / radius
        return (cx - radius * math.sin(h2), cy + radius * math.cos(h2), h2)
    raise ValueError(f"unknown segment kind {kind!r}")


def shortest_path(q, q2, r: float) -> DubinsPath:
    """Shortest Dubins path from pose ``q`` to pose ``q2`` with minimum turning radius ``r``."""
    if r <= 0:
        raise ValueError("turning radius must be positive")
    d, alpha, beta = _normalized(q[0], q[1], q[2], q2[0], q2[1], q2[2], r)
    start = (float(q[0]), float(q[1]), float(q[2]))
    if _coincident(d, alpha, beta):
        return DubinsPath(start, ())
    params = _word_params(np.atleast_1d(d), np.atleast_1d(alpha), np.atleast_1d(beta))[..., 0]
    totals = np.where(np.isnan(params).any(axis=1), np.inf, np.nansum(params, axis=1))
    w = int(np.argmin(totals))
    word = WORDS[w]
    segs = tuple(
        (kind, float(params[w, k]) * r, r)
        for k, kind in enumerate(word)
        if params[w, k] > 0.0
    )
    return DubinsPath(start, segs)


def length_feasible(q, q2, r: float, length: float, shortest: float | None = None) -> bool:
    """Sufficient test for a curvature-bounded path of exactly ``length``.

    True when ``length`` equals the shortest length or leaves room for one full
    loiter circle of radius at least ``r``.
    """
    if shortest is None:
        shortest = float(shortest_lengths(q[0], q[1], q[2], q2[0], q2[1], q2[2], r))
    return bool(feasible_mask(np.asarray(length), np.asarray(shortest), r))


def feasible_mask(length, shortest, r):
    return (np.abs(length - shortest) <= EXACT_LENGTH_TOL) | (length >= shortest + TWO_PI * r - EXACT_LENGTH_TOL)


def path_of_length(q, q2, r: float, length: float) -> DubinsPath | None:
    """Curvature-bounded path of exactly ``length``, or None when the sufficient test fails.

    Slack beyond the shortest path is absorbed by a single left loiter circle at
    the start whose radius ``(length - D) / 2pi`` is at least ``r``.
    """
    base = shortest_path(q, q2, r)
    slack = length - base.length
    if abs(slack) <= EXACT_LENGTH_TOL:
        return base
    if slack < TWO_PI * r - EXACT_LENGTH_TOL:
        return None
    # rounding can leave the loiter radius a hair under r; the curvature bound is then met within tolerance
    loiter_radius = max(slack / TWO_PI, r)
    return DubinsPath(base.start, (("L", slack, loiter_radius),) + base.segments)
