"""Clamped cubic B-splines in the plane: de Boor evaluation, interpolation, derivative bounds."""
from __future__ import annotations

import numpy as np
from scipy.linalg import solve_banded

DEGREE = 3


def find_span(knots: np.ndarray, t: np.ndarray, degree: int = DEGREE) -> np.ndarray:
    """Index ``k`` with knots[k] <= t < knots[k+1], the last span being closed on the right."""
    n_ctrl = len(knots) - degree - 1
    k = np.searchsorted(knots, t, side="right") - 1
    return np.clip(k, degree, n_ctrl - 1)


def de_boor(knots, control_points, t, degree: int = DEGREE) -> np.ndarray:
    """Evaluate the spline at ``t`` (scalar or array) with de Boor's recursion."""
    knots = np.asarray(knots, dtype=float)
    ctrl = np.asarray(control_points, dtype=float)
    t_arr = np.atleast_1d(np.asarray(t, dtype=float))
    k = find_span(knots, t_arr, degree)
    # d[j] holds control points P[k - degree + j] for every query
    d = np.stack([ctrl[k - degree + j] for j in range(degree + 1)], axis=0)
    for r in range(1, degree + 1):
        for j in range(degree, r - 1, -1):
            i = k - degree + j
            left = knots[i]
            right = knots[i + degree + 1 - r]
            denom = right - left
            safe = np.where(denom == 0, 1.0, denom)
            alpha = np.where(denom == 0, 0.0, (t_arr - left) / safe)[:, None]
            d[j] = (1.0 - alpha) * d[j - 1] + alpha * d[j]
    out = d[degree]
    return out[0] if np.ndim(t) == 0 else out


def derivative(knots, control_points, degree: int = DEGREE):
    """Knots and control points of the derivative spline (degree - 1)."""
    knots = np.asarray(knots, dtype=float)
    ctrl = np.asarray(control_points, dtype=float)
    span = knots[degree + 1 : degree + len(ctrl)] - knots[1 : len(ctrl)]
    with np.errstate(divide="ignore", invalid="ignore"):
        d_ctrl = degree * (ctrl[1:] - ctrl[:-1]) / span[:, None]
    d_ctrl[span == 0] = 0.0
    return knots[1:-1], d_ctrl


def max_control_norm(control_points) -> float:
    ctrl = np.asarray(control_points, dtype=float)
    if len(ctrl) == 0:
        return 0.0
    return float(np.max(np.linalg.norm(ctrl, axis=1)))


def _basis_row(knots, t, degree=DEGREE, deriv=0):
    """Nonzero basis function values (or derivatives) at ``t``; returns (first index, values)."""
    n_ctrl = len(knots) - degree - 1
    eye = np.eye(n_ctrl)
    k = int(find_span(knots, np.array([t]), degree)[0])
    idx = np.arange(k - degree, k + 1)
    if deriv == 0:
        vals = np.array([de_boor(knots, eye[i][:, None], t, degree)[0] for i in idx])
    else:
        vals = []
        for i in idx:
            dk, dc = knots, eye[i][:, None]
            deg = degree
            for _ in range(deriv):
                dk, dc = derivative(dk, dc, deg)
                deg -= 1
            vals.append(de_boor(dk, dc, t, deg)[0] if len(dc) > deg else 0.0)
        vals = np.array(vals)
    return k - degree, vals


def interpolate(times, points):
    """Clamped cubic spline through ``points`` at parameter ``times`` with natural end conditions.

    Interior knots sit at the interior data times, so the collocation system is
    banded; with two points the result is the straight segment between them.
    """
    times = np.asarray(times, dtype=float)
    pts = np.asarray(points, dtype=float)
    m = len(times)
    if m < 2 or len(pts) != m:
        raise ValueError("need at least two (time, point) pairs")
    if np.any(np.diff(times) <= 0):
        raise ValueError("interpolation times must be strictly increasing")
    knots = np.concatenate([np.repeat(times[0], 4), times[1:-1], np.repeat(times[-1], 4)])
    n = m + 2
    rows = np.zeros((n, n))
    rhs = np.zeros((n, pts.shape[1]))
    # row order keeps the system banded: natural(start), data..., natural(end)
    order = [("d2", times[0])] + [("v", t) for t in times] + [("d2", times[-1])]
    for r, (kind, t) in enumerate(order):
        first, vals = _basis_row(knots, t, deriv=2 if kind == "d2" else 0)
        rows[r, first : first + len(vals)] = vals
    rhs[1 : m + 1] = pts
    lower = upper = 3
    ab = np.zeros((lower + upper + 1, n))
    for i in range(n):
        for j in range(max(0, i - lower), min(n, i + upper + 1)):
            ab[upper + i - j, j] = rows[i, j]
    ctrl = solve_banded((lower, upper), ab, rhs)
    return knots, ctrl
