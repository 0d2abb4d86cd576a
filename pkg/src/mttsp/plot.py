"""Deterministic SVG step plots of incumbent cost against wall time."""
from __future__ import annotations

from pathlib import Path
from xml.sax.saxutils import escape

WIDTH, HEIGHT = 640, 400
MARGIN = 60
COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf", "#8c564b", "#e377c2")


def _fmt(x: float) -> str:
    return f"{x:.4f}"


def _bounds(logs):
    xs = [0.0] + [log.budget for log in logs] + [e.t_wall for log in logs for e in log.events]
    ys = [e.raw_cost for log in logs for e in log.events] or [0.0, 1.0]
    x0, x1 = 0.0, max(xs)
    y0, y1 = min(ys), max(ys)
    if y1 == y0:
        y0, y1 = y0 - 1.0, y1 + 1.0
    pad = 0.05 * (y1 - y0)
    return x0, max(x1, 1e-9), y0 - pad, y1 + pad


def step_points(log):
    """Corner points of the step curve, from the first event to the budget."""
    pts = []
    for i, e in enumerate(log.events):
        if i > 0:
            pts.append((e.t_wall, log.events[i - 1].raw_cost))
        pts.append((e.t_wall, e.raw_cost))
    if log.events and log.budget > log.events[-1].t_wall:
        pts.append((log.budget, log.events[-1].raw_cost))
    return pts


def render_svg(logs, labels=None, title: str = "incumbent cost vs time") -> str:
    labels = labels or [f"run {i + 1}" for i in range(len(logs))]
    x0, x1, y0, y1 = _bounds(logs)
    pw, ph = WIDTH - 2 * MARGIN, HEIGHT - 2 * MARGIN

    def sx(x):
        return MARGIN + (x - x0) / (x1 - x0) * pw

    def sy(y):
        return HEIGHT - MARGIN - (y - y0) / (y1 - y0) * ph

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'data-xmin="{_fmt(x0)}" data-xmax="{_fmt(x1)}" data-ymin="{_fmt(y0)}" data-ymax="{_fmt(y1)}" '
        f'data-margin="{MARGIN}">',
        f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<text x="{WIDTH // 2}" y="24" text-anchor="middle" font-size="15">{escape(title)}</text>',
        f'<line x1="{MARGIN}" y1="{HEIGHT - MARGIN}" x2="{WIDTH - MARGIN}" y2="{HEIGHT - MARGIN}" stroke="black"/>',
        f'<line x1="{MARGIN}" y1="{MARGIN}" x2="{MARGIN}" y2="{HEIGHT - MARGIN}" stroke="black"/>',
        f'<text x="{WIDTH // 2}" y="{HEIGHT - 15}" text-anchor="middle" font-size="13">wall time (s)</text>',
        f'<text x="15" y="{HEIGHT // 2}" text-anchor="middle" font-size="13" '
        f'transform="rotate(-90 15 {HEIGHT // 2})">cost</text>',
    ]
    for k in range(5):
        xv = x0 + (x1 - x0) * k / 4
        yv = y0 + (y1 - y0) * k / 4
        out.append(f'<text x="{_fmt(sx(xv))}" y="{HEIGHT - MARGIN + 16}" text-anchor="middle" font-size="10">{xv:.3g}</text>')
        out.append(f'<text x="{MARGIN - 5}" y="{_fmt(sy(yv))}" text-anchor="end" font-size="10">{yv:.4g}</text>')
    for i, (log, label) in enumerate(zip(logs, labels)):
        color = COLORS[i % len(COLORS)]
        pts = " ".join(f"{_fmt(sx(x))},{_fmt(sy(y))}" for x, y in step_points(log))
        out.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{pts}" data-label="{escape(label)}"/>')
        out.append(
            f'<text x="{WIDTH - MARGIN - 5}" y="{MARGIN + 14 * (i + 1)}" text-anchor="end" font-size="11" '
            f'fill="{color}">{escape(label)}</text>'
        )
    out.append("</svg>")
    return "\n".join(out) + "\n"


def write_svg(path, logs, labels=None, title: str = "incumbent cost vs time") -> None:
    Path(path).write_text(render_svg(logs, labels, title))


def bar_chart_svg(rows, title: str) -> str:
    """Horizontal bars for (label, value) rows; used by the initial-tour comparison."""
    vmax = max((v for _, v in rows), default=1.0) or 1.0
    h = MARGIN + 24 * len(rows) + 20
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{h}">',
        f'<rect x="0" y="0" width="{WIDTH}" height="{h}" fill="white"/>',
        f'<text x="{WIDTH // 2}" y="24" text-anchor="middle" font-size="15">{escape(title)}</text>',
    ]
    for i, (label, v) in enumerate(rows):
        y = MARGIN + 24 * i
        w = (WIDTH - 2 * MARGIN - 120) * v / vmax
        out.append(f'<text x="{MARGIN + 110}" y="{y + 14}" text-anchor="end" font-size="11">{escape(label)}</text>')
        out.append(f'<rect x="{MARGIN + 115}" y="{y}" width="{_fmt(w)}" height="18" fill="{COLORS[i % len(COLORS)]}"/>')
        out.append(f'<text x="{_fmt(MARGIN + 120 + w)}" y="{y + 14}" font-size="11">{v:.4g}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
