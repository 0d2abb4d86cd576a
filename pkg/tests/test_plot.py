import xml.etree.ElementTree as ET

import pytest

from mttsp.metrics import SolveLog
from mttsp.plot import bar_chart_svg, render_svg, step_points, write_svg

SVG = "{http://www.w3.org/2000/svg}"


def sample_log():
    log = SolveLog(10.0)
    log.record(1.0, 50.0, "initial")
    log.record(4.0, 40.0, "improved")
    log.record(7.5, 32.0, "improved")
    return log


def test_step_points():
    assert step_points(sample_log()) == [
        (1.0, 50.0), (4.0, 50.0), (4.0, 40.0), (7.5, 40.0), (7.5, 32.0), (10.0, 32.0)
    ]


def test_rerender_is_byte_identical(tmp_path):
    write_svg(tmp_path / "a.svg", [sample_log()], ["a"])
    write_svg(tmp_path / "b.svg", [sample_log()], ["a"])
    assert (tmp_path / "a.svg").read_bytes() == (tmp_path / "b.svg").read_bytes()


def test_polyline_maps_back_to_the_data():
    root = ET.fromstring(render_svg([sample_log()], ["run"]))
    lines = root.findall(f"{SVG}polyline")
    assert len(lines) == 1
    x0, x1 = float(root.get("data-xmin")), float(root.get("data-xmax"))
    y0, y1 = float(root.get("data-ymin")), float(root.get("data-ymax"))
    margin = float(root.get("data-margin"))
    w, h = float(root.get("width")), float(root.get("height"))
    pts = [tuple(map(float, p.split(","))) for p in lines[0].get("points").split()]
    data = [
        (x0 + (px - margin) / (w - 2 * margin) * (x1 - x0), y0 + (h - margin - py) / (h - 2 * margin) * (y1 - y0))
        for px, py in pts
    ]
    want = step_points(sample_log())
    assert len(data) == len(want)
    for (a, b), (c, d) in zip(data, want):
        assert a == pytest.approx(c, abs=1e-3) and b == pytest.approx(d, abs=1e-3)
    # only horizontal and vertical segments
    for (a, b), (c, d) in zip(pts, pts[1:]):
        assert a == c or b == d


def test_several_logs_and_bars():
    root = ET.fromstring(render_svg([sample_log(), sample_log()], ["x", "y"]))
    assert [p.get("data-label") for p in root.findall(f"{SVG}polyline")] == ["x", "y"]
    bars = ET.fromstring(bar_chart_svg([("a", 1.0), ("b", 2.5)], "t"))
    assert len(bars.findall(f"{SVG}rect")) == 3
