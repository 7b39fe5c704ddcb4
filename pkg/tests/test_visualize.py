import pandas as pd

from conftest import build_small
from median_intervals.graph_core import Graph
from median_intervals.interval_engine import build
from median_intervals.semigroup import SUM
from median_intervals.visualize import export_html, fiber_figure, layout_positions, scaling_figure


def line_positions(n):
    return {v: (float(v), 0.0) for v in range(n)}


def test_fiber_figure_has_a_trace_per_fiber(grid3):
    index = build_small(grid3)
    fig = fiber_figure(index, pos=line_positions(9))
    names = [trace.name for trace in fig.data]
    # edges, gated trees, nine single-vertex fibers, the median
    assert len(fig.data) == 12
    assert names[0] == "edges"
    assert names[-1] == "median (1,1)"
    assert "F((0,0))" in names


def test_base_case_draws_one_group(grid3):
    fig = fiber_figure(build(grid3, SUM, base_size=32), pos=line_positions(9))
    assert [trace.name for trace in fig.data] == ["edges", "base case"]


def test_layout_covers_every_vertex(p4):
    pos = layout_positions(build_small(p4))
    assert sorted(pos) == [0, 1, 2, 3]


def test_single_vertex_layout():
    assert layout_positions(build(Graph([[]]), SUM)) == {0: (0.0, 0.0)}


def test_scaling_figure_and_export(tmp_path):
    report = pd.DataFrame({"n": [16, 64, 256], "mean_visits": [10.0, 30.0, 70.0], "fit_c": [1.1] * 3})
    fig = scaling_figure(report)
    assert len(fig.data) == 2
    out = tmp_path / "scaling.html"
    export_html(fig, out)
    assert out.read_text().lstrip().lower().startswith("<html")
