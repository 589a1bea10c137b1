"""
Tests for CSV result files and SVG figures
"""
import json
import os
import xml.etree.ElementTree as ET

import pytest

from config.settings import EVIDENCE_PATH
from toral.reporting import format_value, read_csv, read_metadata, write_csv
from toral.svg_plot import SVG_NS, PlotSpec, ReferenceLine, Series, emit_svg, regression_series, render_svg


@pytest.mark.parametrize("value, expected", [
    (None, ""),
    (True, "true"),
    (False, "false"),
    (3, "3"),
    (0.1, "0.10000000000000001"),
    ("exact_lattice", "exact_lattice"),
])
def test_format_value(value, expected):
    assert format_value(value) == expected


def test_floats_survive_the_file(tmp_path):
    value = 2.0 / 3.0
    path = write_csv(str(tmp_path / "out" / "values.csv"), ["x"], [[value]])
    assert float(read_csv(path)[0]["x"]) == value


def test_metadata_lines_precede_the_header(tmp_path):
    path = write_csv(str(tmp_path / "slope.csv"), ["r", "tau"], [[0.01, 5], [0.001, None]],
                     config_json='{"seed":1}', metadata={"censored": True, "r2": 0.9})
    with open(path, encoding="utf-8") as handle:
        lines = handle.read().splitlines()
    assert lines[0] == '# config: {"seed":1}'
    assert lines[2] == "r,tau"
    assert json.loads(read_metadata(path)["metadata"]) == {"censored": True, "r2": 0.9}
    assert read_csv(path)[1] == {"r": "0.001", "tau": ""}


def _elements(document: str, tag: str):
    return ET.fromstring(document).findall(f"{{{SVG_NS}}}{tag}")


def test_single_point_series_is_a_marker():
    document = render_svg(PlotSpec([Series("one", [(1.0, 2.0)])]))
    assert len(_elements(document, "circle")) == 1
    assert not _elements(document, "polyline")


def test_plot_without_points_is_rejected():
    with pytest.raises(ValueError):
        render_svg(PlotSpec([Series("empty", [])]))


def test_rendering_is_deterministic():
    plot = PlotSpec([Series("a", [(0.0, 1.0), (1.0, 3.0)]), Series("b", [(0.0, 2.0), (2.0, 0.5)])],
                    [ReferenceLine("bound", 2.078087)], "title", "x", "y")
    assert render_svg(plot) == render_svg(plot)
    assert len(_elements(render_svg(plot), "polyline")) == 2


def test_regression_series_spans_the_data():
    series = regression_series("fit", [1.0, 3.0, 2.0], 2.0, 1.0)
    assert list(series.points) == [(1.0, 3.0), (3.0, 7.0)]
    assert regression_series("fit", [], 1.0, 0.0) is None


def test_emit_svg_writes_evidence(request):
    path = os.path.join(EVIDENCE_PATH, f"{request.node.name}_figure.svg")
    plot = PlotSpec([Series("tau / -log r", [(2.3, 2.4), (4.6, 2.2), (6.9, 2.1)])],
                    [ReferenceLine("limit", 2.078087)], "Recurrence slope", "-log r", "tau / -log r")
    assert emit_svg(plot, path) == path
    with open(path, encoding="utf-8") as handle:
        assert handle.readline().startswith("<?xml")
