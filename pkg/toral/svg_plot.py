"""
Static SVG line plots drawn directly with ElementTree.
"""
import logging
import math
import os
import xml.etree.ElementTree as ET
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

logger = logging.getLogger(__name__)

WIDTH, HEIGHT = 640, 420
MARGIN_LEFT, MARGIN_RIGHT, MARGIN_TOP, MARGIN_BOTTOM = 70, 160, 40, 55
TICKS = 5
PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b")
SVG_NS = "http://www.w3.org/2000/svg"

Point = Tuple[float, float]


@dataclass(frozen=True)
class Series:
    label: str
    points: Sequence[Point]


@dataclass(frozen=True)
class ReferenceLine:
    """Horizontal line y = value across the plot."""
    label: str
    value: float


@dataclass
class PlotSpec:
    """
    Everything one figure shows.

    Attributes:
        series (List[Series]): Polylines; single-point series become markers.
        references (List[ReferenceLine]): Horizontal reference lines.
        title (str): Figure title.
        x_label (str): Horizontal axis label.
        y_label (str): Vertical axis label.
    """
    series: List[Series]
    references: List[ReferenceLine] = field(default_factory=list)
    title: str = ""
    x_label: str = "x"
    y_label: str = "y"


def _num(value: float) -> str:
    return format(round(value, 3), "g")


def _nice_range(values: Sequence[float]) -> Tuple[float, float]:
    low, high = min(values), max(values)
    if math.isclose(low, high):
        pad = abs(low) * 0.1 or 1.0
        return low - pad, high + pad
    pad = (high - low) * 0.05
    return low - pad, high + pad


def render_svg(plot: PlotSpec) -> str:
    """
    Render a plot to an SVG document.

    Args:
        plot (PlotSpec): Series, references and labels.

    Returns:
        str: Standalone SVG, byte-identical for identical input.

    Raises:
        ValueError: If there is no non-empty series.
    """
    drawable = [s for s in plot.series if len(s.points) > 0]
    if not drawable:
        raise ValueError("emit_svg needs at least one non-empty series")
    xs = [float(p[0]) for s in drawable for p in s.points]
    ys = [float(p[1]) for s in drawable for p in s.points] + [r.value for r in plot.references]
    x_min, x_max = _nice_range(xs)
    y_min, y_max = _nice_range(ys)
    inner_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT
    inner_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM

    def sx(x: float) -> float:
        return MARGIN_LEFT + (x - x_min) / (x_max - x_min) * inner_w

    def sy(y: float) -> float:
        return MARGIN_TOP + (y_max - y) / (y_max - y_min) * inner_h

    root = ET.Element("svg", {"xmlns": SVG_NS, "width": str(WIDTH), "height": str(HEIGHT),
                              "viewBox": f"0 0 {WIDTH} {HEIGHT}"})
    ET.SubElement(root, "rect", {"width": str(WIDTH), "height": str(HEIGHT), "fill": "white"})
    if plot.title:
        title = ET.SubElement(root, "text", {"x": str(WIDTH / 2), "y": "22", "text-anchor": "middle",
                                             "font-size": "15", "font-family": "sans-serif"})
        title.text = plot.title

    axes = ET.SubElement(root, "g", {"stroke": "black", "stroke-width": "1"})
    bottom, right = MARGIN_TOP + inner_h, MARGIN_LEFT + inner_w
    ET.SubElement(axes, "line", {"x1": str(MARGIN_LEFT), "y1": str(bottom), "x2": str(right), "y2": str(bottom)})
    ET.SubElement(axes, "line", {"x1": str(MARGIN_LEFT), "y1": str(MARGIN_TOP), "x2": str(MARGIN_LEFT),
                                 "y2": str(bottom)})

    labels = ET.SubElement(root, "g", {"font-size": "11", "font-family": "sans-serif"})
    for i in range(TICKS + 1):
        x_value = x_min + (x_max - x_min) * i / TICKS
        y_value = y_min + (y_max - y_min) * i / TICKS
        px, py = _num(sx(x_value)), _num(sy(y_value))
        ET.SubElement(axes, "line", {"x1": px, "y1": str(bottom), "x2": px, "y2": str(bottom + 5)})
        ET.SubElement(axes, "line", {"x1": str(MARGIN_LEFT - 5), "y1": py, "x2": str(MARGIN_LEFT), "y2": py})
        tick = ET.SubElement(labels, "text", {"x": px, "y": str(bottom + 18), "text-anchor": "middle"})
        tick.text = format(x_value, ".3g")
        tick = ET.SubElement(labels, "text", {"x": str(MARGIN_LEFT - 8), "y": py, "text-anchor": "end"})
        tick.text = format(y_value, ".3g")
    x_label = ET.SubElement(labels, "text", {"x": _num(MARGIN_LEFT + inner_w / 2), "y": str(HEIGHT - 12),
                                             "text-anchor": "middle"})
    x_label.text = plot.x_label
    y_label = ET.SubElement(labels, "text", {"x": "16", "y": _num(MARGIN_TOP + inner_h / 2),
                                             "text-anchor": "middle",
                                             "transform": f"rotate(-90 16 {_num(MARGIN_TOP + inner_h / 2)})"})
    y_label.text = plot.y_label

    legend: List[Tuple[str, str, bool]] = []
    for index, series in enumerate(drawable):
        color = PALETTE[index % len(PALETTE)]
        coords = [(_num(sx(float(x))), _num(sy(float(y)))) for x, y in series.points]
        if len(coords) == 1:
            ET.SubElement(root, "circle", {"cx": coords[0][0], "cy": coords[0][1], "r": "4", "fill": color})
        else:
            ET.SubElement(root, "polyline", {"points": " ".join(f"{x},{y}" for x, y in coords),
                                             "fill": "none", "stroke": color, "stroke-width": "1.5"})
        legend.append((series.label, color, False))
    for index, reference in enumerate(plot.references):
        color = PALETTE[(len(drawable) + index) % len(PALETTE)]
        py = _num(sy(reference.value))
        ET.SubElement(root, "line", {"x1": str(MARGIN_LEFT), "y1": py, "x2": str(right), "y2": py,
                                     "stroke": color, "stroke-dasharray": "6 4"})
        legend.append((reference.label, color, True))

    for index, (label, color, dashed) in enumerate(legend):
        y = MARGIN_TOP + 10 + 18 * index
        attributes = {"x1": str(right + 12), "y1": str(y), "x2": str(right + 32), "y2": str(y),
                      "stroke": color, "stroke-width": "2"}
        if dashed:
            attributes["stroke-dasharray"] = "4 3"
        ET.SubElement(root, "line", attributes)
        text = ET.SubElement(labels, "text", {"x": str(right + 38), "y": str(y + 4)})
        text.text = label

    return ET.tostring(root, encoding="unicode")


def emit_svg(plot: PlotSpec, path: str) -> str:
    """
    Write a plot to an SVG file.

    Args:
        plot (PlotSpec): Figure content.
        path (str): Target file; parent directories are created.

    Returns:
        str: The path written.
    """
    document = render_svg(plot)
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, "w", encoding="utf-8") as handle:
        handle.write('<?xml version="1.0" encoding="UTF-8"?>\n')
        handle.write(document)
        handle.write("\n")
    logger.info(f"Wrote plot with {len(plot.series)} series to {path}")
    return path


def regression_series(label: str, xs: Sequence[float], slope: float, intercept: float) -> Optional[Series]:
    """Two-point series along y = slope x + intercept spanning xs."""
    if not xs:
        return None
    low, high = min(xs), max(xs)
    return Series(label, [(low, slope * low + intercept), (high, slope * high + intercept)])
