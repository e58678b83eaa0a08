"""Static SVG drawings of lifted argument paths in the universal cover of T^2."""

from __future__ import annotations

import math
import xml.etree.ElementTree as ET

import numpy as np

SCALE = 120.0  # pixels per unit of argument
MARGIN = 40.0
PALETTE = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b",
           "#e377c2", "#17becf"]


def _bounds(result) -> tuple[int, int, int, int]:
    xs, ys = [0.0, 1.0], [0.0, 1.0]
    if result is not None and result.theorem_a is not None:
        for row in result.theorem_a.rows:
            if row.record is not None:
                xs += list(row.record.path.lifted[:, 0])
                ys += list(row.record.path.lifted[:, 1])
    return (math.floor(min(xs)), math.ceil(max(xs)), math.floor(min(ys)), math.ceil(max(ys)))


def render_svg(result=None) -> ET.Element:
    """SVG tree for one surface result; with no result only the unit grid is drawn."""
    x0, x1, y0, y1 = _bounds(result)
    width = (x1 - x0) * SCALE + 2 * MARGIN
    height = (y1 - y0) * SCALE + 2 * MARGIN

    def px(x, y):
        return MARGIN + (x - x0) * SCALE, MARGIN + (y1 - y) * SCALE

    svg = ET.Element("svg", xmlns="http://www.w3.org/2000/svg", version="1.1",
                     width=f"{width:.0f}", height=f"{height:.0f}")
    title = ET.SubElement(svg, "title")
    title.text = "lifted arguments" if result is None else f"{result.X.name} lifted arguments"
    grid = ET.SubElement(svg, "g", stroke="#bbbbbb", fill="none")
    grid.set("stroke-width", "1")
    for x in range(x0, x1 + 1):
        (a, b), (c, d) = px(x, y0), px(x, y1)
        ET.SubElement(grid, "line", x1=f"{a:.2f}", y1=f"{b:.2f}", x2=f"{c:.2f}", y2=f"{d:.2f}")
    for y in range(y0, y1 + 1):
        (a, b), (c, d) = px(x0, y), px(x1, y)
        ET.SubElement(grid, "line", x1=f"{a:.2f}", y1=f"{b:.2f}", x2=f"{c:.2f}", y2=f"{d:.2f}")
    labels = ET.SubElement(svg, "g", fill="#555555")
    labels.set("font-size", "10")
    labels.set("font-family", "sans-serif")
    for x in range(x0, x1 + 1):
        for y in range(y0, y1 + 1):
            a, b = px(x, y)
            ET.SubElement(labels, "circle", cx=f"{a:.2f}", cy=f"{b:.2f}", r="2")
            txt = ET.SubElement(labels, "text", x=f"{a + 3:.2f}", y=f"{b - 3:.2f}")
            txt.text = f"({x},{y})"
    if result is None:
        return svg

    if result.crit is not None:
        pts = ET.SubElement(svg, "g", fill="black")
        for i, a in enumerate(result.crit.args()):
            cx, cy = px(float(a[0]), float(a[1]))
            ET.SubElement(pts, "circle", cx=f"{cx:.2f}", cy=f"{cy:.2f}", r="4")
            txt = ET.SubElement(pts, "text", x=f"{cx + 5:.2f}", y=f"{cy + 12:.2f}")
            txt.set("font-size", "11")
            txt.text = f"z{i}"

    if result.theorem_a is not None:
        paths = ET.SubElement(svg, "g", fill="none")
        paths.set("stroke-width", "1.5")
        for row in result.theorem_a.rows:
            if row.record is None:
                continue
            lift = row.record.path.downsample(512).lifted
            if np.allclose(lift, lift[0]):
                continue
            colour = PALETTE[row.z_index % len(PALETTE)]
            coords = " ".join(f"{a:.2f},{b:.2f}" for a, b in (px(*p) for p in lift))
            line = ET.SubElement(paths, "polyline", points=coords, stroke=colour)
            line.set("data-source", str(row.z_index))
            line.set("data-sigma", result.X.cone_labels[row.sigma])
            ex, ey = px(*lift[-1])
            ET.SubElement(paths, "circle", cx=f"{ex:.2f}", cy=f"{ey:.2f}", r="3", fill=colour)
    return svg


def emit_svg(result, path: str) -> None:
    tree = ET.ElementTree(render_svg(result))
    ET.indent(tree)
    tree.write(path, encoding="unicode", xml_declaration=False)
