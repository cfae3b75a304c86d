"""SVG rendering of a document: char quads filled in their paragraph's
color, word and line outlines on top, one path per paragraph outline.

Exactly one SVG shape element per entity (plus the background rect), so
element counts mirror entity counts.
"""
from __future__ import annotations

from .bezier import polygon_boundary
from .hierarchy import HierDocument, entity_geometry
from .polyops import geometry_rings

_PALETTE = ("#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
            "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf")

_LINE_BOUNDARY_SAMPLES = 16


def _fmt(v: float) -> str:
    return f"{v:.2f}".rstrip("0").rstrip(".")


def _points_attr(points) -> str:
    return " ".join(f"{_fmt(float(x))},{_fmt(float(y))}" for x, y in points)


def _path_d(rings) -> str:
    parts = []
    for ring in rings:
        coords = [f"{_fmt(float(x))} {_fmt(float(y))}" for x, y in ring]
        parts.append("M " + " L ".join(coords) + " Z")
    return " ".join(parts)


def document_svg(doc: HierDocument) -> str:
    w, h = doc.image_size
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
        f'width="{w}" height="{h}" viewBox="0 0 {w} {h}">',
        f'<rect x="0" y="0" width="{w}" height="{h}" fill="#ffffff"/>',
    ]
    for pi, para in enumerate(doc.paragraphs):
        color = _PALETTE[pi % len(_PALETTE)]
        rings = geometry_rings(entity_geometry(para))
        out.append(f'<path d="{_path_d(rings)}" fill="none" stroke="{color}" '
                   f'stroke-width="3" stroke-opacity="0.5"/>')
    for pi, para in enumerate(doc.paragraphs):
        color = _PALETTE[pi % len(_PALETTE)]
        for line in para.lines:
            ring = polygon_boundary(line.polygon, _LINE_BOUNDARY_SAMPLES)
            out.append(f'<polygon points="{_points_attr(ring)}" fill="none" '
                       f'stroke="{color}" stroke-width="1.5"/>')
    for pi, para in enumerate(doc.paragraphs):
        color = _PALETTE[pi % len(_PALETTE)]
        for word in [w_ for ln in para.lines for w_ in ln.words]:
            out.append(f'<polygon points="{_points_attr(word.quad)}" fill="none" '
                       f'stroke="{color}" stroke-width="1" stroke-dasharray="3 2"/>')
    for pi, para in enumerate(doc.paragraphs):
        color = _PALETTE[pi % len(_PALETTE)]
        for char in para.chars:
            out.append(f'<polygon points="{_points_attr(char.quad)}" '
                       f'fill="{color}" fill-opacity="0.35" stroke="none"/>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def render_svg(doc: HierDocument, out_path) -> None:
    svg = document_svg(doc)
    with open(out_path, "w", encoding="utf-8") as fh:
        fh.write(svg)
