"""Polygon cleanup, union, and IoU on top of shapely.

Inputs arrive as (n, 2) vertex arrays (implicitly closed) or as shapely
geometries. Self-intersecting rings are resolved into their valid parts
and the cleanup is logged, not treated as an error: noisy detections
produce bowties routinely.
"""
from __future__ import annotations

import logging

import numpy as np
from shapely import make_valid
from shapely.geometry import GeometryCollection, MultiPolygon, Polygon
from shapely.geometry.base import BaseGeometry
from shapely.ops import unary_union

log = logging.getLogger(__name__)


def iter_polygons(geom: BaseGeometry):
    """Yield the Polygon parts of any geometry, skipping lower dimensions."""
    if isinstance(geom, Polygon):
        if not geom.is_empty:
            yield geom
    elif isinstance(geom, (MultiPolygon, GeometryCollection)):
        for part in geom.geoms:
            yield from iter_polygons(part)


def as_geometry(poly) -> BaseGeometry:
    """Vertex array or geometry -> valid polygonal geometry.

    Self-intersecting rings are split into their enclosed parts; the
    repair is logged once per call.
    """
    if isinstance(poly, BaseGeometry):
        geom = poly
    else:
        pts = np.asarray(poly, dtype=float)
        if pts.ndim != 2 or pts.shape[1] != 2 or pts.shape[0] < 3:
            raise ValueError(f"expected (n >= 3, 2) vertices, got {pts.shape}")
        if not np.all(np.isfinite(pts)):
            raise ValueError("polygon vertices contain NaN or Inf")
        geom = Polygon(pts)
    if not geom.is_valid:
        log.info("repairing self-intersecting polygon (area before clean: %s)",
                 getattr(geom, "area", "n/a"))
        geom = make_valid(geom)
    parts = list(iter_polygons(geom))
    if not parts:
        return Polygon()
    if len(parts) == 1:
        return parts[0]
    return MultiPolygon(parts)


def polygon_area(poly) -> float:
    return float(as_geometry(poly).area)


def polygon_iou(a, b) -> float:
    """Intersection area over union area; 0 when the union is empty."""
    ga = as_geometry(a)
    gb = as_geometry(b)
    inter = ga.intersection(gb).area
    union = ga.area + gb.area - inter
    if union <= 0.0:
        return 0.0
    return float(inter / union)


def _raster_union(quads, scale: int = 4) -> BaseGeometry:
    """Approximate union by rasterizing at `scale`x resolution and unioning
    the row runs as axis-aligned boxes. Fallback path for degenerate edge
    configurations the exact union cannot handle."""
    from PIL import Image, ImageDraw

    arrs = [np.asarray(q, dtype=float) for q in quads]
    lo = np.floor(np.min([a.min(axis=0) for a in arrs], axis=0)).astype(int)
    hi = np.ceil(np.max([a.max(axis=0) for a in arrs], axis=0)).astype(int)
    w = max(1, (hi[0] - lo[0]) * scale)
    h = max(1, (hi[1] - lo[1]) * scale)
    img = Image.new("1", (int(w), int(h)), 0)
    draw = ImageDraw.Draw(img)
    for a in arrs:
        px = [(float((x - lo[0]) * scale), float((y - lo[1]) * scale)) for x, y in a]
        draw.polygon(px, fill=1)
    mask = np.array(img, dtype=bool)
    boxes = []
    for row in range(mask.shape[0]):
        cols = np.flatnonzero(mask[row])
        if cols.size == 0:
            continue
        breaks = np.flatnonzero(np.diff(cols) > 1)
        starts = np.concatenate([[0], breaks + 1])
        ends = np.concatenate([breaks, [cols.size - 1]])
        for s, e in zip(starts, ends):
            x0 = lo[0] + cols[s] / scale
            x1 = lo[0] + (cols[e] + 1) / scale
            y0 = lo[1] + row / scale
            y1 = lo[1] + (row + 1) / scale
            boxes.append(Polygon([(x0, y0), (x1, y0), (x1, y1), (x0, y1)]))
    return unary_union(boxes) if boxes else Polygon()


def union_quads(quads) -> BaseGeometry:
    """Union of quadrilaterals (or any small rings) as one geometry.

    Degenerate members (zero area after cleaning) drop out; if the exact
    boolean union fails, a 4x rasterized union stands in.
    """
    cleaned = []
    for q in quads:
        geom = as_geometry(q)
        if geom.area > 0.0:
            cleaned.append(geom)
    if not cleaned:
        return Polygon()
    try:
        return as_geometry(unary_union(cleaned))
    except Exception:
        log.warning("exact polygon union failed; using rasterized fallback")
        return _raster_union(quads)


def geometry_rings(geom: BaseGeometry) -> list[np.ndarray]:
    """Exterior rings of all polygon parts as (n, 2) arrays (holes dropped)."""
    rings = []
    for part in iter_polygons(geom):
        xy = np.asarray(part.exterior.coords, dtype=float)
        if len(xy) > 1 and np.allclose(xy[0], xy[-1]):
            xy = xy[:-1]
        rings.append(xy)
    return rings
