"""Decoupled line coordinates: an axis-aligned location box plus
box-relative curve shape.

Global control points (x, y) and local ones (xl, yl) are related by

    x = xl * w + x_center,   y = yl * h + y_center

where (x_center, y_center, w, h) is the tight axis-aligned box of the two
boundary curves (curve extent, not the control hull, so control points may
fall outside the box). Local coordinates are therefore invariant under
translation and axis-aligned scaling of the line. Local values are never
clamped.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .bezier import BezierCurve, BezierLinePolygon, curve_tight_bbox
from .boxes import Aabb, hull_box


class DegenerateBoxError(ValueError):
    """Raised when a zero-size box makes the location/shape split undefined."""


def _curve_pair(top, bottom) -> tuple[np.ndarray, np.ndarray]:
    t = np.asarray(top, dtype=float)
    b = np.asarray(bottom, dtype=float)
    if t.shape != b.shape or t.ndim != 2 or t.shape[1] != 2 or t.shape[0] < 2:
        raise ValueError(f"top/bottom shapes must match as (m+1, 2): {t.shape} vs {b.shape}")
    if not (np.all(np.isfinite(t)) and np.all(np.isfinite(b))):
        raise ValueError("control points contain NaN or Inf")
    t = t.copy()
    b = b.copy()
    t.setflags(write=False)
    b.setflags(write=False)
    return t, b


@dataclass(frozen=True)
class GlobalBezier:
    """Top and bottom control points in absolute coordinates."""

    top: np.ndarray
    bottom: np.ndarray

    def __init__(self, top, bottom):
        t, b = _curve_pair(top, bottom)
        object.__setattr__(self, "top", t)
        object.__setattr__(self, "bottom", b)

    @property
    def order(self) -> int:
        return self.top.shape[0] - 1

    @classmethod
    def from_line_polygon(cls, poly: BezierLinePolygon) -> "GlobalBezier":
        return cls(poly.top.points, poly.bottom.points)

    def to_line_polygon(self, confidence: float = 1.0) -> BezierLinePolygon:
        return BezierLinePolygon(top=BezierCurve(self.top),
                                 bottom=BezierCurve(self.bottom),
                                 confidence=confidence)

    def __eq__(self, other):
        return (isinstance(other, GlobalBezier)
                and np.array_equal(self.top, other.top)
                and np.array_equal(self.bottom, other.bottom))


@dataclass(frozen=True)
class LocalBezier:
    """Top and bottom control points relative to a location box, in box
    units measured from the box center. Unbounded, though points inside the
    box land in [-0.5, 0.5] on each axis."""

    top: np.ndarray
    bottom: np.ndarray

    def __init__(self, top, bottom):
        t, b = _curve_pair(top, bottom)
        object.__setattr__(self, "top", t)
        object.__setattr__(self, "bottom", b)

    @property
    def order(self) -> int:
        return self.top.shape[0] - 1

    def __eq__(self, other):
        return (isinstance(other, LocalBezier)
                and np.array_equal(self.top, other.top)
                and np.array_equal(self.bottom, other.bottom))


def enclosing_aabb(line: GlobalBezier | BezierLinePolygon) -> Aabb:
    """Tight axis-aligned box of the union of the two boundary curves."""
    if isinstance(line, GlobalBezier):
        line = line.to_line_polygon()
    return hull_box(curve_tight_bbox(line.top), curve_tight_bbox(line.bottom))


def local_to_global(local: LocalBezier, box: Aabb) -> GlobalBezier:
    """Place box-relative shape coordinates at an absolute location."""
    scale = np.array([box.w, box.h])
    center = np.array([box.x_center, box.y_center])
    return GlobalBezier(top=local.top * scale + center,
                        bottom=local.bottom * scale + center)


def global_to_local(line: GlobalBezier, box: Aabb) -> LocalBezier:
    """Express absolute control points relative to a location box.

    Exact inverse of local_to_global for the same box. A zero-size box
    cannot carry shape information, so it is an error rather than a
    silent division guard.
    """
    if box.w <= 0.0 or box.h <= 0.0:
        raise DegenerateBoxError(f"cannot split on zero-size box: w={box.w}, h={box.h}")
    scale = np.array([box.w, box.h])
    center = np.array([box.x_center, box.y_center])
    return LocalBezier(top=(line.top - center) / scale,
                       bottom=(line.bottom - center) / scale)


def location_shape_targets(line: GlobalBezier | BezierLinePolygon) -> tuple[Aabb, LocalBezier]:
    """Regression targets for a line: its tight box and the shape relative
    to that box. Reconstructing with local_to_global recovers the input."""
    if isinstance(line, BezierLinePolygon):
        line = GlobalBezier.from_line_polygon(line)
    box = enclosing_aabb(line)
    return box, global_to_local(line, box)
