"""Axis-aligned boxes in center/size form plus the small box algebra shared
by coordinate decoupling, the loss formulas, and evaluation."""
from __future__ import annotations

import math
from dataclasses import dataclass


@dataclass(frozen=True)
class Aabb:
    """Axis-aligned box as (center x, center y, width, height)."""

    x_center: float
    y_center: float
    w: float
    h: float

    def __post_init__(self):
        vals = (self.x_center, self.y_center, self.w, self.h)
        if not all(math.isfinite(v) for v in vals):
            raise ValueError(f"non-finite box values: {vals}")
        if self.w < 0 or self.h < 0:
            raise ValueError(f"negative box size: w={self.w}, h={self.h}")

    @classmethod
    def from_bounds(cls, x0: float, y0: float, x1: float, y1: float) -> "Aabb":
        if x1 < x0 or y1 < y0:
            raise ValueError(f"inverted bounds: ({x0}, {y0}, {x1}, {y1})")
        return cls((x0 + x1) / 2.0, (y0 + y1) / 2.0, x1 - x0, y1 - y0)

    @property
    def bounds(self) -> tuple[float, float, float, float]:
        """(x0, y0, x1, y1) corner form."""
        hw, hh = self.w / 2.0, self.h / 2.0
        return (self.x_center - hw, self.y_center - hh,
                self.x_center + hw, self.y_center + hh)

    @property
    def area(self) -> float:
        return self.w * self.h


def intersection_area(a: Aabb, b: Aabb) -> float:
    ax0, ay0, ax1, ay1 = a.bounds
    bx0, by0, bx1, by1 = b.bounds
    iw = min(ax1, bx1) - max(ax0, bx0)
    ih = min(ay1, by1) - max(ay0, by0)
    if iw <= 0.0 or ih <= 0.0:
        return 0.0
    return iw * ih


def hull_box(a: Aabb, b: Aabb) -> Aabb:
    """Smallest axis-aligned box containing both inputs."""
    ax0, ay0, ax1, ay1 = a.bounds
    bx0, by0, bx1, by1 = b.bounds
    return Aabb.from_bounds(min(ax0, bx0), min(ay0, by0),
                            max(ax1, bx1), max(ay1, by1))
