"""Bezier curve evaluation, sampling, exact bounding, arc length, fitting,
and the two-curve text line polygon built on top of them.

Conventions: a text line boundary is a top curve and a bottom curve, both
running left to right in reading order. The closed boundary polyline is the
top samples followed by the bottom samples reversed; with image coordinates
(y down) that ordering has positive shoelace area.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .boxes import Aabb

# Samples per side used when validating that a line polygon is simple.
DEFAULT_BOUNDARY_SAMPLES = 16

# Dense fallback for bounding curves above cubic order.
_BBOX_FALLBACK_SAMPLES = 4096


@dataclass(frozen=True)
class Point2:
    """A finite 2-d point; unit depends on the coordinate space in use."""

    x: float
    y: float

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise ValueError(f"non-finite point: ({self.x}, {self.y})")

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y], dtype=float)


def _as_point_array(points, min_count: int) -> np.ndarray:
    arr = np.asarray([(p.x, p.y) if isinstance(p, Point2) else tuple(p)
                      for p in points], dtype=float)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise ValueError(f"expected (n, 2) points, got shape {arr.shape}")
    if arr.shape[0] < min_count:
        raise ValueError(f"expected at least {min_count} points, got {arr.shape[0]}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("points contain NaN or Inf")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class BezierCurve:
    """A Bezier curve of order m held as its m+1 control points."""

    points: np.ndarray  # (m+1, 2), read-only

    def __init__(self, points):
        arr = _as_point_array(points, min_count=2)
        object.__setattr__(self, "points", arr)

    @property
    def order(self) -> int:
        return self.points.shape[0] - 1

    def __eq__(self, other):
        return isinstance(other, BezierCurve) and np.array_equal(self.points, other.points)


@dataclass(frozen=True)
class BezierLinePolygon:
    """A text line region bounded by a top and a bottom curve of equal order,
    both left to right in reading order."""

    top: BezierCurve
    bottom: BezierCurve
    confidence: float = 1.0

    def __post_init__(self):
        if self.top.order != self.bottom.order:
            raise ValueError(
                f"curve orders differ: top={self.top.order}, bottom={self.bottom.order}")
        if not (0.0 <= self.confidence <= 1.0):
            raise ValueError(f"confidence {self.confidence} outside [0, 1]")

    @property
    def order(self) -> int:
        return self.top.order

    def is_simple(self, n_per_side: int = DEFAULT_BOUNDARY_SAMPLES) -> bool:
        """True when the sampled boundary is a simple polygon of positive area.

        Degenerate detections are flagged this way rather than rejected at
        construction; callers decide what to do with them.
        """
        ring = polygon_boundary(self, n_per_side)
        return _ring_is_simple(ring)


def _bernstein_matrix(order: int, ts: np.ndarray) -> np.ndarray:
    """Bernstein basis values, shape (len(ts), order + 1)."""
    ts = np.asarray(ts, dtype=float)
    j = np.arange(order + 1)
    binom = np.array([math.comb(order, k) for k in j], dtype=float)
    t = ts[:, None]
    return binom * t ** j * (1.0 - t) ** (order - j)


def eval_bezier_many(curve: BezierCurve, ts) -> np.ndarray:
    """Evaluate the curve at an array of parameters; returns (len(ts), 2)."""
    ts = np.asarray(ts, dtype=float)
    if ts.size and (ts.min() < 0.0 or ts.max() > 1.0):
        raise ValueError(f"parameter outside [0, 1]: {ts.min()}..{ts.max()}")
    return _bernstein_matrix(curve.order, ts) @ curve.points


def eval_bezier(curve: BezierCurve, t: float) -> Point2:
    """Point on the curve at parameter t in [0, 1]."""
    if not (0.0 <= t <= 1.0):
        raise ValueError(f"parameter t={t} outside [0, 1]")
    x, y = eval_bezier_many(curve, [t])[0]
    return Point2(float(x), float(y))


def sample_curve(curve: BezierCurve, n: int) -> np.ndarray:
    """n parameter-uniform samples from t=0 to t=1, shape (n, 2)."""
    if n < 2:
        raise ValueError(f"need at least 2 samples, got {n}")
    return eval_bezier_many(curve, np.linspace(0.0, 1.0, n))


def _power_coefficients(points_1d: np.ndarray) -> np.ndarray:
    """Power-basis coefficients c_k of a 1-d Bernstein polynomial:
    B(t) = sum_k C(m,k) * (forward difference^k of p_0) * t^k."""
    m = len(points_1d) - 1
    diffs = points_1d.astype(float).copy()
    coeffs = np.empty(m + 1)
    for k in range(m + 1):
        coeffs[k] = math.comb(m, k) * diffs[0]
        diffs = diffs[1:] - diffs[:-1]
    return coeffs


def _derivative_roots_01(coeffs: np.ndarray) -> list[float]:
    """Roots of d/dt of the power-series polynomial, inside (0, 1).

    The incoming polynomial has degree <= 3, so the derivative is at most
    quadratic and solvable in closed form.
    """
    deriv = coeffs[1:] * np.arange(1, len(coeffs))
    while len(deriv) and abs(deriv[-1]) == 0.0:
        deriv = deriv[:-1]
    if len(deriv) <= 1:
        return []  # constant or zero derivative: no interior extrema
    if len(deriv) == 2:
        b, a = deriv  # a*t + b
        t = -b / a
        return [t] if 0.0 < t < 1.0 else []
    c, b, a = deriv  # a*t^2 + b*t + c
    disc = b * b - 4.0 * a * c
    if disc < 0.0:
        return []
    sq = math.sqrt(disc)
    return [t for t in ((-b - sq) / (2.0 * a), (-b + sq) / (2.0 * a)) if 0.0 < t < 1.0]


def curve_tight_bbox(curve: BezierCurve) -> Aabb:
    """Exact axis-aligned extent of the curve over t in [0, 1].

    Exact (via derivative roots) up to cubic order; higher orders fall back
    to dense sampling.
    """
    if curve.order <= 3:
        lo = np.empty(2)
        hi = np.empty(2)
        for axis in range(2):
            coeffs = _power_coefficients(curve.points[:, axis])
            ts = [0.0, 1.0] + _derivative_roots_01(coeffs)
            vals = [float(np.polynomial.polynomial.polyval(t, coeffs)) for t in ts]
            # endpoints are exact control point coordinates
            vals[0] = float(curve.points[0, axis])
            vals[1] = float(curve.points[-1, axis])
            lo[axis] = min(vals)
            hi[axis] = max(vals)
    else:
        pts = sample_curve(curve, _BBOX_FALLBACK_SAMPLES)
        lo = pts.min(axis=0)
        hi = pts.max(axis=0)
    return Aabb.from_bounds(lo[0], lo[1], hi[0], hi[1])


def arc_length(curve: BezierCurve, n_seg: int) -> float:
    """Chord-sum length over n_seg parameter-uniform segments."""
    if n_seg < 1:
        raise ValueError(f"need at least 1 segment, got {n_seg}")
    pts = sample_curve(curve, n_seg + 1)
    return float(np.sum(np.linalg.norm(np.diff(pts, axis=0), axis=1)))


@dataclass(frozen=True)
class BezierFit:
    """Result of a least-squares fit: the curve, the RMS point-to-sample
    residual, and whether the chord-length parameterization had to be
    replaced by a uniform one."""

    curve: BezierCurve
    rms: float
    uniform_fallback: bool = False


def _chord_parameters(points: np.ndarray) -> np.ndarray:
    chords = np.linalg.norm(np.diff(points, axis=0), axis=1)
    total = chords.sum()
    if total <= 0.0:
        return np.linspace(0.0, 1.0, len(points))
    t = np.concatenate([[0.0], np.cumsum(chords)]) / total
    t[-1] = 1.0
    return t


def _solve_pinned(points: np.ndarray, ts: np.ndarray, m: int):
    """Least squares for interior control points with endpoints pinned.
    Returns (control_points, lstsq_rank, n_unknowns)."""
    basis = _bernstein_matrix(m, ts)
    ctrl = np.empty((m + 1, 2))
    ctrl[0] = points[0]
    ctrl[-1] = points[-1]
    if m == 1:
        return ctrl, 0, 0
    rhs = points - np.outer(basis[:, 0], points[0]) - np.outer(basis[:, m], points[-1])
    inner, _, rank, _ = np.linalg.lstsq(basis[:, 1:m], rhs, rcond=None)
    ctrl[1:-1] = inner
    return ctrl, rank, m - 1


def _refine_parameters(curve: BezierCurve, points: np.ndarray, ts: np.ndarray) -> np.ndarray:
    """Newton steps moving each interior t toward the closest curve point."""
    m = curve.order
    d1_pts = m * np.diff(curve.points, axis=0)
    d2_pts = (m - 1) * np.diff(d1_pts, axis=0) if m >= 2 else np.zeros((1, 2))
    t = ts.copy()
    inner = slice(1, len(t) - 1)
    for _ in range(4):
        b = eval_bezier_many(curve, t[inner])
        d1 = _bernstein_matrix(m - 1, t[inner]) @ d1_pts
        d2 = (_bernstein_matrix(m - 2, t[inner]) @ d2_pts) if m >= 2 else np.zeros_like(d1)
        diff = b - points[inner]
        num = np.sum(diff * d1, axis=1)
        den = np.sum(d1 * d1, axis=1) + np.sum(diff * d2, axis=1)
        ok = np.abs(den) > 1e-30
        step = np.where(ok, num / np.where(ok, den, 1.0), 0.0)
        t[inner] = np.clip(t[inner] - step, 0.0, 1.0)
    return t


def _refined_candidate(points: np.ndarray, ts0: np.ndarray, m: int, max_iter: int):
    """Solve-then-reproject loop from one starting parameterization.
    Returns (curve, rms) for the best iterate, or None when the initial
    system is rank-deficient."""
    ctrl, rank, n_unknowns = _solve_pinned(points, ts0, m)
    if n_unknowns and rank < n_unknowns:
        return None
    curve = BezierCurve(ctrl)
    ts = ts0
    best, best_rms = curve, _fit_rms(curve, points, ts)
    for _ in range(max_iter):
        ts = _refine_parameters(curve, points, ts)
        ctrl, _, _ = _solve_pinned(points, ts, m)
        curve = BezierCurve(ctrl)
        rms = _fit_rms(curve, points, ts)
        if rms < best_rms:
            best, best_rms = curve, rms
        if rms < 1e-12:
            break
    return best, best_rms


def fit_bezier(polyline, m: int = 3, max_iter: int = 12) -> BezierFit:
    """Least-squares Bezier fit of a polyline with endpoints pinned.

    Runs the solve/reproject refinement from a chord-length start and from
    a uniform-parameter start and keeps whichever converges lower; the
    alternation has local minima and the two starts cover the uneven and
    evenly-sampled regimes respectively. A rank-deficient chord-length
    system (collapsed parameters from near-duplicate points) leaves only
    the uniform branch and is flagged in the result.
    """
    if m < 1:
        raise ValueError(f"order must be >= 1, got {m}")
    points = _as_point_array(polyline, min_count=2)
    distinct = np.unique(points, axis=0).shape[0]
    if distinct < m + 1:
        raise ValueError(
            f"need at least {m + 1} distinct points for an order-{m} fit, got {distinct}")

    chord = _refined_candidate(points, _chord_parameters(points), m, max_iter)
    uniform = _refined_candidate(points, np.linspace(0.0, 1.0, len(points)), m,
                                 max_iter)
    if chord is None and uniform is None:
        raise ValueError("fit system is rank-deficient for both parameterizations")
    if chord is None:
        return BezierFit(curve=uniform[0], rms=uniform[1], uniform_fallback=True)
    if uniform is None or chord[1] <= uniform[1]:
        return BezierFit(curve=chord[0], rms=chord[1])
    return BezierFit(curve=uniform[0], rms=uniform[1])


def _fit_rms(curve: BezierCurve, points: np.ndarray, ts: np.ndarray) -> float:
    resid = eval_bezier_many(curve, ts) - points
    return float(np.sqrt(np.mean(np.sum(resid * resid, axis=1))))


def polygon_boundary(poly: BezierLinePolygon, n_per_side: int) -> np.ndarray:
    """Closed boundary polyline: top left-to-right then bottom right-to-left.

    Shape (2 * n_per_side, 2); closure is implicit (last point connects back
    to the first).
    """
    if n_per_side < 2:
        raise ValueError(f"need at least 2 samples per side, got {n_per_side}")
    top = sample_curve(poly.top, n_per_side)
    bottom = sample_curve(poly.bottom, n_per_side)
    return np.vstack([top, bottom[::-1]])


def signed_area(ring: np.ndarray) -> float:
    """Shoelace area of an implicitly closed polyline (positive for the
    canonical top-then-reversed-bottom ordering in y-down coordinates)."""
    x = ring[:, 0]
    y = ring[:, 1]
    return 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))


def _ring_is_simple(ring: np.ndarray) -> bool:
    from shapely.geometry import Polygon
    if len(ring) < 3:
        return False
    pg = Polygon(ring)
    return bool(pg.is_valid and pg.area > 0.0)


def transform_curve(curve: BezierCurve, scale=(1.0, 1.0), offset=(0.0, 0.0)) -> BezierCurve:
    """Per-axis scale then translate of all control points."""
    pts = curve.points * np.asarray(scale, dtype=float) + np.asarray(offset, dtype=float)
    return BezierCurve(pts)


def transform_polygon(poly: BezierLinePolygon, scale=(1.0, 1.0),
                      offset=(0.0, 0.0)) -> BezierLinePolygon:
    return BezierLinePolygon(top=transform_curve(poly.top, scale, offset),
                             bottom=transform_curve(poly.bottom, scale, offset),
                             confidence=poly.confidence)


def midline_curve(poly: BezierLinePolygon) -> BezierCurve:
    """Pointwise average of top and bottom control points."""
    return BezierCurve((poly.top.points + poly.bottom.points) / 2.0)
