"""Line cropping and the crop<->image coordinate bijection.

A line polygon spans a ruled surface between its top and bottom curves:

    P(t, r) = (1 - r) * top(t) + r * bottom(t),  t, r in [0, 1]

The crop x-axis indexes t (parameter-uniform, not arc-length-uniform) and
the y-axis indexes r. The forward map is the closed form above; the inverse
is a per-point 1-d root find on the cross product of the rail direction
with the query offset, then a linear solve for r.

All polygon control points here are in image pixel coordinates. A pixel's
intensity sits at its center, i.e. image coordinate (i + 0.5, j + 0.5) for
column i, row j; samples outside the image read 0.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .bezier import (BezierLinePolygon, Point2, arc_length, eval_bezier_many,
                     midline_curve, sample_curve)

# Alignment tolerance of the bijection, in crop pixels.
INVERSE_TOLERANCE_PX = 0.25

_HEIGHT_SAMPLES = 16
_MIDLINE_SEGMENTS = 256
_ROOT_GRID = 65
_BISECT_ITERS = 52

DEFAULT_CROP_HEIGHT = 40
DEFAULT_MAX_WIDTH = 1024


class DegenerateLineError(ValueError):
    """Polygon too degenerate to crop (zero height or zero-size output)."""


class NoPreimageError(ValueError):
    """The queried image point does not lie inside the line region."""


class InverseResidualError(RuntimeError):
    """Root find finished above tolerance; carries the residual in px."""

    def __init__(self, message: str, residual: float):
        super().__init__(message)
        self.residual = residual


@dataclass(frozen=True)
class GrayImage:
    """Grayscale raster with row-major intensities in [0, 1]."""

    pixels: np.ndarray  # (height, width) float

    def __init__(self, pixels):
        arr = np.asarray(pixels, dtype=float)
        if arr.ndim != 2 or arr.size == 0:
            raise ValueError(f"expected a non-empty (height, width) array, got {arr.shape}")
        if not np.all(np.isfinite(arr)) or arr.min() < 0.0 or arr.max() > 1.0:
            raise ValueError("intensities must be finite and within [0, 1]")
        arr = arr.copy()
        arr.setflags(write=False)
        object.__setattr__(self, "pixels", arr)

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @classmethod
    def from_uint8(cls, raw: np.ndarray) -> "GrayImage":
        return cls(np.asarray(raw, dtype=float) / 255.0)

    def to_uint8(self) -> np.ndarray:
        return np.round(self.pixels * 255.0).astype(np.uint8)

    def __eq__(self, other):
        return isinstance(other, GrayImage) and np.array_equal(self.pixels, other.pixels)


@dataclass(frozen=True)
class CropMapping:
    """Everything needed to map between crop pixels and image pixels."""

    polygon: BezierLinePolygon
    crop_height: int
    crop_width: int
    image_size: tuple[int, int]  # (W, H) px

    def __post_init__(self):
        if self.crop_height < 1 or self.crop_width < 1:
            raise ValueError(
                f"crop size must be >= 1, got {self.crop_width}x{self.crop_height}")
        w, h = self.image_size
        if w < 1 or h < 1:
            raise ValueError(f"image size must be >= 1, got {self.image_size}")


@dataclass(frozen=True)
class RectifiedCrop:
    """A straightened line patch plus the mapping that produced it."""

    image: GrayImage
    mapping: CropMapping

    def __post_init__(self):
        if (self.image.width != self.mapping.crop_width
                or self.image.height != self.mapping.crop_height):
            raise ValueError(
                f"crop is {self.image.width}x{self.image.height} but mapping says "
                f"{self.mapping.crop_width}x{self.mapping.crop_height}")


def mean_height(poly: BezierLinePolygon, n_samples: int = _HEIGHT_SAMPLES) -> float:
    """Mean top-to-bottom distance over parameter-uniform samples."""
    top = sample_curve(poly.top, n_samples)
    bottom = sample_curve(poly.bottom, n_samples)
    return float(np.mean(np.linalg.norm(bottom - top, axis=1)))


def compute_crop_width(poly: BezierLinePolygon, crop_height: int,
                       max_width: int = DEFAULT_MAX_WIDTH) -> int:
    """Crop width preserving the line's aspect ratio: the midline arc length
    over the mean height, scaled to the crop height and clamped to
    [1, max_width]."""
    if crop_height < 1:
        raise ValueError(f"crop_height must be >= 1, got {crop_height}")
    if max_width < 1:
        raise ValueError(f"max_width must be >= 1, got {max_width}")
    h = mean_height(poly)
    if h <= 0.0:
        raise DegenerateLineError("zero mean height: cannot size a crop")
    length = arc_length(midline_curve(poly), _MIDLINE_SEGMENTS)
    return int(np.clip(round(crop_height * length / h), 1, max_width))


def make_crop_mapping(poly: BezierLinePolygon, image_size: tuple[int, int],
                      crop_height: int = DEFAULT_CROP_HEIGHT,
                      max_width: int = DEFAULT_MAX_WIDTH) -> CropMapping:
    width = compute_crop_width(poly, crop_height, max_width)
    return CropMapping(polygon=poly, crop_height=crop_height,
                       crop_width=width, image_size=tuple(image_size))


def crop_to_image_many(mapping: CropMapping, crop_points) -> np.ndarray:
    """Forward map for an (n, 2) array of crop-pixel points."""
    pts = np.asarray(crop_points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise ValueError(f"expected (n, 2) points, got {pts.shape}")
    cw, ch = mapping.crop_width, mapping.crop_height
    if pts.size and (pts[:, 0].min() < 0 or pts[:, 0].max() > cw
                     or pts[:, 1].min() < 0 or pts[:, 1].max() > ch):
        raise ValueError(f"crop point outside [0, {cw}] x [0, {ch}]")
    t = pts[:, 0] / cw
    r = pts[:, 1] / ch
    top = eval_bezier_many(mapping.polygon.top, t)
    bottom = eval_bezier_many(mapping.polygon.bottom, t)
    return (1.0 - r)[:, None] * top + r[:, None] * bottom


def crop_to_image(mapping: CropMapping, p) -> Point2:
    """Map one crop-pixel point into image pixels."""
    x, y = (p.x, p.y) if hasattr(p, "x") else (p[0], p[1])
    out = crop_to_image_many(mapping, [[x, y]])[0]
    return Point2(float(out[0]), float(out[1]))


def _ribbon_cross(mapping: CropMapping, ts: np.ndarray, qs: np.ndarray) -> np.ndarray:
    """cross(bottom(t) - top(t), q - top(t)) per (t, q) pair; zero where q
    lies on the cross-section at t."""
    top = eval_bezier_many(mapping.polygon.top, ts)
    d = eval_bezier_many(mapping.polygon.bottom, ts) - top
    off = qs - top
    return d[:, 0] * off[:, 1] - d[:, 1] * off[:, 0]


def image_to_crop_many(mapping: CropMapping, image_points) -> np.ndarray:
    """Inverse map for an (n, 2) array of image-pixel points.

    Raises NoPreimageError if any point falls outside the line region
    (tolerance 0.25 px), InverseResidualError if the root find cannot
    reach that residual on an in-region point.
    """
    qs = np.asarray(image_points, dtype=float)
    if qs.ndim != 2 or qs.shape[1] != 2:
        raise ValueError(f"expected (n, 2) points, got {qs.shape}")
    n = qs.shape[0]
    cw, ch = mapping.crop_width, mapping.crop_height

    grid = np.linspace(0.0, 1.0, _ROOT_GRID)
    # g-values of every point at every grid node, (n, _ROOT_GRID)
    g = np.empty((n, _ROOT_GRID))
    top_g = eval_bezier_many(mapping.polygon.top, grid)
    d_g = eval_bezier_many(mapping.polygon.bottom, grid) - top_g
    for j in range(_ROOT_GRID):
        off = qs - top_g[j]
        g[:, j] = d_g[j, 0] * off[:, 1] - d_g[j, 1] * off[:, 0]

    sign_change = g[:, :-1] * g[:, 1:] <= 0.0
    best_crop = np.full((n, 2), np.nan)
    best_resid = np.full(n, np.inf)
    any_bracket = sign_change.any(axis=1)

    # Successive bracket candidates: most points have exactly one; S-shaped
    # lines can produce more, so keep refining per-point until none are left.
    remaining = sign_change.copy()
    while remaining.any():
        idx = np.argmax(remaining, axis=1)
        active = remaining[np.arange(n), idx]
        remaining[np.arange(n), idx] = False
        if not active.any():
            break
        rows = np.nonzero(active)[0]
        lo = grid[idx[rows]]
        hi = grid[idx[rows] + 1]
        q_act = qs[rows]
        g_lo = _ribbon_cross(mapping, lo, q_act)
        for _ in range(_BISECT_ITERS):
            mid = 0.5 * (lo + hi)
            g_mid = _ribbon_cross(mapping, mid, q_act)
            take_left = g_lo * g_mid <= 0.0
            hi = np.where(take_left, mid, hi)
            lo = np.where(take_left, lo, mid)
            g_lo = np.where(take_left, g_lo, g_mid)
        t = 0.5 * (lo + hi)
        top = eval_bezier_many(mapping.polygon.top, t)
        d = eval_bezier_many(mapping.polygon.bottom, t) - top
        den = np.sum(d * d, axis=1)
        safe = den > 1e-30
        r = np.where(safe, np.sum((q_act - top) * d, axis=1) / np.where(safe, den, 1.0), np.nan)
        reproj = (1.0 - r)[:, None] * top + r[:, None] * (top + d)
        resid = np.linalg.norm(reproj - q_act, axis=1)
        resid = np.where(safe, resid, np.inf)
        crop_xy = np.stack([t * cw, r * ch], axis=1)
        in_band = (crop_xy[:, 1] >= -INVERSE_TOLERANCE_PX) & \
                  (crop_xy[:, 1] <= ch + INVERSE_TOLERANCE_PX)
        score = np.where(in_band, resid, np.inf)
        better = score < best_resid[rows]
        best_resid[rows] = np.where(better, score, best_resid[rows])
        best_crop[rows] = np.where(better[:, None], crop_xy, best_crop[rows])

    ok = best_resid <= INVERSE_TOLERANCE_PX
    if not ok.all():
        bad = np.nonzero(~ok)[0]
        if not any_bracket[bad].any() or np.isinf(best_resid[bad]).all():
            raise NoPreimageError(
                f"{len(bad)} of {n} points outside the line region "
                f"(first: {tuple(qs[bad[0]])})")
        worst = float(np.max(best_resid[bad][np.isfinite(best_resid[bad])]))
        raise InverseResidualError(
            f"inverse did not converge for {len(bad)} of {n} points "
            f"(worst residual {worst:.3g} px)", worst)
    return best_crop


def image_to_crop(mapping: CropMapping, q) -> Point2:
    """Map one image-pixel point into crop pixels."""
    x, y = (q.x, q.y) if hasattr(q, "x") else (q[0], q[1])
    out = image_to_crop_many(mapping, [[x, y]])[0]
    return Point2(float(out[0]), float(out[1]))


def _bilinear_sample(image: GrayImage, points: np.ndarray) -> np.ndarray:
    """Bilinear intensity at continuous image coordinates; zero outside."""
    x = points[..., 0] - 0.5
    y = points[..., 1] - 0.5
    x0 = np.floor(x).astype(int)
    y0 = np.floor(y).astype(int)
    wx = x - x0
    wy = y - y0
    h, w = image.pixels.shape

    def tap(xi, yi):
        inside = (xi >= 0) & (xi < w) & (yi >= 0) & (yi < h)
        vals = image.pixels[np.clip(yi, 0, h - 1), np.clip(xi, 0, w - 1)]
        return np.where(inside, vals, 0.0)

    return ((1 - wx) * (1 - wy) * tap(x0, y0)
            + wx * (1 - wy) * tap(x0 + 1, y0)
            + (1 - wx) * wy * tap(x0, y0 + 1)
            + wx * wy * tap(x0 + 1, y0 + 1))


def crop_rectify(image: GrayImage, poly: BezierLinePolygon,
                 crop_height: int = DEFAULT_CROP_HEIGHT,
                 max_width: int = DEFAULT_MAX_WIDTH) -> RectifiedCrop:
    """Straighten the line region into a crop_height-tall grayscale patch.

    Output pixel (u, v) takes the bilinear sample at the image position of
    crop point (u + 0.5, v + 0.5); samples beyond the image read black.
    """
    mapping = make_crop_mapping(poly, (image.width, image.height),
                                crop_height, max_width)
    us = (np.arange(mapping.crop_width) + 0.5) / mapping.crop_width
    vs = (np.arange(mapping.crop_height) + 0.5) / mapping.crop_height
    top = eval_bezier_many(poly.top, us)       # (W, 2)
    bottom = eval_bezier_many(poly.bottom, us)
    r = vs[:, None, None]                      # (H, 1, 1)
    grid = (1.0 - r) * top[None] + r * bottom[None]  # (H, W, 2)
    return RectifiedCrop(image=GrayImage(_bilinear_sample(image, grid)),
                         mapping=mapping)


def project_box(mapping: CropMapping, box) -> np.ndarray:
    """Map a crop-space box (x0, y0, x1, y1) to an image-space quadrilateral.

    Returns the four corners in order top-left, top-right, bottom-right,
    bottom-left, shape (4, 2).
    """
    x0, y0, x1, y1 = (float(v) for v in box)
    if x1 < x0 or y1 < y0:
        raise ValueError(f"inverted box: {box}")
    corners = [[x0, y0], [x1, y0], [x1, y1], [x0, y1]]
    return crop_to_image_many(mapping, corners)
