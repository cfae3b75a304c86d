"""Shared builders for test inputs."""
from __future__ import annotations

import numpy as np

from hts_geom.bezier import BezierCurve, BezierLinePolygon


def random_curve(rng: np.random.Generator, order: int = 3,
                 lo: float = 0.0, hi: float = 100.0) -> BezierCurve:
    return BezierCurve(rng.uniform(lo, hi, size=(order + 1, 2)))


def straight_curve(x0, y0, x1, y1, order: int = 3) -> BezierCurve:
    ts = np.linspace(0.0, 1.0, order + 1)[:, None]
    pts = (1.0 - ts) * np.array([x0, y0], dtype=float) + ts * np.array([x1, y1], dtype=float)
    return BezierCurve(pts)


def rect_line(x0, y0, x1, y1, order: int = 3,
              confidence: float = 1.0) -> BezierLinePolygon:
    """Axis-aligned rectangle as a line polygon (straight top and bottom)."""
    return BezierLinePolygon(straight_curve(x0, y0, x1, y0, order),
                             straight_curve(x0, y1, x1, y1, order),
                             confidence=confidence)


def wavy_line(rng: np.random.Generator, x0: float = 60.0, x1: float = 500.0,
              y_base: float = 200.0, height: float = 36.0,
              amplitude: float = 10.0) -> BezierLinePolygon:
    """Curved but well-behaved line polygon: a bowed baseline of the given
    height, control x monotone so the ribbon never folds."""
    xs = np.linspace(x0, x1, 4)
    ys = y_base + rng.uniform(-amplitude, amplitude, size=4)
    top = np.stack([xs, ys - height / 2.0], axis=1)
    bot = np.stack([xs, ys + height / 2.0], axis=1)
    return BezierLinePolygon(BezierCurve(top), BezierCurve(bot))


def star_polygon(rng: np.random.Generator, n: int = 8, cx: float = 0.0,
                 cy: float = 0.0, r_lo: float = 2.0, r_hi: float = 10.0) -> np.ndarray:
    """Random star-shaped (hence simple) polygon around (cx, cy)."""
    angles = np.sort(rng.uniform(0.0, 2.0 * np.pi, size=n))
    radii = rng.uniform(r_lo, r_hi, size=n)
    return np.stack([cx + radii * np.cos(angles), cy + radii * np.sin(angles)], axis=1)


def square_ring(x0, y0, x1, y1) -> np.ndarray:
    return np.array([[x0, y0], [x1, y0], [x1, y1], [x0, y1]], dtype=float)


def make_doc(line_specs, para_groups=None, image_size=(1000, 1000)):
    """Document tree from nested word specs.

    line_specs: one list of (text, (x0, y0, x1, y1)) words per line. Char
    quads tile each word box left to right; the line polygon is a dummy
    rectangle (evaluation only reads entity quads).
    """
    from hts_geom.hierarchy import (CharEntity, HierDocument, LineEntity,
                                    ParagraphEntity, WordEntity)

    dummy_poly = rect_line(0.0, 0.0, 10.0, 1.0)
    lines = []
    for words_spec in line_specs:
        words = []
        for text, (x0, y0, x1, y1) in words_spec:
            xs = np.linspace(x0, x1, len(text) + 1)
            chars = tuple(
                CharEntity(symbol=s,
                           quad=((xs[k], y0), (xs[k + 1], y0),
                                 (xs[k + 1], y1), (xs[k], y1)),
                           confidence=1.0)
                for k, s in enumerate(text))
            quad = ((x0, y0), (x1, y0), (x1, y1), (x0, y1))
            words.append(WordEntity(text=text, quad=quad, chars=chars))
        lines.append(LineEntity(text=" ".join(w.text for w in words),
                                polygon=dummy_poly, confidence=1.0,
                                rec_confidence=1.0, words=tuple(words)))
    if para_groups is None:
        para_groups = [[i] for i in range(len(lines))]
    paragraphs = tuple(ParagraphEntity(lines=tuple(lines[i] for i in g))
                       for g in para_groups)
    return HierDocument(image_size=image_size, paragraphs=paragraphs)
