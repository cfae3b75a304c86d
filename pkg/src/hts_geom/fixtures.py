"""Deterministic synthetic fixtures: rendered pages with exact ground
truth plus the detection/recognition inputs that reproduce them.

Lines are laid out in non-overlapping horizontal bands. Each line's
midline starts as a sinusoid, is fitted with a cubic, and the fitted
curve (not the sinusoid) becomes the truth: top and bottom rails are the
midline's control points shifted by half the line height. Characters are
abutting boxes in crop space, so word boxes tile exactly; glyphs render
as filled rectangles inset within their boxes.

Noise scales fixed standard-normal draws, so for one seed the error field
grows proportionally with the noise parameters; zero noise reproduces the
ground truth bit for bit.
"""
from __future__ import annotations

import string
from dataclasses import dataclass

import numpy as np

from .bezier import BezierCurve, BezierLinePolygon, eval_bezier_many, fit_bezier, transform_polygon
from .boxes import intersection_area
from .coords import GlobalBezier, enclosing_aabb
from .hierarchy import (AffinityMatrix, CharEntity, CharResult, HierDocument,
                        LineEntity, ParagraphEntity, WordEntity)
from .rectify import DEFAULT_CROP_HEIGHT, DEFAULT_MAX_WIDTH, GrayImage, make_crop_mapping
from .schema import DetectionsFile

_MARGIN = 24
_CHAR_ASPECT = 0.55        # char box width as a fraction of line height
_INK_INSET = 0.2           # glyph rectangle inset within its char box
_CHAR_Y0, _CHAR_Y1 = 0.1, 0.9  # char band within the crop, fractions of height
_AFFINITY_SAME = 0.9
_AFFINITY_OTHER = 0.05
_MAX_ATTEMPTS = 100

_WORD_CHARS = string.ascii_letters + string.digits


def _range_ok(r) -> bool:
    return len(r) == 2 and 1 <= r[0] <= r[1]


@dataclass(frozen=True)
class FixtureSpec:
    """Layout ranges and noise levels for one generated page."""

    rng_seed: int = 0
    n_paragraphs: tuple[int, int] = (2, 3)
    lines_per_paragraph: tuple[int, int] = (1, 2)
    words_per_line: tuple[int, int] = (2, 4)
    curvature: float = 0.25          # midline amplitude, fraction of line height
    image_size: tuple[int, int] = (800, 600)
    confidence_noise: float = 0.0    # sigma of confidence perturbation
    box_jitter_px: float = 0.0       # sigma of char box jitter, crop px

    def __post_init__(self):
        for name in ("n_paragraphs", "lines_per_paragraph", "words_per_line"):
            r = getattr(self, name)
            if not _range_ok(r):
                raise ValueError(f"{name} must be (lo, hi) with 1 <= lo <= hi, got {r}")
            object.__setattr__(self, name, (int(r[0]), int(r[1])))
        if self.curvature < 0:
            raise ValueError(f"curvature must be >= 0, got {self.curvature}")
        if self.confidence_noise < 0 or self.box_jitter_px < 0:
            raise ValueError("noise parameters must be >= 0")
        w, h = self.image_size
        if w < 64 or h < 64:
            raise ValueError(f"image_size too small: {self.image_size}")
        object.__setattr__(self, "image_size", (int(w), int(h)))


@dataclass(frozen=True)
class FixtureBundle:
    """One generated page: pixels, truth tree, and the stage-2 inputs."""

    spec: FixtureSpec
    image: GrayImage
    truth: HierDocument
    detections: tuple[BezierLinePolygon, ...]  # image px, noisy confidences
    affinity: AffinityMatrix
    recognitions: tuple[tuple[tuple[CharResult, ...], float | None], ...]

    def detections_file(self, image_ref: str | None = None) -> DetectionsFile:
        w, h = self.truth.image_size
        normalized = tuple(transform_polygon(p, scale=(1.0 / w, 1.0 / h))
                           for p in self.detections)
        return DetectionsFile(image_size=self.truth.image_size, lines=normalized,
                              affinity=self.affinity, recognitions=self.recognitions,
                              image_ref=image_ref)


def _rand_int(rng, lohi) -> int:
    return int(rng.integers(lohi[0], lohi[1] + 1))


def _forward_map(poly: BezierLinePolygon, crop_w: int, crop_h: int,
                 pts: np.ndarray) -> np.ndarray:
    """Crop px -> image px on the ruled surface between the two rails."""
    t = pts[:, 0] / crop_w
    r = pts[:, 1] / crop_h
    top = eval_bezier_many(poly.top, t)
    bottom = eval_bezier_many(poly.bottom, t)
    return (1.0 - r)[:, None] * top + r[:, None] * bottom


def _box_quad(box) -> np.ndarray:
    x0, y0, x1, y1 = box
    return np.array([[x0, y0], [x1, y0], [x1, y1], [x0, y1]], dtype=float)


@dataclass
class _LineDraft:
    paragraph: int
    text: str
    poly: BezierLinePolygon


def _layout_attempt(rng, spec: FixtureSpec) -> list[_LineDraft] | None:
    """One randomized layout; None when it does not fit the page."""
    w_img, h_img = spec.image_size
    drafts: list[_LineDraft] = []
    cursor = float(_MARGIN)
    n_par = _rand_int(rng, spec.n_paragraphs)
    for pi in range(n_par):
        if pi > 0:
            cursor += float(rng.uniform(18.0, 30.0))
        n_lines = _rand_int(rng, spec.lines_per_paragraph)
        for li in range(n_lines):
            if li > 0:
                cursor += float(rng.uniform(6.0, 12.0))
            h = float(rng.uniform(16.0, 24.0))
            amp = spec.curvature * h
            # fitted cubics can overshoot the sine slightly; pad the band
            band = amp * 1.5 + 2.0
            char_w = _CHAR_ASPECT * h

            max_len = w_img - 2 * _MARGIN - 30
            words = []
            n_words = _rand_int(rng, spec.words_per_line)
            for _ in range(n_words):
                n_chars = int(rng.integers(3, 8))
                words.append("".join(
                    _WORD_CHARS[k] for k in rng.integers(0, len(_WORD_CHARS), n_chars)))
            text = " ".join(words)
            while len(text) * char_w > max_len and len(words) > 1:
                words.pop()
                text = " ".join(words)
            if len(text) * char_w > max_len:
                text = text[:max(1, int(max_len / char_w))]
            length = len(text) * char_w

            x0 = _MARGIN + float(rng.uniform(0.0, 30.0))
            y_mid = cursor + band + h / 2.0
            freq = float(rng.uniform(0.5, 1.5))
            phase = float(rng.uniform(0.0, 2.0 * np.pi))
            xs = np.linspace(x0, x0 + length, 33)
            ys = y_mid + amp * np.sin(2.0 * np.pi * freq * (xs - x0) / length + phase)
            fit = fit_bezier(np.stack([xs, ys], axis=1), 3)
            offset = np.array([0.0, h / 2.0])
            poly = BezierLinePolygon(top=BezierCurve(fit.curve.points - offset),
                                     bottom=BezierCurve(fit.curve.points + offset),
                                     confidence=1.0)
            drafts.append(_LineDraft(paragraph=pi, text=text, poly=poly))
            cursor = y_mid + h / 2.0 + band
    if cursor > h_img - _MARGIN:
        return None
    boxes = [enclosing_aabb(GlobalBezier.from_line_polygon(d.poly)) for d in drafts]
    for i in range(len(boxes)):
        for j in range(i + 1, len(boxes)):
            if intersection_area(boxes[i], boxes[j]) > 0.0:
                return None
    return drafts


def _noisy_confidence(rng, sigma: float) -> float:
    # always consume a draw so the stream is noise-level independent
    perturbation = abs(float(rng.standard_normal())) * sigma
    return float(np.clip(1.0 - perturbation, 0.0, 1.0))


def gen_fixture(spec: FixtureSpec) -> FixtureBundle:
    """Generate one page: same spec, same bytes, every time."""
    from PIL import Image, ImageDraw

    rng = np.random.default_rng(spec.rng_seed)
    drafts = None
    for _ in range(_MAX_ATTEMPTS):
        drafts = _layout_attempt(rng, spec)
        if drafts is not None:
            break
    if drafts is None:
        raise RuntimeError(
            f"could not place lines without overlap in {_MAX_ATTEMPTS} attempts; "
            f"shrink the ranges or grow image_size {spec.image_size}")

    w_img, h_img = spec.image_size
    canvas = Image.new("L", (w_img, h_img), 255)
    draw = ImageDraw.Draw(canvas)

    detections: list[BezierLinePolygon] = []
    recognitions: list[tuple[tuple[CharResult, ...], float | None]] = []
    truth_lines: list[LineEntity] = []
    crop_h = DEFAULT_CROP_HEIGHT

    for draft in drafts:
        mapping = make_crop_mapping(draft.poly, spec.image_size,
                                    crop_h, DEFAULT_MAX_WIDTH)
        crop_w = mapping.crop_width
        n = len(draft.text)
        # linspace pins the last edge to exactly crop_w (k * (w/n) can
        # overshoot by an ulp, which the t-in-[0,1] check would reject)
        edges = np.linspace(0.0, crop_w, n + 1)
        y0, y1 = _CHAR_Y0 * crop_h, _CHAR_Y1 * crop_h

        boxes_px = [(float(edges[k]), y0, float(edges[k + 1]), y1) for k in range(n)]

        # ink: filled rectangles inset within each non-space char box
        for k, sym in enumerate(draft.text):
            if sym == " ":
                continue
            bx0, by0, bx1, by1 = boxes_px[k]
            ix = _INK_INSET * (bx1 - bx0)
            iy = _INK_INSET * (by1 - by0)
            ink = _box_quad((bx0 + ix, by0 + iy, bx1 - ix, by1 - iy))
            quad = _forward_map(draft.poly, crop_w, crop_h, ink)
            draw.polygon([(float(x), float(y)) for x, y in quad], fill=40)

        # truth entities from the clean boxes
        words: list[WordEntity] = []
        chunk: list[tuple[str, tuple]] = []
        for k, sym in enumerate(draft.text):
            if sym == " ":
                if chunk:
                    words.append(_truth_word(draft.poly, crop_w, crop_h, chunk))
                    chunk = []
            else:
                chunk.append((sym, boxes_px[k]))
        if chunk:
            words.append(_truth_word(draft.poly, crop_w, crop_h, chunk))
        truth_lines.append(LineEntity(text=" ".join(w.text for w in words),
                                      polygon=draft.poly, confidence=1.0,
                                      rec_confidence=1.0, words=tuple(words)))

        # recognizer view: height-normalized, jittered boxes
        chars: list[CharResult] = []
        for k, sym in enumerate(draft.text):
            jitter = rng.standard_normal(4) * spec.box_jitter_px
            bx0, by0, bx1, by1 = (np.asarray(boxes_px[k]) + jitter)
            bx0, bx1 = sorted((float(bx0), float(bx1)))
            by0, by1 = sorted((float(by0), float(by1)))
            chars.append(CharResult(
                symbol=sym,
                box=(bx0 / crop_h, by0 / crop_h, bx1 / crop_h, by1 / crop_h),
                confidence=_noisy_confidence(rng, spec.confidence_noise)))
        det_conf = _noisy_confidence(rng, spec.confidence_noise)
        detections.append(BezierLinePolygon(top=draft.poly.top,
                                            bottom=draft.poly.bottom,
                                            confidence=det_conf))
        recognitions.append((tuple(chars), None))

    para_ids = [d.paragraph for d in drafts]
    n_lines = len(drafts)
    aff = np.full((n_lines, n_lines), _AFFINITY_OTHER)
    for i in range(n_lines):
        for j in range(n_lines):
            if para_ids[i] == para_ids[j]:
                aff[i, j] = _AFFINITY_SAME
    np.fill_diagonal(aff, 1.0)

    paragraphs = []
    for pi in sorted(set(para_ids)):
        members = tuple(truth_lines[i] for i in range(n_lines) if para_ids[i] == pi)
        paragraphs.append(ParagraphEntity(lines=members))

    truth = HierDocument(image_size=spec.image_size, paragraphs=tuple(paragraphs))
    image = GrayImage.from_uint8(np.array(canvas, dtype=np.uint8))
    return FixtureBundle(spec=spec, image=image, truth=truth,
                         detections=tuple(detections),
                         affinity=AffinityMatrix(aff),
                         recognitions=tuple(recognitions))


def _truth_word(poly: BezierLinePolygon, crop_w: int, crop_h: int,
                chunk: list[tuple[str, tuple]]) -> WordEntity:
    char_entities = []
    for sym, box in chunk:
        quad = _forward_map(poly, crop_w, crop_h, _box_quad(box))
        char_entities.append(CharEntity(symbol=sym,
                                        quad=tuple(map(tuple, quad)),
                                        confidence=1.0))
    boxes = np.asarray([box for _, box in chunk])
    wbox = (boxes[:, 0].min(), boxes[:, 1].min(), boxes[:, 2].max(), boxes[:, 3].max())
    wquad = _forward_map(poly, crop_w, crop_h, _box_quad(wbox))
    return WordEntity(text="".join(sym for sym, _ in chunk),
                      quad=tuple(map(tuple, wquad)),
                      chars=tuple(char_entities))
