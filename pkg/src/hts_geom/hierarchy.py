"""Assembly of the character -> word -> line -> paragraph tree.

Recognizer output lives in crop coordinates normalized by line height;
assembly scales those to crop pixels, projects them back onto the image
through each line's crop mapping, and clusters lines into paragraphs by
thresholding the affinity matrix.
"""
from __future__ import annotations

import logging
import math
import string
from dataclasses import dataclass, field

import numpy as np

from .bezier import BezierLinePolygon
from .polyops import union_quads
from .rectify import (CropMapping, DEFAULT_CROP_HEIGHT, DEFAULT_MAX_WIDTH,
                      make_crop_mapping, project_box)

log = logging.getLogger(__name__)

DEFAULT_DET_THRESHOLD = 0.5
DEFAULT_REC_THRESHOLD = 0.8
DEFAULT_AFFINITY_THRESHOLD = 0.5

_CHARSET = frozenset(string.ascii_letters + string.digits + string.punctuation + " ")


@dataclass(frozen=True)
class CharResult:
    """One recognized character: symbol, box normalized by line height
    (x0, y0, x1, y1 in crop space divided by crop height), confidence."""

    symbol: str
    box: tuple[float, float, float, float]
    confidence: float

    def __post_init__(self):
        if len(self.symbol) != 1 or self.symbol not in _CHARSET:
            raise ValueError(f"unsupported symbol: {self.symbol!r}")
        object.__setattr__(self, "box", tuple(float(v) for v in self.box))
        x0, y0, x1, y1 = self.box
        if not all(math.isfinite(v) for v in self.box):
            raise ValueError(f"non-finite char box: {self.box}")
        if x1 < x0 or y1 < y0:
            raise ValueError(f"inverted char box: {self.box}")
        if not (0.0 <= self.confidence <= 1.0):
            raise ValueError(f"confidence {self.confidence} outside [0, 1]")


@dataclass(frozen=True)
class AffinityMatrix:
    """Symmetric line-pair grouping scores in [0, 1] with unit diagonal."""

    values: np.ndarray

    def __init__(self, values):
        arr = np.asarray(values, dtype=float)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
            raise ValueError(f"affinity matrix must be square, got {arr.shape}")
        if arr.size:
            if not np.all(np.isfinite(arr)) or arr.min() < 0.0 or arr.max() > 1.0:
                raise ValueError("affinity values must be finite and within [0, 1]")
            if np.abs(arr - arr.T).max() > 1e-6:
                raise ValueError("affinity matrix asymmetric beyond 1e-6")
            if np.abs(np.diag(arr) - 1.0).max() > 1e-6:
                raise ValueError("affinity diagonal must be 1")
        arr = arr.copy()
        arr.setflags(write=False)
        object.__setattr__(self, "values", arr)

    @property
    def n(self) -> int:
        return self.values.shape[0]

    def submatrix(self, indices) -> "AffinityMatrix":
        idx = np.asarray(indices, dtype=int)
        sub = self.values[np.ix_(idx, idx)].copy()
        # re-pin the diagonal: float slicing keeps it, but be explicit
        if sub.size:
            np.fill_diagonal(sub, 1.0)
        return AffinityMatrix(sub)

    def __eq__(self, other):
        return isinstance(other, AffinityMatrix) and np.array_equal(self.values, other.values)


Quad = tuple[tuple[float, float], ...]


def _as_quad(points) -> Quad:
    arr = np.asarray(points, dtype=float)
    if arr.shape != (4, 2):
        raise ValueError(f"expected a (4, 2) quad, got {arr.shape}")
    return tuple((float(x), float(y)) for x, y in arr)


@dataclass(frozen=True)
class CharEntity:
    symbol: str
    quad: Quad  # image px, corners tl, tr, br, bl
    confidence: float

    def __post_init__(self):
        object.__setattr__(self, "quad", _as_quad(self.quad))


@dataclass(frozen=True)
class WordEntity:
    text: str
    quad: Quad  # image px
    chars: tuple[CharEntity, ...]

    def __post_init__(self):
        object.__setattr__(self, "quad", _as_quad(self.quad))
        object.__setattr__(self, "chars", tuple(self.chars))
        if not self.chars:
            raise ValueError("word has no characters")
        joined = "".join(c.symbol for c in self.chars)
        if joined != self.text:
            raise ValueError(f"word text {self.text!r} != joined symbols {joined!r}")
        if " " in self.text:
            raise ValueError("word text contains a space")


@dataclass(frozen=True)
class LineEntity:
    text: str
    polygon: BezierLinePolygon  # image px
    confidence: float           # detector score
    rec_confidence: float       # recognizer score (see line_confidence)
    words: tuple[WordEntity, ...]

    def __post_init__(self):
        object.__setattr__(self, "words", tuple(self.words))
        if not self.words:
            raise ValueError("line has no words")
        joined = " ".join(w.text for w in self.words)
        if joined != self.text:
            raise ValueError(f"line text {self.text!r} != joined words {joined!r}")

    @property
    def chars(self) -> tuple[CharEntity, ...]:
        return tuple(c for w in self.words for c in w.chars)


@dataclass(frozen=True)
class ParagraphEntity:
    lines: tuple[LineEntity, ...]

    def __post_init__(self):
        object.__setattr__(self, "lines", tuple(self.lines))
        if not self.lines:
            raise ValueError("paragraph has no lines")

    @property
    def text(self) -> str:
        return "\n".join(ln.text for ln in self.lines)

    @property
    def words(self) -> tuple[WordEntity, ...]:
        return tuple(w for ln in self.lines for w in ln.words)

    @property
    def chars(self) -> tuple[CharEntity, ...]:
        return tuple(c for ln in self.lines for c in ln.chars)


@dataclass(frozen=True)
class HierDocument:
    """The four-level tree for one image."""

    image_size: tuple[int, int]  # (W, H) px
    paragraphs: tuple[ParagraphEntity, ...] = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "image_size",
                           (int(self.image_size[0]), int(self.image_size[1])))
        object.__setattr__(self, "paragraphs", tuple(self.paragraphs))

    @property
    def lines(self) -> tuple[LineEntity, ...]:
        return tuple(ln for p in self.paragraphs for ln in p.lines)

    @property
    def words(self) -> tuple[WordEntity, ...]:
        return tuple(w for ln in self.lines for w in ln.words)

    @property
    def chars(self) -> tuple[CharEntity, ...]:
        return tuple(c for w in self.words for c in w.chars)


def split_line(chars) -> list[list[CharResult]]:
    """Maximal runs of non-space characters, in order. Spaces delimit and
    are consumed."""
    words: list[list[CharResult]] = []
    current: list[CharResult] = []
    for ch in chars:
        if ch.symbol == " ":
            if current:
                words.append(current)
                current = []
        else:
            current.append(ch)
    if current:
        words.append(current)
    return words


def word_box(chars) -> tuple[float, float, float, float]:
    """Smallest axis-aligned box covering the member character boxes."""
    chars = list(chars)
    if not chars:
        raise ValueError("empty word")
    boxes = np.asarray([c.box for c in chars], dtype=float)
    return (float(boxes[:, 0].min()), float(boxes[:, 1].min()),
            float(boxes[:, 2].max()), float(boxes[:, 3].max()))


def line_confidence(chars) -> float:
    """Recognizer score for a line: geometric mean of char confidences
    (spaces included). Empty input scores 1 so the no-words drop rule, not
    this score, decides its fate."""
    chars = list(chars)
    if not chars:
        return 1.0
    confs = [c.confidence for c in chars]
    if min(confs) <= 0.0:
        return 0.0
    return float(math.exp(sum(math.log(c) for c in confs) / len(confs)))


def group_paragraphs(aff: AffinityMatrix, threshold: float) -> list[list[int]]:
    """Connected components of the thresholded affinity graph.

    Edge (i, j) exists iff aff[i, j] >= threshold for i != j. Components
    are listed by smallest member, members ascending.
    """
    if not (0.0 <= threshold <= 1.0):
        raise ValueError(f"threshold {threshold} outside [0, 1]")
    n = aff.n
    parent = list(range(n))

    def find(i: int) -> int:
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(n):
        for j in range(i + 1, n):
            if aff.values[i, j] >= threshold:
                ri, rj = find(i), find(j)
                if ri != rj:
                    parent[rj] = ri

    groups: dict[int, list[int]] = {}
    for i in range(n):
        groups.setdefault(find(i), []).append(i)
    return sorted((sorted(g) for g in groups.values()), key=lambda g: g[0])


def _project_clamped(mapping: CropMapping, box_norm) -> Quad:
    """Height-normalized crop box -> clamped crop px -> image quad."""
    ch = mapping.crop_height
    cw = mapping.crop_width
    x0, y0, x1, y1 = (v * ch for v in box_norm)
    x0 = min(max(x0, 0.0), cw)
    x1 = min(max(x1, 0.0), cw)
    y0 = min(max(y0, 0.0), ch)
    y1 = min(max(y1, 0.0), ch)
    return _as_quad(project_box(mapping, (x0, y0, x1, y1)))


def assemble_document(detections, affinity: AffinityMatrix, recognitions,
                      image_size: tuple[int, int], *,
                      det_threshold: float = DEFAULT_DET_THRESHOLD,
                      rec_threshold: float = DEFAULT_REC_THRESHOLD,
                      affinity_threshold: float = DEFAULT_AFFINITY_THRESHOLD,
                      crop_height: int = DEFAULT_CROP_HEIGHT,
                      max_width: int = DEFAULT_MAX_WIDTH,
                      mappings=None) -> HierDocument:
    """Build the document tree from per-line detections and recognitions.

    detections: BezierLinePolygon per line, control points in image px,
    carrying the detector confidence. recognitions: (chars, confidence)
    per line, confidence None meaning "derive via line_confidence".
    Lines failing either threshold, or recognized as only spaces, are
    dropped before paragraph clustering (their affinity rows/cols go too).
    """
    detections = list(detections)
    recognitions = list(recognitions)
    if mappings is not None:
        mappings = list(mappings)
    if len(detections) != len(recognitions) or affinity.n != len(detections) or (
            mappings is not None and len(mappings) != len(detections)):
        raise ValueError(
            f"parallel inputs disagree: {len(detections)} detections, "
            f"{len(recognitions)} recognitions, affinity {affinity.n}x{affinity.n}"
            + (f", {len(mappings)} mappings" if mappings is not None else ""))
    if mappings is None:
        mappings = [make_crop_mapping(poly, image_size, crop_height, max_width)
                    for poly in detections]

    kept_indices: list[int] = []
    kept_lines: list[LineEntity] = []
    for i, (poly, (chars, conf)) in enumerate(zip(detections, recognitions)):
        chars = list(chars)
        if poly.confidence < det_threshold:
            log.debug("line %d dropped: detector confidence %.3f", i, poly.confidence)
            continue
        rec_conf = line_confidence(chars) if conf is None else float(conf)
        if rec_conf < rec_threshold:
            log.debug("line %d dropped: recognizer confidence %.3f", i, rec_conf)
            continue
        chunks = split_line(chars)
        if not chunks:
            log.debug("line %d dropped: no words", i)
            continue
        mapping = mappings[i]
        words = []
        for chunk in chunks:
            char_entities = tuple(
                CharEntity(symbol=c.symbol,
                           quad=_project_clamped(mapping, c.box),
                           confidence=c.confidence)
                for c in chunk)
            words.append(WordEntity(text="".join(c.symbol for c in chunk),
                                    quad=_project_clamped(mapping, word_box(chunk)),
                                    chars=char_entities))
        kept_indices.append(i)
        kept_lines.append(LineEntity(text=" ".join(w.text for w in words),
                                     polygon=poly,
                                     confidence=poly.confidence,
                                     rec_confidence=rec_conf,
                                     words=tuple(words)))

    components = group_paragraphs(affinity.submatrix(kept_indices), affinity_threshold)
    paragraphs = tuple(
        ParagraphEntity(lines=tuple(kept_lines[i] for i in comp))
        for comp in components)
    return HierDocument(image_size=tuple(image_size), paragraphs=paragraphs)


def entity_geometry(entity):
    """Image-space geometry of an entity as a shapely polygonal geometry.

    Lines and paragraphs are the union of their descendant character
    quads (possibly disjoint); words and characters are their own quads.
    """
    if isinstance(entity, (LineEntity, ParagraphEntity)):
        quads = [c.quad for c in entity.chars]
        return union_quads(quads)
    if isinstance(entity, (WordEntity, CharEntity)):
        return union_quads([entity.quad])
    raise TypeError(f"no geometry for {type(entity).__name__}")
