"""Versioned JSON schemas for detection inputs, assembled documents, and
evaluation inputs.

Two sections can appear in a file:

* "detections": the inter-stage contract. Per line: 2(m+1) control point
  [x, y] pairs (top curve first) in normalized image coordinates plus a
  confidence; an affinity matrix; per line recognizer output (chars with
  height-normalized boxes, optional line confidence).
* "hierarchy": an assembled document. Geometry in image pixels; lines
  carry their control points, words and chars their quads.

Validation is strict: unknown schema versions, malformed counts,
out-of-range confidences, and coordinates beyond a 10% margin of the
image bounds are all rejected with SchemaError.
"""
from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .bezier import BezierCurve, BezierLinePolygon
from .hierarchy import (AffinityMatrix, CharEntity, CharResult, HierDocument,
                        LineEntity, ParagraphEntity, WordEntity)

SCHEMA_VERSION = "1"

COORD_MARGIN = 0.1  # tolerated overshoot, fraction of the image extent


class SchemaError(ValueError):
    """The JSON document does not satisfy the schema."""


def _require(obj: dict, key: str, context: str):
    if not isinstance(obj, dict):
        raise SchemaError(f"{context}: expected an object, got {type(obj).__name__}")
    if key not in obj:
        raise SchemaError(f"{context}: missing key {key!r}")
    return obj[key]


def _check_version(obj: dict, context: str) -> None:
    version = _require(obj, "schema_version", context)
    if version != SCHEMA_VERSION:
        raise SchemaError(f"{context}: unsupported schema_version {version!r} "
                          f"(supported: {SCHEMA_VERSION!r})")


def _image_size(obj: dict, context: str) -> tuple[int, int]:
    size = _require(obj, "image_size", context)
    if (not isinstance(size, (list, tuple)) or len(size) != 2
            or not all(isinstance(v, int) and v >= 1 for v in size)):
        raise SchemaError(f"{context}: image_size must be [W, H] integers >= 1, got {size!r}")
    return (size[0], size[1])


def _check_confidence(value, context: str) -> float:
    if not isinstance(value, (int, float)) or not (0.0 <= float(value) <= 1.0):
        raise SchemaError(f"{context}: confidence must be in [0, 1], got {value!r}")
    return float(value)


def _point_list(raw, context: str, lo, hi) -> np.ndarray:
    if not isinstance(raw, list) or not raw:
        raise SchemaError(f"{context}: expected a non-empty list of [x, y] pairs")
    try:
        arr = np.asarray(raw, dtype=float)
    except (TypeError, ValueError) as exc:
        raise SchemaError(f"{context}: malformed coordinates: {exc}") from exc
    if arr.ndim != 2 or arr.shape[1] != 2 or not np.all(np.isfinite(arr)):
        raise SchemaError(f"{context}: expected finite (n, 2) coordinates, got {arr.shape}")
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    if np.any(arr < lo) or np.any(arr > hi):
        raise SchemaError(f"{context}: coordinates outside allowed range "
                          f"[{lo.tolist()}, {hi.tolist()}]")
    return arr


def _control_points_to_polygon(raw, confidence: float, context: str,
                               lo, hi) -> BezierLinePolygon:
    arr = _point_list(raw, context, lo, hi)
    n = arr.shape[0]
    if n < 4 or n % 2 != 0:
        raise SchemaError(f"{context}: control point count must be even and >= 4, got {n}")
    half = n // 2
    try:
        return BezierLinePolygon(top=BezierCurve(arr[:half]),
                                 bottom=BezierCurve(arr[half:]),
                                 confidence=confidence)
    except ValueError as exc:
        raise SchemaError(f"{context}: {exc}") from exc


def _polygon_to_control_points(poly: BezierLinePolygon) -> list[list[float]]:
    pts = np.vstack([poly.top.points, poly.bottom.points])
    return [[float(x), float(y)] for x, y in pts]


# -- detections ---------------------------------------------------------------

@dataclass(frozen=True)
class DetectionsFile:
    """Parsed detections section: parallel per-line inputs for assembly."""

    image_size: tuple[int, int]
    lines: tuple[BezierLinePolygon, ...]  # normalized coordinates
    affinity: AffinityMatrix
    recognitions: tuple[tuple[tuple[CharResult, ...], float | None], ...]
    image_ref: str | None = None


def detections_from_json(obj) -> DetectionsFile:
    context = "detections file"
    _check_version(obj, context)
    size = _image_size(obj, context)
    det = _require(obj, "detections", context)
    raw_lines = _require(det, "lines", context)
    raw_aff = _require(det, "affinity", context)
    raw_recs = _require(det, "recognitions", context)
    if not isinstance(raw_lines, list) or not isinstance(raw_recs, list):
        raise SchemaError(f"{context}: lines and recognitions must be lists")
    if len(raw_lines) != len(raw_recs):
        raise SchemaError(f"{context}: {len(raw_lines)} lines but "
                          f"{len(raw_recs)} recognitions")

    lo, hi = -COORD_MARGIN, 1.0 + COORD_MARGIN
    lines = []
    for i, entry in enumerate(raw_lines):
        where = f"{context}: lines[{i}]"
        conf = _check_confidence(_require(entry, "confidence", where), where)
        lines.append(_control_points_to_polygon(
            _require(entry, "control_points", where), conf, where, lo, hi))

    try:
        affinity = AffinityMatrix(np.asarray(raw_aff, dtype=float))
    except ValueError as exc:
        raise SchemaError(f"{context}: affinity: {exc}") from exc
    if affinity.n != len(lines):
        raise SchemaError(f"{context}: affinity is {affinity.n}x{affinity.n} "
                          f"but there are {len(lines)} lines")

    recognitions = []
    for i, entry in enumerate(raw_recs):
        where = f"{context}: recognitions[{i}]"
        raw_chars = _require(entry, "chars", where)
        if not isinstance(raw_chars, list):
            raise SchemaError(f"{where}: chars must be a list")
        chars = []
        for j, ch in enumerate(raw_chars):
            cwhere = f"{where}: chars[{j}]"
            box = _require(ch, "box", cwhere)
            if not isinstance(box, list) or len(box) != 4:
                raise SchemaError(f"{cwhere}: box must be [x0, y0, x1, y1]")
            try:
                chars.append(CharResult(
                    symbol=_require(ch, "symbol", cwhere),
                    box=tuple(float(v) for v in box),
                    confidence=_check_confidence(_require(ch, "confidence", cwhere),
                                                 cwhere)))
            except (TypeError, ValueError) as exc:
                raise SchemaError(f"{cwhere}: {exc}") from exc
        conf = entry.get("confidence")
        if conf is not None:
            conf = _check_confidence(conf, where)
        recognitions.append((tuple(chars), conf))

    return DetectionsFile(image_size=size, lines=tuple(lines), affinity=affinity,
                          recognitions=tuple(recognitions),
                          image_ref=obj.get("image_ref"))


def detections_to_json(det: DetectionsFile) -> dict:
    lines = [{"control_points": _polygon_to_control_points(poly),
              "confidence": poly.confidence}
             for poly in det.lines]
    recognitions = []
    for chars, conf in det.recognitions:
        recognitions.append({
            "chars": [{"symbol": c.symbol, "box": [float(v) for v in c.box],
                       "confidence": c.confidence} for c in chars],
            "confidence": conf,
        })
    out = {
        "schema_version": SCHEMA_VERSION,
        "image_size": list(det.image_size),
        "detections": {
            "lines": lines,
            "affinity": [[float(v) for v in row] for row in det.affinity.values],
            "recognitions": recognitions,
        },
    }
    if det.image_ref is not None:
        out["image_ref"] = det.image_ref
    return out


# -- hierarchy ----------------------------------------------------------------

def _quad_to_json(quad) -> list[list[float]]:
    return [[float(x), float(y)] for x, y in quad]


def document_to_json(doc: HierDocument, image_ref: str | None = None) -> dict:
    paragraphs = []
    for para in doc.paragraphs:
        lines = []
        for line in para.lines:
            words = []
            for word in line.words:
                words.append({
                    "text": word.text,
                    "vertices": _quad_to_json(word.quad),
                    "chars": [{"symbol": c.symbol,
                               "vertices": _quad_to_json(c.quad),
                               "confidence": c.confidence} for c in word.chars],
                })
            lines.append({
                "text": line.text,
                "confidence": line.confidence,
                "rec_confidence": line.rec_confidence,
                "control_points": _polygon_to_control_points(line.polygon),
                "words": words,
            })
        paragraphs.append({"lines": lines})
    out = {
        "schema_version": SCHEMA_VERSION,
        "image_size": list(doc.image_size),
        "hierarchy": {"paragraphs": paragraphs},
    }
    if image_ref is not None:
        out["image_ref"] = image_ref
    return out


def document_from_json(obj) -> HierDocument:
    context = "document file"
    _check_version(obj, context)
    size = _image_size(obj, context)
    w, h = size
    lo = (-COORD_MARGIN * w, -COORD_MARGIN * h)
    hi = ((1.0 + COORD_MARGIN) * w, (1.0 + COORD_MARGIN) * h)
    hier = _require(obj, "hierarchy", context)
    raw_paragraphs = _require(hier, "paragraphs", context)
    if not isinstance(raw_paragraphs, list):
        raise SchemaError(f"{context}: paragraphs must be a list")

    def parse_quad(raw, where) -> tuple:
        arr = _point_list(raw, where, lo, hi)
        if arr.shape != (4, 2):
            raise SchemaError(f"{where}: expected 4 vertices, got {arr.shape[0]}")
        return tuple((float(x), float(y)) for x, y in arr)

    paragraphs = []
    for pi, rp in enumerate(raw_paragraphs):
        lines = []
        for li, rl in enumerate(_require(rp, "lines", f"{context}: paragraphs[{pi}]")):
            where = f"{context}: paragraphs[{pi}].lines[{li}]"
            conf = _check_confidence(_require(rl, "confidence", where), where)
            rec_conf = _check_confidence(_require(rl, "rec_confidence", where), where)
            poly = _control_points_to_polygon(
                _require(rl, "control_points", where), conf, where, lo, hi)
            words = []
            for wi, rw in enumerate(_require(rl, "words", where)):
                wwhere = f"{where}.words[{wi}]"
                chars = []
                for ci, rc in enumerate(_require(rw, "chars", wwhere)):
                    cwhere = f"{wwhere}.chars[{ci}]"
                    try:
                        chars.append(CharEntity(
                            symbol=_require(rc, "symbol", cwhere),
                            quad=parse_quad(_require(rc, "vertices", cwhere), cwhere),
                            confidence=_check_confidence(
                                _require(rc, "confidence", cwhere), cwhere)))
                    except ValueError as exc:
                        raise SchemaError(f"{cwhere}: {exc}") from exc
                try:
                    words.append(WordEntity(
                        text=_require(rw, "text", wwhere),
                        quad=parse_quad(_require(rw, "vertices", wwhere), wwhere),
                        chars=tuple(chars)))
                except ValueError as exc:
                    raise SchemaError(f"{wwhere}: {exc}") from exc
            try:
                lines.append(LineEntity(text=_require(rl, "text", where),
                                        polygon=poly, confidence=conf,
                                        rec_confidence=rec_conf, words=tuple(words)))
            except ValueError as exc:
                raise SchemaError(f"{where}: {exc}") from exc
        try:
            paragraphs.append(ParagraphEntity(lines=tuple(lines)))
        except ValueError as exc:
            raise SchemaError(f"{context}: paragraphs[{pi}]: {exc}") from exc
    return HierDocument(image_size=size, paragraphs=tuple(paragraphs))


def eval_words_from_json(obj) -> list:
    """Word-level EvalEntity list from a document file, honoring optional
    per-word "dont_care" flags (ground-truth files only)."""
    from .evaluate import EvalEntity

    context = "document file"
    _check_version(obj, context)
    _image_size(obj, context)
    hier = _require(obj, "hierarchy", context)
    out = []
    for rp in _require(hier, "paragraphs", context):
        for rl in _require(rp, "lines", context):
            for rw in _require(rl, "words", context):
                verts = np.asarray(_require(rw, "vertices", context), dtype=float)
                out.append(EvalEntity(geometry=verts,
                                      text=_require(rw, "text", context),
                                      dont_care=bool(rw.get("dont_care", False))))
    return out


# -- files --------------------------------------------------------------------

def save_json(path, obj: dict) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, indent=1, sort_keys=True)
        fh.write("\n")


def load_json(path) -> dict:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            return json.load(fh)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"{path}: invalid JSON: {exc}") from exc


def load_document(path) -> HierDocument:
    return document_from_json(load_json(path))


def save_document(path, doc: HierDocument, image_ref: str | None = None) -> None:
    save_json(path, document_to_json(doc, image_ref))
