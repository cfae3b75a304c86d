"""Scoring predictions against ground truth.

Two protocol families:

* ICDAR-2015 style (word granularity, with lexicons): Word-Spotting mode
  normalizes both sides with the spotting heuristics; End-to-End mode
  transforms the prediction text and accepts the ground truth with its
  leading/trailing punctuation optionally stripped. Do-not-care regions
  absorb overlapping predictions without counting.
* HierText style (word/line/paragraph granularity): strict string equality
  when recognition is scored, no normalization; reports Tightness (mean
  IoU over true positives) and PQ = F1 x Tightness.

Matching is always greedy one-to-one in descending IoU with a fixed
(pred index, gt index) tie-break, at IoU >= 0.5 by default. The official
benchmark scripts may differ in corner cases; this implementation is
self-contained and documented rather than bit-compatible.
"""
from __future__ import annotations

import string
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from shapely.geometry.base import BaseGeometry

from .hierarchy import HierDocument, entity_geometry
from .polyops import as_geometry, polygon_iou

__all__ = [
    "EvalEntity", "EvalReport", "levenshtein", "lexicon_match",
    "normalize_word_spotting", "normalize_prediction_icdar", "polygon_iou",
    "match_one_to_one", "icdar_eval", "hiertext_eval", "merge_reports",
]

DEFAULT_IOU_THRESHOLD = 0.5

_PUNCT = frozenset(string.punctuation)
_PUNCT_STR = string.punctuation


@dataclass(frozen=True)
class EvalEntity:
    """One prediction or ground-truth unit: geometry plus optional text."""

    geometry: BaseGeometry
    text: str | None = None
    confidence: float = 1.0
    dont_care: bool = False

    def __init__(self, geometry, text=None, confidence=1.0, dont_care=False):
        object.__setattr__(self, "geometry", as_geometry(geometry))
        object.__setattr__(self, "text", text)
        object.__setattr__(self, "confidence", float(confidence))
        object.__setattr__(self, "dont_care", bool(dont_care))
        if not (0.0 <= self.confidence <= 1.0):
            raise ValueError(f"confidence {confidence} outside [0, 1]")


@dataclass(frozen=True)
class EvalReport:
    """Match counts plus the derived scores.

    iou_sum is the summed IoU over true-positive pairs; protocols that do
    not track it (ICDAR) leave it None, and then tightness/pq are None.
    """

    tp: int
    fp: int
    fn: int
    iou_sum: float | None = None

    @cached_property
    def precision(self) -> float:
        if self.tp + self.fp == 0:
            return 1.0 if self.fn == 0 else 0.0
        return self.tp / (self.tp + self.fp)

    @cached_property
    def recall(self) -> float:
        if self.tp + self.fn == 0:
            return 1.0 if self.fp == 0 else 0.0
        return self.tp / (self.tp + self.fn)

    @cached_property
    def f1(self) -> float:
        p, r = self.precision, self.recall
        if p + r == 0.0:
            return 0.0
        return 2.0 * p * r / (p + r)

    @cached_property
    def tightness(self) -> float | None:
        if self.iou_sum is None:
            return None
        if self.tp == 0:
            return 0.0
        return self.iou_sum / self.tp

    @cached_property
    def pq(self) -> float | None:
        t = self.tightness
        if t is None:
            return None
        return self.f1 * t

    def as_dict(self) -> dict:
        out = {"precision": self.precision, "recall": self.recall, "f1": self.f1,
               "tp": self.tp, "fp": self.fp, "fn": self.fn}
        if self.iou_sum is not None:
            out["tightness"] = self.tightness
            out["pq"] = self.pq
        return out


def merge_reports(reports) -> EvalReport:
    """Pool counts over per-document reports (commutative: order-free)."""
    reports = list(reports)
    if not reports:
        raise ValueError("no reports to merge")
    tp = sum(r.tp for r in reports)
    fp = sum(r.fp for r in reports)
    fn = sum(r.fn for r in reports)
    if any(r.iou_sum is None for r in reports):
        iou_sum = None
    else:
        iou_sum = float(sum(r.iou_sum for r in reports))
    return EvalReport(tp=tp, fp=fp, fn=fn, iou_sum=iou_sum)


def levenshtein(a: str, b: str) -> int:
    """Unit-cost edit distance (insert/delete/substitute)."""
    if len(a) < len(b):
        a, b = b, a
    prev = list(range(len(b) + 1))
    for i, ca in enumerate(a, start=1):
        cur = [i]
        for j, cb in enumerate(b, start=1):
            cur.append(min(prev[j] + 1,
                           cur[j - 1] + 1,
                           prev[j - 1] + (ca != cb)))
        prev = cur
    return prev[len(b)]


def lexicon_match(word: str, lexicon) -> tuple[str, int]:
    """Closest lexicon entry by case-insensitive edit distance.

    Ties go to the earlier entry; the entry is returned as stored.
    """
    lexicon = list(lexicon)
    if not lexicon:
        raise ValueError("empty lexicon")
    low = word.lower()
    best_entry, best_dist = lexicon[0], levenshtein(low, lexicon[0].lower())
    for entry in lexicon[1:]:
        d = levenshtein(low, entry.lower())
        if d < best_dist:
            best_entry, best_dist = entry, d
    return best_entry, best_dist


def normalize_word_spotting(text: str) -> str | None:
    """Spotting-side normalization; None when the word leaves the protocol.

    In order: drop a trailing 's or 'S, strip dash prefixes/suffixes, drop
    all remaining punctuation, lowercase. Words with fewer than 3
    alphabetic characters are absent from the protocol.
    """
    s = text
    if s.endswith("'s") or s.endswith("'S"):
        s = s[:-2]
    s = s.strip("-")
    s = "".join(ch for ch in s if ch not in _PUNCT)
    s = s.lower()
    if sum(ch.isalpha() for ch in s) < 3:
        return None
    return s


def normalize_prediction_icdar(word: str, lexicon=None) -> str | None:
    """Prediction-side transform: lowercase, keep alphanumerics only,
    drop the detection entirely (None) when nothing remains, then snap to
    the lexicon by edit distance when one is given."""
    s = "".join(ch for ch in word.lower() if ch.isalnum())
    if not s:
        return None
    if lexicon is not None:
        entry, _ = lexicon_match(s, lexicon)
        s = entry.lower()
    return s


def _geom_iou(ga: BaseGeometry, gb: BaseGeometry) -> float:
    inter = ga.intersection(gb).area
    union = ga.area + gb.area - inter
    if union <= 0.0:
        return 0.0
    return float(inter / union)


def _bounds_array(geoms) -> np.ndarray:
    out = np.empty((len(geoms), 4))
    for i, g in enumerate(geoms):
        # empty geometries get an impossible box so they never pair
        out[i] = g.bounds if not g.is_empty else (0.0, 0.0, -1.0, -1.0)
    return out


def _candidate_pairs(pg, gg):
    """Index pairs whose bounding boxes overlap (cheap prefilter)."""
    if not pg or not gg:
        return []
    pb = _bounds_array(pg)
    gb = _bounds_array(gg)
    overlap = ((pb[:, None, 0] < gb[None, :, 2]) & (pb[:, None, 2] > gb[None, :, 0])
               & (pb[:, None, 1] < gb[None, :, 3]) & (pb[:, None, 3] > gb[None, :, 1]))
    return list(zip(*np.nonzero(overlap)))


def _greedy_match(pg, gg, iou_threshold, eligible=None):
    """Greedy one-to-one matching on cleaned geometries.

    eligible: optional (pi, gi) -> bool narrowing the allowed pairs (text
    constraints); IoU >= iou_threshold is always required.
    """
    scored = []
    for pi, gi in _candidate_pairs(pg, gg):
        if eligible is not None and not eligible(pi, gi):
            continue
        iou = _geom_iou(pg[pi], gg[gi])
        if iou >= iou_threshold:
            scored.append((iou, int(pi), int(gi)))
    scored.sort(key=lambda s: (-s[0], s[1], s[2]))
    used_p: set[int] = set()
    used_g: set[int] = set()
    matches = []
    for iou, pi, gi in scored:
        if pi in used_p or gi in used_g:
            continue
        used_p.add(pi)
        used_g.add(gi)
        matches.append((pi, gi, iou))
    return matches


def match_one_to_one(preds, gts, iou_threshold: float = DEFAULT_IOU_THRESHOLD):
    """Greedy one-to-one geometric matching between two entity lists.

    Pairs with IoU >= iou_threshold are taken in descending IoU order,
    ties broken by (pred index, gt index). Returns (pred_idx, gt_idx, iou)
    triples.
    """
    if not (0.0 < iou_threshold <= 1.0):
        raise ValueError(f"iou_threshold {iou_threshold} outside (0, 1]")
    pg = [p.geometry for p in preds]
    gg = [g.geometry for g in gts]
    return _greedy_match(pg, gg, iou_threshold)


def _e2e_variants(gt_text: str) -> set[str]:
    t = gt_text.lower()
    return {t, t.lstrip(_PUNCT_STR), t.rstrip(_PUNCT_STR), t.strip(_PUNCT_STR)}


def icdar_eval(preds, gts, mode: str = "end-to-end", lexicon=None, *,
               iou_threshold: float = DEFAULT_IOU_THRESHOLD,
               geometry: str = "polygon") -> EvalReport:
    """Word-level scoring under the ICDAR-2015 protocols.

    mode: "word-spotting" or "end-to-end". geometry: "polygon" compares
    the given outlines; "min-rect" replaces each by its minimum rotated
    rectangle first. Do-not-care ground truth (flagged, or in spotting
    mode normalizing to absent) is excluded from the denominator and
    silently absorbs overlapping predictions.
    """
    if mode not in ("word-spotting", "end-to-end"):
        raise ValueError(f"unknown mode: {mode!r}")
    if geometry not in ("polygon", "min-rect"):
        raise ValueError(f"unknown geometry flag: {geometry!r}")
    preds = list(preds)
    gts = list(gts)

    def shape_of(e: EvalEntity) -> BaseGeometry:
        if geometry == "min-rect" and not e.geometry.is_empty:
            return e.geometry.minimum_rotated_rectangle
        return e.geometry

    # punctuation-only (no alphanumeric) detections leave the evaluation
    kept = [(p, normalize_prediction_icdar(p.text or "", lexicon))
            for p in preds]
    kept = [(p, norm) for p, norm in kept if norm is not None]
    pg = [shape_of(p) for p, _ in kept]

    gt_care: list[bool] = []
    gt_cmp: list[object] = []
    for g in gts:
        text = g.text or ""
        if mode == "word-spotting":
            norm = normalize_word_spotting(text)
            gt_care.append(not g.dont_care and norm is not None)
            gt_cmp.append(norm)
        else:
            gt_care.append(not g.dont_care)
            gt_cmp.append(_e2e_variants(text))
    gg = [shape_of(g) for g in gts]

    if mode == "word-spotting":
        pred_cmp = []
        for p, _ in kept:
            norm = normalize_word_spotting(p.text or "")
            if norm is not None and lexicon is not None:
                entry, _d = lexicon_match(norm, lexicon)
                norm = entry.lower()
            pred_cmp.append(norm)

        def text_ok(pi: int, gi: int) -> bool:
            return pred_cmp[pi] is not None and pred_cmp[pi] == gt_cmp[gi]
    else:
        pred_cmp = [norm for _, norm in kept]

        def text_ok(pi: int, gi: int) -> bool:
            return pred_cmp[pi] in gt_cmp[gi]

    def eligible(pi: int, gi: int) -> bool:
        return gt_care[gi] and text_ok(pi, gi)

    matches = _greedy_match(pg, gg, iou_threshold, eligible)
    matched_p = {pi for pi, _, _ in matches}

    ignore_idx = [gi for gi, care in enumerate(gt_care) if not care]
    absorbed = set()
    for pi in range(len(pg)):
        if pi in matched_p:
            continue
        for gi in ignore_idx:
            if _geom_iou(pg[pi], gg[gi]) >= iou_threshold:
                absorbed.add(pi)
                break

    tp = len(matches)
    fp = len(pg) - tp - len(absorbed)
    fn = sum(gt_care) - tp
    return EvalReport(tp=tp, fp=fp, fn=fn)


def _level_entities(doc: HierDocument, level: str):
    """(text, geometry) pairs for one granularity, in document order."""
    if level == "word":
        return [(w.text, as_geometry(w.quad)) for w in doc.words]
    if level == "line":
        return [(ln.text, entity_geometry(ln)) for ln in doc.lines]
    if level == "paragraph":
        return [(p.text, entity_geometry(p)) for p in doc.paragraphs]
    raise ValueError(f"unknown level: {level!r}")


def hiertext_eval(pred_doc: HierDocument, gt_doc: HierDocument, level: str = "word",
                  recognition: bool = False,
                  iou_threshold: float = DEFAULT_IOU_THRESHOLD) -> EvalReport:
    """Word/line/paragraph scoring with Tightness and PQ.

    Matching needs IoU >= iou_threshold on the level's geometry (word
    quads, or the union of character quads for lines and paragraphs);
    with recognition set, the pair's texts must also be exactly equal (no
    case folding, no punctuation normalization).
    """
    pred_ents = _level_entities(pred_doc, level)
    gt_ents = _level_entities(gt_doc, level)
    pg = [g for _, g in pred_ents]
    gg = [g for _, g in gt_ents]

    eligible = None
    if recognition:
        def eligible(pi: int, gi: int) -> bool:
            return pred_ents[pi][0] == gt_ents[gi][0]

    matches = _greedy_match(pg, gg, iou_threshold, eligible)
    tp = len(matches)
    return EvalReport(tp=tp,
                      fp=len(pg) - tp,
                      fn=len(gg) - tp,
                      iou_sum=float(sum(iou for _, _, iou in matches)))
