"""Detection and recognition loss formulas as plain numerics.

Classifier and mask-matching internals stay out of scope: cross-entropy
values and the unified detector term enter as numbers, so these functions
are exact reduction oracles for any training code.

All L1 terms are means over coordinates (4 for a box, 4(m+1) for the local
control points), keeping the default weights comparable across curve
orders.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .boxes import Aabb, hull_box, intersection_area
from .coords import LocalBezier


@dataclass(frozen=True)
class DetectionLossWeights:
    """Weights of the three geometric terms of the detection loss."""

    giou_weight: float = 1.0
    box_weight: float = 2.5
    shape_weight: float = 0.5

    def __post_init__(self):
        if self.giou_weight < 0 or self.box_weight < 0 or self.shape_weight < 0:
            raise ValueError("loss weights must be non-negative")


def giou(a: Aabb, b: Aabb) -> float:
    """Generalized IoU of two axis-aligned boxes, in [-1, 1].

    IoU minus the fraction of the enclosing hull not covered by the union.
    Two zero-area boxes have no meaningful overlap ratio; that case is
    defined as 0, matching the limit of shrinking boxes.
    """
    area_a = a.area
    area_b = b.area
    if area_a == 0.0 and area_b == 0.0:
        return 0.0
    inter = intersection_area(a, b)
    union = area_a + area_b - inter
    hull = hull_box(a, b).area
    return inter / union - (hull - union) / hull


def _box_l1(a: Aabb, b: Aabb) -> float:
    return (abs(a.x_center - b.x_center) + abs(a.y_center - b.y_center)
            + abs(a.w - b.w) + abs(a.h - b.h)) / 4.0


def _shape_l1(a: LocalBezier, b: LocalBezier) -> float:
    if a.top.shape != b.top.shape:
        raise ValueError(
            f"control point counts differ: {a.top.shape[0]} vs {b.top.shape[0]}")
    diff_top = np.abs(a.top - b.top)
    diff_bottom = np.abs(a.bottom - b.bottom)
    return float((diff_top.sum() + diff_bottom.sum()) / (diff_top.size + diff_bottom.size))


def detection_loss(pred: tuple[Aabb, LocalBezier], gt: tuple[Aabb, LocalBezier],
                   weights: DetectionLossWeights = DetectionLossWeights(),
                   l_unified: float = 0.0) -> float:
    """Total detection loss for one line.

    The externally supplied base term plus weighted GIoU, box-L1, and
    shape-L1 terms. Equals l_unified exactly when pred == gt.
    """
    if l_unified < 0.0:
        raise ValueError(f"l_unified must be >= 0, got {l_unified}")
    pred_box, pred_shape = pred
    gt_box, gt_shape = gt
    return (l_unified
            + weights.giou_weight * (1.0 - giou(pred_box, gt_box))
            + weights.box_weight * _box_l1(pred_box, gt_box)
            + weights.shape_weight * _shape_l1(pred_shape, gt_shape))


@dataclass(frozen=True)
class RecognitionStepTarget:
    """Ground truth for one decoding step: the class index and, for steps
    that correspond to a visible character, its box in crop coordinates
    normalized by line height (x0, y0, x1, y1)."""

    class_index: int
    has_box: bool = False
    box: tuple[float, float, float, float] | None = None

    def __post_init__(self):
        if self.has_box:
            if self.box is None:
                raise ValueError("has_box set but no box given")
            x0, y0, x1, y1 = self.box
            if not all(math.isfinite(v) for v in self.box):
                raise ValueError(f"non-finite target box: {self.box}")
            if x1 < x0 or y1 < y0:
                raise ValueError(f"inverted target box: {self.box}")
        elif self.box is not None:
            raise ValueError("box given but has_box unset")


def _quad_l1(a, b) -> float:
    return float(np.mean(np.abs(np.asarray(a, dtype=float) - np.asarray(b, dtype=float))))


def _line_terms(step_ce, targets, pred_boxes) -> tuple[float, int, float, int]:
    """(ce sum, step count, box numerator, supervised-box count) for one line."""
    step_ce = [float(c) for c in step_ce]
    if not (len(step_ce) == len(targets) == len(pred_boxes)):
        raise ValueError(
            f"length mismatch: {len(step_ce)} CE values, {len(targets)} targets, "
            f"{len(pred_boxes)} predicted boxes")
    if not step_ce:
        raise ValueError("need at least one step")
    box_num = 0.0
    box_count = 0
    for target, pred_box in zip(targets, pred_boxes):
        if target.has_box:
            box_num += _quad_l1(target.box, pred_box)
            box_count += 1
    return sum(step_ce), len(step_ce), box_num, box_count


def recognition_loss(step_ce, targets, pred_boxes,
                     box_weight: float = 0.05, epsilon: float = 1e-6) -> float:
    """Recognition loss for one line.

    Mean per-step cross entropy plus a box term: the L1 errors of the steps
    that carry a ground-truth box, summed and divided by the count of such
    steps (epsilon keeps all-maskless lines finite).
    """
    ce_sum, n_steps, box_num, box_count = _line_terms(step_ce, targets, pred_boxes)
    return ce_sum / n_steps + box_weight * box_num / (box_count + epsilon)


def recognition_loss_batch(lines, box_weight: float = 0.05,
                           epsilon: float = 1e-6) -> float:
    """Recognition loss pooled over a batch of (step_ce, targets, pred_boxes).

    Cross entropy is averaged over all steps of all lines together, and the
    box numerator and supervised-step count are pooled before the division,
    so short lines are not up-weighted.
    """
    lines = list(lines)
    if not lines:
        raise ValueError("empty batch")
    ce_sum = 0.0
    n_steps = 0
    box_num = 0.0
    box_count = 0
    for step_ce, targets, pred_boxes in lines:
        cs, ns, bn, bc = _line_terms(step_ce, targets, pred_boxes)
        ce_sum += cs
        n_steps += ns
        box_num += bn
        box_count += bc
    return ce_sum / n_steps + box_weight * box_num / (box_count + epsilon)
