import numpy as np
import pytest

from hts_geom.boxes import Aabb
from hts_geom.coords import LocalBezier
from hts_geom.losses import (DetectionLossWeights, RecognitionStepTarget,
                             detection_loss, giou, recognition_loss,
                             recognition_loss_batch)
from oracles import giou_reference


def local_from(points) -> LocalBezier:
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    half = len(pts) // 2
    return LocalBezier(pts[:half], pts[half:])


FLAT_LOCAL = local_from([[-0.5, -0.5], [0.5, -0.5], [-0.5, 0.5], [0.5, 0.5]])


class TestGiou:
    def test_identical_boxes(self):
        assert giou(Aabb(0.5, 0.5, 1, 1), Aabb(0.5, 0.5, 1, 1)) == 1.0

    def test_disjoint_hand_oracle(self):
        # I=0, U=2, hull=3 -> 0 - 1/3
        assert giou(Aabb(0.5, 0.5, 1, 1), Aabb(2.5, 0.5, 1, 1)) == pytest.approx(
            -1.0 / 3.0, abs=1e-12)

    def test_nested_equals_iou(self):
        outer = Aabb(0, 0, 4, 4)
        inner = Aabb(0.5, 0.5, 1, 1)
        assert giou(outer, inner) == pytest.approx(1.0 / 16.0, abs=1e-12)

    def test_both_zero_area(self):
        assert giou(Aabb(1, 1, 0, 0), Aabb(5, 2, 0, 0)) == 0.0

    def test_zero_vs_positive_area(self):
        # limit formula: IoU = 0, penalty term survives
        val = giou(Aabb(0, 0, 0, 0), Aabb(2, 0, 2, 2))
        assert val == pytest.approx(giou_reference((0, 0, 0, 0), (2, 0, 2, 2)))

    def test_symmetric_bounded_below_iou(self):
        rng = np.random.default_rng(71)
        for _ in range(10_000):
            a = Aabb(*rng.uniform(0, 4, size=2), *rng.uniform(0, 3, size=2))
            b = Aabb(*rng.uniform(0, 4, size=2), *rng.uniform(0, 3, size=2))
            g = giou(a, b)
            assert g == giou(b, a)
            assert -1.0 <= g <= 1.0
            assert g == pytest.approx(giou_reference(
                (a.x_center, a.y_center, a.w, a.h),
                (b.x_center, b.y_center, b.w, b.h)), abs=1e-12)


class TestDetectionLoss:
    def test_perfect_prediction_is_external_term(self):
        box = Aabb(0.4, 0.5, 0.2, 0.1)
        assert detection_loss((box, FLAT_LOCAL), (box, FLAT_LOCAL)) == 0.0
        assert detection_loss((box, FLAT_LOCAL), (box, FLAT_LOCAL),
                              l_unified=2.5) == 2.5

    def test_shifted_center_hand_oracle(self):
        gt_box = Aabb(0.4, 0.5, 0.2, 0.1)
        pred_box = Aabb(0.5, 0.5, 0.2, 0.1)
        w = DetectionLossWeights()
        g = giou_reference((0.5, 0.5, 0.2, 0.1), (0.4, 0.5, 0.2, 0.1))
        want = w.giou_weight * (1.0 - g) + w.box_weight * (0.1 / 4.0)
        got = detection_loss((pred_box, FLAT_LOCAL), (gt_box, FLAT_LOCAL))
        assert got == pytest.approx(want, abs=1e-12)

    def test_shape_term_hand_oracle(self):
        box = Aabb(0.4, 0.5, 0.2, 0.1)
        moved = local_from([[-0.5, -0.5], [0.5, -0.3], [-0.5, 0.5], [0.5, 0.5]])
        # one coordinate off by 0.2, mean over 8 coordinates
        want = 0.5 * (0.2 / 8.0)
        got = detection_loss((box, moved), (box, FLAT_LOCAL))
        assert got == pytest.approx(want, abs=1e-12)

    def test_custom_weights(self):
        gt = (Aabb(0.4, 0.5, 0.2, 0.1), FLAT_LOCAL)
        pred = (Aabb(0.5, 0.5, 0.2, 0.1), FLAT_LOCAL)
        w = DetectionLossWeights(giou_weight=2.0, box_weight=0.0, shape_weight=0.0)
        g = giou_reference((0.5, 0.5, 0.2, 0.1), (0.4, 0.5, 0.2, 0.1))
        assert detection_loss(pred, gt, weights=w, l_unified=1.0) == pytest.approx(
            1.0 + 2.0 * (1.0 - g), abs=1e-12)

    def test_mismatched_point_counts_rejected(self):
        box = Aabb(0.4, 0.5, 0.2, 0.1)
        longer = LocalBezier([[0, 0], [0.5, 0], [1, 0]], [[0, 1], [0.5, 1], [1, 1]])
        with pytest.raises(ValueError):
            detection_loss((box, FLAT_LOCAL), (box, longer))

    def test_negative_external_term_rejected(self):
        box = Aabb(0.4, 0.5, 0.2, 0.1)
        with pytest.raises(ValueError):
            detection_loss((box, FLAT_LOCAL), (box, FLAT_LOCAL), l_unified=-0.1)

    def test_negative_weights_rejected(self):
        with pytest.raises(ValueError):
            DetectionLossWeights(giou_weight=-1.0)


def steps(*specs):
    """specs: (class_index, box or None)"""
    return [RecognitionStepTarget(class_index=c, has_box=b is not None,
                                  box=b) for c, b in specs]


class TestRecognitionLoss:
    def test_all_masked_is_mean_ce(self):
        targets = steps((3, None), (7, None))
        got = recognition_loss([0.1, 0.3], targets, [(0, 0, 1, 1), (0, 0, 1, 1)])
        assert got == pytest.approx(0.2, abs=1e-12)

    def test_single_box_hand_oracle(self):
        targets = steps((3, (0.0, 0.0, 1.0, 1.0)), (7, None))
        # pred box off by 0.4 on every coordinate -> L1 = 0.4
        pred_boxes = [(0.4, 0.4, 1.4, 1.4), (0, 0, 1, 1)]
        got = recognition_loss([0.1, 0.3], targets, pred_boxes)
        want = 0.2 + 0.05 * 0.4 / (1.0 + 1e-6)
        assert got == pytest.approx(want, abs=1e-12)
        assert got == pytest.approx(0.22, abs=1e-5)

    def test_perfect_boxes_reduce_to_mean_ce(self):
        targets = steps((1, (0.0, 0.1, 0.5, 0.9)), (2, (0.5, 0.1, 1.0, 0.9)))
        pred_boxes = [(0.0, 0.1, 0.5, 0.9), (0.5, 0.1, 1.0, 0.9)]
        assert recognition_loss([0.4, 0.6], targets, pred_boxes) == pytest.approx(
            0.5, abs=1e-12)

    def test_length_mismatch_rejected(self):
        with pytest.raises(ValueError):
            recognition_loss([0.1], steps((1, None), (2, None)),
                             [(0, 0, 1, 1), (0, 0, 1, 1)])

    def test_empty_line_rejected(self):
        with pytest.raises(ValueError):
            recognition_loss([], [], [])

    def test_permutation_invariant_when_alpha_uniform(self):
        rng = np.random.default_rng(73)
        ce = rng.uniform(0, 2, size=5)
        boxes_gt = [tuple(rng.uniform(0, 1, size=4)) for _ in range(5)]
        boxes_gt = [(min(b[0], b[2]), min(b[1], b[3]), max(b[0], b[2]), max(b[1], b[3]))
                    for b in boxes_gt]
        pred = [tuple(rng.uniform(0, 1, size=4)) for _ in range(5)]
        targets = steps(*[(i, b) for i, b in enumerate(boxes_gt)])
        base = recognition_loss(list(ce), targets, pred)
        perm = rng.permutation(5)
        got = recognition_loss([ce[i] for i in perm], [targets[i] for i in perm],
                               [pred[i] for i in perm])
        assert got == pytest.approx(base, abs=1e-12)

    def test_monotone_in_ce_and_box_error(self):
        targets = steps((1, (0.0, 0.0, 1.0, 1.0)), (2, None))
        base = recognition_loss([0.1, 0.3], targets, [(0, 0, 1, 1), (0, 0, 1, 1)])
        worse_ce = recognition_loss([0.5, 0.3], targets, [(0, 0, 1, 1), (0, 0, 1, 1)])
        worse_box = recognition_loss([0.1, 0.3], targets,
                                     [(0.2, 0, 1.2, 1), (0, 0, 1, 1)])
        assert worse_ce > base
        assert worse_box > base

    def test_box_without_flag_rejected(self):
        with pytest.raises(ValueError):
            RecognitionStepTarget(class_index=1, has_box=False, box=(0, 0, 1, 1))

    def test_inverted_box_rejected(self):
        with pytest.raises(ValueError):
            RecognitionStepTarget(class_index=1, has_box=True, box=(1, 0, 0, 1))


class TestRecognitionLossBatch:
    def test_single_line_matches_scalar(self):
        targets = steps((3, (0.0, 0.0, 1.0, 1.0)), (7, None))
        pred = [(0.4, 0.4, 1.4, 1.4), (0, 0, 1, 1)]
        single = recognition_loss([0.1, 0.3], targets, pred)
        batch = recognition_loss_batch([([0.1, 0.3], targets, pred)])
        assert batch == pytest.approx(single, abs=1e-15)

    def test_ce_pooled_not_mean_of_means(self):
        a, b, c, d = 0.8, 0.1, 0.2, 0.3
        lines = [([a], steps((1, None)), [(0, 0, 1, 1)]),
                 ([b, c, d], steps((1, None), (2, None), (3, None)),
                  [(0, 0, 1, 1)] * 3)]
        got = recognition_loss_batch(lines)
        assert got == pytest.approx((a + b + c + d) / 4.0, abs=1e-12)
        assert got != pytest.approx((a + (b + c + d) / 3.0) / 2.0, abs=1e-6)

    def test_box_denominator_pooled(self):
        # only line 1 has a box; its alpha-count alone feeds the denominator
        l1 = ([0.0, 0.0], steps((1, (0.0, 0.0, 1.0, 1.0)), (2, None)),
              [(0.2, 0.2, 1.2, 1.2), (0, 0, 1, 1)])
        l2 = ([0.0], steps((3, None)), [(0, 0, 1, 1)])
        got = recognition_loss_batch([l1, l2])
        assert got == pytest.approx(0.05 * 0.2 / (1.0 + 1e-6), abs=1e-12)

    def test_empty_batch_rejected(self):
        with pytest.raises(ValueError):
            recognition_loss_batch([])
