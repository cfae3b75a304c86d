"""Tests for the synthetic page generator."""
import numpy as np
import pytest

from hts_geom import (EvalEntity, FixtureSpec, assemble_document, gen_fixture,
                      hiertext_eval, match_one_to_one)
from hts_geom.schema import detections_from_json, detections_to_json


def bundle_for(seed=0, **kw):
    return gen_fixture(FixtureSpec(rng_seed=seed, **kw))


def truth_paragraph_labels(truth):
    labels = []
    for pi, para in enumerate(truth.paragraphs):
        labels.extend([pi] * len(para.lines))
    return labels


class TestFixtureSpec:
    def test_defaults_are_valid(self):
        spec = FixtureSpec()
        assert spec.n_paragraphs == (2, 3)
        assert spec.image_size == (800, 600)

    def test_ranges_coerced_to_ints(self):
        spec = FixtureSpec(words_per_line=(2.0, 5.0))
        assert spec.words_per_line == (2, 5)

    def test_rejects_bad_ranges(self):
        with pytest.raises(ValueError):
            FixtureSpec(n_paragraphs=(3, 2))
        with pytest.raises(ValueError):
            FixtureSpec(lines_per_paragraph=(0, 2))

    def test_rejects_bad_scalars(self):
        with pytest.raises(ValueError):
            FixtureSpec(curvature=-0.1)
        with pytest.raises(ValueError):
            FixtureSpec(confidence_noise=-1.0)
        with pytest.raises(ValueError):
            FixtureSpec(box_jitter_px=-0.5)
        with pytest.raises(ValueError):
            FixtureSpec(image_size=(63, 600))


class TestDeterminism:
    def test_same_seed_same_bundle(self):
        a = bundle_for(seed=12, curvature=0.2, confidence_noise=0.1,
                       box_jitter_px=0.5)
        b = bundle_for(seed=12, curvature=0.2, confidence_noise=0.1,
                       box_jitter_px=0.5)
        assert a.image == b.image
        assert a.affinity == b.affinity
        assert a.recognitions == b.recognitions
        assert a.detections == b.detections
        assert [w.text for w in a.truth.words] == [w.text for w in b.truth.words]

    def test_different_seed_differs(self):
        a = bundle_for(seed=1)
        b = bundle_for(seed=2)
        assert a.image != b.image

    def test_noise_leaves_geometry_alone(self):
        # confidence draws happen even at zero sigma, so the layout stream
        # is identical across noise settings
        clean = bundle_for(seed=7)
        noisy = bundle_for(seed=7, confidence_noise=0.2)
        assert [ln.polygon for ln in clean.truth.lines] \
            == [ln.polygon for ln in noisy.truth.lines]
        assert [w.text for w in clean.truth.words] \
            == [w.text for w in noisy.truth.words]
        assert any(p.confidence != q.confidence
                   for p, q in zip(clean.detections, noisy.detections))


class TestStructure:
    def test_counts_within_ranges(self):
        spec = FixtureSpec(rng_seed=3, n_paragraphs=(2, 3),
                           lines_per_paragraph=(1, 2), words_per_line=(2, 4))
        bundle = gen_fixture(spec)
        truth = bundle.truth
        assert 2 <= len(truth.paragraphs) <= 3
        for para in truth.paragraphs:
            assert 1 <= len(para.lines) <= 2
            for line in para.lines:
                assert 2 <= len(line.words) <= 4
                for word in line.words:
                    assert 1 <= len(word.text) <= 7
                    assert word.text.isalnum()

    def test_parallel_lengths(self):
        bundle = bundle_for(seed=4)
        n = len(bundle.truth.lines)
        assert len(bundle.detections) == n
        assert len(bundle.recognitions) == n
        assert bundle.affinity.n == n

    def test_image_matches_spec(self):
        bundle = bundle_for(seed=5)
        w, h = bundle.spec.image_size
        assert bundle.image.width == w and bundle.image.height == h
        assert bundle.truth.image_size == (w, h)

    def test_page_is_white_with_ink(self):
        bundle = bundle_for(seed=6)
        pix = bundle.image.pixels
        assert pix[0, 0] == 1.0 and pix[-1, -1] == 1.0
        assert pix.min() == pytest.approx(40.0 / 255.0)
        ink_fraction = np.mean(pix < 0.5)
        assert 0.0 < ink_fraction < 0.5


class TestAffinity:
    def test_block_structure_follows_paragraphs(self):
        bundle = bundle_for(seed=8)
        labels = truth_paragraph_labels(bundle.truth)
        vals = bundle.affinity.values
        for i in range(len(labels)):
            assert vals[i, i] == 1.0
            for j in range(i + 1, len(labels)):
                expected = 0.9 if labels[i] == labels[j] else 0.05
                assert vals[i, j] == expected
                assert vals[j, i] == expected


class TestRecognizerView:
    def test_clean_boxes_at_zero_noise(self):
        bundle = bundle_for(seed=9)
        for p in bundle.detections:
            assert p.confidence == 1.0
        for chars, line_conf in bundle.recognitions:
            assert line_conf is None
            for c in chars:
                assert c.confidence == 1.0
                assert c.box[1] == pytest.approx(0.1)
                assert c.box[3] == pytest.approx(0.9)
            for prev, cur in zip(chars, chars[1:]):
                assert prev.box[2] == pytest.approx(cur.box[0])

    def test_jitter_perturbs_boxes(self):
        clean = bundle_for(seed=9)
        jittered = bundle_for(seed=9, box_jitter_px=1.0)
        moved = [abs(a.box[1] - b.box[1])
                 for ca, cb in zip(clean.recognitions, jittered.recognitions)
                 for a, b in zip(ca[0], cb[0])]
        assert max(moved) > 0.0
        for chars, _ in jittered.recognitions:
            for c in chars:
                assert c.box[0] <= c.box[2] and c.box[1] <= c.box[3]

    def test_noisy_confidences_stay_in_range(self):
        bundle = bundle_for(seed=10, confidence_noise=0.5)
        confs = [c.confidence for chars, _ in bundle.recognitions
                 for c in chars]
        confs += [p.confidence for p in bundle.detections]
        assert all(0.0 <= c <= 1.0 for c in confs)
        assert min(confs) < 1.0


class TestDetectionsFile:
    def test_normalized_coordinates(self):
        bundle = bundle_for(seed=11, curvature=0.3)
        det = bundle.detections_file()
        for poly in det.lines:
            for curve in (poly.top, poly.bottom):
                pts = curve.points
                assert pts.min() >= -0.1 and pts.max() <= 1.1

    def test_scaling_back_recovers_pixels(self):
        bundle = bundle_for(seed=11)
        det = bundle.detections_file()
        w, h = bundle.spec.image_size
        for norm, px in zip(det.lines, bundle.detections):
            assert np.allclose(norm.top.points * [w, h], px.top.points,
                               atol=1e-9)

    def test_serializes_through_schema(self):
        bundle = bundle_for(seed=11)
        obj = detections_to_json(bundle.detections_file(image_ref="x.png"))
        back = detections_from_json(obj)
        assert back.recognitions == bundle.detections_file().recognitions


class TestAssemblyRecoversTruth:
    def test_zero_noise_reconstruction(self):
        bundle = bundle_for(seed=13, curvature=0.15)
        doc = assemble_document(bundle.detections, bundle.affinity,
                                bundle.recognitions, bundle.spec.image_size)
        truth = bundle.truth
        assert [w.text for w in doc.words] == [w.text for w in truth.words]
        assert [ln.text for ln in doc.lines] == [ln.text for ln in truth.lines]
        assert [p.text for p in doc.paragraphs] == [p.text for p in truth.paragraphs]
        for level in ("word", "line", "paragraph"):
            r = hiertext_eval(doc, truth, level=level, recognition=True)
            assert r.fp == 0 and r.fn == 0
            assert r.tightness >= 0.99

    def test_per_word_iou(self):
        bundle = bundle_for(seed=14, curvature=0.15)
        doc = assemble_document(bundle.detections, bundle.affinity,
                                bundle.recognitions, bundle.spec.image_size)
        preds = [EvalEntity(geometry=w.quad, text=w.text) for w in doc.words]
        gts = [EvalEntity(geometry=w.quad, text=w.text)
               for w in bundle.truth.words]
        matches = match_one_to_one(preds, gts)
        assert len(matches) == len(gts)
        for _, _, iou in matches:
            assert iou >= 0.99


class TestRetryExhaustion:
    def test_impossible_layout_raises(self, monkeypatch):
        import hts_geom.fixtures as fx
        monkeypatch.setattr(fx, "_MAX_ATTEMPTS", 5)
        spec = FixtureSpec(rng_seed=0, image_size=(64, 64),
                           n_paragraphs=(6, 6), lines_per_paragraph=(3, 3),
                           words_per_line=(7, 7))
        with pytest.raises(RuntimeError, match="attempts"):
            gen_fixture(spec)
