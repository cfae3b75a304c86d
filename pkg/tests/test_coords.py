import numpy as np
import pytest

from hts_geom.bezier import BezierCurve, eval_bezier_many
from hts_geom.boxes import Aabb
from hts_geom.coords import (DegenerateBoxError, GlobalBezier, LocalBezier,
                             enclosing_aabb, global_to_local, local_to_global,
                             location_shape_targets)
from helpers import rect_line


def rect_global(x0, y0, x1, y1) -> GlobalBezier:
    return GlobalBezier.from_line_polygon(rect_line(x0, y0, x1, y1))


def random_global(rng) -> GlobalBezier:
    xs = np.sort(rng.uniform(0.0, 1.0, size=4))
    top_y = rng.uniform(0.1, 0.6, size=4)
    gap = rng.uniform(0.05, 0.3)
    return GlobalBezier(np.stack([xs, top_y], axis=1),
                        np.stack([xs, top_y + gap], axis=1))


def const_local(x, y) -> LocalBezier:
    return LocalBezier([[x, y], [x, y]], [[x, y], [x, y]])


class TestLocalToGlobal:
    def test_center_maps_to_center(self):
        out = local_to_global(const_local(0, 0), Aabb(0.3, 0.7, 0.2, 0.1))
        assert np.all(out.top == [0.3, 0.7])

    def test_direct_substitution(self):
        out = local_to_global(const_local(0.5, -0.5), Aabb(0.4, 0.6, 0.2, 0.1))
        assert out.top[0] == pytest.approx([0.5, 0.55], abs=1e-15)

    def test_linear_superposition_in_center(self):
        rng = np.random.default_rng(41)
        _, local = location_shape_targets(random_global(rng))

        def top_at(cx, cy):
            return local_to_global(local, Aabb(cx, cy, 0.4, 0.2)).top

        lhs = top_at(0.3 + 0.2, 0.5 + 0.1)
        rhs = top_at(0.3, 0.5) + top_at(0.2, 0.1) - top_at(0.0, 0.0)
        assert lhs == pytest.approx(rhs, abs=1e-12)

    def test_linear_superposition_in_size(self):
        rng = np.random.default_rng(43)
        _, local = location_shape_targets(random_global(rng))

        def top_at(w, h):
            return local_to_global(local, Aabb(0.5, 0.5, w, h)).top

        lhs = top_at(0.3 + 0.2, 0.2 + 0.1)
        rhs = top_at(0.3, 0.2) + top_at(0.2, 0.1) - top_at(0.0, 0.0)
        assert lhs == pytest.approx(rhs, abs=1e-12)


class TestGlobalToLocal:
    def test_rectangle_corners_map_to_half_units(self):
        g = rect_global(0.2, 0.4, 0.6, 0.5)
        local = global_to_local(g, Aabb.from_bounds(0.2, 0.4, 0.6, 0.5))
        assert np.all(local.top[:, 1] == -0.5)
        assert np.all(local.bottom[:, 1] == 0.5)
        assert local.top[0, 0] == pytest.approx(-0.5, abs=1e-12)
        assert local.top[-1, 0] == pytest.approx(0.5, abs=1e-12)

    def test_zero_size_box_rejected(self):
        g = rect_global(0.2, 0.4, 0.6, 0.5)
        with pytest.raises(DegenerateBoxError):
            global_to_local(g, Aabb(0.5, 0.5, 0.0, 0.1))
        with pytest.raises(DegenerateBoxError):
            global_to_local(g, Aabb(0.5, 0.5, 0.1, 0.0))

    def test_inverse_of_local_to_global(self):
        rng = np.random.default_rng(67)
        for _ in range(50):
            g = random_global(rng)
            box = Aabb(*rng.uniform(0.2, 0.8, size=2), *rng.uniform(0.1, 0.5, size=2))
            back = local_to_global(global_to_local(g, box), box)
            assert back.top == pytest.approx(g.top, abs=1e-12)
            assert back.bottom == pytest.approx(g.bottom, abs=1e-12)


class TestEnclosingAabb:
    def test_rectangle_is_its_own_box(self):
        box = enclosing_aabb(rect_global(0.1, 0.2, 0.5, 0.3))
        assert box.bounds == pytest.approx((0.1, 0.2, 0.5, 0.3), abs=1e-12)

    def test_arched_top_extent(self):
        g = GlobalBezier([[0, 0], [0, 1], [1, 1], [1, 0]],
                         [[0, 0], [1 / 3, 0], [2 / 3, 0], [1, 0]])
        x0, y0, x1, y1 = enclosing_aabb(g).bounds
        assert (y0, y1) == pytest.approx((0.0, 0.75), abs=1e-12)
        assert (x0, x1) == pytest.approx((0.0, 1.0), abs=1e-12)

    def test_single_point_gives_zero_box(self):
        p = [[0.4, 0.3]] * 4
        box = enclosing_aabb(GlobalBezier(p, p))
        assert (box.x_center, box.y_center, box.w, box.h) == (0.4, 0.3, 0.0, 0.0)

    def test_contains_dense_boundary_samples(self):
        rng = np.random.default_rng(47)
        for _ in range(30):
            g = random_global(rng)
            x0, y0, x1, y1 = enclosing_aabb(g).bounds
            for ctrl in (g.top, g.bottom):
                pts = eval_bezier_many(BezierCurve(ctrl), np.linspace(0, 1, 500))
                assert pts[:, 0].min() >= x0 - 1e-9 and pts[:, 0].max() <= x1 + 1e-9
                assert pts[:, 1].min() >= y0 - 1e-9 and pts[:, 1].max() <= y1 + 1e-9


class TestLocationShapeTargets:
    def test_round_trip_identity(self):
        rng = np.random.default_rng(53)
        for _ in range(200):
            g = random_global(rng)
            box, local = location_shape_targets(g)
            back = local_to_global(local, box)
            err = max(np.abs(back.top - g.top).max(),
                      np.abs(back.bottom - g.bottom).max())
            assert err <= 1e-9

    def test_rectangle_corner_controls_are_half_units(self):
        g = GlobalBezier([[0.2, 0.4], [0.6, 0.4]], [[0.2, 0.5], [0.6, 0.5]])
        _, local = location_shape_targets(g)
        assert np.abs(np.abs(local.top) - 0.5).max() <= 1e-12
        assert np.abs(np.abs(local.bottom) - 0.5).max() <= 1e-12

    def test_rectangle_cubic_locals_on_half_unit_edges(self):
        _, local = location_shape_targets(rect_global(0.2, 0.4, 0.6, 0.5))
        assert np.all(local.top[:, 1] == -0.5)
        assert np.all(local.bottom[:, 1] == 0.5)
        assert local.top[0, 0] == pytest.approx(-0.5, abs=1e-12)
        assert local.top[-1, 0] == pytest.approx(0.5, abs=1e-12)

    def test_curve_extremes_touch_box_edges(self):
        # the curve samples (not the control points) mapped into local space
        # must span exactly [-0.5, 0.5] on each axis
        rng = np.random.default_rng(59)
        ts = np.linspace(0.0, 1.0, 4001)
        for _ in range(25):
            g = random_global(rng)
            box, _ = location_shape_targets(g)
            pts = np.vstack([eval_bezier_many(BezierCurve(g.top), ts),
                             eval_bezier_many(BezierCurve(g.bottom), ts)])
            local = (pts - [box.x_center, box.y_center]) / [box.w, box.h]
            assert local[:, 0].min() == pytest.approx(-0.5, abs=1e-6)
            assert local[:, 0].max() == pytest.approx(0.5, abs=1e-6)
            assert local[:, 1].min() == pytest.approx(-0.5, abs=1e-6)
            assert local[:, 1].max() == pytest.approx(0.5, abs=1e-6)

    def test_degenerate_line_rejected(self):
        p = [[0.4, 0.3]] * 4
        with pytest.raises(DegenerateBoxError):
            location_shape_targets(GlobalBezier(p, p))

    def test_shape_invariant_under_translation_and_scaling(self):
        rng = np.random.default_rng(61)
        for _ in range(50):
            g = random_global(rng)
            _, local = location_shape_targets(g)
            sx, sy = rng.uniform(0.5, 3.0, size=2)
            dx, dy = rng.uniform(-5.0, 5.0, size=2)
            moved = GlobalBezier(g.top * [sx, sy] + [dx, dy],
                                 g.bottom * [sx, sy] + [dx, dy])
            _, local2 = location_shape_targets(moved)
            assert local2.top == pytest.approx(local.top, abs=1e-9)
            assert local2.bottom == pytest.approx(local.bottom, abs=1e-9)


class TestConversions:
    def test_line_polygon_round_trip(self):
        poly = rect_line(0.1, 0.2, 0.5, 0.3, confidence=0.9)
        g = GlobalBezier.from_line_polygon(poly)
        assert g.to_line_polygon(confidence=0.9) == poly

    def test_mismatched_shapes_rejected(self):
        with pytest.raises(ValueError):
            GlobalBezier([[0, 0], [1, 0]], [[0, 1], [0.5, 1], [1, 1]])
