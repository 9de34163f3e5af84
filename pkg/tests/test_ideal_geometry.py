"""
Tests for graftlab.ideal_geometry

Covers:
- Tangency horocycles and the central edge length
- Exponential decay of horocyclic leaf lengths
- Collapsing map to the tripod
- Mostly-horocyclic and mostly-straight leaf evaluators
- Hyperbolic rectangles with horocyclic horizontal edges
"""

import math

import pytest

from graftlab.errors import GeometryError
from graftlab.ideal_geometry import (
    CENTER_HEIGHT_LOG,
    HorocyclicLeafParam,
    IdealTriangle,
    Tripod,
    TripodPoint,
    build_hyp_rectangle,
    collapse_to_tripod,
    horocyclic_lamination,
    leaf_length,
    mostly_horocyclic_leaf,
    mostly_straight_leaf,
    tripod_of,
)
from graftlab.moebius import INF, HPoint, MoebiusMap, apply, hyp_distance


@pytest.fixture
def model() -> IdealTriangle:
    return IdealTriangle.model()


@pytest.fixture
def skewed() -> IdealTriangle:
    return IdealTriangle((-2.0, 0.5, 3.0))


def _polyline_length(points: list[complex]) -> float:
    return sum(hyp_distance(HPoint.from_complex(a), HPoint.from_complex(b)) for a, b in zip(points, points[1:], strict=False))


class TestIdealTriangle:
    def test_vertices_sorted(self):
        t = IdealTriangle((INF, 3.0, -1.0))
        assert t.vertices == (-1.0, 3.0, INF)

    def test_repeated_vertex_rejected(self):
        with pytest.raises(GeometryError):
            IdealTriangle((1.0, 1.0, 2.0))

    def test_chart_sends_model_vertices(self, skewed):
        assert skewed.from_model(0j).real == pytest.approx(-2.0)
        assert skewed.from_model(1 + 0j).real == pytest.approx(0.5)


class TestHorocyclicLamination:
    def test_tangency_height_in_model(self, model):
        lam = horocyclic_lamination(model)
        assert lam.tangency_horocycles[2].center is INF
        assert lam.tangency_horocycles[2].level == pytest.approx(1.0)

    @pytest.mark.parametrize("triangle", [IdealTriangle.model(), IdealTriangle((-2.0, 0.5, 3.0))])
    def test_tangency_horocycles_pairwise_tangent(self, triangle):
        h = horocyclic_lamination(triangle).tangency_horocycles
        assert h[0].tangent_to(h[1])
        assert h[1].tangent_to(h[2])
        assert h[0].tangent_to(h[2])

    def test_central_edge_length(self, skewed):
        lam = horocyclic_lamination(skewed)
        assert lam.central_edge_length == 1.0
        arc = lam.leaf(HorocyclicLeafParam(0, 0.0), samples=400)
        assert _polyline_length(arc) == pytest.approx(1.0, rel=1e-4)

    def test_leaf_measured_length_decays(self, skewed):
        lam = horocyclic_lamination(skewed)
        arc = lam.leaf(HorocyclicLeafParam(1, math.log(2)), samples=400)
        assert _polyline_length(arc) == pytest.approx(0.5, rel=1e-4)


class TestLeafLength:
    def test_half_at_log_two(self):
        assert leaf_length(HorocyclicLeafParam(0, math.log(2))) == pytest.approx(0.5)

    def test_base_length_at_zero(self):
        assert leaf_length(HorocyclicLeafParam(2, 0.0), base_length=3.5) == 3.5

    def test_decay_law_on_grid(self):
        grid = [0.25 * k for k in range(21)]
        for u1 in grid:
            for u2 in grid:
                if u1 < u2:
                    ratio = leaf_length(HorocyclicLeafParam(0, u2)) / leaf_length(HorocyclicLeafParam(0, u1))
                    assert abs(ratio - math.exp(-(u2 - u1))) < 1e-10

    def test_derivative_is_minus_length(self):
        h = 1e-5
        forward = leaf_length(HorocyclicLeafParam(0, 1 + h))
        backward = leaf_length(HorocyclicLeafParam(0, 1 - h))
        assert abs((forward - backward) / (2 * h) + leaf_length(HorocyclicLeafParam(0, 1.0))) < 1e-8

    def test_negative_u_rejected(self):
        with pytest.raises(GeometryError):
            leaf_length(HorocyclicLeafParam(0, -0.1))


class TestCollapseToTripod:
    def test_center_maps_to_vertex(self, skewed):
        assert collapse_to_tripod(skewed, tripod_of(skewed).center) == TripodPoint(None, 0.0)

    def test_points_on_one_leaf_collapse_together(self, skewed):
        arc = horocyclic_lamination(skewed).leaf(HorocyclicLeafParam(1, 1.3), samples=9)
        images = {(p.prong, round(p.u, 9)) for p in (collapse_to_tripod(skewed, z) for z in arc[1:-1])}
        assert images == {(1, 1.3)}

    def test_median_coordinate(self, model):
        z = complex(0.5, math.exp(2.0))
        point = collapse_to_tripod(model, z)
        assert point.prong == 2
        assert point.u == pytest.approx(2.0)

    @pytest.mark.parametrize("k", [0, 1, 2])
    def test_prong_point_round_trip(self, skewed, k):
        z = tripod_of(skewed).prong_point(k, 0.7)
        point = collapse_to_tripod(skewed, z)
        assert point.prong == k
        assert point.u == pytest.approx(0.7)

    def test_outside_rejected(self, model):
        with pytest.raises(GeometryError):
            collapse_to_tripod(model, complex(2.0, 1.0))

    def test_moebius_invariance(self, skewed):
        m = MoebiusMap(2, 1, 1, 1)
        moved = skewed.moved_by(m)
        z = tripod_of(skewed).prong_point(0, 1.1)
        before = collapse_to_tripod(skewed, z)
        after = collapse_to_tripod(moved, apply(m, z))
        image_vertex = apply(m, complex(skewed.vertices[before.prong]))
        assert after.prong == moved.vertex_index(image_vertex if image_vertex is INF else image_vertex.real)
        assert after.u == pytest.approx(before.u, abs=1e-8)

    def test_one_lipschitz_along_prong(self, skewed):
        tripod = tripod_of(skewed)
        for u1, u2 in [(0.1, 0.4), (0.5, 2.0)]:
            p1, p2 = tripod.prong_point(2, u1), tripod.prong_point(2, u2)
            d = hyp_distance(HPoint.from_complex(p1), HPoint.from_complex(p2))
            gap = Tripod.distance(collapse_to_tripod(skewed, p1), collapse_to_tripod(skewed, p2))
            assert gap <= d + 1e-9


class TestTripod:
    def test_same_prong_distance(self):
        assert Tripod.distance(TripodPoint(0, 1.0), TripodPoint(0, 3.0)) == 2.0

    def test_distance_through_vertex(self):
        assert Tripod.distance(TripodPoint(0, 1.0), TripodPoint(2, 3.0)) == 4.0


class TestMostlyHorocyclicLeaf:
    def test_agrees_with_horocycle_past_tangency(self, skewed):
        leaf = mostly_horocyclic_leaf(skewed, 0, 0.5, samples=5)
        arc = horocyclic_lamination(skewed).leaf(HorocyclicLeafParam(0, 0.5), samples=5)
        assert leaf == arc

    def test_degenerates_to_center(self, model):
        leaf = mostly_horocyclic_leaf(model, 2, CENTER_HEIGHT_LOG, samples=5)
        for z in leaf:
            assert abs(z - complex(0.5, math.sqrt(3) / 2)) < 1e-12

    def test_endpoints_on_sector_arcs(self, model):
        leaf = mostly_horocyclic_leaf(model, 2, -0.05, samples=7)
        assert abs(abs(leaf[0]) - 1.0) < 1e-12
        assert abs(abs(leaf[-1] - 1) - 1.0) < 1e-12

    def test_below_center_rejected(self, model):
        with pytest.raises(GeometryError):
            mostly_horocyclic_leaf(model, 2, CENTER_HEIGHT_LOG - 0.1)


class TestMostlyStraightLeaf:
    def test_leaf_stays_in_triangle(self, skewed):
        for edge in range(3):
            for z in mostly_straight_leaf(skewed, edge, 0.1):
                assert skewed.contains(z)

    def test_leaf_hugs_edge_in_model(self, model):
        leaf = mostly_straight_leaf(model, 2, 0.05)
        assert leaf[0].real == pytest.approx(0.05)
        assert leaf[0].imag > 50

    def test_parameter_range(self, model):
        with pytest.raises(GeometryError):
            mostly_straight_leaf(model, 0, 0.7)


class TestHypRectangle:
    def test_vertical_edge_length(self):
        r = build_hyp_rectangle(1.7, 0.3)
        bottom_left, _, _, top_left = r.corners()
        assert hyp_distance(bottom_left, top_left) == pytest.approx(1.7)

    def test_horizontal_leaf_length(self):
        r = build_hyp_rectangle(2.0, 0.4)
        assert r.horizontal_leaf_length(2.0) == pytest.approx(0.2)

    def test_narrow_rectangle_leaves_vanish(self):
        r = build_hyp_rectangle(1.0, 1e-9)
        assert r.horizontal_leaf_length(1.0) < 1e-8

    def test_nonpositive_rejected(self):
        with pytest.raises(GeometryError):
            build_hyp_rectangle(0.0, 1.0)

    def test_offset_base(self):
        r = build_hyp_rectangle(1.0, 0.5, base=HPoint(3.0, 2.0))
        assert r.horizontal_leaf_length(2.0) == pytest.approx(0.5)
        assert r.point(1, 1).y == pytest.approx(2.0 * math.e)
