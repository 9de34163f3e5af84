"""
Tests for graftlab.torus_oracle

Covers:
- Teichmueller distance between flat tori and its metric properties
- Grafting along slopes: unit cases, additivity, SL(2, Z) equivariance
- Teichmueller rays at unit speed and the gap to the matched grafting ray
- Matched one-skeletons and their length ratios
"""

import math

import numpy as np
import pytest

from graftlab.errors import GeometryError
from graftlab.qc_comparison import one_skeleton_map
from graftlab.torus_oracle import (
    SHIPPED_CASES,
    SlopeCurve,
    TorusPoint,
    act_on_slope,
    d_constant,
    graft_torus,
    matched_skeletons,
    random_sl2z,
    ray_gap,
    ray_gap_profile,
    s0,
    sl2z_act,
    teich_distance,
    teich_ray,
)

HORIZONTAL = SlopeCurve(1, 0)


def _random_tau(rng) -> complex:
    return complex(rng.uniform(-1, 1), rng.uniform(0.5, 2))


class TestTeichDistance:
    def test_zero(self):
        assert teich_distance(0.3 + 1j, 0.3 + 1j) == 0

    def test_vertical(self):
        assert teich_distance(1j, 2j) == pytest.approx(math.log(2) / 2)

    def test_symmetric_and_triangle(self):
        rng = np.random.default_rng(7)
        for _ in range(50):
            a, b, c = (_random_tau(rng) for _ in range(3))
            assert teich_distance(a, b) == pytest.approx(teich_distance(b, a), abs=1e-12)
            assert teich_distance(a, c) <= teich_distance(a, b) + teich_distance(b, c) + 1e-12

    def test_invariant_under_sl2z(self):
        rng = np.random.default_rng(3)
        m = random_sl2z(rng, 4)
        a, b = 0.2 + 1.1j, -0.4 + 0.7j
        assert teich_distance(sl2z_act(m, a), sl2z_act(m, b)) == pytest.approx(teich_distance(a, b), rel=1e-9)

    def test_lower_half_plane_rejected(self):
        with pytest.raises(GeometryError):
            TorusPoint(1 - 1j)


class TestGraftTorus:
    def test_zero_weight(self):
        assert graft_torus(0.3 + 1.2j, SlopeCurve(2, 1), 0.0) == pytest.approx(0.3 + 1.2j)

    def test_square_torus(self):
        assert graft_torus(1j, HORIZONTAL, 1.0) == pytest.approx(2j)

    def test_additive(self):
        c = SlopeCurve(1, 2)
        twice = graft_torus(graft_torus(0.1 + 1j, c, 0.4), c, 0.9)
        assert twice == pytest.approx(graft_torus(0.1 + 1j, c, 1.3), abs=1e-12)

    def test_sl2z_equivariance(self):
        rng = np.random.default_rng(11)
        slopes = [SlopeCurve(1, 0), SlopeCurve(1, 1), SlopeCurve(2, 1), SlopeCurve(1, -3), SlopeCurve(3, 2)]
        for _ in range(20):
            m = random_sl2z(rng, 4)
            tau = _random_tau(rng)
            c = slopes[rng.integers(len(slopes))]
            w = rng.uniform(0, 3)
            moved = graft_torus(sl2z_act(m, tau), act_on_slope(m, c), w)
            assert moved == pytest.approx(sl2z_act(m, graft_torus(tau, c, w)), abs=1e-10)

    def test_slope_must_be_primitive(self):
        with pytest.raises(GeometryError):
            SlopeCurve(2, 4)

    def test_negative_weight(self):
        with pytest.raises(GeometryError):
            graft_torus(1j, HORIZONTAL, -1.0)

    def test_parse(self):
        assert SlopeCurve.parse("3/-1") == SlopeCurve(3, -1)
        with pytest.raises(GeometryError):
            SlopeCurve.parse("x")


class TestTeichRay:
    def test_start(self):
        assert teich_ray(0.3 + 1j, SlopeCurve(2, 1), 0.0) == pytest.approx(0.3 + 1j)

    def test_unit_speed(self):
        tau, c = 0.3 + 1j, SlopeCurve(1, 1)
        for s1, s2 in [(0.0, 1.0), (0.5, 2.5), (1.0, 1.25)]:
            assert teich_distance(teich_ray(tau, c, s1), teich_ray(tau, c, s2)) == pytest.approx(abs(s2 - s1))

    def test_horizontal_ray_is_vertical(self):
        assert teich_ray(1j, HORIZONTAL, 1.0) == pytest.approx(math.exp(2) * 1j)


class TestRayGap:
    def test_decreasing(self):
        gaps = [ray_gap(0.3 + 1j, HORIZONTAL, s) for s in (1.0, 3.0, 6.0)]
        assert gaps[0] > gaps[1] > gaps[2] > 0

    @pytest.mark.parametrize(("tau", "c"), SHIPPED_CASES)
    def test_tail(self, tau, c):
        start = s0()
        report = ray_gap_profile(tau, c, np.linspace(start, start + 6, 13))
        assert all(a > b for a, b in zip(report.gap, report.gap[1:]))
        assert report.gap[0] <= 0.05 + 1e-12
        assert ray_gap(tau, c, 6.0) < 0.05

    def test_closed_form(self):
        assert ray_gap(0.5 + 0.8j, SlopeCurve(2, 1), 1.0) == pytest.approx(0.5 * math.log1p(math.exp(-2)))

    @pytest.mark.parametrize(("tau", "c"), SHIPPED_CASES)
    def test_closed_form_on_shipped_cases(self, tau, c):
        # both rays end in the original basis; the gap only depends on s
        assert ray_gap(tau, c, 2.0) == pytest.approx(0.5 * math.log1p(math.exp(-4)), rel=1e-8)

    def test_sl2z_invariance(self):
        rng = np.random.default_rng(5)
        m = random_sl2z(rng, 4)
        tau, c = 0.3 + 1j, SlopeCurve(1, 1)
        for s in (0.5, 2.0, 4.0):
            moved = ray_gap(sl2z_act(m, tau), act_on_slope(m, c), s)
            assert moved == pytest.approx(ray_gap(tau, c, s), rel=1e-6)

    def test_report_method(self):
        assert ray_gap_profile(1j, HORIZONTAL, [0.0, 1.0]).method == "torus"


class TestMatchedSkeletons:
    def test_constants_near_d(self):
        tau, c = 0.5 + 0.8j, SlopeCurve(2, 1)
        d = d_constant(tau, c)
        lower, upper = one_skeleton_map(*matched_skeletons(tau, c, 3.0)).constants
        assert 0.9 * d < lower <= upper < 1.1 * d
