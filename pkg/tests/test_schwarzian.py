"""
Tests for graftlab.schwarzian

Covers:
- Developing maps of constant and polynomial differentials
- Finite-difference Schwarzian derivative and the integrate/differentiate round trip
- Wronskian conservation and projective consistency between frames
- Wronskian drift raising on paths where both solutions blow up
- Monodromy: contractible loops, annulus holonomy, equivariance, holonomy words
- The model map of a simple zero: Airy normalization, absolute and relative
  decay per sector, the log-derivative form at large radius
"""

import math

import numpy as np
import pytest

from graftlab import schwarzian as schwarzian_module
from graftlab.errors import DegenerateMatrixError, GeometryError, IntegrationError, NormalizationError
from graftlab.moebius import MoebiusKind, MoebiusMap, classify
from graftlab.schwarzian import (
    MODEL_DIFFERENTIAL,
    AntiStokesSector,
    QuadraticDifferential,
    annulus_differential,
    anti_stokes_sectors,
    deck_monodromy,
    holonomy_rep,
    integrate_dev,
    model_chart,
    model_compare,
    monodromy,
    path_monodromy,
    schwarzian,
)

ZERO = QuadraticDifferential((0,))
TWO = QuadraticDifferential((2,))
LINEAR = QuadraticDifferential((0, 1))
QUADRATIC = QuadraticDifferential((-1, 0, 1))

# frame (w1, w1', w2, w2') turning the frame matrix F into F @ G with G = [[2, 1], [1, 1]]
G_FRAME = (1, 2, 1, 1)
G_MAP = MoebiusMap(2, 1, 1, 1)

# loops whose frames grow by a few orders of magnitude need tighter steps
TIGHT = {"rtol": 1e-13, "atol": 1e-14}


def _square_loop(center: complex, r: float) -> list[complex]:
    return [center + r * c for c in (1 - 1j, 1 + 1j, -1 + 1j, -1 - 1j, 1 - 1j)]


class TestQuadraticDifferential:
    def test_trailing_zeros_trimmed(self):
        assert QuadraticDifferential((1, 2, 0, 0)).degree == 1
        assert ZERO.degree == -1
        assert ZERO.zeros == ()

    def test_zeros(self):
        assert sorted(z.real for z in QUADRATIC.zeros) == pytest.approx([-1.0, 1.0], abs=1e-12)

    def test_model_chart(self):
        z0, lam = model_chart(QuadraticDifferential((2, 4)))
        assert z0 == pytest.approx(-0.5)
        assert lam**3 * 4 == pytest.approx(-9 / 4)

    def test_model_chart_needs_simple_zero(self):
        with pytest.raises(GeometryError):
            model_chart(QUADRATIC)


class TestIntegrateDev:
    def test_zero_differential_is_identity(self):
        sol = integrate_dev(ZERO, [0.3j, 1 + 0.3j, 1 + 1j])
        assert np.allclose(sol.f, sol.z, atol=1e-10)

    def test_constant_two_gives_tangent(self):
        sol = integrate_dev(TWO, [0, 0.7 + 0.2j], frame=(0, 1, 1, 0))
        assert np.allclose(sol.f, np.tan(sol.z), atol=1e-9)

    @pytest.mark.parametrize("q", [ZERO, TWO, LINEAR, QUADRATIC])
    def test_wronskian_conserved(self, q):
        sol = integrate_dev(q, [0.2 + 0.5j, 1.2 + 0.5j, 1.2 + 1.5j])
        assert sol.wronskian_drift < 1e-8

    @pytest.mark.parametrize("q", [ZERO, TWO, LINEAR, QUADRATIC])
    def test_round_trip(self, q):
        h = 0.01
        sol = integrate_dev(q, [0.2 + 0.5j, 1.2 + 0.5j], samples=100, rtol=1e-13, atol=1e-14)
        recovered = schwarzian(sol.f, h, order=4)
        assert np.max(np.abs(recovered - q(sol.z[3:-3]))) < 1e-5

    def test_frames_differ_by_one_moebius_map(self):
        path = [0.2 + 0.5j, 1.2 + 0.5j]
        f = integrate_dev(LINEAR, path, frame=(0, 1, 1, 0)).f
        g = integrate_dev(LINEAR, path, frame=G_FRAME).f
        assert np.allclose(g, [G_MAP(x) for x in f], atol=1e-8)

    def test_path_through_zero_rejected(self):
        with pytest.raises(IntegrationError) as err:
            integrate_dev(LINEAR, [-1, 1])
        assert err.value.location == pytest.approx(0)

    def test_degenerate_frame_rejected(self):
        with pytest.raises(DegenerateMatrixError):
            integrate_dev(TWO, [0, 1], frame=(1, 1, 2, 2))

    def test_chart_switches(self):
        # tan(x) crosses modulus one at pi/4 and 3 pi/4
        sol = integrate_dev(TWO, [0.1j, 2.5 + 0.1j], frame=(0, 1, 1, 0))
        assert len(sol.chart_switches) == 2

    def test_drift_on_long_path_raises(self):
        # both solutions of w'' = -z^2 w / 2 grow by many orders along the diagonal
        with pytest.raises(IntegrationError, match="wronskian") as err:
            integrate_dev(QuadraticDifferential((0, 0, 1)), [0.5 + 0.5j, 5 + 5j])
        assert err.value.location is not None
        assert err.value.location.real == pytest.approx(err.value.location.imag)


class TestSchwarzian:
    def test_identity(self):
        x = np.linspace(0, 1, 101)
        assert np.allclose(schwarzian(x + 0.5j, 0.01), 0, atol=1e-8)

    def test_inversion(self):
        z = 1 + 1j + np.linspace(0, 1, 101)
        assert np.allclose(schwarzian(1 / z, 0.01, order=4), 0, atol=1e-5)

    def test_tangent_grid(self):
        h = 1e-3
        x = np.arange(0, 0.5 + h / 2, h)
        z = x[None, :] + 1j * x[:, None]
        assert np.max(np.abs(schwarzian(np.tan(z), h, order=4) - 2)) < 1e-5

    def test_moebius_invariance(self):
        h = 0.01
        z = 0.3j + np.arange(0, 1, h)
        f = np.tan(z)
        assert np.allclose(schwarzian([G_MAP(x) for x in f], h, order=4), schwarzian(f, h, order=4), atol=1e-5)

    def test_constant_rejected(self):
        with pytest.raises(IntegrationError, match="vanishes"):
            schwarzian(np.ones(20), 0.1)


class TestMonodromy:
    def test_contractible_loop(self):
        assert monodromy(LINEAR, _square_loop(0, 1), **TIGHT).is_identity(1e-8)

    def test_contractible_loop_quadratic(self):
        assert monodromy(QUADRATIC, _square_loop(0, 1.2), **TIGHT).is_identity(1e-7)

    def test_open_loop_rejected(self):
        with pytest.raises(GeometryError, match="base point"):
            monodromy(LINEAR, [1, 2, 2j])

    def test_path_monodromy_drift_raises(self):
        with pytest.raises(IntegrationError, match="wronskian"):
            path_monodromy(QuadraticDifferential((0, 0, 1)), [0.5 + 0.5j, 6 + 6j])

    def test_annulus_holonomy(self):
        kind, length = classify(deck_monodromy(annulus_differential(), 1.5), tol=1e-8)
        assert kind is MoebiusKind.HYPERBOLIC
        assert length == pytest.approx(1.5, rel=1e-8)

    def test_loop_twice_is_square(self):
        once = deck_monodromy(annulus_differential(), 0.8)
        twice = deck_monodromy(annulus_differential(), 1.6)
        assert twice.projectively_equal(once @ once, 1e-8)

    def test_frame_change_conjugates(self):
        q = annulus_differential()
        plain = deck_monodromy(q, 1.1, frame=(0, 1, 1, 0))
        moved = deck_monodromy(q, 1.1, frame=G_FRAME)
        assert moved.projectively_equal(G_MAP @ plain @ G_MAP.inverse(), 1e-8)

    def test_holonomy_words(self):
        loops = {"a": _square_loop(0, 1), "b": [1 - 1j, 3 - 1j, 3 + 1j, 1 - 1j]}
        rep = holonomy_rep(LINEAR, loops, **TIGHT)
        assert rep("aB").is_identity(1e-8)
        assert rep("ab").projectively_equal(rep("a") @ rep("b"))

    def test_unknown_letter(self):
        rep = holonomy_rep(LINEAR, {"a": _square_loop(0, 1)})
        with pytest.raises(GeometryError):
            rep("c")


class TestModelCompare:
    def test_three_sectors(self):
        sectors = anti_stokes_sectors()
        assert [s.index for s in sectors] == [0, 1, 2]
        for z in (2, 2 * np.exp(2.2j), 2 * np.exp(-2.0j)):
            assert sum(s.contains(z) for s in sectors) == 1

    def test_bad_sector(self):
        with pytest.raises(GeometryError):
            AntiStokesSector(3)

    def test_model_exponent_decays_mid_sector(self):
        for s in anti_stokes_sectors():
            z = 5 * np.exp(1j * s.center)
            assert abs(np.exp(s.exponent(z))) < 1e-6

    @pytest.mark.parametrize("sector", [0, 1, 2])
    @pytest.mark.parametrize("m", [0, 1, 2])
    def test_error_decreases_with_radius(self, sector, m):
        errors = [model_compare(r, sector, m) for r in (4.0, 6.0, 8.0)]
        assert errors[0] > errors[1] > errors[2]

    def test_error_small_at_largest_radius(self):
        assert model_compare(8.0, 0, 0) < 1e-3

    @pytest.mark.parametrize("radius", [4.0, 8.0, 24.0])
    def test_relative_error_matches_leading_term(self, radius):
        zeta = radius**1.5 / math.sqrt(2)
        assert model_compare(radius, 0, 0, relative=True) == pytest.approx(5 / (36 * zeta), rel=0.05)

    @pytest.mark.parametrize("sector", [0, 1, 2])
    def test_relative_error_decreases(self, sector):
        errors = [model_compare(r, sector, 0, relative=True) for r in (4.0, 8.0, 16.0, 24.0)]
        assert errors == sorted(errors, reverse=True)
        assert len(set(errors)) == len(errors)

    def test_beyond_log_derivative_radius(self):
        far = model_compare(24.0, 0)
        assert 0 < far < model_compare(8.0, 0)

    @pytest.mark.parametrize("k", [1, 2])
    def test_order_three_symmetry(self, k):
        base = model_compare(6.0, 0, 1, relative=True)
        rotated = model_compare(6.0, k, 1, relative=True)
        assert rotated == pytest.approx(base, rel=1e-5)

    def test_wrong_differential_fails_normalization(self, monkeypatch):
        monkeypatch.setattr(schwarzian_module, "MODEL_DIFFERENTIAL", QuadraticDifferential((0j, -2.3)))
        with pytest.raises(NormalizationError, match="normalization failed"):
            model_compare(6.0, 0)

    def test_radius_cap(self):
        with pytest.raises(GeometryError):
            model_compare(100.0, 0)
        with pytest.raises(GeometryError):
            model_compare(4.0, 0, -1)

    def test_model_differential_is_linear(self):
        assert list(MODEL_DIFFERENTIAL.zeros) == pytest.approx([0])
        assert math.isclose(abs(MODEL_DIFFERENTIAL(1)), 9 / 4)
