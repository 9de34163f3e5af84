"""Developing maps of projective structures given by a quadratic differential.

A developing map ``f = w1 / w2`` is the ratio of two solutions of

    w'' + q(z) w / 2 = 0,

so that the Schwarzian derivative of ``f`` equals ``q``. Solutions are carried
along polylines in the plane as the state ``(w1, w1', w2, w2')``; a *frame* is
that state at the start of a path.
"""

import cmath
import math
from collections.abc import Mapping, Sequence
from dataclasses import dataclass, field
from functools import cached_property
from typing import Literal

import numpy as np
from scipy.integrate import solve_ivp
from scipy.special import airye

from graftlab.errors import DegenerateMatrixError, GeometryError, IntegrationError, NormalizationError
from graftlab.logging import logger
from graftlab.moebius import MoebiusMap

__all__ = [
    "MODEL_DIFFERENTIAL",
    "AntiStokesSector",
    "DevelopingSolution",
    "HolonomyRep",
    "QuadraticDifferential",
    "annulus_differential",
    "anti_stokes_sectors",
    "deck_monodromy",
    "default_frame",
    "holonomy_rep",
    "integrate_dev",
    "model_chart",
    "model_compare",
    "monodromy",
    "path_monodromy",
    "schwarzian",
]

RTOL = 1e-10
ATOL = 1e-12
ZERO_MARGIN = 1e-6
WRONSKIAN_TOL = 1e-8
NORMALIZATION_TOL = 1e-6
# beyond this radius solutions are carried as (log w, w' / w)
LOG_DERIVATIVE_RADIUS = 20.0
# the absolute error underflows doubles past this radius
MAX_MODEL_RADIUS = 64.0
FAR_MARGIN = 8.0
# z = rotation * AIRY_SCALE * x turns the model equation into Airy's w'' = x w
AIRY_SCALE = (8 / 9) ** (1 / 3)

Frame = tuple[complex, complex, complex, complex]


@dataclass(frozen=True)
class QuadraticDifferential:
    """Polynomial differential ``q(z) dz^2``, coefficients constant term first."""

    coefficients: tuple[complex, ...]
    domain: Literal["plane", "annulus"] = "plane"

    def __post_init__(self):
        coeffs = [complex(c) for c in self.coefficients]
        while len(coeffs) > 1 and coeffs[-1] == 0:
            coeffs.pop()
        object.__setattr__(self, "coefficients", tuple(coeffs) or (0j,))

    def __call__(self, z):
        return np.polynomial.polynomial.polyval(z, self.coefficients)

    @property
    def degree(self) -> int:
        return -1 if self.is_zero else len(self.coefficients) - 1

    @property
    def is_zero(self) -> bool:
        return all(c == 0 for c in self.coefficients)

    @cached_property
    def zeros(self) -> tuple[complex, ...]:
        if self.degree < 1:
            return ()
        roots = np.polynomial.polynomial.polyroots(self.coefficients)
        return tuple(complex(r) for r in roots)


# The developing map of this differential is asymptotic to exp(sqrt(2) z^(3/2));
# it is z dz^2 after the change of variable z -> lambda z with lambda^3 = -4/9.
MODEL_DIFFERENTIAL = QuadraticDifferential((0j, -9 / 4))


def annulus_differential() -> QuadraticDifferential:
    """The hyperbolic annulus in the logarithmic chart ``zeta = log z``.

    The developing map there is ``exp(zeta)`` and the deck transformation is
    the translation by the core length.
    """
    return QuadraticDifferential((-0.5 + 0j,), domain="annulus")


def default_frame(z0: complex) -> Frame:
    """The frame whose developing map is the identity when ``q = 0``."""
    return (complex(z0), 1 + 0j, 1 + 0j, 0j)


def _frame_matrix(frame: Frame) -> np.ndarray:
    w1, dw1, w2, dw2 = frame
    return np.array([[w1, w2], [dw1, dw2]], dtype=complex)


def _check_frame(frame: Frame) -> None:
    w1, dw1, w2, dw2 = frame
    scale = max(abs(x) for x in frame)
    if scale == 0 or abs(w1 * dw2 - w2 * dw1) <= 1e-14 * scale * scale:
        raise DegenerateMatrixError("initial frame has vanishing Wronskian")


def _segment_distance(z: complex, a: complex, b: complex) -> float:
    d = b - a
    if d == 0:
        return abs(z - a)
    t = min(1.0, max(0.0, ((z - a) * d.conjugate()).real / abs(d) ** 2))
    return abs(z - (a + t * d))


def _check_path(q: QuadraticDifferential, path: Sequence[complex]) -> list[complex]:
    vertices = [complex(z) for z in path]
    if len(vertices) < 2:
        raise GeometryError("a path needs at least two vertices")
    for a, b in zip(vertices, vertices[1:]):
        for zero in q.zeros:
            if _segment_distance(zero, a, b) < ZERO_MARGIN:
                raise IntegrationError("path passes through a zero of q", location=zero)
    return vertices


def _transport(
    q: QuadraticDifferential,
    vertices: list[complex],
    state: np.ndarray,
    samples: int,
    rtol: float,
    atol: float,
) -> tuple[np.ndarray, np.ndarray]:
    """Carry ``state`` (pairs ``w, w'``) along the polyline.

    Returns the sample points and the state at each of them; ``samples``
    points are taken per segment, including the segment end.
    """
    points = [vertices[0]]
    states = [np.asarray(state, dtype=complex)]
    y = states[0]
    grid = np.linspace(0.0, 1.0, samples + 1)[1:]
    for a, b in zip(vertices, vertices[1:]):
        d = b - a

        def rhs(s, y, a=a, d=d):
            qz = q(a + s * d)
            dy = np.empty_like(y)
            dy[0::2] = d * y[1::2]
            dy[1::2] = -0.5 * d * qz * y[0::2]
            return dy

        sol = solve_ivp(rhs, (0.0, 1.0), y, method="DOP853", rtol=rtol, atol=atol, dense_output=True)
        if not sol.success:
            raise IntegrationError(f"integrator stopped: {sol.message}", location=a + sol.t[-1] * d)
        values = sol.sol(grid).T
        points.extend(a + grid * d)
        states.extend(values)
        y = values[-1]
    return np.array(points, dtype=complex), np.array(states, dtype=complex)


def _check_drift(z: np.ndarray, states: np.ndarray, tol: float = WRONSKIAN_TOL) -> float:
    """Largest relative change of the Wronskian along the samples; raises past ``tol``."""
    w1, dw1, w2, dw2 = np.asarray(states).T
    wronskian = w1 * dw2 - w2 * dw1
    drift = np.abs(wronskian - wronskian[0]) / abs(wronskian[0])
    if not np.all(drift <= tol):
        bad = int(np.argmax(~(drift <= tol)))
        raise IntegrationError(f"wronskian drift {drift[bad]:.3g} above tolerance {tol:g}", location=complex(z[bad]))
    return float(np.max(drift))


@dataclass(frozen=True)
class DevelopingSolution:
    """Two solutions of the Schwarzian ODE sampled along a path."""

    q: QuadraticDifferential
    path: tuple[complex, ...]
    z: np.ndarray = field(repr=False)
    w: np.ndarray = field(repr=False)  # rows (w1, w1', w2, w2')

    @property
    def wronskian(self) -> np.ndarray:
        w1, dw1, w2, dw2 = self.w.T
        return w1 * dw2 - w2 * dw1

    @property
    def wronskian_drift(self) -> float:
        values = self.wronskian
        return float(np.max(np.abs(values - values[0])) / abs(values[0]))

    @property
    def f(self) -> np.ndarray:
        with np.errstate(divide="ignore", invalid="ignore"):
            return self.w[:, 0] / self.w[:, 2]

    @property
    def chart_switches(self) -> tuple[int, ...]:
        """Sample indices where the developing map moves between the charts f and 1/f."""
        near_infinity = np.abs(self.w[:, 2]) < np.abs(self.w[:, 0])
        return tuple(int(i) + 1 for i in np.flatnonzero(near_infinity[1:] != near_infinity[:-1]))

    @property
    def frame_end(self) -> Frame:
        return tuple(complex(x) for x in self.w[-1])  # type: ignore[return-value]


def integrate_dev(
    q: QuadraticDifferential,
    path: Sequence[complex],
    frame: Frame | None = None,
    samples: int = 32,
    rtol: float = RTOL,
    atol: float = ATOL,
) -> DevelopingSolution:
    """Solve ``w'' + q w / 2 = 0`` along a polyline.

    ``frame`` defaults to ``(z0, 1, 1, 0)``, which develops ``q = 0`` to the
    identity. The polyline must keep a distance of ``1e-6`` from the zeros of
    ``q``. Raises ``IntegrationError`` where the Wronskian has drifted by more
    than ``1e-8`` relative, which happens to paths along which both solutions
    grow by many orders of magnitude.
    """
    vertices = _check_path(q, path)
    frame = frame or default_frame(vertices[0])
    _check_frame(frame)
    z, w = _transport(q, vertices, np.array(frame, dtype=complex), samples, rtol, atol)
    drift = _check_drift(z, w)
    solution = DevelopingSolution(q, tuple(vertices), z, w)
    logger.debug("developing map integrated", samples=len(z), drift=drift)
    return solution


_STENCILS = {
    # order -> (first, second, third) derivative weights over offsets -3..3
    2: (
        (0, 0, -1 / 2, 0, 1 / 2, 0, 0),
        (0, 0, 1, -2, 1, 0, 0),
        (0, -1 / 2, 1, 0, -1, 1 / 2, 0),
    ),
    4: (
        (0, 1 / 12, -2 / 3, 0, 2 / 3, -1 / 12, 0),
        (0, -1 / 12, 4 / 3, -5 / 2, 4 / 3, -1 / 12, 0),
        (1 / 8, -1, 13 / 8, 0, -13 / 8, 1, -1 / 8),
    ),
}


def schwarzian(f: np.ndarray, h: float, order: Literal[2, 4] = 2) -> np.ndarray:
    """Schwarzian derivative of samples of a holomorphic map.

    ``f`` is sampled on a uniform grid with spacing ``h`` along its last axis.
    Central differences of the given order give ``f'``, ``f''`` and ``f'''``;
    the error is ``O(h^order)`` plus a rounding term of size ``eps / h^3``.
    The result drops three samples at each end of the last axis.
    """
    f = np.asarray(f, dtype=complex)
    n = f.shape[-1]
    if n < 7:
        raise GeometryError("need at least seven samples along the last axis")
    derivs = []
    for k, weights in enumerate(_STENCILS[order], start=1):
        acc = np.zeros(f.shape[:-1] + (n - 6,), dtype=complex)
        for offset, wt in zip(range(-3, 4), weights):
            if wt:
                acc += wt * f[..., 3 + offset : n - 3 + offset]
        derivs.append(acc / h**k)
    d1, d2, d3 = derivs
    if np.any(np.abs(d1) <= 1e-14 * max(1.0, float(np.max(np.abs(f))))):
        raise IntegrationError("f' vanishes on the grid; f is not locally injective")
    ratio = d2 / d1
    return d3 / d1 - 1.5 * ratio**2


def _transport_matrix(
    q: QuadraticDifferential, vertices: list[complex], frame: Frame, rtol: float, atol: float
) -> MoebiusMap:
    _check_frame(frame)
    z, states = _transport(q, vertices, np.array(frame, dtype=complex), 1, rtol, atol)
    _check_drift(z, states)
    start = _frame_matrix(frame)
    m = np.linalg.solve(start, _frame_matrix(tuple(states[-1])))  # type: ignore[arg-type]
    # continued solutions are (w1, w2) @ m, so f moves by the transpose
    return MoebiusMap(m[0, 0], m[1, 0], m[0, 1], m[1, 1])


def monodromy(
    q: QuadraticDifferential,
    loop: Sequence[complex],
    frame: Frame | None = None,
    rtol: float = RTOL,
    atol: float = ATOL,
) -> MoebiusMap:
    """Moebius map by which the developing map changes once continued around ``loop``."""
    vertices = _check_path(q, loop)
    if abs(vertices[-1] - vertices[0]) > 1e-12:
        raise GeometryError("loop does not return to its base point")
    return _transport_matrix(q, vertices, frame or default_frame(vertices[0]), rtol, atol)


def path_monodromy(
    q: QuadraticDifferential,
    path: Sequence[complex],
    frame: Frame | None = None,
    rtol: float = RTOL,
    atol: float = ATOL,
) -> MoebiusMap:
    """Moebius change of the developing map along an open path.

    Meaningful when ``q`` is invariant under the translation taking the start
    of the path to its end, so both ends carry the same chart.
    """
    vertices = _check_path(q, path)
    return _transport_matrix(q, vertices, frame or default_frame(vertices[0]), rtol, atol)


def deck_monodromy(
    q: QuadraticDifferential,
    length: float,
    base: complex = 0j,
    frame: Frame | None = None,
    rtol: float = RTOL,
    atol: float = ATOL,
) -> MoebiusMap:
    """Holonomy of the core curve of an annulus chart with deck map ``zeta -> zeta + length``."""
    if length <= 0:
        raise GeometryError("deck translation length must be positive")
    return path_monodromy(q, [base, base + length], frame, rtol, atol)


@dataclass(frozen=True)
class HolonomyRep:
    """Holonomy on generator loops; an uppercase letter is the inverse loop."""

    generators: Mapping[str, MoebiusMap]

    def __call__(self, word: str) -> MoebiusMap:
        result = MoebiusMap.identity()
        for letter in word:
            m = self.generators.get(letter.lower())
            if m is None:
                raise GeometryError(f"no loop named {letter.lower()!r}")
            result = result @ (m.inverse() if letter.isupper() else m)
        return result


def holonomy_rep(
    q: QuadraticDifferential,
    loops: Mapping[str, Sequence[complex]],
    frame: Frame | None = None,
    rtol: float = RTOL,
    atol: float = ATOL,
) -> HolonomyRep:
    """Monodromy of each named loop; all loops share their base point and frame.

    Traversing ``a`` and then ``b`` maps to ``rep("ab") = rep("a") @ rep("b")``.
    """
    bases = {complex(path[0]) for path in loops.values()}
    if len(bases) > 1:
        raise GeometryError(f"loops start at different base points {sorted(bases, key=abs)}")
    return HolonomyRep({name.lower(): monodromy(q, path, frame, rtol, atol) for name, path in loops.items()})


@dataclass(frozen=True)
class AntiStokesSector:
    """Sector of opening 2 pi / 3 around angle ``2 pi index / 3``; the model developing map decays across it."""

    index: int

    def __post_init__(self):
        if self.index not in (0, 1, 2):
            raise GeometryError(f"sector index must be 0, 1 or 2, got {self.index}")

    @property
    def center(self) -> float:
        return math.remainder(2 * math.pi * self.index / 3, 2 * math.pi)

    @property
    def bounds(self) -> tuple[float, float]:
        return (self.center - math.pi / 3, self.center + math.pi / 3)

    @property
    def rotation(self) -> complex:
        return cmath.exp(1j * self.center)

    def middle_third(self) -> tuple[float, float]:
        return (self.center - math.pi / 9, self.center + math.pi / 9)

    def contains(self, z: complex) -> bool:
        return z != 0 and abs(math.remainder(cmath.phase(z) - self.center, 2 * math.pi)) < math.pi / 3

    def exponent(self, z):
        """``sqrt(2) z^(3/2)`` on the branch of ``z^(3/2)`` with negative real part across the sector.

        That branch is minus the principal power of ``z / rotation``.
        """
        return -math.sqrt(2) * (np.asarray(z) / self.rotation) ** 1.5


def anti_stokes_sectors() -> tuple[AntiStokesSector, ...]:
    return tuple(AntiStokesSector(k) for k in range(3))


def model_chart(q: QuadraticDifferential) -> tuple[complex, complex]:
    """Affine chart ``z = z0 + lam * u`` pulling a simple-zero differential back to the model.

    Only polynomials of degree one are supported.
    """
    if q.degree != 1:
        raise GeometryError(f"model chart needs a degree one differential, got degree {q.degree}")
    c0, c1 = q.coefficients
    return -c0 / c1, (-9 / (4 * c1)) ** (1 / 3)


def _airy_start(z: complex, sector: AntiStokesSector, recessive: bool) -> tuple[complex, complex]:
    """``(log w, w' / w)`` at ``z`` of ``Ai`` (recessive) or ``Bi / 2`` in the sector's Airy variable.

    ``2 Ai / Bi`` is the developing map asymptotic to the model exponential
    across the whole sector.
    """
    step = sector.rotation * AIRY_SCALE
    x = complex(z) / step
    ai, aip, bi, bip = (complex(v) for v in airye(x))
    zeta = 2 / 3 * x**1.5
    if recessive:
        return cmath.log(ai) - zeta, aip / ai / step
    return cmath.log(bi / 2) + abs(zeta.real), bip / bi / step


def _transport_riccati(
    q: QuadraticDifferential, vertices: list[complex], state: np.ndarray, rtol: float, atol: float
) -> np.ndarray:
    """Carry ``(log w, w' / w)`` of one solution along the polyline, one row per vertex.

    ``y = w' / w`` solves ``y' = -q / 2 - y^2``, which stays in range where
    ``w`` itself would overflow.
    """
    states = [np.asarray(state, dtype=complex)]
    for a, b in zip(vertices, vertices[1:]):
        d = b - a

        def rhs(s, y, a=a, d=d):
            return np.array([d * y[1], -d * (0.5 * q(a + s * d) + y[1] ** 2)])

        sol = solve_ivp(rhs, (0.0, 1.0), states[-1], method="DOP853", rtol=rtol, atol=atol)
        if not sol.success:
            raise IntegrationError(f"integrator stopped: {sol.message}", location=a + sol.t[-1] * d)
        states.append(sol.y[:, -1])
    return np.array(states, dtype=complex)


def _carry(
    q: QuadraticDifferential,
    vertices: list[complex],
    start: tuple[complex, complex],
    riccati: bool,
    rtol: float,
    atol: float,
) -> tuple[np.ndarray, np.ndarray]:
    """``log w`` and ``w' / w`` of one solution at every vertex."""
    log_w, dlog_w = start
    if riccati:
        states = _transport_riccati(q, vertices, np.array([0, dlog_w]), rtol, atol)
        return log_w + states[:, 0], states[:, 1]
    _, states = _transport(q, vertices, np.array([1, dlog_w], dtype=complex), 1, rtol, atol)
    return log_w + np.log(states[:, 0]), states[:, 1] / states[:, 0]


def model_compare(
    radius: float,
    sector: AntiStokesSector | int,
    m: int = 0,
    samples: int = 33,
    rtol: float = RTOL,
    atol: float = ATOL,
    relative: bool = False,
) -> float:
    """Sup of ``|(f(z) - exp(sqrt(2) z^(3/2))) z^m|`` over the middle third of the sector arc ``|z| = radius``.

    ``f`` develops the model differential as the ratio of the solution
    recessive in the sector to a dominant one, scaled so that ``f`` and the
    model agree to leading order. The recessive solution starts from its
    Airy values at ``radius + 8`` and is carried inwards and then along the
    arc, the dominant one from radius one outwards to each arc sample, so
    each moves in its stable direction. Beyond
    ``|z| = 20`` both are carried in log-derivative form.

    The carried ``f`` must match ``2 Ai / Bi`` at every arc sample within
    ``1e-6`` relative, otherwise ``NormalizationError`` is raised. With
    ``relative`` the error is ``|f / model - 1| |z|^m``, which decays like
    ``5 / (36 |zeta|)`` for ``zeta = z^(3/2) / sqrt(2)`` when ``m = 0``.
    """
    if not 0 < radius <= MAX_MODEL_RADIUS:
        raise GeometryError(f"radius must lie in (0, {MAX_MODEL_RADIUS:g}], got {radius}")
    if m < 0:
        raise GeometryError("m must be nonnegative")
    if isinstance(sector, int):
        sector = AntiStokesSector(sector)
    q = MODEL_DIFFERENTIAL
    rot = sector.rotation
    far, center, base = (radius + FAR_MARGIN) * rot, radius * rot, min(1.0, radius / 2) * rot
    riccati = radius + FAR_MARGIN > LOG_DERIVATIVE_RADIUS
    lo, hi = sector.middle_third()
    half = samples // 2
    right = [radius * cmath.exp(1j * t) for t in np.linspace(sector.center, hi, half + 1)]
    left = [radius * cmath.exp(1j * t) for t in np.linspace(sector.center, lo, half + 1)]

    log_rec, dlog_rec = _carry(q, [far, center], _airy_start(far, sector, True), riccati, rtol, atol)
    at_center = (log_rec[-1], dlog_rec[-1])
    rec_right, _ = _carry(q, right, at_center, riccati, rtol, atol)
    rec_left, _ = _carry(q, left, at_center, riccati, rtol, atol)
    z = np.array(left[::-1] + right[1:])
    log_rec = np.concatenate([rec_left[::-1], rec_right[1:]])

    # along the arc the dominant solution loses its lead, so it reaches every sample on its own ray segment
    dom_start = _airy_start(base, sector, False)
    log_dom = np.array([_carry(q, [base, p], dom_start, riccati, rtol, atol)[0][-1] for p in z])
    log_f = log_rec - log_dom

    exact = np.array([_airy_start(p, sector, True)[0] - _airy_start(p, sector, False)[0] for p in z])
    residual = float(np.max(np.abs(np.expm1(log_f - exact))))
    if not residual <= NORMALIZATION_TOL:
        raise NormalizationError(f"normalization failed: residual {residual:.3g} at |z| = {radius:g}")

    log_model = sector.exponent(z)
    deviation = np.abs(np.expm1(log_f - log_model)) * np.abs(z) ** m
    if not relative:
        deviation = deviation * np.exp(log_model.real)
    error = float(np.max(deviation))
    logger.debug(
        "model comparison", radius=radius, sector=sector.index, m=m, residual=residual, error=error, relative=relative
    )
    return error
