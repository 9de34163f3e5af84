"""Closed forms for flat tori: Teichmueller distance, grafting along slopes, rays.

A marked torus is ``C / (Z + tau Z)``. A slope ``(p, q)`` is the class of the
closed geodesic with vector ``p + q tau``. Grafting is scale free: the torus
is rescaled so the slope curve has length one, and a cylinder of height
``w`` is inserted along it, which raises the modulus transverse to the slope
by ``w``.

The grafting ray along a slope is compared with the Teichmueller ray that
stretches transversally to it at unit speed. The constant ``d`` is the
reciprocal of the slope length in the unit-area flat metric; it plays the
role the reciprocal hyperbolic length of the lamination plays on closed
surfaces.
"""

import math
from collections.abc import Iterable
from dataclasses import dataclass

import networkx as nx
import numpy as np

from graftlab.errors import GeometryError
from graftlab.logging import logger
from graftlab.models import RayComparisonReport

__all__ = [
    "SHIPPED_CASES",
    "SL2Z",
    "SlopeCurve",
    "TorusPoint",
    "act_on_slope",
    "d_constant",
    "graft_torus",
    "matched_skeletons",
    "matched_weight",
    "random_sl2z",
    "ray_gap",
    "ray_gap_profile",
    "s0",
    "sl2z_act",
    "teich_distance",
    "teich_ray",
]

SL2Z = tuple[tuple[int, int], tuple[int, int]]


@dataclass(frozen=True)
class TorusPoint:
    tau: complex

    def __post_init__(self):
        if not self.tau.imag > 0:
            raise GeometryError(f"tau={self.tau} is not in the upper half-plane")


@dataclass(frozen=True)
class SlopeCurve:
    p: int
    q: int

    def __post_init__(self):
        if math.gcd(self.p, self.q) != 1:
            raise GeometryError(f"slope ({self.p}, {self.q}) is not primitive")

    def __str__(self) -> str:
        return f"{self.p}/{self.q}"

    @classmethod
    def parse(cls, text: str) -> "SlopeCurve":
        p, _, q = text.partition("/")
        try:
            return cls(int(p), int(q or 1))
        except ValueError as e:
            raise GeometryError(f"cannot read slope {text!r}, expected p/q") from e


# (tau, slope) pairs used by the ray comparison experiments
SHIPPED_CASES: tuple[tuple[complex, SlopeCurve], ...] = (
    (0.3 + 1j, SlopeCurve(1, 0)),
    (1j, SlopeCurve(1, 1)),
    (0.5 + 0.8j, SlopeCurve(2, 1)),
    (-0.2 + 1.5j, SlopeCurve(1, 2)),
    (0.1 + 2j, SlopeCurve(3, -1)),
)


def _point(tau: complex | TorusPoint) -> complex:
    return (tau if isinstance(tau, TorusPoint) else TorusPoint(complex(tau))).tau


def teich_distance(tau1: complex | TorusPoint, tau2: complex | TorusPoint) -> float:
    """Half the hyperbolic distance between the moduli."""
    a, b = _point(tau1), _point(tau2)
    return math.asinh(abs(a - b) / (2 * math.sqrt(a.imag * b.imag)))


def sl2z_act(m: SL2Z, tau: complex) -> complex:
    (a, b), (c, d) = m
    return (a * tau + b) / (c * tau + d)


def act_on_slope(m: SL2Z, c: SlopeCurve) -> SlopeCurve:
    """The same curve in the basis ``(1, m . tau)`` after normalizing."""
    (a, b), (cc, d) = m
    return SlopeCurve(a * c.p - b * c.q, -cc * c.p + d * c.q)


def _bezout(a: int, b: int) -> tuple[int, int]:
    """``(x, y)`` with ``a x + b y = 1`` for coprime ``a, b``."""
    old_r, r, old_x, x, old_y, y = a, b, 1, 0, 0, 1
    while r:
        k = old_r // r
        old_r, r = r, old_r - k * r
        old_x, x = x, old_x - k * x
        old_y, y = y, old_y - k * y
    if old_r < 0:
        old_x, old_y = -old_x, -old_y
    return old_x, old_y


def _normalizer(c: SlopeCurve) -> SL2Z:
    """Change of basis taking the slope to ``(1, 0)``."""
    x, y = _bezout(c.p, c.q)
    # basis (p + q tau, r + s tau) with p s - q r = 1
    s, r = x, -y
    return ((s, r), (c.q, c.p))


def _inverse(m: SL2Z) -> SL2Z:
    (a, b), (c, d) = m
    return ((d, -b), (-c, a))


def graft_torus(tau: complex | TorusPoint, c: SlopeCurve, w: float) -> complex:
    if w < 0:
        raise GeometryError(f"grafting weight must be nonnegative, got {w}")
    m = _normalizer(c)
    return sl2z_act(_inverse(m), sl2z_act(m, _point(tau)) + 1j * w)


def teich_ray(tau: complex | TorusPoint, c: SlopeCurve, s: float) -> complex:
    """Unit-speed Teichmueller ray stretching transversally to the slope."""
    m = _normalizer(c)
    normal = sl2z_act(m, _point(tau))
    return sl2z_act(_inverse(m), complex(normal.real, normal.imag * math.exp(2 * s)))


def d_constant(tau: complex | TorusPoint, c: SlopeCurve) -> float:
    """Reciprocal length of the slope in the unit-area flat metric."""
    tau = _point(tau)
    return math.sqrt(tau.imag) / abs(c.p + c.q * tau)


def matched_weight(tau: complex | TorusPoint, c: SlopeCurve, s: float) -> float:
    """Grafting weight matched to ray time ``s``, ``d^2 e^{2s}``.

    In the unit-area metric of the starting torus this is a cylinder of
    height ``d e^{2s}``; the bare torus itself accounts for the offset ``d^2``.
    """
    return d_constant(tau, c) ** 2 * math.exp(2 * s)


def ray_gap(tau: complex | TorusPoint, c: SlopeCurve, s: float) -> float:
    """Distance at time ``s`` between the Teichmueller ray and the matched grafting ray."""
    return teich_distance(teich_ray(tau, c, s), graft_torus(tau, c, matched_weight(tau, c, s)))


def ray_gap_profile(tau: complex | TorusPoint, c: SlopeCurve, s_values: Iterable[float]) -> RayComparisonReport:
    s_values = tuple(float(s) for s in s_values)
    gaps = tuple(ray_gap(tau, c, s) for s in s_values)
    logger.debug("torus ray gaps", tau=_point(tau), slope=str(c), last=gaps[-1] if gaps else None)
    return RayComparisonReport(method="torus", s=s_values, gap=gaps)


def s0(threshold: float = 0.05) -> float:
    """Ray time after which the gap stays below ``threshold``.

    The gap equals ``log(1 + e^{-2s}) / 2`` for every torus and slope, so the
    bound does not depend on them.
    """
    if not threshold > 0:
        raise GeometryError(f"threshold must be positive, got {threshold}")
    return max(0.0, -0.5 * math.log(math.expm1(2 * threshold)))


def random_sl2z(rng: np.random.Generator, length: int = 6) -> SL2Z:
    """Random word in ``S`` and ``T^{+-1}``."""
    m = np.eye(2, dtype=np.int64)
    moves = (np.array([[0, -1], [1, 0]]), np.array([[1, 1], [0, 1]]), np.array([[1, -1], [0, 1]]))
    for k in rng.integers(0, len(moves), size=length):
        m = m @ moves[k]
    return ((int(m[0, 0]), int(m[0, 1])), (int(m[1, 0]), int(m[1, 1])))


def _square_skeleton(along: float, across: float) -> nx.Graph:
    g = nx.cycle_graph(4)
    for (u, v), x in zip([(0, 1), (1, 2), (2, 3), (3, 0)], [along, across, along, across]):
        g.edges[u, v]["length"] = x
    return g


def matched_skeletons(tau: complex | TorusPoint, c: SlopeCurve, s: float) -> tuple[nx.Graph, nx.Graph]:
    """One-skeletons of the rectangle cut from the stretched torus and from the grafted one.

    The stretched torus keeps its unit-area metric stretched by ``e^{2s}``
    across the slope; the grafted torus uses the metric in which the slope
    has length one. Edge ratios tend to ``d``.
    """
    d = d_constant(tau, c)
    stretched = _square_skeleton(1 / d, d * math.exp(2 * s))
    grafted = _square_skeleton(1.0, d * d + matched_weight(tau, c, s))
    return stretched, grafted
