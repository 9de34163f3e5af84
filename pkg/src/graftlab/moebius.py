"""Moebius maps, the upper half-plane and its geodesics and horocycles.

Matrices are normalized to determinant one on construction. The point at
infinity is the module constant ``INF``; it never appears as a large float.
"""

import cmath
import math
from dataclasses import dataclass
from enum import Enum
from typing import NamedTuple

from graftlab.errors import DegenerateMatrixError, GeometryError

__all__ = [
    "INF",
    "ExtendedComplex",
    "Geodesic",
    "HPoint",
    "Horocycle",
    "MoebiusKind",
    "MoebiusMap",
    "apply",
    "classify",
    "geodesic_between",
    "horocycle_at",
    "hyp_distance",
    "three_point_map",
]

PROJECTIVE_TOL = 1e-10
DET_TOL = 1e-14


class _Infinity:
    """The point at infinity of the Riemann sphere."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "INF"

    def __reduce__(self):
        return (_Infinity, ())


INF = _Infinity()
ExtendedComplex = complex | _Infinity


def _is_inf(z) -> bool:
    return z is INF


def chordal(z: ExtendedComplex, w: ExtendedComplex) -> float:
    """Chordal distance on the Riemann sphere (diameter 2)."""
    if _is_inf(z) and _is_inf(w):
        return 0.0
    if _is_inf(z):
        z, w = w, z
    if _is_inf(w):
        return 2.0 / math.sqrt(1.0 + abs(z) ** 2)
    return 2.0 * abs(z - w) / math.sqrt((1.0 + abs(z) ** 2) * (1.0 + abs(w) ** 2))


class MoebiusKind(Enum):
    ELLIPTIC = "elliptic"
    PARABOLIC = "parabolic"
    HYPERBOLIC = "hyperbolic"
    LOXODROMIC = "loxodromic"


class Classification(NamedTuple):
    kind: MoebiusKind
    translation_length: float


@dataclass(frozen=True)
class MoebiusMap:
    """Projective 2x2 complex matrix ``z -> (az + b) / (cz + d)``."""

    a: complex
    b: complex
    c: complex
    d: complex

    def __post_init__(self):
        det = self.a * self.d - self.b * self.c
        scale = max(abs(self.a), abs(self.b), abs(self.c), abs(self.d))
        if scale == 0 or abs(det) <= DET_TOL * scale * scale:
            raise DegenerateMatrixError(f"degenerate Moebius matrix, det={det!r}")
        root = cmath.sqrt(det)
        for name in ("a", "b", "c", "d"):
            object.__setattr__(self, name, complex(getattr(self, name)) / root)

    @classmethod
    def identity(cls) -> "MoebiusMap":
        return cls(1, 0, 0, 1)

    @classmethod
    def diagonal(cls, lam: complex) -> "MoebiusMap":
        return cls(lam, 0, 0, 1 / lam)

    @classmethod
    def from_fixed_points(cls, repelling: ExtendedComplex, attracting: ExtendedComplex, length: float) -> "MoebiusMap":
        """Hyperbolic element translating by ``length`` along the axis from ``repelling`` to ``attracting``."""
        if length <= 0:
            raise GeometryError("translation length must be positive")
        chart = _sending_zero_infinity(repelling, attracting)
        return chart @ cls.diagonal(math.exp(length / 2)) @ chart.inverse()

    def matrix(self) -> tuple[tuple[complex, complex], tuple[complex, complex]]:
        return ((self.a, self.b), (self.c, self.d))

    def __call__(self, z: ExtendedComplex) -> ExtendedComplex:
        return apply(self, z)

    def __matmul__(self, other: "MoebiusMap") -> "MoebiusMap":
        return self.compose(other)

    def compose(self, other: "MoebiusMap") -> "MoebiusMap":
        """Matrix product, i.e. ``self`` applied after ``other``."""
        return MoebiusMap(
            self.a * other.a + self.b * other.c,
            self.a * other.b + self.b * other.d,
            self.c * other.a + self.d * other.c,
            self.c * other.b + self.d * other.d,
        )

    def inverse(self) -> "MoebiusMap":
        return MoebiusMap(self.d, -self.b, -self.c, self.a)

    def trace(self) -> complex:
        return self.a + self.d

    def is_real(self, tol: float = 1e-12) -> bool:
        # det-one representative is real up to an overall factor of i
        entries = (self.a, self.b, self.c, self.d)
        return all(abs(e.imag) <= tol for e in entries) or all(abs(e.real) <= tol for e in entries)

    def projectively_equal(self, other: "MoebiusMap", tol: float = PROJECTIVE_TOL) -> bool:
        """Compare the images of 0, 1 and infinity in the chordal metric."""
        return all(chordal(self(z), other(z)) <= tol for z in (0j, 1 + 0j, INF))

    def is_identity(self, tol: float = PROJECTIVE_TOL) -> bool:
        return self.projectively_equal(MoebiusMap.identity(), tol)

    def fixed_points(self) -> tuple[ExtendedComplex, ...]:
        a, b, c, d = self.a, self.b, self.c, self.d
        if abs(c) <= DET_TOL:
            if abs(a - d) <= DET_TOL:
                return (INF,)
            return (b / (d - a), INF)
        disc = cmath.sqrt((a + d) ** 2 - 4)
        first = (a - d + disc) / (2 * c)
        second = (a - d - disc) / (2 * c)
        if abs(disc) <= 1e-12:
            return (first,)
        return (first, second)

    def distance_to_identity(self) -> float:
        return min(
            max(abs(self.a - 1), abs(self.b), abs(self.c), abs(self.d - 1)),
            max(abs(self.a + 1), abs(self.b), abs(self.c), abs(self.d + 1)),
        )


def _sending_zero_infinity(p: ExtendedComplex, q: ExtendedComplex) -> MoebiusMap:
    """A Moebius map taking 0 to ``p`` and infinity to ``q``."""
    if _is_inf(q):
        return MoebiusMap(1, p, 0, 1)
    if _is_inf(p):
        return MoebiusMap(q, 1, 1, 0)
    return MoebiusMap(q, p, 1, 1)


def _to_zero_one_infinity(z1: ExtendedComplex, z2: ExtendedComplex, z3: ExtendedComplex) -> MoebiusMap:
    """Cross-ratio map sending z1, z2, z3 to 0, 1, infinity."""
    if _is_inf(z1):
        return MoebiusMap(0, z2 - z3, 1, -z3)
    if _is_inf(z2):
        return MoebiusMap(1, -z1, 1, -z3)
    if _is_inf(z3):
        return MoebiusMap(1, -z1, 0, z2 - z1)
    return MoebiusMap(z2 - z3, -z1 * (z2 - z3), z2 - z1, -z3 * (z2 - z1))


def three_point_map(source: tuple, target: tuple) -> MoebiusMap:
    """The unique Moebius map taking three distinct points to three distinct points."""
    try:
        s = _to_zero_one_infinity(*source)
        t = _to_zero_one_infinity(*target)
    except DegenerateMatrixError as e:
        raise GeometryError("three_point_map needs three distinct points on each side") from e
    return t.inverse() @ s


def apply(m: MoebiusMap, z: ExtendedComplex) -> ExtendedComplex:
    """Moebius action on the extended plane."""
    if _is_inf(z):
        return INF if m.c == 0 else m.a / m.c
    den = m.c * z + m.d
    if den == 0:
        return INF
    return (m.a * z + m.b) / den


def classify(m: MoebiusMap, tol: float = 1e-12) -> Classification:
    """Classify by the normalized trace.

    For hyperbolic and loxodromic maps the translation length is the real part
    of the complex length, ``|tr| = 2 cosh(l/2)`` in the real case.
    """
    if m.is_identity():
        raise GeometryError("no classification for the identity")
    tr = m.trace()
    if abs(tr.imag) > tol * max(1.0, abs(tr)):
        length = 2.0 * abs(cmath.acosh(tr / 2).real)
        return Classification(MoebiusKind.LOXODROMIC, length)
    t = abs(tr.real)
    if abs(t - 2.0) <= tol * 2:
        return Classification(MoebiusKind.PARABOLIC, 0.0)
    if t < 2.0:
        return Classification(MoebiusKind.ELLIPTIC, 0.0)
    # largest eigenvalue, avoids acosh cancellation close to 2
    lam = (t + math.sqrt(t * t - 4.0)) / 2.0
    return Classification(MoebiusKind.HYPERBOLIC, 2.0 * math.log(lam))


@dataclass(frozen=True)
class HPoint:
    """Point of the upper half-plane with metric |dz|/y."""

    x: float
    y: float

    def __post_init__(self):
        if not self.y > 0:
            raise GeometryError(f"y={self.y} is not in the upper half-plane")

    @classmethod
    def from_complex(cls, z: complex) -> "HPoint":
        return cls(z.real, z.imag)

    @property
    def z(self) -> complex:
        return complex(self.x, self.y)

    def moved_by(self, m: MoebiusMap) -> "HPoint":
        w = apply(m, self.z)
        if _is_inf(w):
            raise GeometryError("point mapped to infinity")
        return HPoint.from_complex(w)


def hyp_distance(p: HPoint, q: HPoint) -> float:
    return 2.0 * math.asinh(abs(p.z - q.z) / (2.0 * math.sqrt(p.y * q.y)))


@dataclass(frozen=True)
class Geodesic:
    """Complete geodesic given by its two ideal endpoints."""

    start: float | _Infinity
    end: float | _Infinity

    def __post_init__(self):
        if self.start is self.end or (not _is_inf(self.start) and not _is_inf(self.end) and self.start == self.end):
            raise GeometryError("geodesic endpoints must be distinct")

    @property
    def endpoints(self) -> set:
        return {self.start, self.end}

    def contains(self, p: HPoint, tol: float = 1e-9) -> bool:
        if _is_inf(self.start) or _is_inf(self.end):
            foot = self.end if _is_inf(self.start) else self.start
            return abs(p.x - foot) <= tol
        center = (self.start + self.end) / 2
        radius = abs(self.end - self.start) / 2
        return abs(abs(p.z - center) - radius) <= tol * max(1.0, radius)


@dataclass(frozen=True)
class Horocycle:
    """Horocycle centered at a boundary point.

    ``level`` is the height for center infinity and the Euclidean diameter
    otherwise; larger diameters are nested outside smaller ones.
    """

    center: float | _Infinity
    level: float

    def __post_init__(self):
        if not self.level > 0:
            raise GeometryError("horocycle level must be positive")

    def contains(self, p: HPoint, tol: float = 1e-9) -> bool:
        if _is_inf(self.center):
            return abs(p.y - self.level) <= tol * max(1.0, self.level)
        r = self.level / 2
        return abs(abs(p.z - complex(self.center, r)) - r) <= tol * max(1.0, r)

    def encloses(self, p: HPoint) -> bool:
        """True for points inside the horoball bounded by this horocycle."""
        if _is_inf(self.center):
            return p.y > self.level
        r = self.level / 2
        return abs(p.z - complex(self.center, r)) < r

    def tangent_to(self, other: "Horocycle", tol: float = 1e-9) -> bool:
        if _is_inf(self.center) and _is_inf(other.center):
            return False
        if _is_inf(other.center):
            return other.tangent_to(self, tol)
        if _is_inf(self.center):
            return abs(other.level - self.level) <= tol * max(1.0, self.level)
        # circles of diameters d1, d2 resting on the axis touch iff (a - b)^2 = d1 d2
        gap = (self.center - other.center) ** 2
        return abs(gap - self.level * other.level) <= tol * max(1.0, gap)

    def moved_by(self, m: MoebiusMap) -> "Horocycle":
        if _is_inf(self.center):
            point = HPoint(0.0, self.level)
        else:
            point = HPoint(self.center, self.level)
        center = apply(m, self.center if not _is_inf(self.center) else INF)
        center = center if _is_inf(center) else center.real
        return horocycle_at(center, point.moved_by(m))


def geodesic_between(p: HPoint, q: HPoint) -> Geodesic:
    if p == q:
        raise GeometryError("geodesic_between needs two distinct points")
    if p.x == q.x:
        return Geodesic(p.x, INF)
    c = (q.x**2 + q.y**2 - p.x**2 - p.y**2) / (2.0 * (q.x - p.x))
    r = math.hypot(p.x - c, p.y)
    return Geodesic(c - r, c + r)


def horocycle_at(center: float | _Infinity, through: HPoint) -> Horocycle:
    if _is_inf(center):
        return Horocycle(INF, through.y)
    radius = ((through.x - center) ** 2 + through.y**2) / (2.0 * through.y)
    return Horocycle(center, 2.0 * radius)
