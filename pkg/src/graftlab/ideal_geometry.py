"""Ideal triangles, their horocyclic foliations and hyperbolic rectangles.

Every triangle is handled in the model chart with vertices (0, 1, INF), whose
tangency horocycles are the line of height 1 and the two circles of
diameter 1 resting on 0 and 1. Vertex ``k`` is moved to infinity by the
rotation ``ROTATIONS[k]`` of the model triangle, so each per-vertex formula
is written once for the vertex at infinity.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from graftlab.errors import GeometryError
from graftlab.moebius import (
    INF,
    HPoint,
    Horocycle,
    MoebiusMap,
    apply,
    three_point_map,
)

__all__ = [
    "CENTER_HEIGHT_LOG",
    "HorocyclicLamination",
    "HorocyclicLeafParam",
    "HypRectangle",
    "IdealTriangle",
    "Tripod",
    "TripodPoint",
    "build_hyp_rectangle",
    "collapse_to_tripod",
    "horocyclic_lamination",
    "leaf_length",
    "mostly_horocyclic_leaf",
    "mostly_straight_leaf",
    "tripod_of",
]

MODEL_VERTICES = (0j, 1 + 0j, INF)
MODEL_CENTER = complex(0.5, math.sqrt(3) / 2)
# log-height of the model center; mostly-horocyclic leaves reach it at this u
CENTER_HEIGHT_LOG = math.log(math.sqrt(3) / 2)

ROTATIONS = (
    MoebiusMap(1, -1, 1, 0),  # z -> 1 - 1/z, vertex 0 to infinity
    MoebiusMap(0, 1, -1, 1),  # z -> 1/(1 - z), vertex 1 to infinity
    MoebiusMap.identity(),
)

TOL = 1e-9


def _boundary_key(v) -> tuple[int, float]:
    return (1, 0.0) if v is INF else (0, float(v))


@dataclass(frozen=True)
class IdealTriangle:
    """Ideal triangle with vertices stored in cyclic boundary order."""

    vertices: tuple
    chart: MoebiusMap = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if len(self.vertices) != 3:
            raise GeometryError("an ideal triangle has three vertices")
        verts = tuple(INF if v is INF else float(v.real if isinstance(v, complex) else v) for v in self.vertices)
        finite = [v for v in verts if v is not INF]
        if len(set(finite)) != len(finite) or len(finite) < 2:
            raise GeometryError(f"ideal vertices must be distinct, got {self.vertices!r}")
        verts = tuple(sorted(verts, key=_boundary_key))
        object.__setattr__(self, "vertices", verts)
        target = tuple(v if v is INF else complex(v) for v in verts)
        object.__setattr__(self, "chart", three_point_map(MODEL_VERTICES, target))

    @classmethod
    def model(cls) -> "IdealTriangle":
        return cls((0.0, 1.0, INF))

    def moved_by(self, m: MoebiusMap) -> "IdealTriangle":
        images = []
        for v in self.vertices:
            w = apply(m, v if v is INF else complex(v))
            images.append(w if w is INF else w.real)
        return IdealTriangle(tuple(images))

    def vertex_index(self, v) -> int:
        for k, w in enumerate(self.vertices):
            if (v is INF and w is INF) or (v is not INF and w is not INF and abs(w - v) <= TOL * max(1.0, abs(v))):
                return k
        raise GeometryError(f"{v!r} is not a vertex")

    def to_model(self, p: complex) -> complex:
        w = apply(self.chart.inverse(), p)
        if w is INF:
            raise GeometryError("point is an ideal vertex")
        return w

    def from_model(self, w: complex) -> complex:
        return apply(self.chart, w)

    def contains(self, p: complex, tol: float = TOL) -> bool:
        """Closed-triangle membership for interior points of the half-plane."""
        w = self.to_model(p)
        return -tol <= w.real <= 1 + tol and abs(w - 0.5) >= 0.5 - tol and w.imag > 0


@dataclass(frozen=True)
class HorocyclicLeafParam:
    vertex: int
    u: float

    def __post_init__(self):
        if self.vertex not in (0, 1, 2):
            raise GeometryError(f"vertex index {self.vertex} not in 0..2")


def leaf_length(p: HorocyclicLeafParam, base_length: float = 1.0) -> float:
    """Length ``base_length * exp(-u)`` of the horocyclic leaf ``u`` past tangency."""
    if p.u < 0:
        raise GeometryError(f"u={p.u} is outside the lamination support")
    return base_length * math.exp(-p.u)


def _vertex_chart(k: int) -> MoebiusMap:
    return ROTATIONS[k]


@dataclass(frozen=True)
class HorocyclicLamination:
    triangle: IdealTriangle
    tangency_horocycles: tuple[Horocycle, Horocycle, Horocycle]
    central_edge_length: float

    def leaf(self, p: HorocyclicLeafParam, samples: int = 33) -> list[complex]:
        """Sample points of the leaf arc, ordered from one edge to the other."""
        leaf_length(p)
        height = math.exp(p.u)
        back = self.triangle.chart @ _vertex_chart(p.vertex).inverse()
        return [apply(back, complex(x, height)) for x in np.linspace(0.0, 1.0, samples)]

    def in_central_region(self, p: complex) -> bool:
        return collapse_to_tripod(self.triangle, p).prong is None


def horocyclic_lamination(t: IdealTriangle) -> HorocyclicLamination:
    model = (Horocycle(0.0, 1.0), Horocycle(1.0, 1.0), Horocycle(INF, 1.0))
    horocycles = tuple(h.moved_by(t.chart) for h in model)
    return HorocyclicLamination(t, horocycles, leaf_length(HorocyclicLeafParam(2, 0.0)))


@dataclass(frozen=True)
class TripodPoint:
    """Point of a tripod: the vertex when ``prong`` is None, else ``u`` along it."""

    prong: int | None
    u: float = 0.0


@dataclass(frozen=True)
class Tripod:
    """Metric graph with three half-infinite prongs, optionally embedded in a triangle."""

    triangle: IdealTriangle | None = None

    @staticmethod
    def distance(p: TripodPoint, q: TripodPoint) -> float:
        if p.prong is None or q.prong is None or p.prong != q.prong:
            return p.u + q.u
        return abs(p.u - q.u)

    def prong_point(self, k: int, u: float) -> complex:
        """Point of the median from the center to vertex ``k`` at coordinate ``u``."""
        if self.triangle is None:
            raise GeometryError("abstract tripod has no embedding")
        w = apply(_vertex_chart(k).inverse(), complex(0.5, math.exp(u)))
        return self.triangle.from_model(w)

    @property
    def center(self) -> complex:
        if self.triangle is None:
            raise GeometryError("abstract tripod has no embedding")
        return self.triangle.from_model(MODEL_CENTER)


def tripod_of(t: IdealTriangle) -> Tripod:
    return Tripod(t)


def collapse_to_tripod(t: IdealTriangle, p: complex) -> TripodPoint:
    """Collapse each horocyclic leaf to a point and the central region to the vertex."""
    if not t.contains(p):
        raise GeometryError(f"{p!r} is outside the triangle {t.vertices!r}")
    w = t.to_model(p)
    for k in range(3):
        height = apply(_vertex_chart(k), w).imag
        if height >= 1.0:
            return TripodPoint(k, math.log(height))
    return TripodPoint(None, 0.0)


def _sector_half_width(height: float) -> float:
    # the vertex sector meets y = height between the arcs |z| = 1 and |z - 1| = 1
    return math.sqrt(max(0.0, 1.0 - height * height))


def mostly_horocyclic_leaf(t: IdealTriangle, vertex: int, u: float, samples: int = 33) -> list[complex]:
    """Leaf of the mostly-horocyclic foliation.

    For ``u >= 0`` this is the horocyclic leaf. Between the center height and
    the tangency horocycle the leaf is the horocyclic segment inside the
    vertex sector blended linearly with the geodesic chord on the same
    endpoints, with full weight on the chord at the center.
    """
    if u >= 0:
        return horocyclic_lamination(t).leaf(HorocyclicLeafParam(vertex, u), samples)
    if u < CENTER_HEIGHT_LOG:
        raise GeometryError(f"u={u} is below the central point of the triangle")
    height = math.exp(u)
    x1 = _sector_half_width(height)
    x2 = 1.0 - x1
    weight = u / CENTER_HEIGHT_LOG
    radius = math.hypot(0.5 - x1, height)
    theta1 = math.atan2(height, x1 - 0.5)
    theta2 = math.atan2(height, x2 - 0.5)
    back = t.chart @ _vertex_chart(vertex).inverse()
    points = []
    for s in np.linspace(0.0, 1.0, samples):
        horo = complex(x1 + s * (x2 - x1), height)
        theta = theta1 + s * (theta2 - theta1)
        chord = complex(0.5 + radius * math.cos(theta), radius * math.sin(theta))
        points.append(apply(back, (1 - weight) * horo + weight * chord))
    return points


def mostly_straight_leaf(t: IdealTriangle, edge: int, s: float, samples: int = 33) -> list[complex]:
    """Leaf of the mostly-straight foliation running along edge ``(edge, edge + 1)``.

    In the chart where the edge is ``x = 0`` the leaf is the vertical ray
    ``x = s`` above height 1, its image under ``z -> 1/conj(z)`` near the
    vertex 0, and the straight segment joining them across the central region.
    """
    if not 0 < s < 0.5:
        raise GeometryError(f"s={s} must lie in (0, 1/2)")
    back = t.chart @ _vertex_chart(edge).inverse()
    heights = np.exp(np.linspace(0.0, 4.0, samples))
    upper = [complex(s, y) for y in heights[::-1]]
    lower = [1 / complex(s, -y) for y in heights]
    joint = [upper[-1] + r * (lower[0] - upper[-1]) for r in np.linspace(0.0, 1.0, samples)[1:-1]]
    return [apply(back, w) for w in upper + joint + lower]


@dataclass(frozen=True)
class HypRectangle:
    """Rectangle between two vertical geodesics and two horocycles centered at infinity.

    ``width`` is the length of the bottom horocyclic edge.
    """

    base: HPoint
    length: float
    width: float

    def __post_init__(self):
        if not (self.length > 0 and self.width > 0):
            raise GeometryError("rectangle length and width must be positive")

    @property
    def euclidean_width(self) -> float:
        return self.width * self.base.y

    @property
    def top(self) -> float:
        return self.base.y * math.exp(self.length)

    def point(self, s: float, t: float) -> HPoint:
        """Point at horizontal fraction ``s`` and vertical fraction ``t``."""
        return HPoint(self.base.x + s * self.euclidean_width, self.base.y * math.exp(t * self.length))

    def vertical_edge_length(self) -> float:
        return self.length

    def horizontal_leaf_length(self, y: float) -> float:
        if not self.base.y <= y <= self.top * (1 + TOL):
            raise GeometryError(f"height {y} is outside the rectangle")
        return self.euclidean_width / y

    def corners(self) -> tuple[HPoint, HPoint, HPoint, HPoint]:
        return (self.point(0, 0), self.point(1, 0), self.point(1, 1), self.point(0, 1))


def build_hyp_rectangle(length: float, width: float, base: HPoint | None = None) -> HypRectangle:
    return HypRectangle(base or HPoint(0.0, 1.0), length, width)
