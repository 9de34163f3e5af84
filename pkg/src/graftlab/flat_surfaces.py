"""Half-translation surfaces glued from Euclidean polygons.

Polygons are listed counterclockwise; edge ``e`` of a polygon runs from vertex
``e`` to vertex ``e + 1``. A gluing identifies vertex ``i`` of the source edge
with vertex ``j + 1`` of the target edge, by a translation (edge vectors
opposite) or by ``z -> -z + c`` (edge vectors equal).

Coordinates are exact ``QuadraticIrrational`` values so that flow tracing and
Rauzy-Veech comparisons never round; stretching by ``exp(t)`` switches a
surface to floats.
"""

import math
import string
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from functools import cached_property

from graftlab.errors import GeometryError, SaddleConnectionError, SurfaceValidationError
from graftlab.logging import logger
from graftlab.quadratic import QuadraticIrrational, as_quadratic, parse_scalar
from graftlab.traintracks import RauzyMove, SplitStep, TrainTrack, WeightVector, rauzy_permutation_step

__all__ = [
    "GOLDEN_DIRECTION",
    "ConePoint",
    "FatTraintrackDecomposition",
    "Gluing",
    "GluingKind",
    "HalfTranslationSurface",
    "Hexagon",
    "IntervalExchange",
    "LinearFoliation",
    "PolygonalDecomposition",
    "ShrunkRectangle",
    "VerticalTree",
    "build_surface",
    "expected_tripod_count",
    "first_return_iet",
    "foliation_length",
    "golden_l_shape",
    "polygonal_decomposition",
    "rauzy_step",
    "regular_octagon",
    "scaled",
    "sheared",
    "split",
    "square_torus",
    "stretch",
    "stretch_by",
    "surface_from_json",
    "surface_to_json",
    "teichmuller_normalize",
    "traintrack_decomposition",
]

Coord = QuadraticIrrational | float
Vec = tuple[Coord, Coord]

FLOAT_TOL = 1e-9
ANGLE_TOL = 1e-9
MAX_CROSSINGS = 100_000

PHI = QuadraticIrrational(Fraction(1, 2), Fraction(1, 2), 5)
GOLDEN_DIRECTION: Vec = (as_quadratic(1), PHI)


def _is_zero(v: Coord) -> bool:
    if isinstance(v, float):
        return abs(v) <= FLOAT_TOL
    return v == 0


def _sub(a: Vec, b: Vec) -> Vec:
    return (a[0] - b[0], a[1] - b[1])


def _add(a: Vec, b: Vec) -> Vec:
    return (a[0] + b[0], a[1] + b[1])


def _cross(a: Vec, b: Vec) -> Coord:
    return a[0] * b[1] - a[1] * b[0]


def _dot(a: Vec, b: Vec) -> Coord:
    return a[0] * b[0] + a[1] * b[1]


def _fvec(a: Vec) -> tuple[float, float]:
    return (float(a[0]), float(a[1]))


def _coerce(polygons: Iterable[Iterable[Sequence]]) -> tuple[tuple[Vec, ...], ...]:
    """Exact coordinates unless any coordinate is a float."""
    raw = [[tuple(p) for p in poly] for poly in polygons]
    if any(isinstance(c, float) for poly in raw for p in poly for c in p):
        return tuple(tuple((float(x), float(y)) for x, y in poly) for poly in raw)
    return tuple(tuple((as_quadratic(x), as_quadratic(y)) for x, y in poly) for poly in raw)


class GluingKind(str, Enum):
    TRANSLATION = "translation"
    FLIP = "flip"


@dataclass(frozen=True)
class Gluing:
    source: tuple[int, int]
    target: tuple[int, int]
    kind: GluingKind = GluingKind.TRANSLATION


@dataclass(frozen=True)
class ConePoint:
    """Vertex class with its corners in cyclic link order; the angle is ``multiple * pi``."""

    corners: tuple[tuple[int, int], ...]
    multiple: int

    @property
    def angle(self) -> float:
        return self.multiple * math.pi

    @property
    def singular(self) -> bool:
        return self.multiple >= 3


@dataclass(frozen=True)
class LinearFoliation:
    """Foliation by parallel lines in ``direction``; transverse measure is Euclidean."""

    direction: tuple[float, float] = (0.0, 1.0)


@dataclass(frozen=True)
class HalfTranslationSurface:
    polygons: tuple[tuple[Vec, ...], ...]
    gluings: tuple[Gluing, ...]
    cone_points: tuple[ConePoint, ...]
    genus: int
    area: Coord
    marked: tuple[tuple[int, int], ...] = ()
    _partners: dict = field(default_factory=dict, repr=False, compare=False)

    @property
    def singular_points(self) -> tuple[ConePoint, ...]:
        return tuple(c for c in self.cone_points if c.singular)

    @property
    def is_exact(self) -> bool:
        return not isinstance(self.polygons[0][0][0], float)

    @property
    def is_translation_surface(self) -> bool:
        return all(g.kind is GluingKind.TRANSLATION for g in self.gluings)

    def vertex(self, p: int, i: int) -> Vec:
        poly = self.polygons[p]
        return poly[i % len(poly)]

    def edge_vector(self, p: int, e: int) -> Vec:
        return _sub(self.vertex(p, e + 1), self.vertex(p, e))

    def partner(self, p: int, e: int) -> tuple[int, int]:
        return self._partners[(p, e)]

    @cached_property
    def _class_of(self) -> dict[tuple[int, int], int]:
        return {corner: k for k, cone in enumerate(self.cone_points) for corner in cone.corners}

    def vertex_class(self, p: int, i: int) -> int:
        return self._class_of[(p, i % len(self.polygons[p]))]

    def edge_lengths(self) -> list[float]:
        return [math.hypot(*_fvec(self.edge_vector(p, e))) for p, poly in enumerate(self.polygons) for e in range(len(poly))]


def _signed_area(poly: Sequence[Vec]) -> Coord:
    total = poly[0][0] * 0
    for a, b in zip(poly, poly[1:] + poly[:1], strict=True):
        total = total + _cross(a, b)
    return total / 2


def _corner_angle(poly: Sequence[Vec], i: int) -> float:
    v = _fvec(poly[i])
    nxt = _fvec(poly[(i + 1) % len(poly)])
    prv = _fvec(poly[i - 1])
    d1 = (nxt[0] - v[0], nxt[1] - v[1])
    d2 = (prv[0] - v[0], prv[1] - v[1])
    angle = math.atan2(d1[0] * d2[1] - d1[1] * d2[0], d1[0] * d2[0] + d1[1] * d2[1])
    return angle if angle > 0 else angle + 2 * math.pi


def build_surface(
    polygons: Iterable[Iterable[Sequence]],
    gluings: Iterable[Gluing],
    singular: Iterable[tuple[int, int]] = (),
) -> HalfTranslationSurface:
    """Validate polygons and gluings and compute cone points, genus and area."""
    polys = _coerce(polygons)
    glue = tuple(gluings)
    issues: list[str] = []

    for p, poly in enumerate(polys):
        if len(poly) < 3:
            issues.append(f"polygon {p} has fewer than three vertices")
        elif not _signed_area(list(poly)) > 0:
            issues.append(f"polygon {p} is not counterclockwise")
    if issues:
        raise SurfaceValidationError(issues)

    edges = {(p, e) for p, poly in enumerate(polys) for e in range(len(poly))}
    partners: dict[tuple[int, int], tuple[int, int]] = {}
    for g in glue:
        for end in (g.source, g.target):
            if end not in edges:
                issues.append(f"gluing {g.source}->{g.target} names missing edge {end}")
            elif end in partners:
                issues.append(f"edge {end} is glued twice")
        if g.source == g.target:
            issues.append(f"edge {g.source} is glued to itself")
        partners[g.source] = g.target
        partners[g.target] = g.source
    issues += [f"edge {e} is not glued" for e in sorted(edges - partners.keys())]
    if issues:
        raise SurfaceValidationError(issues)

    def vec(p: int, e: int) -> Vec:
        poly = polys[p]
        return _sub(poly[(e + 1) % len(poly)], poly[e])

    for g in glue:
        a, b = vec(*g.source), vec(*g.target)
        expected = b if g.kind is GluingKind.FLIP else (-b[0], -b[1])
        if not (_is_zero(a[0] - expected[0]) and _is_zero(a[1] - expected[1])):
            issues.append(f"edges {g.source} and {g.target} are not congruent for a {g.kind.value} gluing")
    if issues:
        raise SurfaceValidationError(issues)

    cones = _link_cycles(polys, partners, issues)
    marked = tuple(tuple(m) for m in singular)
    class_of = {corner: k for k, cone in enumerate(cones) for corner in cone.corners}
    for m in marked:
        k = class_of.get((m[0], m[1] % max(1, len(polys[m[0]]))) if 0 <= m[0] < len(polys) else None)
        if k is None:
            issues.append(f"marked vertex {m} does not exist")
        elif not cones[k].singular:
            issues.append(f"marked vertex {m} has cone angle {cones[k].multiple}pi, not a singular point")

    chi = len(cones) - len(glue) + len(polys)
    if chi % 2 or chi > 2:
        issues.append(f"Euler characteristic {chi} is not that of a closed orientable surface")
    genus = (2 - chi) // 2
    if sum(c.multiple - 2 for c in cones) != 4 * genus - 4:
        issues.append("cone angles violate Gauss-Bonnet")
    if issues:
        raise SurfaceValidationError(issues)

    area = sum((_signed_area(list(poly)) for poly in polys[1:]), _signed_area(list(polys[0])))
    surface = HalfTranslationSurface(polys, glue, cones, genus, area, marked)
    surface._partners.update(partners)
    logger.debug("built surface", genus=genus, cone_points=[c.multiple for c in cones])
    return surface


def _link_cycles(
    polys: tuple[tuple[Vec, ...], ...], partners: Mapping[tuple[int, int], tuple[int, int]], issues: list[str]
) -> tuple[ConePoint, ...]:
    """Walk around each vertex: leaving corner ``(p, i)`` through edge ``i`` lands at corner ``(q, j + 1)``."""
    seen: set[tuple[int, int]] = set()
    cones = []
    for p, poly in enumerate(polys):
        for i in range(len(poly)):
            if (p, i) in seen:
                continue
            corners = []
            corner = (p, i)
            while corner not in seen:
                seen.add(corner)
                corners.append(corner)
                q, j = partners[corner]
                corner = (q, (j + 1) % len(polys[q]))
            total = sum(_corner_angle(polys[c[0]], c[1]) for c in corners)
            multiple = round(total / math.pi)
            if abs(total - multiple * math.pi) > ANGLE_TOL * max(1, multiple):
                issues.append(f"cone angle {total:.12g} at corner {(p, i)} is not a multiple of pi")
            elif multiple < 2:
                issues.append(f"cone angle {multiple}pi at corner {(p, i)} is below 2pi")
            cones.append(ConePoint(tuple(corners), multiple))
    return tuple(cones)


def foliation_length(s: HalfTranslationSurface, v: LinearFoliation | None = None) -> float:
    """Total transverse measure of a linear foliation, which is the area."""
    return float(s.area)


def _mapped(s: HalfTranslationSurface, fn) -> HalfTranslationSurface:
    polys = [[fn(p) for p in poly] for poly in s.polygons]
    return build_surface(polys, s.gluings, s.marked)


def stretch(s: HalfTranslationSurface, t: float) -> HalfTranslationSurface:
    """Multiply horizontal coordinates by ``exp(t)``."""
    if t == 0:
        return s
    factor = math.exp(t)
    return _mapped(s, lambda p: (float(p[0]) * factor, float(p[1])))


def stretch_by(s: HalfTranslationSurface, factor) -> HalfTranslationSurface:
    """Exact horizontal stretch by a positive factor."""
    if isinstance(factor, float) or not s.is_exact:
        return _mapped(s, lambda p: (float(p[0]) * float(factor), float(p[1])))
    factor = as_quadratic(factor)
    if not factor > 0:
        raise GeometryError("stretch factor must be positive")
    return _mapped(s, lambda p: (p[0] * factor, p[1]))


def teichmuller_normalize(s: HalfTranslationSurface, t: float) -> HalfTranslationSurface:
    """Area-preserving Teichmueller map: ``exp(t/2)`` horizontally, ``exp(-t/2)`` vertically."""
    a, b = math.exp(t / 2), math.exp(-t / 2)
    return _mapped(s, lambda p: (float(p[0]) * a, float(p[1]) * b))


def scaled(s: HalfTranslationSurface, factor) -> HalfTranslationSurface:
    if isinstance(factor, float) or not s.is_exact:
        return _mapped(s, lambda p: (float(p[0]) * float(factor), float(p[1]) * float(factor)))
    factor = as_quadratic(factor)
    return _mapped(s, lambda p: (p[0] * factor, p[1] * factor))


def sheared(s: HalfTranslationSurface, direction: Vec) -> HalfTranslationSurface:
    """Apply the linear map taking ``direction`` to the vertical unit vector and fixing horizontals."""
    vx, vy = direction
    if not s.is_exact:
        vx, vy = float(vx), float(vy)
    else:
        vx, vy = as_quadratic(vx), as_quadratic(vy)
    if not vy > 0:
        raise GeometryError("direction must point upward")
    a, b = -vx / vy, 1 / vy
    try:
        return _mapped(s, lambda p: (p[0] + a * p[1], b * p[1]))
    except ValueError as e:
        raise GeometryError(f"direction and surface coordinates live in different fields: {e}") from e


def _square(x: int, y: int) -> list[tuple[int, int]]:
    return [(x, y), (x + 1, y), (x + 1, y + 1), (x, y + 1)]


def square_torus() -> HalfTranslationSurface:
    return build_surface([_square(0, 0)], [Gluing((0, 0), (0, 2)), Gluing((0, 1), (0, 3))])


def golden_l_shape() -> HalfTranslationSurface:
    """Three unit squares in an L; one cone point of angle 6pi."""
    squares = [_square(0, 0), _square(1, 0), _square(0, 1)]
    gluings = [
        Gluing((0, 1), (1, 3)),
        Gluing((0, 2), (2, 0)),
        Gluing((1, 1), (0, 3)),
        Gluing((2, 1), (2, 3)),
        Gluing((1, 2), (1, 0)),
        Gluing((2, 2), (0, 0)),
    ]
    return build_surface(squares, gluings, singular=[(0, 0)])


def regular_octagon() -> HalfTranslationSurface:
    """Regular octagon of side one with opposite sides glued."""
    h = QuadraticIrrational(0, Fraction(1, 2), 2)
    one = as_quadratic(1)
    zero = as_quadratic(0)
    points = [
        (zero, zero),
        (one, zero),
        (one + h, h),
        (one + h, one + h),
        (one, one + 2 * h),
        (zero, one + 2 * h),
        (-h, one + h),
        (-h, h),
    ]
    return build_surface([points], [Gluing((0, e), (0, e + 4)) for e in range(4)], singular=[(0, 0)])


def _scalar_json(v: Coord):
    return v if isinstance(v, float) else v.to_json()


def surface_from_json(raw: Mapping) -> HalfTranslationSurface:
    from graftlab.models.inputs import SurfaceSpec

    spec = SurfaceSpec.model_validate(raw)
    polygons = [[(parse_scalar(x), parse_scalar(y)) for x, y in poly] for poly in spec.polygons]
    gluings = [Gluing(tuple(g.source), tuple(g.target), GluingKind(g.kind)) for g in spec.gluings]
    return build_surface(polygons, gluings, [tuple(v) for v in spec.singular])


def surface_to_json(s: HalfTranslationSurface) -> dict:
    return {
        "polygons": [[[_scalar_json(x), _scalar_json(y)] for x, y in poly] for poly in s.polygons],
        "gluings": [{"from": list(g.source), "to": list(g.target), "kind": g.kind.value} for g in s.gluings],
        "singular": [list(m) for m in s.marked],
    }


def expected_tripod_count(genus: int) -> int:
    return 2 * (2 * genus - 2)


# Vertical flow, first return maps and train track decompositions.
# Everything below works on translation surfaces with convex polygons, after
# shearing the chosen direction to the vertical.


@dataclass(frozen=True)
class _Hit:
    polygon: int
    edge: int | None
    vertex: int | None
    point: Vec
    length: Coord


def _exit(poly: Sequence[Vec], point: Vec, upward: bool, skip: tuple[str, int] | None) -> _Hit:
    """Where the vertical ray from ``point`` leaves a convex polygon."""
    x, y = point
    n = len(poly)
    best: tuple[Coord, int] | None = None
    for e in range(n):
        if skip == ("edge", e) or (skip is not None and skip[0] == "vertex" and skip[1] in (e, (e + 1) % n)):
            continue
        (px, py), (qx, qy) = poly[e], poly[(e + 1) % n]
        if _is_zero(px - qx):
            if _is_zero(x - px):
                top = e if (py > qy) == upward else (e + 1) % n
                return _Hit(-1, None, top, poly[top], abs(poly[top][1] - y))
            continue
        lo, hi = (px, qx) if px < qx else (qx, px)
        if x < lo or x > hi:
            continue
        yh = py + (x - px) * (qy - py) / (qx - px)
        if (upward and yh > y) or (not upward and yh < y):
            if best is None or (yh < best[0] if upward else yh > best[0]):
                best = (yh, e)
    if best is None:
        raise GeometryError(f"vertical ray from {point} does not leave the polygon")
    yh, e = best
    for i in (e, (e + 1) % n):
        if _is_zero(poly[i][0] - x):
            return _Hit(-1, None, i, poly[i], abs(yh - y))
    return _Hit(-1, e, None, (x, yh), abs(yh - y))


def _trace(
    s: HalfTranslationSurface,
    polygon: int,
    point: Vec,
    upward: bool,
    skip: tuple[str, int] | None,
    transversal: tuple[int, int],
    limit: Coord,
) -> _Hit:
    """Follow the vertical flow until it meets ``transversal`` within ``limit`` or a vertex.

    The returned ``point`` is in the coordinates of the transversal's polygon
    when the transversal is reached.
    """
    p0, i0 = transversal
    origin = s.vertex(p0, i0)
    length = point[1] * 0
    p = polygon
    for _ in range(MAX_CROSSINGS):
        hit = _exit(s.polygons[p], point, upward, skip)
        length = length + hit.length
        if hit.vertex is not None:
            return _Hit(p, None, hit.vertex, hit.point, length)
        e = hit.edge
        if not upward and (p, e) == transversal:
            t = hit.point[0] - origin[0]
            if t < limit:
                return _Hit(p, e, None, hit.point, length)
        q, f = s.partner(p, e)
        # vertex e of p lands on vertex f + 1 of q
        point = _add(_sub(hit.point, s.vertex(p, e)), s.vertex(q, f + 1))
        p, skip = q, ("edge", f)
        if upward and (q, f) == transversal:
            t = point[0] - origin[0]
            if t < limit:
                return _Hit(q, f, None, point, length)
    raise GeometryError("vertical flow did not reach the transversal")


def _corner_prongs(s: HalfTranslationSurface, p: int, i: int) -> list[bool]:
    """Vertical directions (True for up) strictly inside the corner ``(p, i)``."""
    v = s.vertex(p, i)
    d1 = _sub(s.vertex(p, i + 1), v)
    d2 = _sub(s.vertex(p, i - 1), v)
    prongs = []
    for upward in (True, False):
        direction = (v[0] * 0, v[0] * 0 + (1 if upward else -1))
        c1, c2 = _cross(d1, direction), _cross(direction, d2)
        for d, c in ((d1, c1), (d2, c2)):
            if _is_zero(c) and _dot(d, direction) > 0:
                raise SaddleConnectionError("polygon edge is parallel to the flow", ((p, i), (p, i + 1 if d is d1 else i - 1)))
        if c1 > 0 and c2 > 0:
            prongs.append(upward)
    return prongs


def _check_flowable(s: HalfTranslationSurface) -> None:
    if not s.is_translation_surface:
        raise GeometryError("flow decomposition needs a translation surface (no flip gluings)")
    if not s.singular_points:
        raise GeometryError("no singular points; decomposition undefined")
    if len(s.singular_points) != len(s.cone_points):
        raise GeometryError("flow decomposition needs every polygon vertex to be a singular point")
    for p, poly in enumerate(s.polygons):
        for i in range(len(poly)):
            d1 = _sub(s.vertex(p, i + 1), s.vertex(p, i))
            d2 = _sub(s.vertex(p, i - 1), s.vertex(p, i))
            if not _cross(d1, d2) > 0:
                raise GeometryError(f"polygon {p} is not strictly convex at vertex {i}")


def _default_transversal(s: HalfTranslationSurface) -> tuple[int, int]:
    for p, poly in enumerate(s.polygons):
        for e in range(len(poly)):
            vec = s.edge_vector(p, e)
            if _is_zero(vec[1]) and vec[0] > 0 and s.cone_points[s.vertex_class(p, e)].singular and s.cone_points[s.vertex_class(p, e + 1)].singular:
                return (p, e)
    raise GeometryError("no horizontal edge between singular points to use as transversal")


@dataclass(frozen=True)
class IntervalExchange:
    """Interval exchange with return heights; rectangle ``a`` has width ``lengths[a]``."""

    top: tuple[str, ...]
    bottom: tuple[str, ...]
    lengths: dict[str, Coord]
    heights: dict[str, Coord]

    @property
    def total_length(self) -> Coord:
        return sum((self.lengths[a] for a in self.top[1:]), self.lengths[self.top[0]])

    @property
    def area(self) -> Coord:
        return sum((self.lengths[a] * self.heights[a] for a in self.top[1:]), self.lengths[self.top[0]] * self.heights[self.top[0]])

    @property
    def min_height(self) -> Coord:
        return min(self.heights.values())

    @property
    def min_width(self) -> Coord:
        return min(self.lengths.values())


def rauzy_step(iet: IntervalExchange) -> tuple[IntervalExchange, RauzyMove]:
    """One Rauzy-Veech move: the longer of the two last intervals wins."""
    alpha, beta = iet.top[-1], iet.bottom[-1]
    la, lb = iet.lengths[alpha], iet.lengths[beta]
    if la == lb:
        raise SaddleConnectionError("last intervals have equal length", (alpha, beta))
    top_wins = la > lb
    top, bottom, move = rauzy_permutation_step(iet.top, iet.bottom, top_wins)
    lengths, heights = dict(iet.lengths), dict(iet.heights)
    lengths[move.winner] = lengths[move.winner] - lengths[move.loser]
    heights[move.loser] = heights[move.loser] + heights[move.winner]
    return IntervalExchange(top, bottom, lengths, heights), move


def first_return_iet(
    s: HalfTranslationSurface, direction: Vec = GOLDEN_DIRECTION, transversal: tuple[int, int] | None = None
) -> tuple[HalfTranslationSurface, tuple[int, int], IntervalExchange]:
    """First return of the flow in ``direction`` to a horizontal edge.

    Returns the sheared surface on which the flow is vertical, the transversal
    edge and the interval exchange with its return heights.
    """
    _check_flowable(s)
    flat = sheared(s, direction)
    _check_flowable(flat)
    transversal = transversal or _default_transversal(flat)
    p0, i0 = transversal
    origin = flat.vertex(p0, i0)
    width = flat.edge_vector(p0, i0)[0]

    cuts = []
    for cone in flat.singular_points:
        for p, i in cone.corners:
            if False in _corner_prongs(flat, p, i):
                hit = _trace(flat, p, flat.vertex(p, i), False, ("vertex", i), transversal, width)
                if hit.vertex is not None:
                    raise SaddleConnectionError("separatrix meets a vertex", ((p, i), (hit.polygon, hit.vertex), float(hit.length)))
                t = hit.point[0] - origin[0]
                if _is_zero(t) or _is_zero(t - width):
                    raise SaddleConnectionError("separatrix meets an end of the transversal", ((p, i), transversal))
                cuts.append(t)
    cuts = sorted(cuts)
    bounds = [width * 0, *cuts, width]
    letters = string.ascii_uppercase[: len(bounds) - 1]

    lengths, heights, images = {}, {}, {}
    for a, lo, hi in zip(letters, bounds, bounds[1:], strict=False):
        mid = (lo + hi) / 2
        hit = _trace(flat, p0, (origin[0] + mid, origin[1]), True, ("edge", i0), transversal, width)
        if hit.vertex is not None:
            raise GeometryError("generic point of the transversal ran into a vertex")
        lengths[a] = hi - lo
        heights[a] = hit.length
        images[a] = lo + (hit.point[0] - origin[0] - mid)
    bottom = tuple(sorted(letters, key=lambda a: float(images[a])))
    logger.debug("first return map", intervals=len(letters), bottom="".join(bottom))
    return flat, transversal, IntervalExchange(tuple(letters), bottom, lengths, heights)


@dataclass(frozen=True)
class VerticalTree:
    """Vertical separatrices of one singular point, cut at the transversal."""

    cone: int
    prong_lengths: tuple[Coord, ...]
    radius: Coord

    @property
    def tripods(self) -> int:
        return len(self.prong_lengths) - 2


def _vertical_trees(flat: HalfTranslationSurface, transversal: tuple[int, int], limit: Coord, radius: Coord) -> tuple[VerticalTree, ...]:
    trees = []
    for k, cone in enumerate(flat.cone_points):
        if not cone.singular:
            continue
        prongs = []
        for p, i in cone.corners:
            for upward in _corner_prongs(flat, p, i):
                hit = _trace(flat, p, flat.vertex(p, i), upward, ("vertex", i), transversal, limit)
                if hit.vertex is not None:
                    raise SaddleConnectionError("separatrix meets a vertex", ((p, i), (hit.polygon, hit.vertex), float(hit.length)))
                prongs.append(hit.length)
        trees.append(VerticalTree(k, tuple(prongs), radius))
    return tuple(trees)


@dataclass(frozen=True)
class FatTraintrackDecomposition:
    """Rectangles of the first return map together with the vertical trees bounding them."""

    surface: HalfTranslationSurface
    flat: HalfTranslationSurface
    direction: Vec
    transversal: tuple[int, int]
    iet: IntervalExchange
    radius: Coord
    trees: tuple[VerticalTree, ...]
    step: SplitStep | None = None

    @cached_property
    def track(self) -> TrainTrack:
        return TrainTrack.from_permutation(self.iet.top, self.iet.bottom)

    @property
    def weights(self) -> WeightVector:
        """Widths of the carried vertical foliation on the track."""
        return self.track.extend_letters(self.iet.lengths)

    @property
    def tripod_count(self) -> int:
        return sum(t.tripods for t in self.trees)

    @property
    def min_branch_length(self) -> Coord:
        return self.iet.min_height

    def rectangles(self) -> list[tuple[str, Coord, Coord]]:
        return [(a, self.iet.lengths[a], self.iet.heights[a]) for a in self.iet.top]


def _decomposition(**kw) -> FatTraintrackDecomposition:
    iet = kw["iet"]
    trees = _vertical_trees(kw["flat"], kw["transversal"], iet.total_length, kw["radius"])
    return FatTraintrackDecomposition(trees=trees, **kw)


def traintrack_decomposition(
    s: HalfTranslationSurface,
    direction: Vec = GOLDEN_DIRECTION,
    radius=0,
    transversal: tuple[int, int] | None = None,
    max_steps: int = 10_000,
) -> FatTraintrackDecomposition:
    """First decomposition whose rectangles are all at least ``radius`` tall."""
    flat, transversal, iet = first_return_iet(s, direction, transversal)
    steps = 0
    while iet.min_height < radius:
        iet, _ = rauzy_step(iet)
        steps += 1
        if steps > max_steps:
            raise GeometryError(f"radius {radius} not reached after {max_steps} Rauzy-Veech steps")
    logger.debug("decomposition ready", steps=steps, min_height=float(iet.min_height))
    return _decomposition(surface=s, flat=flat, direction=direction, transversal=transversal, iet=iet, radius=radius)


def split(d: FatTraintrackDecomposition, max_steps: int = 10_000) -> FatTraintrackDecomposition:
    """Advance to the first decomposition whose shortest rectangle is strictly taller."""
    iet, moves = d.iet, []
    while not iet.min_height > d.iet.min_height:
        iet, move = rauzy_step(iet)
        moves.append(move)
        if len(moves) > max_steps:
            raise GeometryError(f"no split within {max_steps} Rauzy-Veech steps")
    target = TrainTrack.from_permutation(iet.top, iet.bottom)
    step = SplitStep(d.track, target, tuple(moves))
    return _decomposition(
        surface=d.surface, flat=d.flat, direction=d.direction, transversal=d.transversal, iet=iet, radius=iet.min_height, step=step
    )


@dataclass(frozen=True)
class Hexagon:
    """Horizontal neighborhood of one tripod; internal edges of a split star have length zero."""

    cone: int
    prong_lengths: tuple[Coord, ...]
    horizontal_edge_length: Coord

    @property
    def area(self) -> Coord:
        return self.horizontal_edge_length * sum(self.prong_lengths[1:], self.prong_lengths[0])


@dataclass(frozen=True)
class ShrunkRectangle:
    letter: str
    width: Coord
    height: Coord

    @property
    def area(self) -> Coord:
        return self.width * self.height


@dataclass(frozen=True)
class PolygonalDecomposition:
    hexagons: tuple[Hexagon, ...]
    rectangles: tuple[ShrunkRectangle, ...]
    min_width: Coord

    @property
    def horizontal_edge_length(self) -> Coord:
        return 2 * self.min_width / 3

    @property
    def area(self) -> Coord:
        parts = [h.area for h in self.hexagons] + [r.area for r in self.rectangles]
        return sum(parts[1:], parts[0])


def _caterpillar(prongs: Sequence[Coord]) -> list[tuple[Coord, ...]]:
    """Split a star with ``k`` prongs into ``k - 2`` trivalent vertices."""
    k = len(prongs)
    if k == 3:
        return [tuple(prongs)]
    return [tuple(prongs[:2])] + [(prongs[i],) for i in range(2, k - 2)] + [tuple(prongs[k - 2 :])]


def _check_strips(rectangles: Iterable[ShrunkRectangle], min_width: Coord) -> None:
    """Each rectangle keeps at least ``min_width / 3`` between the hexagon strips on its two vertical sides."""
    gap = min_width / 3
    for r in rectangles:
        if r.width < gap and not math.isclose(float(r.width), float(gap), rel_tol=1e-12):
            raise GeometryError(
                f"hexagon strips on rectangle {r.letter!r} are not disjoint: {float(r.width):.3g} left between them"
            )


def polygonal_decomposition(d: FatTraintrackDecomposition) -> PolygonalDecomposition:
    """Hexagons around the tripods and the rectangles left between them.

    Every vertical tree gets a horizontal neighborhood of a third of the
    narrowest width on each side, so each rectangle loses two thirds of it.
    """
    m = d.iet.min_width
    edge = 2 * m / 3
    hexagons = tuple(Hexagon(tree.cone, piece, edge) for tree in d.trees for piece in _caterpillar(tree.prong_lengths))
    rectangles = tuple(ShrunkRectangle(a, d.iet.lengths[a] - edge, d.iet.heights[a]) for a in d.iet.top)
    _check_strips(rectangles, m)
    return PolygonalDecomposition(hexagons, rectangles, m)
