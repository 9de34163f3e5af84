"""Grafting hyperbolic annuli and surfaces along weighted geodesic loops.

An annulus ``H^2 / <z -> e^l z>`` is described in the logarithmic chart
``zeta = log z``: the strip ``0 < Im zeta < pi`` modulo ``zeta -> zeta + l``,
with the core geodesic at ``Im zeta = pi / 2``. Grafting by weight ``w`` cuts
the strip along the core and inserts a flat cylinder of height ``w``.

Surfaces are Fuchsian groups given by real generators and one relation;
grafting them yields metric reports, not uniformized Riemann surfaces.
"""

import math
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass, field
from functools import cached_property

from graftlab.errors import GeometryError
from graftlab.logging import logger
from graftlab.models import CylinderReport, FuchsianGroupSpec, MultiloopSpec, ThurstonMetricReport
from graftlab.moebius import INF, MoebiusKind, MoebiusMap, classify, three_point_map
from graftlab.schwarzian import HolonomyRep, annulus_differential, deck_monodromy, path_monodromy

__all__ = [
    "FuchsianSurface",
    "GraftedAnnulus",
    "HolonomyCheck",
    "HypAnnulus",
    "collar_width",
    "geodesic_length",
    "graft_annulus",
    "graft_surface",
    "grafting_ray_sample",
    "octagon_group",
    "preserves_holonomy",
    "relation_residual",
    "two_pi_graft_holonomy",
]

TWO_PI = 2 * math.pi
RELATION_TOL = 1e-9


@dataclass(frozen=True)
class HypAnnulus:
    length: float

    def __post_init__(self):
        if not self.length > 0:
            raise GeometryError(f"core length must be positive, got {self.length}")

    @property
    def modulus(self) -> float:
        return math.pi / self.length

    @property
    def holonomy(self) -> MoebiusMap:
        return MoebiusMap.diagonal(math.exp(self.length / 2))


@dataclass(frozen=True)
class GraftedAnnulus:
    """Hyperbolic annulus cut along its core with a flat cylinder glued in.

    ``halves`` and ``cylinder`` are ranges of ``Im zeta`` in the log chart.
    """

    base: HypAnnulus
    weight: float

    @property
    def circumference(self) -> float:
        return self.base.length

    @property
    def height(self) -> float:
        return self.weight

    @property
    def halves(self) -> tuple[tuple[float, float], tuple[float, float]]:
        return ((0.0, math.pi / 2), (math.pi / 2 + self.weight, math.pi + self.weight))

    @property
    def cylinder(self) -> tuple[float, float]:
        return (math.pi / 2, math.pi / 2 + self.weight)

    @property
    def modulus(self) -> float:
        return (math.pi + self.weight) / self.base.length

    def metric_density(self, y: float) -> float:
        """Thurston metric ``rho(y) |dzeta|`` at height ``y`` of the strip."""
        top = math.pi + self.weight
        if not 0 < y < top:
            raise GeometryError(f"height {y} outside the strip (0, {top})")
        low, high = self.cylinder
        if y <= low:
            return 1 / math.sin(y)
        if y >= high:
            return 1 / math.sin(y - self.weight)
        return 1.0


def graft_annulus(length: float, weight: float) -> GraftedAnnulus:
    if weight < 0:
        raise GeometryError(f"grafting weight must be nonnegative, got {weight}")
    return GraftedAnnulus(HypAnnulus(length), weight)


@dataclass(frozen=True)
class HolonomyCheck:
    """Holonomy of an annulus grafted by ``2 pi k``, at construction and ODE level."""

    length: float
    k: int
    original: MoebiusMap
    seam: MoebiusMap  # developing map of the upper half relative to the original
    ode_seam: MoebiusMap
    ode_holonomy: MoebiusMap
    ode_original: MoebiusMap

    @property
    def cylinder_height(self) -> float:
        return TWO_PI * self.k

    @property
    def construction_preserved(self) -> bool:
        return self.seam.is_identity(0.0)

    @property
    def ode_deviation(self) -> float:
        return max(
            self.ode_seam.distance_to_identity(),
            (self.ode_holonomy @ self.ode_original.inverse()).distance_to_identity(),
        )

    @property
    def preserved(self) -> bool:
        return self.construction_preserved and self.ode_deviation < 1e-8


def two_pi_graft_holonomy(length: float, k: int) -> HolonomyCheck:
    """Check that grafting an annulus by ``2 pi k`` leaves its developing data unchanged.

    In the log chart the developing map is ``exp(zeta)`` on the whole grafted
    strip, so the upper half develops through the rotation by ``2 pi k``. At
    the ODE level the frame is carried across the cylinder and once around
    the core above it.
    """
    if k < 0:
        raise GeometryError(f"k must be nonnegative, got {k}")
    annulus = HypAnnulus(length)
    sign = -1 if k % 2 else 1
    seam = MoebiusMap(sign, 0, 0, sign)  # diag(e^{i pi k}, e^{-i pi k}) in exact form

    q = annulus_differential()
    base = 0.25j * math.pi
    top = base + 1j * TWO_PI * k
    ode_original = deck_monodromy(q, length, base=base)
    if k == 0:
        ode_seam, ode_holonomy = MoebiusMap.identity(), ode_original
    else:
        ode_seam = path_monodromy(q, [base, top])
        # across the cylinder, once around the core above it, and back down
        ode_holonomy = path_monodromy(q, [base, top, top + length, base + length])
    check = HolonomyCheck(length, k, annulus.holonomy, seam, ode_seam, ode_holonomy, ode_original)
    logger.debug("two pi grafting", length=length, k=k, ode_deviation=check.ode_deviation)
    return check


@dataclass(frozen=True)
class FuchsianSurface:
    """Closed surface ``H^2 / G`` given by real generators and one relation.

    Uppercase letters in words are inverses. Discreteness of the group is
    assumed, not checked.
    """

    genus: int
    generators: Mapping[str, MoebiusMap]
    relation: str
    labels: tuple[str, ...] = field(default=())

    def __post_init__(self):
        if self.genus < 2:
            raise GeometryError(f"closed hyperbolic surfaces have genus at least 2, got {self.genus}")
        complex_generators = sorted(name for name, m in self.generators.items() if not m.is_real(1e-9))
        if complex_generators:
            raise GeometryError(f"generators {complex_generators} are not real Moebius maps")

    @classmethod
    def from_spec(cls, spec: FuchsianGroupSpec) -> "FuchsianSurface":
        generators = {name: MoebiusMap(a, b, c, d) for name, ((a, b), (c, d)) in spec.generators.items()}
        surface = cls(spec.genus, generators, spec.relation, tuple(sorted(generators)))
        residual = relation_residual(surface)
        if residual > RELATION_TOL:
            raise GeometryError(f"generators violate the relation {spec.relation!r}, residual {residual:.3g}")
        return surface

    @cached_property
    def representation(self) -> HolonomyRep:
        return HolonomyRep(self.generators)

    def evaluate(self, word: str) -> MoebiusMap:
        return self.representation(word)

    @property
    def hyperbolic_area(self) -> float:
        return TWO_PI * (2 * self.genus - 2)


def octagon_group() -> FuchsianSurface:
    """Genus-2 group of the regular hyperbolic octagon with interior angles pi / 4.

    Generator ``k`` translates along the diameter at angle ``k pi / 4`` of the
    disk, pairing opposite sides; matrices are moved to the upper half-plane.
    """
    c = 1 + math.sqrt(2)  # cosh(l / 2)
    s = math.sqrt(c * c - 1)
    cayley = MoebiusMap(1j, 1j, -1, 1)  # disk -> upper half-plane
    generators = {}
    for k, name in enumerate("abcd"):
        phase = complex(math.cos(k * math.pi / 4), math.sin(k * math.pi / 4))
        disk = MoebiusMap(c, s * phase, s * phase.conjugate(), c)
        generators[name] = cayley @ disk @ cayley.inverse()
    # vertex cycle of the opposite-side pairing
    return FuchsianSurface(2, generators, "adCbADcB", tuple("abcd"))


def relation_residual(s: FuchsianSurface) -> float:
    return s.evaluate(s.relation).distance_to_identity()


def geodesic_length(s: FuchsianSurface, word: str) -> float:
    """Length of the closed geodesic of ``word``, ``2 arccosh(|tr| / 2)``."""
    m = s.evaluate(word)
    try:
        kind, length = classify(m, tol=1e-9)
    except GeometryError as e:
        raise GeometryError(f"word {word!r} evaluates to the identity") from e
    if kind is not MoebiusKind.HYPERBOLIC:
        raise GeometryError(f"word {word!r} evaluates to a {kind.value} element, not a hyperbolic one")
    return length


def collar_width(length: float) -> float:
    """Width of the embedded collar around a simple closed geodesic of the given length."""
    return math.asinh(1 / math.sinh(length / 2))


def _axis_distance(m: MoebiusMap, n: MoebiusMap) -> float:
    """Distance between the axes of two hyperbolic elements; zero when they cross."""
    a1, a2 = m.fixed_points()
    b1, b2 = n.fixed_points()
    if {a1, a2} == {b1, b2}:
        return 0.0
    if b1 in (a1, a2):
        b1, b2 = b2, b1
    chart = three_point_map((a1, a2, b1), (0j, INF, 1 + 0j))
    x = chart(b2)
    if x is INF or x == 0:
        return 0.0  # shared endpoint, asymptotic axes
    x = x.real
    if x < 0:
        return 0.0
    r = math.sqrt(x)
    return abs(math.log((r + 1) / abs(r - 1)))


def _collar_overlaps(s: FuchsianSurface, loops: Sequence[tuple[str, float]]) -> tuple[tuple[str, str], ...]:
    overlaps = []
    for i, (w1, l1) in enumerate(loops):
        for w2, l2 in loops[i + 1 :]:
            if _axis_distance(s.evaluate(w1), s.evaluate(w2)) < collar_width(l1) + collar_width(l2):
                overlaps.append((w1, w2))
    return tuple(overlaps)


def preserves_holonomy(cylinders: Iterable[CylinderReport]) -> bool:
    """Whether every cylinder weight is a multiple of ``2 pi``, which leaves the holonomy unchanged."""
    for c in cylinders:
        k = c.weight / TWO_PI
        if abs(k - round(k)) > 1e-12:
            return False
    return True


def graft_surface(s: FuchsianSurface, multiloop: MultiloopSpec, t: float = 1.0) -> ThurstonMetricReport:
    """Thurston metric of the surface grafted along ``t`` times the multiloop.

    Loops are assumed pairwise disjoint; pairs whose collars overlap in the
    chosen lifts are listed in the report rather than rejected.
    """
    if t < 0:
        raise GeometryError(f"grafting parameter must be nonnegative, got {t}")
    lengths = [(loop.word, geodesic_length(s, loop.word)) for loop in multiloop.loops]
    cylinders = tuple(
        CylinderReport(loop=loop.word, length=length, weight=t * loop.absolute_weight)
        for loop, (_, length) in zip(multiloop.loops, lengths)
    )
    overlaps = _collar_overlaps(s, lengths)
    if overlaps:
        logger.warning("collars of grafting loops overlap", pairs=overlaps)
    report = ThurstonMetricReport(
        genus=s.genus,
        t=t,
        hyperbolic_area=s.hyperbolic_area,
        cylinders=cylinders,
        holonomy_preserving=preserves_holonomy(cylinders),
        collar_overlaps=overlaps,
    )
    logger.debug("grafted surface", loops=len(cylinders), total_area=report.total_area)
    return report


def grafting_ray_sample(
    surface: FuchsianSurface | HypAnnulus, weights: MultiloopSpec | float, t: float
) -> ThurstonMetricReport | GraftedAnnulus:
    """Point at parameter ``t`` of the grafting ray along the given weights.

    A Fuchsian surface takes a multiloop and yields a metric report; an
    annulus takes the weight of its core and yields the grafted annulus.
    """
    if t < 0:
        raise GeometryError(f"ray parameter must be nonnegative, got {t}")
    if isinstance(surface, HypAnnulus):
        if not isinstance(weights, (int, float)):
            raise GeometryError("an annulus is grafted along its core by a single weight")
        return graft_annulus(surface.length, t * weights)
    if not isinstance(weights, MultiloopSpec):
        raise GeometryError("a surface is grafted along a multiloop")
    return graft_surface(surface, weights, t)
