"""Comparison maps on quad meshes and their quasiconformal dilatation.

A mesh piece is a pair of complex grids of equal shape: source vertices in a
conformal chart and their images. Rows follow the second grid parameter, so
``grid[i, j]`` is the vertex in row ``i`` and column ``j``. Each cell is read
as the real-linear map between the bilinear frames of its source and target
quadrilaterals at the cell center.
"""

import math
from collections.abc import Callable, Iterable, Mapping, Sequence
from dataclasses import dataclass, field
from enum import Enum

import networkx as nx
import numpy as np
from scipy.sparse import lil_matrix
from scipy.sparse.linalg import spsolve

from graftlab.errors import BoundaryMismatchError, GeometryError, OrientationError, SkeletonMismatchError
from graftlab.flat_surfaces import Hexagon
from graftlab.ideal_geometry import HypRectangle
from graftlab.logging import logger
from graftlab.models import DilatationReport, RayComparisonReport
from graftlab.moebius import HPoint

__all__ = [
    "GraftedHexagon",
    "MeshMap",
    "MeshPiece",
    "Metric",
    "MetricKind",
    "SkeletonMap",
    "assemble_piecewise",
    "cell_dilatation",
    "compose_maps",
    "dilatation",
    "hexagon_map",
    "mesh_map_from_function",
    "one_skeleton_map",
    "ray_comparison",
    "rectangle_grid",
    "refine",
    "straighten_rectangle",
]

DEFAULT_MESH = 64
BOUNDARY_TOL = 1e-9
ORIENTATION_TOL = 1e-14


class MetricKind(str, Enum):
    EUCLIDEAN = "euclidean"
    HYPERBOLIC = "hyperbolic"  # upper half-plane
    THURSTON = "thurston"  # log chart of a grafted strip


@dataclass(frozen=True)
class Metric:
    """Conformal metric ``rho |dz|`` on a chart.

    The Thurston metric lives in the log chart of a grafted annulus: hyperbolic
    ``1 / sin(y)`` below the flat band, ``1`` inside it, and the shifted
    hyperbolic density above it.
    """

    kind: MetricKind = MetricKind.EUCLIDEAN
    band: tuple[float, float] = (math.pi / 2, math.pi / 2)

    @classmethod
    def euclidean(cls) -> "Metric":
        return cls(MetricKind.EUCLIDEAN)

    @classmethod
    def hyperbolic(cls) -> "Metric":
        return cls(MetricKind.HYPERBOLIC)

    @classmethod
    def thurston(cls, width: float) -> "Metric":
        return cls(MetricKind.THURSTON, (math.pi / 2, math.pi / 2 + width))

    def density(self, z: np.ndarray) -> np.ndarray:
        z = np.asarray(z, dtype=complex)
        if self.kind is MetricKind.EUCLIDEAN:
            return np.ones(z.shape)
        y = z.imag
        if self.kind is MetricKind.HYPERBOLIC:
            return 1 / y
        low, high = self.band
        return np.where(y <= low, 1 / np.sin(y), np.where(y >= high, 1 / np.sin(y - (high - low)), 1.0))


@dataclass(frozen=True, eq=False)
class MeshPiece:
    source: np.ndarray
    target: np.ndarray
    label: str = ""

    def __post_init__(self):
        if self.source.shape != self.target.shape:
            raise GeometryError(f"source grid {self.source.shape} and target grid {self.target.shape} differ")
        if self.source.ndim != 2 or min(self.source.shape) < 2:
            raise GeometryError(f"a mesh piece needs at least 2 x 2 vertices, got {self.source.shape}")

    @property
    def cells(self) -> int:
        rows, cols = self.source.shape
        return (rows - 1) * (cols - 1)


@dataclass(frozen=True, eq=False)
class MeshMap:
    pieces: tuple[MeshPiece, ...]
    source_metric: Metric = field(default_factory=Metric.euclidean)
    target_metric: Metric = field(default_factory=Metric.euclidean)

    def __post_init__(self):
        if not self.pieces:
            raise GeometryError("a mesh map needs at least one piece")

    @property
    def cells(self) -> int:
        return sum(p.cells for p in self.pieces)


def rectangle_grid(x0: float, x1: float, y0: float, y1: float, nx_: int, ny: int) -> np.ndarray:
    x = np.linspace(x0, x1, nx_ + 1)
    y = np.linspace(y0, y1, ny + 1)
    return x[None, :] + 1j * y[:, None]


def mesh_map_from_function(
    fn: Callable[[np.ndarray], np.ndarray],
    source: np.ndarray,
    source_metric: Metric | None = None,
    target_metric: Metric | None = None,
) -> MeshMap:
    """Sample a vectorized complex function on a source grid."""
    source = np.asarray(source, dtype=complex)
    piece = MeshPiece(source, np.asarray(fn(source), dtype=complex))
    return MeshMap((piece,), source_metric or Metric.euclidean(), target_metric or Metric.euclidean())


def _frames(g: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Bilinear partials along columns and rows, and the cell centers."""
    a, b, c, d = g[:-1, :-1], g[:-1, 1:], g[1:, :-1], g[1:, 1:]
    du = ((b - a) + (d - c)) / 2
    dv = ((c - a) + (d - b)) / 2
    return du, dv, (a + b + c + d) / 4


def _wirtinger(index: int, piece: MeshPiece) -> tuple[np.ndarray, np.ndarray]:
    """``f_z`` and ``f_zbar`` of every cell of a piece."""
    su, sv, _ = _frames(piece.source)
    tu, tv, _ = _frames(piece.target)
    area = (np.conj(su) * sv).imag
    bad = np.argwhere(area <= ORIENTATION_TOL)
    if len(bad):
        row, col = bad[0]
        raise GeometryError(f"source cell {(index, int(row), int(col))} is degenerate or negatively oriented")
    det = su * np.conj(sv) - np.conj(su) * sv
    fz = (tu * np.conj(sv) - tv * np.conj(su)) / det
    fzbar = (su * tv - sv * tu) / det
    return fz, fzbar


def _beltrami(index: int, piece: MeshPiece) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    fz, fzbar = _wirtinger(index, piece)
    big, small = np.abs(fz), np.abs(fzbar)
    reversed_ = np.argwhere(big - small <= ORIENTATION_TOL * np.maximum(big, 1.0))
    if len(reversed_):
        row, col = reversed_[0]
        raise OrientationError((index, int(row), int(col)))
    return small / big, big, small


def cell_dilatation(m: MeshMap) -> list[np.ndarray]:
    """Per-cell ``K = (1 + |mu|) / (1 - |mu|)``, one array per piece."""
    fields = []
    for i, piece in enumerate(m.pieces):
        mu, _, _ = _beltrami(i, piece)
        fields.append((1 + mu) / (1 - mu))
    return fields


def dilatation(m: MeshMap) -> DilatationReport:
    ks, stretches = [], []
    for i, piece in enumerate(m.pieces):
        mu, big, small = _beltrami(i, piece)
        ks.append(((1 + mu) / (1 - mu)).ravel())
        _, _, s_center = _frames(piece.source)
        _, _, t_center = _frames(piece.target)
        scale = m.target_metric.density(t_center) / m.source_metric.density(s_center)
        stretches.append(((big - small) * scale).ravel())
        stretches.append(((big + small) * scale).ravel())
    k = np.concatenate(ks)
    stretch = np.concatenate(stretches)
    report = DilatationReport(
        sup_k=float(k.max()),
        mean_k=float(k.mean()),
        min_stretch=float(stretch.min()),
        max_stretch=float(stretch.max()),
        cells=int(k.size),
    )
    logger.debug("dilatation measured", pieces=len(m.pieces), sup_k=report.sup_k)
    return report


def compose_maps(outer: MeshMap, inner: MeshMap, tol: float = BOUNDARY_TOL) -> MeshMap:
    """``outer`` after ``inner``; the source mesh of ``outer`` must be the image mesh of ``inner``."""
    if len(outer.pieces) != len(inner.pieces):
        raise GeometryError(f"cannot compose maps with {len(outer.pieces)} and {len(inner.pieces)} pieces")
    pieces = []
    for i, (f, g) in enumerate(zip(outer.pieces, inner.pieces)):
        if f.source.shape != g.target.shape or np.max(np.abs(f.source - g.target)) > tol:
            raise GeometryError(f"piece {i}: the meshes of the composed maps do not match")
        pieces.append(MeshPiece(g.source, f.target, g.label or f.label))
    return MeshMap(tuple(pieces), inner.source_metric, outer.target_metric)


def _subdivide(g: np.ndarray) -> np.ndarray:
    rows, cols = g.shape
    out = np.empty((2 * rows - 1, 2 * cols - 1), dtype=complex)
    out[::2, ::2] = g
    out[::2, 1::2] = (g[:, :-1] + g[:, 1:]) / 2
    out[1::2, ::2] = (g[:-1] + g[1:]) / 2
    out[1::2, 1::2] = (g[:-1, :-1] + g[:-1, 1:] + g[1:, :-1] + g[1:, 1:]) / 4
    return out


def refine(m: MeshMap) -> MeshMap:
    """Split every cell into four, interpolating both grids bilinearly."""
    pieces = tuple(MeshPiece(_subdivide(p.source), _subdivide(p.target), p.label) for p in m.pieces)
    return MeshMap(pieces, m.source_metric, m.target_metric)


def _sides(g: np.ndarray) -> list[np.ndarray]:
    return [g[0, :], g[-1, :], g[:, 0], g[:, -1]]


def _trace_deviation(sa, sb, ta, tb, tol: float) -> float | None:
    """Deviation of the images along a shared source edge, ``None`` if the edges are not shared."""
    if len(sa) != len(sb):
        return None
    if np.max(np.abs(sa - sb)) <= tol:
        return float(np.max(np.abs(ta - tb)))
    if np.max(np.abs(sa - sb[::-1])) <= tol:
        return float(np.max(np.abs(ta - tb[::-1])))
    return None


def assemble_piecewise(maps: Sequence[MeshMap], tol: float = BOUNDARY_TOL) -> MeshMap:
    """Glue mesh maps on adjacent pieces into one.

    Pieces are adjacent where a side of one source grid coincides with a side
    of another; the images of the shared side must then agree within ``tol``.
    """
    if not maps:
        raise GeometryError("nothing to assemble")
    metrics = {(m.source_metric, m.target_metric) for m in maps}
    if len(metrics) > 1:
        raise GeometryError("pieces carry different metrics")
    pieces = [p for m in maps for p in m.pieces]
    worst: tuple[float, tuple[int, int]] | None = None
    for i, a in enumerate(pieces):
        for j in range(i + 1, len(pieces)):
            b = pieces[j]
            for sa, ta in zip(_sides(a.source), _sides(a.target)):
                for sb, tb in zip(_sides(b.source), _sides(b.target)):
                    deviation = _trace_deviation(sa, sb, ta, tb, tol)
                    if deviation is not None and (worst is None or deviation > worst[0]):
                        worst = (deviation, (i, j))
    if worst is not None and worst[0] > tol:
        raise BoundaryMismatchError(worst[1], worst[0])
    source_metric, target_metric = metrics.pop()
    return MeshMap(tuple(pieces), source_metric, target_metric)


def _grafted_chart(r: HypRectangle, graft: float, sigma: np.ndarray, t: np.ndarray) -> np.ndarray:
    """Log-chart points of the rectangle grafted along its middle geodesic.

    ``sigma`` is the fraction of leaf arc length from the left edge and ``t``
    the geodesic length above the bottom leaf.
    """
    y = r.base.y * np.exp(t)[:, None]
    a = r.euclidean_width / 2
    half = a / y
    s = sigma[None, :] * (2 * half + graft)
    left = np.log((s * y - a) + 1j * y) + 1j * graft
    band = np.log(y) + 1j * (math.pi / 2 + graft - (s - half))
    right = np.log((s - half - graft) * y + 1j * y)
    return np.where(s <= half, left, np.where(s <= half + graft, band, right))


def _straighten(zeta: np.ndarray, r: HypRectangle, graft: float, width: float, scale: float) -> np.ndarray:
    """Image of log-chart points under the map that is linear by arc length on each leaf."""
    zeta = np.asarray(zeta, dtype=complex)
    a = r.euclidean_width / 2
    low, high = math.pi / 2, math.pi / 2 + graft
    v = zeta.imag
    z = np.exp(np.where(v > high, zeta - 1j * graft, zeta))
    y = np.where((v >= low) & (v <= high), np.exp(zeta.real), z.imag)
    half = a / y
    s = np.where(v > high, (z.real + a) / y, np.where(v >= low, half + high - v, half + graft + z.real / y))
    t = np.log(y / r.base.y)
    return width * s / (2 * half + graft) + 1j * scale * t


def straighten_rectangle(
    r: HypRectangle, width: float, n: int = DEFAULT_MESH, length: float | None = None
) -> MeshMap:
    """Straighten the rectangle grafted by ``width`` onto a Euclidean rectangle.

    The source is ``r`` cut along its middle geodesic with a flat band of
    height ``width`` inserted. The map keeps the geodesic coordinate, rescaled
    to ``length`` when given, and is linear by arc length on every horocyclic
    leaf, which lands on ``[0, width]``.
    """
    if not width > 0:
        raise GeometryError(f"target width must be positive, got {width}")
    scale = 1.0 if length is None else length / r.length
    source = _grafted_chart(r, width, np.linspace(0, 1, n + 1), np.linspace(0, r.length, n + 1))
    target = _straighten(source, r, width, width, scale)
    return MeshMap((MeshPiece(source, target, "rectangle"),), Metric.thurston(width), Metric.euclidean())


def _harmonic_fill(grid: np.ndarray) -> np.ndarray:
    """Replace the interior of ``grid`` by the discrete harmonic extension of its boundary."""
    rows, cols = grid.shape
    out = grid.copy()
    inner_rows, inner_cols = rows - 2, cols - 2
    if inner_rows <= 0 or inner_cols <= 0:
        return out
    index = np.arange(inner_rows * inner_cols).reshape(inner_rows, inner_cols)
    laplacian = lil_matrix((index.size, index.size))
    rhs = np.zeros(index.size, dtype=complex)
    for i in range(1, rows - 1):
        for j in range(1, cols - 1):
            k = index[i - 1, j - 1]
            laplacian[k, k] = 4.0
            for di, dj in ((-1, 0), (1, 0), (0, -1), (0, 1)):
                ni, nj = i + di, j + dj
                if 0 < ni < rows - 1 and 0 < nj < cols - 1:
                    laplacian[k, index[ni - 1, nj - 1]] = -1.0
                else:
                    rhs[k] += grid[ni, nj]
    matrix = laplacian.tocsr()
    solved = spsolve(matrix, rhs.real) + 1j * spsolve(matrix, rhs.imag)
    out[1:-1, 1:-1] = np.asarray(solved).reshape(inner_rows, inner_cols)
    return out


def _coons(bottom, top, left, right) -> np.ndarray:
    rows, cols = len(left), len(bottom)
    s = np.linspace(0, 1, cols)[None, :]
    t = np.linspace(0, 1, rows)[:, None]
    ruled = (1 - t) * bottom[None, :] + t * top[None, :] + (1 - s) * left[:, None] + s * right[:, None]
    corners = (1 - s) * (1 - t) * bottom[0] + s * (1 - t) * bottom[-1] + (1 - s) * t * top[0] + s * t * top[-1]
    return ruled - corners


@dataclass(frozen=True)
class GraftedHexagon:
    """Hyperbolic hexagon with horocyclic edges around a tripod, grafted along its prongs.

    Each prong is a rectangle of geodesic length ``prong_lengths[k]`` whose
    bottom leaf has hyperbolic length ``leaf``; every rectangle carries a flat
    band of height ``graft`` along its middle geodesic.
    """

    prong_lengths: tuple[float, ...]
    leaf: float
    graft: float

    def __post_init__(self):
        if not (self.leaf > 0 and self.graft > 0 and all(x > 0 for x in self.prong_lengths)):
            raise GeometryError("hexagon prongs, leaf and grafting width must be positive")


def _central_piece(r: HypRectangle, graft: float, top: np.ndarray, height: float, n: int) -> np.ndarray:
    """Source grid between the bottom leaf and the leaf at ``height``.

    The bottom row is spaced evenly in the chart rather than by arc length,
    so the straightening map is not harmonic on this piece.
    """
    y0 = r.base.y
    a = r.euclidean_width / 2
    v_left = np.angle(-a + 1j * y0) + graft
    v_right = np.angle(a + 1j * y0)
    v = np.linspace(v_left, v_right, len(top))
    high = math.pi / 2 + graft
    angle = np.where(v > high, v - graft, np.minimum(v, math.pi / 2))
    on_leaf = np.log(y0 / np.tan(angle) + 1j * y0) + 1j * np.where(v > high, graft, 0.0)
    bottom = np.where((v >= math.pi / 2) & (v <= high), math.log(y0) + 1j * v, on_leaf)
    sides = _grafted_chart(r, graft, np.array([0.0, 1.0]), np.linspace(0, height, n + 1))
    return _coons(bottom, top, sides[:, 0], sides[:, 1])


def hexagon_map(
    source: GraftedHexagon, target: Hexagon, central: float = 0.5, n: int = 32
) -> tuple[MeshMap, DilatationReport]:
    """Map a grafted hexagon onto a flat hexagon with a cone point, prong by prong.

    Every prong is cut at geodesic height ``central``: above it the rectangle
    is straightened, below it the image is the discrete harmonic extension of
    the straightened boundary trace. ``central = 0`` keeps the rectangles only.
    """
    if len(source.prong_lengths) != 3 or len(target.prong_lengths) != 3:
        raise GeometryError("hexagons must have three vertical and three horizontal edges")
    width = float(target.horizontal_edge_length)
    maps = []
    for k, (length, image_length) in enumerate(zip(source.prong_lengths, target.prong_lengths)):
        if not 0 <= central < length:
            raise GeometryError(f"central height {central} does not fit prong {k} of length {length}")
        r = HypRectangle(HPoint(0.0, 1.0), length, source.leaf)
        scale = float(image_length) / length
        sigma = np.linspace(0, 1, n + 1)
        upper = _grafted_chart(r, source.graft, sigma, np.linspace(central, length, n + 1))
        pieces = [MeshMap((MeshPiece(upper, _straighten(upper, r, source.graft, width, scale), f"prong {k}"),))]
        if central > 0:
            lower = _central_piece(r, source.graft, upper[0], central, n)
            image = _harmonic_fill(_straighten(lower, r, source.graft, width, scale))
            pieces.insert(0, MeshMap((MeshPiece(lower, image, f"prong {k} center"),)))
        maps.append(assemble_piecewise(pieces))
    glued = MeshMap(
        tuple(p for m in maps for p in m.pieces), Metric.thurston(source.graft), Metric.euclidean()
    )
    report = dilatation(glued)
    logger.debug("hexagon map", central=central, sup_k=report.sup_k)
    return glued, report


@dataclass(frozen=True)
class SkeletonMap:
    """Edge-wise linear map between isomorphic one-skeletons."""

    nodes: Mapping
    ratios: Mapping[tuple, float]

    @property
    def lower(self) -> float:
        return min(self.ratios.values())

    @property
    def upper(self) -> float:
        return max(self.ratios.values())

    @property
    def constants(self) -> tuple[float, float]:
        return self.lower, self.upper

    def __call__(self, u, v, s: float) -> tuple[tuple, float]:
        """Image of the point at arc length ``s`` from ``u`` on the edge ``uv``."""
        ratio = self.ratios[(u, v)] if (u, v) in self.ratios else self.ratios[(v, u)]
        return (self.nodes[u], self.nodes[v]), s * ratio


def one_skeleton_map(
    source: nx.Graph, target: nx.Graph, weight: str = "length", max_candidates: int = 10_000
) -> SkeletonMap:
    """Linear-by-arc-length map between one-skeletons with the tightest length ratios.

    Among the graph isomorphisms found (at most ``max_candidates``), the one
    minimizing ``upper / lower`` is kept.
    """
    for graph in (source, target):
        if any(not data.get(weight, 0) > 0 for _, _, data in graph.edges(data=True)):
            raise GeometryError(f"every skeleton edge needs a positive {weight!r}")
    matcher = nx.algorithms.isomorphism.GraphMatcher(source, target)
    best: tuple[float, SkeletonMap] | None = None
    for k, nodes in enumerate(matcher.isomorphisms_iter()):
        if k >= max_candidates:
            break
        ratios = {(u, v): target.edges[nodes[u], nodes[v]][weight] / d[weight] for u, v, d in source.edges(data=True)}
        candidate = SkeletonMap(nodes, ratios)
        spread = candidate.upper / candidate.lower
        if best is None or spread < best[0]:
            best = (spread, candidate)
    if best is None:
        raise SkeletonMismatchError("one-skeletons are not isomorphic")
    return best[1]


def ray_comparison(samples: Iterable[tuple[float, MeshMap]]) -> RayComparisonReport:
    """Upper bound ``log(sup K) / 2`` on the Teichmueller distance at each ray parameter."""
    s, gap = [], []
    for parameter, m in samples:
        s.append(float(parameter))
        gap.append(max(0.0, 0.5 * math.log(dilatation(m).sup_k)))
    return RayComparisonReport(method="dilatation", s=tuple(s), gap=tuple(gap))
