"""Config driven experiments: parameter sweeps, CSV tables and the run manifest.

Every experiment computes all of its tables before anything is written, so a
config that fails to load or validate leaves the output directory untouched.
Sweep points run on a thread pool capped by ``LabSettings.threads``; results
are collected in sweep order, which keeps the CSV files byte identical for a
fixed config and seed.
"""

import csv
import hashlib
import json
import platform
import random
import time
from collections.abc import Callable, Iterable, Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from importlib.metadata import PackageNotFoundError, version
from itertools import product
from pathlib import Path
from typing import Any, TypeVar

import numpy as np
from pydantic import BaseModel, ValidationError

from graftlab import __version__
from graftlab.config import LabSettings
from graftlab.errors import ConfigurationError, GraftlabError, InputFormatError, InputNotFoundError
from graftlab.flat_surfaces import (
    FatTraintrackDecomposition,
    Hexagon,
    golden_l_shape,
    regular_octagon,
    split,
    square_torus,
    stretch_by,
    surface_from_json,
    traintrack_decomposition,
)
from graftlab.grafting import FuchsianSurface, graft_surface, octagon_group, preserves_holonomy
from graftlab.ideal_geometry import build_hyp_rectangle
from graftlab.logging import logger
from graftlab.models import (
    CSV_COLUMNS,
    CylinderReport,
    ErrorEntry,
    ExperimentConfig,
    ExperimentKind,
    FuchsianGroupSpec,
    LoopSpec,
    ManifestEntry,
    MultiloopSpec,
    PathSpec,
    RunManifest,
    ThurstonMetricReport,
)
from graftlab.qc_comparison import GraftedHexagon, dilatation, hexagon_map, straighten_rectangle
from graftlab.schwarzian import QuadraticDifferential, integrate_dev, model_compare
from graftlab.torus_oracle import SlopeCurve, graft_torus, matched_weight, ray_gap, teich_ray
from graftlab.traintracks import (
    TWO_PI,
    TrainTrack,
    WeightVector,
    integral_approximation,
    scale_to_2pi_units,
    shipped_tracks,
    track_from_json,
    weights_to_multiloop,
)

__all__ = ["MANIFEST_NAME", "Outcome", "load_config", "read_table", "run"]

MANIFEST_NAME = "manifest.json"
PACKAGES = ("numpy", "scipy", "networkx", "pydantic")

T = TypeVar("T")
R = TypeVar("R")


@dataclass
class Outcome:
    """Tables and JSON documents of one experiment, plus the sweep points that failed."""

    tables: dict[str, list[tuple]] = field(default_factory=dict)
    documents: dict[str, Any] = field(default_factory=dict)
    errors: list[ErrorEntry] = field(default_factory=list)


@dataclass(frozen=True)
class _Context:
    cfg: ExperimentConfig
    settings: LabSettings
    base_dir: Path
    seed: int

    @property
    def mesh_size(self) -> int:
        return self.cfg.mesh_size or self.settings.mesh_size

    def resolve(self, ref: str) -> Path:
        path = Path(ref).expanduser()
        return path if path.is_absolute() else self.base_dir / path


def _read_json(path: Path) -> Any:
    if not path.is_file():
        raise InputNotFoundError(f"input file not found: {path}")
    try:
        return json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise InputFormatError(f"{path} is not valid JSON: {e}") from e


def _validated(model: type[BaseModel], raw: Any, source: Path | str):
    try:
        return model.model_validate(raw)
    except ValidationError as e:
        raise InputFormatError(f"{source} does not match the {model.__name__} schema:\n{e}") from e


def load_config(path: Path | str | None, kind: ExperimentKind | None = None, **overrides) -> ExperimentConfig:
    """Read and validate an experiment config; non-None ``overrides`` replace file values.

    Without a file the config is built from ``kind`` and the overrides alone.
    A file whose kind differs from ``kind`` is rejected.
    """
    raw: Any = {}
    source: Path | str = "command line options"
    if path is not None:
        source = Path(path)
        raw = _read_json(source)
        if not isinstance(raw, dict):
            raise InputFormatError(f"{source} must hold a JSON object")
    if kind is not None:
        if raw.get("kind", kind.value) != kind.value:
            raise ConfigurationError(f"{source} configures a {raw['kind']!r} experiment, not {kind.value!r}")
        raw["kind"] = kind.value
    raw.update({k: v for k, v in overrides.items() if v is not None})
    return _validated(ExperimentConfig, raw, source)


def _sweep(
    fn: Callable[[T], R], items: Sequence[T], threads: int, step: Callable[[T], str]
) -> tuple[list[tuple[T, R]], list[ErrorEntry]]:
    """Run ``fn`` on every item; failures become error entries instead of aborting the run."""
    done, errors = [], []
    with ThreadPoolExecutor(max_workers=max(1, min(threads, len(items) or 1))) as pool:
        futures = [pool.submit(fn, item) for item in items]
        for item, future in zip(items, futures, strict=True):
            try:
                done.append((item, future.result()))
            except GraftlabError as e:
                logger.warning("sweep point failed", step=step(item), error=str(e))
                errors.append(ErrorEntry(step=step(item), error=str(e), exit_code=e.exit_code))
    return done, errors


# devmap


def _run_devmap(ctx: _Context) -> Outcome:
    cfg, tol = ctx.cfg, ctx.settings.integrator_tolerances
    points = list(product(cfg.sectors, cfg.m, cfg.radii))
    done, errors = _sweep(
        lambda p: model_compare(p[2], p[0], p[1], **tol),
        points,
        ctx.settings.threads,
        lambda p: f"devmap sector={p[0]} m={p[1]} R={p[2]:g}",
    )
    out = Outcome(errors=errors)
    out.tables["devmap"] = [(radius, sector, m, error) for (sector, m, radius), error in done]

    if cfg.path is not None:
        source = ctx.resolve(cfg.path)
        spec = _validated(PathSpec, _read_json(source), source)
        q = QuadraticDifferential(tuple(complex(c) for c in cfg.q))
        try:
            solution = integrate_dev(q, spec.vertices, **tol)
        except GraftlabError as e:
            logger.warning("developing map failed", path=str(source), error=str(e))
            out.errors.append(ErrorEntry(step="devmap path", error=str(e), exit_code=e.exit_code))
        else:
            t = np.concatenate([[0.0], np.cumsum(np.abs(np.diff(solution.z)))])
            out.tables["devmap-path"] = [
                (float(s), z.real, z.imag, f.real, f.imag, float(abs(w)))
                for s, z, f, w in zip(t, solution.z, solution.f, solution.wronskian, strict=True)
            ]
    return out


# graft


def _fuchsian(ctx: _Context) -> FuchsianSurface:
    if ctx.cfg.group == "octagon":
        return octagon_group()
    source = ctx.resolve(ctx.cfg.group)
    return FuchsianSurface.from_spec(_validated(FuchsianGroupSpec, _read_json(source), source))


def _multiloop(ctx: _Context) -> MultiloopSpec:
    if ctx.cfg.multiloop is None:
        return MultiloopSpec(loops=[LoopSpec(word="a", weight=1, units="2pi")])
    source = ctx.resolve(ctx.cfg.multiloop)
    return _validated(MultiloopSpec, _read_json(source), source)


def _cylinder_rows(t: float, report: ThurstonMetricReport) -> list[tuple]:
    return [(t, c.loop, c.length, c.weight, c.modulus, c.area) for c in report.cylinders]


def _report_document(report: ThurstonMetricReport, **extra) -> dict:
    return {**extra, **report.model_dump(mode="json"), "total_area": report.total_area}


def _run_graft(ctx: _Context) -> Outcome:
    surface, multiloop = _fuchsian(ctx), _multiloop(ctx)
    done, errors = _sweep(
        lambda t: graft_surface(surface, multiloop, t), ctx.cfg.t_range, ctx.settings.threads, lambda t: f"graft t={t:g}"
    )
    out = Outcome(errors=errors)
    out.tables["graft"] = [row for t, report in done for row in _cylinder_rows(t, report)]
    out.documents["graft-reports"] = [_report_document(report) for _, report in done]
    return out


# qc


def _qc_rectangle(ctx: _Context, length: float, width: float) -> tuple:
    report = dilatation(straighten_rectangle(build_hyp_rectangle(length, width), ctx.cfg.graft_width, n=ctx.mesh_size))
    return ("rectangle", length, width, report.sup_k, report.mean_k, report.min_stretch, report.max_stretch)


def _qc_hexagon(ctx: _Context, length: float, width: float, size: float) -> tuple:
    prongs = (length, length, length)
    _, report = hexagon_map(
        GraftedHexagon(prongs, width, size), Hexagon(0, prongs, size), central=min(0.5, length / 2), n=ctx.mesh_size
    )
    return (f"hexagon w={size:g}", length, width, report.sup_k, report.mean_k, report.min_stretch, report.max_stretch)


def _run_qc(ctx: _Context) -> Outcome:
    cfg = ctx.cfg
    points: list[tuple[float, float, float | None]] = [(x, d, None) for x in cfg.lengths for d in cfg.widths]
    points += [(x, d, w) for x in cfg.lengths for d in cfg.widths for w in cfg.hexagon_sizes]

    def one(p):
        length, width, size = p
        return _qc_rectangle(ctx, length, width) if size is None else _qc_hexagon(ctx, length, width, size)

    def step(p):
        kind = "rectangle" if p[2] is None else f"hexagon w={p[2]:g}"
        return f"qc {kind} length={p[0]:g} width={p[1]:g}"

    done, errors = _sweep(one, points, ctx.settings.threads, step)
    return Outcome(tables={"qc": [row for _, row in done]}, errors=errors)


# raycompare


def _run_raycompare(ctx: _Context) -> Outcome:
    tau, slope = ctx.cfg.tau, SlopeCurve(*ctx.cfg.slope)

    def one(s: float) -> tuple:
        teich = teich_ray(tau, slope, s)
        grafted = graft_torus(tau, slope, matched_weight(tau, slope, s))
        return (s, teich.real, teich.imag, grafted.real, grafted.imag, ray_gap(tau, slope, s))

    done, errors = _sweep(one, ctx.cfg.s_range, ctx.settings.threads, lambda s: f"raycompare s={s:g}")
    return Outcome(tables={"raycompare": [row for _, row in done]}, errors=errors)


# tt-approx


def _track(ctx: _Context) -> TrainTrack:
    shipped = shipped_tracks()
    if ctx.cfg.track in shipped:
        return shipped[ctx.cfg.track]
    return track_from_json(_read_json(ctx.resolve(ctx.cfg.track)))


def _rational(raw) -> Fraction:
    if isinstance(raw, dict) or isinstance(raw, bool):
        raise InputFormatError(f"train track weights must be rational, got {raw!r}")
    try:
        return Fraction(str(raw))
    except ValueError as e:
        raise InputFormatError(f"cannot read weight {raw!r}") from e


def _label(t: TrainTrack, b: int) -> str:
    return t.labels[b] if t.labels else str(b)


def _run_tt_approx(ctx: _Context) -> Outcome:
    track = _track(ctx)
    if ctx.cfg.weights is not None:
        vectors = [WeightVector.of(_rational(v) for v in ctx.cfg.weights)]
    else:
        rng = random.Random(ctx.seed)
        vectors = [track.random_weights(rng) for _ in range(ctx.cfg.samples)]
    samples = list(enumerate(vectors))
    done, errors = _sweep(
        lambda p: integral_approximation(track, p[1]), samples, ctx.settings.threads, lambda p: f"tt-approx sample={p[0]}"
    )
    rows = [
        (k, b, _label(track, b), str(w[b]), int(result.weights[b]), float(abs(result.weights[b] - w[b])))
        for (k, w), result in done
        for b in range(track.branch_count)
    ]
    return Outcome(tables={"tt-approx": rows}, errors=errors)


# pipeline


def _flat_surface(ctx: _Context):
    factories = {"l-shape": golden_l_shape, "square-torus": square_torus, "octagon": regular_octagon}
    if ctx.cfg.surface in factories:
        return factories[ctx.cfg.surface]()
    return surface_from_json(_read_json(ctx.resolve(ctx.cfg.surface)))


def _split_decomposition(surface, s: float, splits: int) -> FatTraintrackDecomposition:
    d = traintrack_decomposition(stretch_by(surface, Fraction(str(s))))
    for _ in range(splits):
        d = split(d)
    return d


def _pipeline_point(ctx: _Context, surface, s: float) -> tuple[list[tuple], ThurstonMetricReport]:
    """Stretch, split, round the transverse widths and graft along the resulting multiloop.

    Widths are rescaled by ``weight_scale`` and written in units of ``2 pi``
    before rounding, so every cylinder should preserve the holonomy; the
    report checks it. A loop's length is the total height of the flat
    rectangles it runs through, not its hyperbolic length.
    """
    d = _split_decomposition(surface, s, ctx.cfg.splits)
    track, letters = d.track, d.track.letters
    scaled = scale_to_2pi_units(float(d.iet.lengths[a]) * ctx.cfg.weight_scale for a in letters)
    weights = track.extend_letters(dict(zip(letters, scaled, strict=True)))
    integral = integral_approximation(track, weights).weights
    multiloop = weights_to_multiloop(track, integral)

    heights = {track.branch(a): float(d.iet.heights[a]) for a in letters}
    cylinders = tuple(
        CylinderReport(
            loop="-".join(track.labels[b] for b in loop),
            length=sum(heights.get(b, 0.0) for b in loop),
            weight=TWO_PI * count,
        )
        for loop, count in multiloop.loops
    )
    report = ThurstonMetricReport(
        genus=d.surface.genus,
        hyperbolic_area=TWO_PI * (2 * d.surface.genus - 2),
        cylinders=cylinders,
        holonomy_preserving=preserves_holonomy(cylinders),
    )
    rows = [(s, b, track.labels[b], str(weights[b]), int(integral[b])) for b in range(track.branch_count)]
    logger.debug("pipeline point", s=s, loops=len(cylinders), total_weight=multiloop.total_weight)
    return rows, report


def _run_pipeline(ctx: _Context) -> Outcome:
    surface = _flat_surface(ctx)
    done, errors = _sweep(
        lambda s: _pipeline_point(ctx, surface, s), ctx.cfg.s_values, ctx.settings.threads, lambda s: f"pipeline s={s:g}"
    )
    out = Outcome(errors=errors)
    out.tables["pipeline-weights"] = [row for _, (rows, _) in done for row in rows]
    out.tables["pipeline-graft"] = [row for s, (_, report) in done for row in _cylinder_rows(s, report)]
    out.documents["pipeline-reports"] = [_report_document(report, s=s) for s, (_, report) in done]
    return out


EXPERIMENTS: dict[ExperimentKind, Callable[[_Context], Outcome]] = {
    ExperimentKind.DEVMAP: _run_devmap,
    ExperimentKind.GRAFT: _run_graft,
    ExperimentKind.QC: _run_qc,
    ExperimentKind.RAYCOMPARE: _run_raycompare,
    ExperimentKind.TT_APPROX: _run_tt_approx,
    ExperimentKind.PIPELINE: _run_pipeline,
}


# output


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def _write_table(directory: Path, name: str, rows: Iterable[tuple]) -> ManifestEntry:
    path = directory / f"{name}.csv"
    count = 0
    with path.open("w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(CSV_COLUMNS[name])
        for row in rows:
            writer.writerow(row)
            count += 1
    return ManifestEntry(path=path.name, sha256=_sha256(path), rows=count)


def _write_document(directory: Path, name: str, document: Any) -> ManifestEntry:
    path = directory / f"{name}.json"
    path.write_text(json.dumps(document, indent=2, sort_keys=True) + "\n", encoding="utf-8", newline="\n")
    return ManifestEntry(path=path.name, sha256=_sha256(path))


def read_table(path: Path | str) -> list[dict[str, str]]:
    """Rows of a CSV written by ``run``, keyed by column name."""
    with Path(path).open(encoding="utf-8", newline="") as f:
        return list(csv.DictReader(f))


def _package_versions() -> dict[str, str]:
    versions = {}
    for name in PACKAGES:
        try:
            versions[name] = version(name)
        except PackageNotFoundError:
            versions[name] = "unknown"
    return versions


def run(cfg: ExperimentConfig, settings: LabSettings, base_dir: Path | str = ".") -> RunManifest:
    """Run one experiment and write its tables, documents and ``manifest.json``.

    Relative input paths in ``cfg`` are resolved against ``base_dir``. Sweep
    points that fail are listed in the manifest; errors outside a sweep
    propagate and nothing is written.
    """
    seed = cfg.seed if cfg.seed is not None else settings.seed
    ctx = _Context(cfg, settings, Path(base_dir), seed)
    started = time.perf_counter()
    logger.info("running experiment", kind=cfg.kind.value, seed=seed, threads=settings.threads)
    outcome = EXPERIMENTS[cfg.kind](ctx)

    directory = Path(cfg.output_dir or settings.output_dir)
    directory.mkdir(parents=True, exist_ok=True)
    files = [_write_table(directory, name, rows) for name, rows in outcome.tables.items()]
    files += [_write_document(directory, name, doc) for name, doc in outcome.documents.items()]

    manifest = RunManifest(
        kind=cfg.kind.value,
        version=str(__version__),
        python=platform.python_version(),
        packages=_package_versions(),
        seed=seed,
        parameters=cfg.model_dump(mode="json", exclude={"output_dir"}),
        wall_time=round(time.perf_counter() - started, 6),
        files=files,
        errors=outcome.errors,
    )
    (directory / MANIFEST_NAME).write_text(manifest.model_dump_json(indent=2) + "\n", encoding="utf-8", newline="\n")
    logger.info("experiment finished", kind=cfg.kind.value, files=len(files), errors=len(outcome.errors), wall_time=manifest.wall_time)
    return manifest
