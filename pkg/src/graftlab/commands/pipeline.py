from typing import Annotated

import typer
from rich.console import Console

from graftlab.models import ExperimentKind

from ._options import ConfigOption
from ._utils import _run_experiment

console = Console()


def pipeline_cmd(
    ctx: typer.Context,
    config: ConfigOption = None,
    surface: Annotated[
        str | None, typer.Option("--surface", help="'l-shape', 'square-torus', 'octagon' or a JSON surface")
    ] = None,
    s: Annotated[list[float] | None, typer.Option("--s", help="Horizontal stretch factor, repeatable")] = None,
    splits: Annotated[int | None, typer.Option("--splits", help="Train track splittings after the decomposition")] = None,
    weight_scale: Annotated[
        float | None, typer.Option("--weight-scale", help="Grafting weight per unit of transverse width")
    ] = None,
) -> None:
    """Stretch a flat surface, split its train track, round the weights and graft.

    pipeline-weights.csv has s, branch, label, weight_2pi (the scaled
    transverse width in units of 2 pi) and integral (the rounded weight).
    pipeline-graft.csv has one row per grafted loop: s, loop (its branch
    labels), length, weight, modulus and area. pipeline-reports.json holds
    one metric report per stretch factor.
    """
    _run_experiment(
        ctx, ExperimentKind.PIPELINE, config, console, surface=surface, s_values=s, splits=splits, weight_scale=weight_scale
    )
