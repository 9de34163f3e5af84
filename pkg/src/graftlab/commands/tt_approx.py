from typing import Annotated

import typer
from rich.console import Console

from graftlab.models import ExperimentKind

from ._options import ConfigOption
from ._utils import _run_experiment

console = Console()


def tt_approx_cmd(
    ctx: typer.Context,
    config: ConfigOption = None,
    track: Annotated[
        str | None, typer.Option("--track", help="'annulus', 'six-branch', 'nine-branch' or a JSON train track")
    ] = None,
    weight: Annotated[list[str] | None, typer.Option("--weight", help="Branch weight as p/q, one per branch in order")] = None,
    samples: Annotated[int | None, typer.Option("--samples", help="Random balanced vectors to round")] = None,
) -> None:
    """Round balanced rational weights to positive balanced integers.

    tt-approx.csv has one row per branch of every sample: sample, branch
    (index), label, weight (the rational input), integral (the rounded
    weight) and deviation, their distance.
    """
    _run_experiment(ctx, ExperimentKind.TT_APPROX, config, console, track=track, weights=weight, samples=samples)
