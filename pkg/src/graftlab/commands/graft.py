from typing import Annotated

import typer
from rich.console import Console

from graftlab.models import ExperimentKind

from ._options import ConfigOption
from ._utils import _run_experiment

console = Console()


def graft_cmd(
    ctx: typer.Context,
    config: ConfigOption = None,
    group: Annotated[str | None, typer.Option("--group", help="'octagon' or a JSON Fuchsian group")] = None,
    multiloop: Annotated[str | None, typer.Option("--multiloop", help="JSON multiloop of generator words")] = None,
    t: Annotated[list[float] | None, typer.Option("--t", help="Point on the grafting ray, repeatable")] = None,
) -> None:
    """Graft a closed hyperbolic surface along t times a multiloop.

    graft.csv has one row per cylinder: t, loop (the word), length (of the
    geodesic, the circumference), weight (the height), modulus (weight /
    length) and area. graft-reports.json holds the full metric reports.
    """
    _run_experiment(ctx, ExperimentKind.GRAFT, config, console, group=group, multiloop=multiloop, t_range=t)
