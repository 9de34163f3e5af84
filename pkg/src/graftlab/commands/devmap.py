from typing import Annotated

import typer
from rich.console import Console

from graftlab.models import ExperimentKind

from ._options import ConfigOption
from ._utils import _run_experiment

console = Console()


def devmap_cmd(
    ctx: typer.Context,
    config: ConfigOption = None,
    radius: Annotated[list[float] | None, typer.Option("--radius", "-r", help="Radius of the sector arc, repeatable")] = None,
    sector: Annotated[list[int] | None, typer.Option("--sector", help="Anti-Stokes sector 0, 1 or 2, repeatable")] = None,
    m: Annotated[list[int] | None, typer.Option("--m", help="Power of z weighting the error, repeatable")] = None,
    path: Annotated[str | None, typer.Option("--path", help="JSON polyline to develop q along")] = None,
) -> None:
    """Compare the developing map of z dz^2 with its model exp(-sqrt(2) z^(3/2)).

    devmap.csv has the columns R (arc radius), sector, m and sup_error, the
    sup over the middle third of the arc of |f - model| |z|^m.

    With a path, devmap-path.csv has t (arc length along the path), z_re,
    z_im, f_re, f_im and wronskian, the modulus of the Wronskian of the two
    solutions.
    """
    _run_experiment(ctx, ExperimentKind.DEVMAP, config, console, radii=radius, sectors=sector, m=m, path=path)
