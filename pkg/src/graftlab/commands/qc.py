from typing import Annotated

import typer
from rich.console import Console

from graftlab.models import ExperimentKind

from ._options import ConfigOption
from ._utils import _run_experiment

console = Console()


def qc_cmd(
    ctx: typer.Context,
    config: ConfigOption = None,
    length: Annotated[list[float] | None, typer.Option("--length", help="Geodesic length of the rectangle, repeatable")] = None,
    width: Annotated[list[float] | None, typer.Option("--width", help="Length of the bottom leaf, repeatable")] = None,
    hexagon_size: Annotated[
        list[float] | None, typer.Option("--hexagon-size", help="Grafting width of a hexagon around a tripod, repeatable")
    ] = None,
    graft_width: Annotated[float | None, typer.Option("--graft-width", help="Grafting width of the rectangles")] = None,
    mesh_size: Annotated[int | None, typer.Option("--mesh-size", help="Cells per side of every mesh piece")] = None,
) -> None:
    """Dilatation of the maps straightening grafted rectangles and hexagons.

    qc.csv has piece (rectangle or hexagon with its grafting width), length,
    width (the bottom leaf), supK, meanK, minStretch and maxStretch, the
    extreme metric stretch factors over all cells.
    """
    _run_experiment(
        ctx,
        ExperimentKind.QC,
        config,
        console,
        lengths=length,
        widths=width,
        hexagon_sizes=hexagon_size,
        graft_width=graft_width,
        mesh_size=mesh_size,
    )
