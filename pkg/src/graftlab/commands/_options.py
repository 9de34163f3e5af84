"""Option types shared by the experiment subcommands."""

from pathlib import Path
from typing import Annotated

import typer

ConfigOption = Annotated[
    Path | None,
    typer.Option(
        "--config",
        "-c",
        help="""Path to a JSON experiment config.

        Flags given on the command line override the values from the file.
    """,
        exists=True,
        dir_okay=False,
        readable=True,
    ),
]
