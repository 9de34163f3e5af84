"""
main

The main module is the entrypoint of grafting-lab.

Once the package is installed the `graftlab` command is available. The
module can also be executed directly via python -m graftlab.

"""

import sys
from pathlib import Path
from typing import Annotated

import rich
import typer
from rich.console import Console

from graftlab.commands import (
    devmap_cmd,
    graft_cmd,
    pipeline_cmd,
    qc_cmd,
    raycompare_cmd,
    tt_approx_cmd,
    version_cmd,
)
from graftlab.commands._utils import SharedOptions
from graftlab.errors import GraftlabError
from graftlab.logging import debug_enabled, logger, setup_logging

# Initialize the Typer application
GraftlabCli = typer.Typer(
    name="graftlab",
    help="Numerical experiments on grafting, projective structures and Teichmueller rays",
    add_completion=False,
    no_args_is_help=True,
)


@GraftlabCli.callback()
def main(
    ctx: typer.Context,
    settings: Annotated[
        Path | None,
        typer.Option(
            "--settings",
            "-s",
            help="""Path to a JSON or YAML settings file (extension must be .json, .yaml or .yml).

            Values from the file populate LabSettings. Environment variables and other
            CLI flags still take precedence over the file.
        """,
            exists=True,
            dir_okay=False,
            readable=True,
        ),
    ] = None,
    output_dir: Annotated[
        Path | None,
        typer.Option("--output-dir", "-o", help="Directory for CSV files and the manifest. Overrides the experiment config."),
    ] = None,
    threads: Annotated[
        int | None,
        typer.Option("--threads", "-t", min=1, help="Cap on parallel sweep points. Defaults to GRAFTLAB_THREADS or the CPU count."),
    ] = None,
    seed: Annotated[
        int | None,
        typer.Option("--seed", help="Seed of every random choice, recorded in the manifest."),
    ] = None,
) -> None:
    """Callback implements global flags that are shared to all subcommands via typer.Context."""
    ctx.obj = SharedOptions(settings=settings, output_dir=output_dir, threads=threads, seed=seed)
    if settings:
        rich.print(f"Settings loaded {settings.absolute()}")


# Add commands directly to the app
GraftlabCli.command("version")(version_cmd)
GraftlabCli.command("devmap")(devmap_cmd)
GraftlabCli.command("graft")(graft_cmd)
GraftlabCli.command("qc")(qc_cmd)
GraftlabCli.command("raycompare")(raycompare_cmd)
GraftlabCli.command("tt-approx")(tt_approx_cmd)
GraftlabCli.command("pipeline")(pipeline_cmd)

_console = Console(file=sys.stdout, force_terminal=True)


# Entry point for graftlab script as defined in pyproject.toml
def cli():
    # replaced by the settings log level once a command has loaded LabSettings
    setup_logging("INFO")
    try:
        GraftlabCli()
    except GraftlabError as e:
        _console.print(f"[bold red]{type(e).__name__}:[/] {e}")
        if debug_enabled():
            logger.exception(e)
        sys.exit(e.exit_code)
    except Exception as e:
        _console.print(f"[bold red]Application failed: {e!r}[/]")
        if debug_enabled():
            logger.exception(e)
        sys.exit(1)


# Entry point for python -m graftlab
if __name__ == "__main__":
    cli()
