"""Command helper functions."""

from dataclasses import dataclass
from pathlib import Path

import rich
import typer
from pydantic import ValidationError
from rich.console import Console

from graftlab.config import LabSettings
from graftlab.errors import ConfigurationError
from graftlab.logging import debug_enabled, setup_logging
from graftlab.models import ExperimentKind, RunManifest
from graftlab.runner import MANIFEST_NAME, load_config, run


@dataclass(frozen=True)
class SharedOptions:
    """Options declared on the root Typer callback and shared across subcommands.

    Provided to each subcommand as ``typer.Context`` so each can access
    the same flags without redeclaring them.
    """

    settings: Path | None = None
    output_dir: Path | None = None
    threads: int | None = None
    seed: int | None = None


def _settings(
    threads: int | None = None,
    config_file: Path | None = None,
) -> LabSettings:
    """Helper that creates the LabSettings instance and applies its log level.

    Returns:
        The settings instance.
    """
    try:
        overrides: dict = {}
        if threads is not None:
            overrides["threads"] = threads
        if config_file:
            overrides["_config_file"] = config_file
        settings = LabSettings(**overrides)
    except ValidationError as e:
        raise ConfigurationError(f"Error creating settings: {e}") from e
    except (FileNotFoundError, ValueError) as e:
        raise ConfigurationError(f"Error loading settings file: {e}") from e
    else:
        setup_logging(settings.log_level)
        if debug_enabled():
            rich.print(settings)
        return settings


def _run_experiment(ctx: typer.Context, kind: ExperimentKind, config: Path | None, console: Console, **overrides) -> RunManifest:
    """Load the experiment config, apply flag overrides and run it.

    Flags win over the config file, which wins over the settings. The
    process exits nonzero when every sweep point failed.
    """
    shared: SharedOptions = ctx.obj or SharedOptions()
    settings = _settings(threads=shared.threads, config_file=shared.settings)
    cfg = load_config(config, kind, output_dir=shared.output_dir, seed=shared.seed, **overrides)
    manifest = run(cfg, settings, base_dir=config.parent if config else Path.cwd())

    output_dir = cfg.output_dir or settings.output_dir
    for entry in manifest.files:
        rows = "" if entry.rows is None else f" ({entry.rows} rows)"
        console.print(f"[bold cyan]Wrote:[/] {output_dir / entry.path}{rows}")
    for error in manifest.errors:
        console.print(f"[bold yellow]Failed:[/] {error.step}: {error.error}")
    console.print(f"[bold cyan]Manifest:[/] {output_dir / MANIFEST_NAME} [dim]({manifest.wall_time:.2f}s)[/]")

    if manifest.errors and not any(entry.rows for entry in manifest.files):
        raise typer.Exit(code=max(e.exit_code for e in manifest.errors))
    return manifest
