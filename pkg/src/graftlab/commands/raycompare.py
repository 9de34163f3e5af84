from typing import Annotated

import typer
from rich.console import Console

from graftlab.errors import ConfigurationError
from graftlab.models import ExperimentKind
from graftlab.torus_oracle import SlopeCurve

from ._options import ConfigOption
from ._utils import _run_experiment

console = Console()


def _tau(text: str | None) -> complex | None:
    if text is None:
        return None
    try:
        return complex(text.replace(" ", ""))
    except ValueError as e:
        raise ConfigurationError(f"cannot read tau {text!r}, expected a complex number such as 0.3+1j") from e


def raycompare_cmd(
    ctx: typer.Context,
    config: ConfigOption = None,
    tau: Annotated[str | None, typer.Option("--tau", help="Torus modulus, e.g. 0.3+1j")] = None,
    slope: Annotated[str | None, typer.Option("--slope", help="Grafting slope p/q")] = None,
    s: Annotated[list[float] | None, typer.Option("--s", help="Ray time, repeatable")] = None,
) -> None:
    """Compare the grafting ray of a flat torus with the Teichmueller ray along a slope.

    raycompare.csv has s, teich_re and teich_im (the Teichmueller ray at
    time s), graft_re and graft_im (the torus grafted by the matched weight)
    and gap, the Teichmueller distance between the two.
    """
    curve = SlopeCurve.parse(slope) if slope else None
    _run_experiment(
        ctx,
        ExperimentKind.RAYCOMPARE,
        config,
        console,
        tau=_tau(tau),
        slope=(curve.p, curve.q) if curve else None,
        s_range=s,
    )
