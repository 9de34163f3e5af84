"""Subcommands of the graftlab CLI."""

__all__ = ["devmap_cmd", "graft_cmd", "pipeline_cmd", "qc_cmd", "raycompare_cmd", "tt_approx_cmd", "version_cmd"]


from .devmap import devmap_cmd
from .graft import graft_cmd
from .pipeline import pipeline_cmd
from .qc import qc_cmd
from .raycompare import raycompare_cmd
from .tt_approx import tt_approx_cmd
from .version import version_cmd
