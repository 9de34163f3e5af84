from .inputs import (
    ExperimentConfig,
    ExperimentKind,
    FuchsianGroupSpec,
    GluingSpec,
    LoopSpec,
    MultiloopSpec,
    PathSpec,
    SurfaceSpec,
    SwitchSpec,
    TrackSpec,
)
from .reports import (
    CSV_COLUMNS,
    CylinderReport,
    DilatationReport,
    ErrorEntry,
    ManifestEntry,
    RayComparisonReport,
    RunManifest,
    ThurstonMetricReport,
)

__all__ = [
    "CSV_COLUMNS",
    "CylinderReport",
    "DilatationReport",
    "ErrorEntry",
    "ExperimentConfig",
    "ExperimentKind",
    "FuchsianGroupSpec",
    "GluingSpec",
    "LoopSpec",
    "ManifestEntry",
    "MultiloopSpec",
    "PathSpec",
    "RayComparisonReport",
    "RunManifest",
    "SurfaceSpec",
    "SwitchSpec",
    "ThurstonMetricReport",
    "TrackSpec",
]
