"""Schemas of every JSON input: surfaces, tracks, groups, multiloops and experiment configs."""

import math
from enum import Enum
from pathlib import Path
from typing import Literal

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

# Exact scalars are written as ints, "p/q" strings or {"a": .., "b": .., "D": ..}
ScalarInput = int | float | str | dict[str, int | str]


class SwitchSpec(BaseModel):
    model_config = ConfigDict(populate_by_name=True)

    incoming: int = Field(..., alias="in", ge=0)
    outgoing: tuple[int, int] = Field(..., alias="out")


class TrackSpec(BaseModel):
    branches: int = Field(..., ge=1, description="Number of branches")
    switches: list[SwitchSpec] = Field(default_factory=list)
    labels: list[str] | None = None


class GluingSpec(BaseModel):
    model_config = ConfigDict(populate_by_name=True)

    source: tuple[int, int] = Field(..., alias="from")
    target: tuple[int, int] = Field(..., alias="to")
    kind: Literal["translation", "flip"] = "translation"


class SurfaceSpec(BaseModel):
    polygons: list[list[tuple[ScalarInput, ScalarInput]]] = Field(..., min_length=1)
    gluings: list[GluingSpec]
    singular: list[tuple[int, int]] = Field(default_factory=list)


class FuchsianGroupSpec(BaseModel):
    """Generators as real 2x2 matrices keyed by lowercase letters; uppercase letters are inverses."""

    genus: int = Field(..., ge=2)
    generators: dict[str, tuple[tuple[float, float], tuple[float, float]]]
    relation: str

    @field_validator("generators")
    @classmethod
    def lowercase_names(cls, v: dict) -> dict:
        bad = [k for k in v if len(k) != 1 or not k.islower()]
        if bad:
            raise ValueError(f"generator names must be single lowercase letters, got {bad}")
        return v

    @model_validator(mode="after")
    def relation_uses_generators(self) -> "FuchsianGroupSpec":
        unknown = {c for c in self.relation if c.lower() not in self.generators}
        if unknown:
            raise ValueError(f"relation uses unknown letters {sorted(unknown)}")
        return self


class LoopSpec(BaseModel):
    word: str = Field(..., min_length=1)
    weight: float = Field(..., ge=0)
    units: Literal["absolute", "2pi"] = "absolute"

    @property
    def absolute_weight(self) -> float:
        return self.weight * 2 * math.pi if self.units == "2pi" else self.weight


class MultiloopSpec(BaseModel):
    loops: list[LoopSpec] = Field(default_factory=list)


class PathSpec(BaseModel):
    """Polyline in the plane, vertices as [x, y] pairs."""

    points: list[tuple[float, float]] = Field(..., min_length=2)

    @property
    def vertices(self) -> list[complex]:
        return [complex(x, y) for x, y in self.points]


class ExperimentKind(str, Enum):
    DEVMAP = "devmap"
    GRAFT = "graft"
    QC = "qc"
    RAYCOMPARE = "raycompare"
    TT_APPROX = "tt-approx"
    PIPELINE = "pipeline"


class ExperimentConfig(BaseModel):
    """One experiment; file fields take a path or the name of a shipped example."""

    model_config = ConfigDict(extra="forbid")

    kind: ExperimentKind
    output_dir: Path | None = None
    seed: int | None = Field(default=None, description="Defaults to the seed of the settings")

    # devmap
    q: list[complex] = Field(default_factory=lambda: [0j, 1 + 0j], description="Coefficients of q(z), constant term first")
    path: str | None = None
    radii: list[float] = Field(default_factory=lambda: [4.0, 6.0, 8.0])
    m: list[int] = Field(default_factory=lambda: [0])
    sectors: list[int] = Field(default_factory=lambda: [0, 1, 2])

    # graft
    group: str = "octagon"
    multiloop: str | None = None
    t_range: list[float] = Field(default_factory=lambda: [0.0, 1.0, 2.0])

    # qc
    lengths: list[float] = Field(default_factory=lambda: [1.0])
    widths: list[float] = Field(default_factory=lambda: [0.2, 0.1, 0.05])
    hexagon_sizes: list[float] = Field(default_factory=list)
    graft_width: float = Field(default=1.0, gt=0, description="Height of the flat band grafted into each rectangle")
    mesh_size: int | None = Field(default=None, ge=4)

    # raycompare
    tau: complex = complex(0.3, 1.0)
    slope: tuple[int, int] = (1, 0)
    s_range: list[float] = Field(default_factory=lambda: [float(s) for s in range(7)])

    # tt-approx
    track: str = "six-branch"
    weights: list[ScalarInput] | None = None
    samples: int = Field(default=1, ge=1)

    # pipeline
    surface: str = "l-shape"
    s_values: list[float] = Field(default_factory=lambda: [2.0, 4.0], description="Horizontal stretch factors")
    weight_scale: float = Field(default=1000.0, gt=0, description="Grafting weight per unit of transverse width")
    splits: int = Field(default=3, ge=0)

    @field_validator("radii", "widths", "lengths", "hexagon_sizes", "s_values")
    @classmethod
    def positive(cls, v: list[float]) -> list[float]:
        if any(x <= 0 for x in v):
            raise ValueError("values must be positive")
        return v

    @field_validator("sectors")
    @classmethod
    def sector_range(cls, v: list[int]) -> list[int]:
        if any(k not in (0, 1, 2) for k in v):
            raise ValueError("anti-Stokes sectors are numbered 0, 1, 2")
        return v

    @field_validator("m")
    @classmethod
    def nonnegative_m(cls, v: list[int]) -> list[int]:
        if any(k < 0 for k in v):
            raise ValueError("m must be nonnegative")
        return v

    @field_validator("tau")
    @classmethod
    def upper_half_plane(cls, v: complex) -> complex:
        if v.imag <= 0:
            raise ValueError("tau must have positive imaginary part")
        return v

    @field_validator("slope")
    @classmethod
    def coprime(cls, v: tuple[int, int]) -> tuple[int, int]:
        if math.gcd(*v) != 1:
            raise ValueError(f"slope {v} is not a pair of coprime integers")
        return v
