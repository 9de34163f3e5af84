from pydantic import BaseModel, ConfigDict, Field, model_validator


class CylinderReport(BaseModel):
    """Euclidean cylinder grafted in along one loop."""

    model_config = ConfigDict(frozen=True)

    loop: str
    length: float = Field(..., gt=0, description="Circumference: the geodesic length, or the total flat rectangle height in pipeline reports")
    weight: float = Field(..., ge=0, description="Grafting weight, the height")

    @property
    def modulus(self) -> float:
        return self.weight / self.length

    @property
    def area(self) -> float:
        return self.weight * self.length


class ThurstonMetricReport(BaseModel):
    """Thurston metric of a grafted surface: hyperbolic part plus flat cylinders."""

    model_config = ConfigDict(frozen=True)

    genus: int
    t: float = 1.0
    hyperbolic_area: float
    cylinders: tuple[CylinderReport, ...] = ()
    holonomy_preserving: bool = False
    collar_overlaps: tuple[tuple[str, str], ...] = ()

    @property
    def cylinder_area(self) -> float:
        return sum(c.area for c in self.cylinders)

    @property
    def total_area(self) -> float:
        return self.hyperbolic_area + self.cylinder_area


class DilatationReport(BaseModel):
    model_config = ConfigDict(frozen=True)

    sup_k: float
    mean_k: float
    min_stretch: float
    max_stretch: float
    cells: int

    @model_validator(mode="after")
    def ordered(self) -> "DilatationReport":
        if self.sup_k < self.mean_k - 1e-12:
            raise ValueError("sup K below mean K")
        return self


class RayComparisonReport(BaseModel):
    """Distance surrogate between a grafting ray and a Teichmueller ray, per parameter."""

    model_config = ConfigDict(frozen=True)

    method: str
    s: tuple[float, ...]
    gap: tuple[float, ...]

    @model_validator(mode="after")
    def nonnegative(self) -> "RayComparisonReport":
        if len(self.s) != len(self.gap):
            raise ValueError("one gap value per parameter required")
        if any(g < 0 for g in self.gap):
            raise ValueError("gaps are distances and cannot be negative")
        return self


class ManifestEntry(BaseModel):
    path: str
    sha256: str
    rows: int | None = None


class ErrorEntry(BaseModel):
    step: str
    error: str
    exit_code: int


class RunManifest(BaseModel):
    kind: str
    version: str
    python: str
    packages: dict[str, str]
    seed: int
    parameters: dict
    wall_time: float
    files: list[ManifestEntry] = Field(default_factory=list)
    errors: list[ErrorEntry] = Field(default_factory=list)


# Header of every CSV the runner writes; docs/formats.md describes each column.
CSV_COLUMNS: dict[str, tuple[str, ...]] = {
    "devmap": ("R", "sector", "m", "sup_error"),
    "devmap-path": ("t", "z_re", "z_im", "f_re", "f_im", "wronskian"),
    "graft": ("t", "loop", "length", "weight", "modulus", "area"),
    "qc": ("piece", "length", "width", "supK", "meanK", "minStretch", "maxStretch"),
    "raycompare": ("s", "teich_re", "teich_im", "graft_re", "graft_im", "gap"),
    "tt-approx": ("sample", "branch", "label", "weight", "integral", "deviation"),
    "pipeline-weights": ("s", "branch", "label", "weight_2pi", "integral"),
    "pipeline-graft": ("s", "loop", "length", "weight", "modulus", "area"),
}
