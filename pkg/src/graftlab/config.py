import os
from pathlib import Path
from typing import Literal

from pydantic import Field, field_validator
from pydantic_settings import (
    BaseSettings,
    JsonConfigSettingsSource,
    PydanticBaseSettingsSource,
    SettingsConfigDict,
    YamlConfigSettingsSource,
)


class LabSettings(BaseSettings):
    """Lab settings loaded from environment variables, .env and an optional settings file"""

    model_config = SettingsConfigDict(
        env_prefix="GRAFTLAB_",  # GRAFTLAB_THREADS, GRAFTLAB_SEED, ...
        env_file=".env",
        env_file_encoding="utf-8",
        extra="ignore",
    )
    threads: int = Field(default_factory=lambda: os.cpu_count() or 1, ge=1)  # caps parallel sweeps
    seed: int = 0
    output_dir: Path = Path("graftlab-out")
    # loguru level of the stderr sink; DEBUG and TRACE also print tracebacks and the settings
    log_level: Literal["TRACE", "DEBUG", "INFO", "SUCCESS", "WARNING", "ERROR", "CRITICAL"] = "INFO"

    # Tolerances of the embedded Runge-Kutta integrator used for the Schwarzian ODE
    rtol: float = Field(default=1e-10, gt=0)
    atol: float = Field(default=1e-12, gt=0)

    # Cells per side of every mesh patch in the quasiconformal comparisons
    mesh_size: int = Field(default=64, ge=4)

    @field_validator("log_level", mode="before")
    @classmethod
    def _upper_level(cls, value):
        return value.upper() if isinstance(value, str) else value

    @classmethod
    def settings_customise_sources(
        cls,
        settings_cls: type[BaseSettings],
        init_settings: PydanticBaseSettingsSource,
        env_settings: PydanticBaseSettingsSource,
        dotenv_settings: PydanticBaseSettingsSource,
        file_secret_settings: PydanticBaseSettingsSource,
    ) -> tuple[PydanticBaseSettingsSource, ...]:
        """Inject an optional JSON/YAML settings file as a low-priority source.

        Pass the file path via the ``_config_file`` init kwarg. Sources earlier
        in the returned tuple win, so env vars and explicit init kwargs still
        override values from the file.
        """
        config_file = init_settings.init_kwargs.pop("_config_file", None)

        sources: list[PydanticBaseSettingsSource] = [
            init_settings,
            env_settings,
            dotenv_settings,
        ]

        if config_file:
            path = Path(config_file)
            if not path.is_file():
                raise FileNotFoundError(f"Settings file not found: {path}")
            suffix = path.suffix.lower()
            if suffix == ".json":
                sources.append(JsonConfigSettingsSource(settings_cls, json_file=path))
            elif suffix in (".yaml", ".yml"):
                sources.append(YamlConfigSettingsSource(settings_cls, yaml_file=path))
            else:
                raise ValueError(f"Unsupported settings file extension {suffix!r}. Use .json, .yaml, or .yml")

        sources.append(file_secret_settings)
        return tuple(sources)

    @property
    def integrator_tolerances(self) -> dict[str, float]:
        return {"rtol": self.rtol, "atol": self.atol}


# There is no global settings object here; commands build one so that flags
# can override env vars and files.
