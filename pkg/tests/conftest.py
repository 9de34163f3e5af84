"""Shared pytest fixtures for the graftlab test suite."""

import pytest

from graftlab.config import LabSettings
from graftlab.flat_surfaces import (
    HalfTranslationSurface,
    golden_l_shape,
    regular_octagon,
    square_torus,
    traintrack_decomposition,
)
from graftlab.grafting import FuchsianSurface, octagon_group
from graftlab.logging import setup_logging
from graftlab.traintracks import TrainTrack, shipped_tracks

# ---------------------------------------------------------------------------
# Train tracks
# ---------------------------------------------------------------------------
# The shipped tracks are immutable, so one instance serves the whole session.


@pytest.fixture(scope="session")
def tracks() -> dict[str, TrainTrack]:
    return shipped_tracks()


@pytest.fixture(scope="session")
def annulus(tracks) -> TrainTrack:
    return tracks["annulus"]


@pytest.fixture(scope="session")
def six_branch(tracks) -> TrainTrack:
    return tracks["six-branch"]


@pytest.fixture(scope="session")
def nine_branch(tracks) -> TrainTrack:
    return tracks["nine-branch"]


# ---------------------------------------------------------------------------
# Flat surfaces
# ---------------------------------------------------------------------------


@pytest.fixture(scope="session")
def torus() -> HalfTranslationSurface:
    return square_torus()


@pytest.fixture(scope="session")
def l_shape() -> HalfTranslationSurface:
    return golden_l_shape()


@pytest.fixture(scope="session")
def octagon() -> HalfTranslationSurface:
    return regular_octagon()


@pytest.fixture(scope="session")
def l_shape_decomposition(l_shape):
    """Golden-slope decomposition of the L-shape before any split."""
    return traintrack_decomposition(l_shape)


# ---------------------------------------------------------------------------
# Hyperbolic surfaces
# ---------------------------------------------------------------------------


@pytest.fixture(scope="session")
def genus_two() -> FuchsianSurface:
    return octagon_group()


# ---------------------------------------------------------------------------
# Settings
# ---------------------------------------------------------------------------


@pytest.fixture
def settings(tmp_path, monkeypatch) -> LabSettings:
    """Settings isolated from the caller's environment and .env file."""
    for var in ("GRAFTLAB_THREADS", "GRAFTLAB_SEED", "GRAFTLAB_OUTPUT_DIR", "GRAFTLAB_LOG_LEVEL"):
        monkeypatch.delenv(var, raising=False)
    monkeypatch.chdir(tmp_path)
    return LabSettings(output_dir=tmp_path / "out", threads=2)


@pytest.fixture(autouse=True)
def reset_logging():
    """Commands apply the settings log level to the global logger."""
    yield
    setup_logging("INFO")
