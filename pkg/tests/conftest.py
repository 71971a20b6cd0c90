import numpy as np
import pytest

from lib.cli.random_data import random_states
from lib.wave.coefficients import DissipationModel
from lib.wave.coefficients import parse_profile
from lib.wave.spectral_core import GridSpec


@pytest.fixture(autouse=True)
def log_dir(tmp_path, monkeypatch):
    """Keep log files out of the working tree."""
    monkeypatch.setattr("lib.core.logger.LOG_DIR", str(tmp_path / "logs"))
    return tmp_path / "logs"


@pytest.fixture
def tiny_grid() -> GridSpec:
    return GridSpec.parse("1d:16")


@pytest.fixture
def mode_grid() -> GridSpec:
    return GridSpec.parse("1d:8")


@pytest.fixture
def grid_2d() -> GridSpec:
    return GridSpec.parse("2d:8")


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(1234)


@pytest.fixture
def interval_model() -> DissipationModel:
    return parse_profile("interval:mu0=0.3,t0=0,t1=1")


@pytest.fixture
def gaussian_model() -> DissipationModel:
    return parse_profile("gaussian:mu0=0.5,sigma=1")


@pytest.fixture
def algebraic_model() -> DissipationModel:
    return parse_profile("algebraic:mu0=1,p=2")


@pytest.fixture
def bump_model() -> DissipationModel:
    return parse_profile("gaussian:mu0=0.5,sigma=1*bump:width=1,height=1")


@pytest.fixture
def antidamped_model() -> DissipationModel:
    return parse_profile("interval:mu0=0.3,t0=0,t1=1,sign=-1")


@pytest.fixture
def tiny_states(tiny_grid):
    return random_states(tiny_grid, seed=7, count=5)
