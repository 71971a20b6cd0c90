import pytest
from hypothesis import given
from hypothesis import seed
from hypothesis import settings
from hypothesis import strategies as st

from cli.config.models import RunConfig
from cli.config.parse import build_config
from cli.config.parse import load_defaults
from cli.config.parse import parse_config
from cli.config.parse import serialize_config
from lib.cli.init_presets import init_presets
from lib.cli.init_presets import resolve_preset
from lib.core.errors import ConfigError
from lib.wave.dyson_series import QuadratureRule


def issues_of(text: str) -> dict:
    with pytest.raises(ConfigError) as info:
        parse_config(text)
    return {issue.key: issue.constraint for issue in info.value.issues}


def test_empty_text_gives_defaults():
    assert parse_config("") == RunConfig()


def test_shipped_defaults_match_model():
    assert build_config(load_defaults()) == RunConfig()


def test_parse_overrides():
    config = parse_config(
        "grid: 2d:32\nprofile: algebraic:mu0=1,p=3\nquadrature: trapezoid\n"
        "times: [1, 2, 4]\n",
    )
    assert config.grid_spec.shape == (32, 32)
    assert config.model.time.p == 3
    assert config.quadrature == QuadratureRule.TRAPEZOID
    assert config.times == (1.0, 2.0, 4.0)


def test_grid_is_normalized():
    assert parse_config("grid: ' 1D:64 '").grid == "1d:64"


def test_non_integrable_profile_is_named():
    issues = issues_of("profile: algebraic:mu0=1,p=1")
    assert "L1-in-time" in issues["profile"]


def test_unknown_key():
    assert issues_of("grids: 1d:16")["grids"] == "unknown key"


def test_every_violation_is_reported():
    issues = issues_of("series_tol: -1\nmax_terms: 0\nseed: -3")
    assert set(issues) == {"series_tol", "max_terms", "seed"}


@pytest.mark.parametrize(
    "text,key",
    [
        ("times: [4, 2]", "times"),
        ("times: []", "times"),
        ("omegas: [-1]", "omegas"),
        ("grid: 1d:100", "grid"),
        ("t_start: 2\nt_end: 1", "<config>"),
    ],
)
def test_invalid_values(text, key):
    assert key in issues_of(text)


@pytest.mark.parametrize("text", ["[1, 2]", "grid: [unclosed", "just text"])
def test_text_must_be_a_mapping(text):
    assert "<config>" in issues_of(text)


@seed(3)
@settings(max_examples=40, deadline=None)
@given(
    grid=st.sampled_from(["1d:16", "2d:8", "3d:4", "1d:32@6.0"]),
    profile=st.sampled_from(list(init_presets().values())),
    tol=st.floats(1e-14, 1e-2),
    run_seed=st.integers(0, 2**31),
    times=st.lists(
        st.floats(0, 1e3, allow_nan=False, allow_subnormal=False),
        min_size=1,
        max_size=6,
        unique=True,
    ).map(sorted),
)
def test_serialized_config_parses_back(grid, profile, tol, run_seed, times):
    config = RunConfig(
        grid=grid,
        profile=profile,
        horizon_tol=tol,
        seed=run_seed,
        times=tuple(times),
        out="results/rate.csv",
    )
    assert parse_config(serialize_config(config)) == config


def test_presets():
    presets = init_presets()
    assert {"damped_interval", "algebraic", "gaussian", "antidamped"} <= set(
        presets,
    )
    assert resolve_preset("algebraic", presets) == "algebraic:mu0=1,p=2"
    with pytest.raises(ConfigError):
        resolve_preset("nonexistent", presets)


def test_missing_presets_file(tmp_path):
    with pytest.raises(FileNotFoundError):
        init_presets(tmp_path / "presets.yaml")
