import functools
import math

import numpy as np
import pytest

from lib.cli.random_data import random_state
from lib.core.errors import ProfileError
from lib.wave.coefficients import DissipationModel
from lib.wave.coefficients import integral_sup_b
from lib.wave.coefficients import parse_profile
from lib.wave.dyson_series import TimeMesh
from lib.wave.dyson_series import peano_baker_apply
from lib.wave.mode_oracle import liouville_det
from lib.wave.mode_oracle import mode_Q
from lib.wave.mode_oracle import mode_scattering_matrix
from lib.wave.mode_oracle import mode_wave_operator
from lib.wave.mode_oracle import omega_continuity
from lib.wave.mode_oracle import ordered_product
from lib.wave.scattering import scattering_apply
from lib.wave.scattering import scattering_horizon
from lib.wave.spectral_core import StateVector
from lib.wave.spectral_core import energy_norm


def test_free_model_gives_identity():
    result = mode_Q(3.0, 0.0, 1.0, DissipationModel.free())
    np.testing.assert_array_equal(result.matrix, np.eye(2))


def test_zero_frequency_closed_form(interval_model):
    result = mode_Q(0.0, 0.0, 1.0, interval_model)
    expected = np.eye(2) + (math.exp(-0.3) - 1) / 2 * np.ones((2, 2))
    np.testing.assert_allclose(result.matrix, expected, atol=1e-12)


@pytest.mark.parametrize("omega", [0.0, 1.0, 2.0, 4.0, 8.0])
def test_determinant_follows_liouville(interval_model, omega):
    result = mode_Q(omega, 0.0, 2.0, interval_model)
    expected = liouville_det(interval_model, 0.0, 2.0)
    assert expected == pytest.approx(math.exp(-0.3))
    assert result.det == pytest.approx(expected, rel=1e-10)
    assert result.conjugated().det == pytest.approx(expected, rel=1e-10)


def test_antidamped_determinant(antidamped_model):
    result = mode_Q(1.0, 0.0, 1.0, antidamped_model)
    assert result.det == pytest.approx(math.exp(0.3), rel=1e-10)


def test_mode_oracle_needs_x_independence(bump_model):
    with pytest.raises(ProfileError):
        mode_Q(1.0, 0.0, 1.0, bump_model)


def test_mode_oracle_rejects_negative_frequency(interval_model):
    with pytest.raises(ValueError):
        mode_Q(-1.0, 0.0, 1.0, interval_model)


def test_ordered_product(rng):
    steps = rng.standard_normal((5, 2, 2)) + 1j * rng.standard_normal(
        (5, 2, 2),
    )
    expected = functools.reduce(lambda acc, m: m @ acc, steps, np.eye(2))
    np.testing.assert_allclose(ordered_product(steps), expected, atol=1e-12)
    np.testing.assert_array_equal(
        ordered_product(np.empty((0, 2, 2))),
        np.eye(2),
    )


def test_compact_wave_operator_stabilizes(interval_model):
    near = mode_wave_operator(2.0, interval_model, horizon=1.0)
    far = mode_wave_operator(2.0, interval_model, horizon=8.0)
    np.testing.assert_allclose(far.matrix, near.matrix, atol=1e-12)


def test_wave_operator_determinant(gaussian_model):
    total = integral_sup_b(gaussian_model, 0.0, math.inf)
    for omega in (0.0, 1.5, 4.0):
        result = mode_wave_operator(omega, gaussian_model)
        assert abs(result.det) == pytest.approx(math.exp(-total), rel=1e-9)


def test_matches_grid_series(mode_grid, gaussian_model):
    state = random_state(mode_grid, np.random.default_rng(21))
    mesh = TimeMesh.build(0.0, 2.0, gaussian_model, mode_grid, density=1024)
    series = peano_baker_apply(0.0, 2.0, state, gaussian_model, mesh).state
    abs_xi = mode_grid.abs_xi()
    for index in range(mode_grid.points):
        matrix = mode_Q(abs_xi[index], 0.0, 2.0, gaussian_model).matrix
        np.testing.assert_allclose(
            series.array[:, index],
            matrix @ state.array[:, index],
            atol=1e-10,
        )


def test_scattering_matches_grid(mode_grid):
    model = parse_profile("gaussian:mu0=0.5,sigma=0.5,center=1")
    state = random_state(mode_grid, np.random.default_rng(22))
    image = scattering_apply(state, model, 1e-10, density=1024)
    matrix = mode_scattering_matrix(2.0, model).matrix
    for index in (2, 6):
        np.testing.assert_allclose(
            image.array[:, index],
            matrix @ state.array[:, index],
            atol=1e-9,
        )


def test_scattering_factors_share_one_horizon(mode_grid):
    model = parse_profile("gaussian:mu0=0.5,sigma=0.5,center=1")
    state = random_state(mode_grid, np.random.default_rng(22))
    norm = energy_norm(state)
    horizon = scattering_horizon(model.on_grid(mode_grid), norm, 1e-10)
    selected = scattering_apply(state, model, 1e-10, density=1024)
    explicit = scattering_apply(
        state,
        model,
        1e-10,
        horizon=horizon,
        density=1024,
    )
    np.testing.assert_array_equal(selected.array, explicit.array)
    matrix = mode_scattering_matrix(2.0, model, horizon=horizon).matrix
    for index in (2, 6):
        np.testing.assert_allclose(
            explicit.array[:, index],
            matrix @ state.array[:, index],
            atol=1e-10,
        )


def test_even_profile_scattering_is_unimodular(gaussian_model):
    result = mode_scattering_matrix(1.0, gaussian_model)
    assert abs(result.det) == pytest.approx(1.0, abs=1e-8)
    np.testing.assert_allclose(result.matrix, np.eye(2), atol=1e-8)


def test_zero_mode_scattering_state(tiny_grid):
    model = parse_profile("gaussian:mu0=0.5,sigma=0.5,center=1")
    array = np.zeros((2, 16), complex)
    array[1, 0] = 1.0
    state = StateVector.from_array(tiny_grid, array)
    image = scattering_apply(state, model, 1e-10)
    matrix = mode_scattering_matrix(0.0, model).matrix
    np.testing.assert_allclose(image.array[:, 0], matrix[:, 1], atol=1e-8)


def test_frequency_continuity(gaussian_model):
    constant = omega_continuity([0.0, 0.5, 1.0, 2.0], gaussian_model)
    assert 0 < constant < math.inf
    with pytest.raises(ValueError):
        omega_continuity([1.0], gaussian_model)
