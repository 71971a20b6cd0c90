import math

import numpy as np
import pytest
from structlog.testing import CapturingLogger

from lib.cli.random_data import random_data
from lib.core.errors import AdjointUnavailableError
from lib.core.errors import HorizonError
from lib.wave.coefficients import DissipationModel
from lib.wave.coefficients import integral_sup_b
from lib.wave.coefficients import parse_profile
from lib.wave.scattering import NormMode
from lib.wave.scattering import RateRow
from lib.wave.scattering import Sign
from lib.wave.scattering import WaveMethod
from lib.wave.scattering import compose
from lib.wave.scattering import free_handle
from lib.wave.scattering import horizon_bound
from lib.wave.scattering import identity_handle
from lib.wave.scattering import loglog_slope
from lib.wave.scattering import operator_norm_estimate
from lib.wave.scattering import q_minus_identity_handle
from lib.wave.scattering import rate_sweep
from lib.wave.scattering import scattering_apply
from lib.wave.scattering import scattering_handle
from lib.wave.scattering import scattering_inverse_apply
from lib.wave.scattering import select_horizon
from lib.wave.scattering import strang_handle
from lib.wave.scattering import wave_operator_apply
from lib.wave.scattering import wave_operator_handle
from lib.wave.scattering import wave_operator_inverse_apply
from lib.wave.spectral_core import GridSpec
from lib.wave.spectral_core import StateVector
from lib.wave.spectral_core import energy_norm

DENSE = NormMode.DENSE_ASSEMBLY
POWER = NormMode.POWER_ITERATION


@pytest.fixture
def shifted_model() -> DissipationModel:
    return parse_profile("gaussian:mu0=0.5,sigma=0.5,center=1")


def growth(model: DissipationModel) -> float:
    return math.exp(integral_sup_b(model, 0.0, math.inf))


def zero_mode_velocity(grid: GridSpec) -> StateVector:
    array = np.zeros((2, *grid.shape), complex)
    array[1, 0] = 1.0
    return StateVector.from_array(grid, array)


def test_compact_horizon_is_support_end(interval_model):
    assert select_horizon(interval_model, 1.0, 1e-8) == 1.0
    far = parse_profile("interval:mu0=0.3,t0=0,t1=100")
    with pytest.raises(HorizonError):
        select_horizon(far, 1.0, 1e-8)


def test_trivial_horizons(gaussian_model):
    assert select_horizon(DissipationModel.free(), 1.0, 1e-8) == 0
    assert select_horizon(gaussian_model, 0.0, 1e-8) == 0
    with pytest.raises(ValueError):
        select_horizon(gaussian_model, 1.0, 0.0)


def test_gaussian_horizon_is_tight(gaussian_model):
    horizon = select_horizon(gaussian_model, 1.0, 1e-8)
    assert 0 < horizon < 64
    assert horizon_bound(gaussian_model, horizon) <= 1e-8
    assert horizon_bound(gaussian_model, horizon - 0.01) > 1e-8


def test_slow_decay_exceeds_cap(algebraic_model):
    with pytest.raises(HorizonError):
        select_horizon(algebraic_model, 1.0, 1e-8)


def test_free_model_wave_operators(tiny_states):
    state = tiny_states[0]
    free = DissipationModel.free()
    for sign in Sign:
        result = wave_operator_apply(sign, state, free)
        np.testing.assert_array_equal(result.array, state.array)
    result = scattering_apply(state, free)
    np.testing.assert_array_equal(result.array, state.array)


def test_zero_mode_closed_form(tiny_grid, interval_model):
    state = zero_mode_velocity(tiny_grid)
    forward = wave_operator_apply(Sign.PLUS, state, interval_model)
    backward = wave_operator_inverse_apply(Sign.PLUS, state, interval_model)
    assert forward.array[1, 0] == pytest.approx(math.exp(-0.3), rel=1e-10)
    assert backward.array[1, 0] == pytest.approx(math.exp(0.3), rel=1e-10)
    assert abs(forward.array[0, 0]) <= 1e-14
    assert abs(backward.array[0, 0]) <= 1e-14


def test_evaluation_paths_agree(tiny_states, gaussian_model):
    for state in tiny_states[:3]:
        via_q = wave_operator_apply(Sign.PLUS, state, gaussian_model)
        via_group = wave_operator_apply(
            Sign.PLUS,
            state,
            gaussian_model,
            method=WaveMethod.VIA_GROUP,
        )
        assert energy_norm(via_q - via_group) <= 2e-8


def test_evaluation_paths_agree_off_energy_space(tiny_states, gaussian_model):
    array = tiny_states[0].array.copy()
    array[0, 0] = 1.0
    state = StateVector.from_array(tiny_states[0].grid, array)
    via_q = wave_operator_apply(Sign.PLUS, state, gaussian_model)
    via_group = wave_operator_apply(
        Sign.PLUS,
        state,
        gaussian_model,
        method=WaveMethod.VIA_GROUP,
    )
    assert energy_norm(via_q - via_group) <= 2e-8
    assert abs(via_q.array[0, 0]) <= 1e-12


def test_compact_profile_stabilizes(tiny_states, interval_model):
    state = tiny_states[0]
    near = wave_operator_apply(Sign.PLUS, state, interval_model, horizon=1.0)
    far = wave_operator_apply(Sign.PLUS, state, interval_model, horizon=8.0)
    assert energy_norm(far - near) <= 1e-12


def test_horizon_is_certified(tiny_states, gaussian_model):
    state = tiny_states[1]
    horizon = select_horizon(gaussian_model, 1.0, 1e-8)
    selected = wave_operator_apply(Sign.PLUS, state, gaussian_model)
    longer = wave_operator_apply(
        Sign.PLUS,
        state,
        gaussian_model,
        horizon=2 * horizon,
    )
    assert energy_norm(longer - selected) <= 1e-8 + 1e-10


@pytest.mark.parametrize("sign", list(Sign))
def test_wave_operator_inverse(tiny_states, shifted_model, sign):
    oriented = shifted_model
    if sign == Sign.MINUS:
        oriented = shifted_model.reflected()
    options = {
        "horizon": select_horizon(oriented, 1.0, 1e-8),
        "density": 1024,
    }
    for state in tiny_states[:3]:
        image = wave_operator_apply(sign, state, shifted_model, **options)
        back = wave_operator_inverse_apply(
            sign,
            image,
            shifted_model,
            **options,
        )
        assert energy_norm(back - state) <= 1e-8


def test_scattering_inverse_pair(tiny_states, shifted_model):
    options = {"tol": 1e-10, "density": 1024}
    for state in tiny_states[:2]:
        image = scattering_apply(
            scattering_inverse_apply(state, shifted_model, **options),
            shifted_model,
            **options,
        )
        assert energy_norm(image - state) <= 1e-8


def test_even_profile_scatters_trivially(tiny_states, gaussian_model):
    state = tiny_states[0]
    image = scattering_apply(state, gaussian_model, 1e-10, density=1024)
    assert energy_norm(image - state) <= 1e-8


def test_shifted_profile_scatters(tiny_states, shifted_model):
    state = tiny_states[0]
    image = scattering_apply(state, shifted_model)
    assert energy_norm(image - state) > 1e-6


def test_rate_sweep_without_damping(tiny_grid):
    rows = rate_sweep(
        random_data(tiny_grid, 0),
        DissipationModel.free(),
        [1.0, 2.0],
    )
    assert [row.err for row in rows] == [0.0, 0.0]
    assert [row.ratio for row in rows] == [0.0, 0.0]


def test_rate_sweep_compact_support(tiny_grid, interval_model):
    rows = rate_sweep(
        random_data(tiny_grid, 0),
        interval_model,
        [2.0, 4.0, 8.0],
    )
    for row in rows:
        assert row.err <= 1e-10
        assert row.tail == 0
        assert row.ratio == 0


def test_rate_sweep_warns_when_tail_vanishes(
    tiny_grid,
    gaussian_model,
    monkeypatch,
):
    captured = CapturingLogger()
    monkeypatch.setattr("lib.wave.scattering.logger", captured)
    monkeypatch.setattr(
        "lib.wave.scattering.tail_integral",
        lambda model, t: 0.0,
    )
    rows = rate_sweep(random_data(tiny_grid, 0), gaussian_model, [0.5, 1.0])
    assert all(row.err > 0 for row in rows)
    assert all(math.isinf(row.ratio) for row in rows)
    warnings = [c for c in captured.calls if c.method_name == "warning"]
    assert len(warnings) == 1
    assert warnings[0].kwargs["times"] == [0.5, 1.0]


def test_rate_sweep_algebraic_slope(tiny_grid, algebraic_model):
    data = random_data(tiny_grid, 0)
    rows = rate_sweep(data, algebraic_model, [4, 8, 16, 32, 64], density=64)
    assert [row.t for row in rows] == [4, 8, 16, 32, 64]
    assert -1.1 <= loglog_slope(rows) <= -0.9
    for row in rows:
        assert row.ratio <= 2 * growth(algebraic_model)


def test_rate_sweep_validates_times(tiny_grid, interval_model):
    data = random_data(tiny_grid, 0)
    with pytest.raises(ValueError):
        rate_sweep(data, interval_model, [])
    with pytest.raises(ValueError):
        rate_sweep(data, interval_model, [4.0, 2.0])
    with pytest.raises(ValueError):
        rate_sweep(data, interval_model, [-1.0, 2.0])


def test_loglog_slope():
    rows = [RateRow(t, 3 / (1 + t), 0.0, 0.0) for t in (1, 3, 7, 15)]
    assert loglog_slope(rows) == pytest.approx(-1.0)
    with pytest.raises(ValueError):
        loglog_slope([RateRow(1.0, 0.0, 0.0, 0.0)])


def test_norm_of_identity(tiny_grid):
    handle = identity_handle(tiny_grid)
    assert operator_norm_estimate(handle) == pytest.approx(1.0)
    assert operator_norm_estimate(handle, mode=DENSE) == pytest.approx(1.0)


def test_free_group_norm(tiny_grid):
    handle = free_handle(tiny_grid, 2.5)
    assert operator_norm_estimate(handle) == pytest.approx(1.0, rel=1e-10)


def test_q_minus_identity_norm(mode_grid, interval_model):
    handle = q_minus_identity_handle(mode_grid, interval_model, 1.0)
    dense = operator_norm_estimate(handle, mode=DENSE)
    assert 0 < dense <= math.exp(0.3) - 1 + 1e-10
    power = operator_norm_estimate(handle, mode=POWER, seed=3)
    assert power == pytest.approx(dense, rel=1e-4)


def test_norm_estimation_validation(tiny_grid, mode_grid, interval_model):
    with pytest.raises(ValueError):
        big = identity_handle(GridSpec.parse("2d:64"))
        operator_norm_estimate(big, mode=DENSE)
    with pytest.raises(ValueError):
        operator_norm_estimate(identity_handle(tiny_grid), grid=mode_grid)
    handle = strang_handle(tiny_grid, interval_model, 0.0, 1.0, 0.1)
    with pytest.raises(AdjointUnavailableError):
        operator_norm_estimate(handle)
    with pytest.raises(AdjointUnavailableError):
        handle.apply_adjoint(StateVector.zeros(tiny_grid))


def test_damped_propagator_contracts(mode_grid, bump_model):
    handle = strang_handle(mode_grid, bump_model, -2.0, 2.0, 0.05)
    assert operator_norm_estimate(handle, mode=DENSE) <= 1 + 1e-10


def test_antidamped_propagator_grows(mode_grid, antidamped_model):
    handle = strang_handle(mode_grid, antidamped_model, 0.0, 2.0, 0.01)
    norm = operator_norm_estimate(handle, mode=DENSE)
    assert norm == pytest.approx(math.exp(0.3), rel=1e-9)


@pytest.mark.parametrize("inverse", [False, True])
def test_wave_operator_norms(mode_grid, gaussian_model, inverse):
    handle = wave_operator_handle(
        Sign.PLUS,
        mode_grid,
        gaussian_model,
        inverse=inverse,
    )
    norm = operator_norm_estimate(handle, mode=DENSE)
    assert 1 - 1e-12 <= norm <= growth(gaussian_model) * (1 + 1e-9)
    assert handle.truncation_bound <= 1e-8


def test_handle_matches_direct_application(tiny_states, shifted_model):
    grid = tiny_states[0].grid
    handle = wave_operator_handle(Sign.MINUS, grid, shifted_model)
    for state in tiny_states[:2]:
        direct = wave_operator_apply(Sign.MINUS, state, shifted_model)
        assert energy_norm(handle.apply(state) - direct) <= 1e-10


def test_handles_are_linear(tiny_states, shifted_model):
    grid = tiny_states[0].grid
    handle = scattering_handle(grid, shifted_model)
    a, b = tiny_states[:2]
    combined = handle.apply(a * 2.0 + b * (0.5 - 1j))
    separate = handle.apply(a) * 2.0 + handle.apply(b) * (0.5 - 1j)
    assert energy_norm(combined - separate) <= 1e-10


def test_composed_adjoint(tiny_states):
    grid = tiny_states[0].grid
    handle = compose(free_handle(grid, 1.0), free_handle(grid, 0.5), "E0E0")
    state = tiny_states[0]
    back = handle.apply_adjoint(handle.apply(state))
    assert energy_norm(back - state) <= 1e-13
