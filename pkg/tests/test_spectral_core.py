import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import seed
from hypothesis import settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from lib.core.errors import GridMismatchError
from lib.core.errors import RepresentationError
from lib.wave.spectral_core import Direction
from lib.wave.spectral_core import Field
from lib.wave.spectral_core import GridSpec
from lib.wave.spectral_core import Representation
from lib.wave.spectral_core import StateVector
from lib.wave.spectral_core import apply_abs_d
from lib.wave.spectral_core import energy_norm
from lib.wave.spectral_core import lift_data
from lib.wave.spectral_core import project_energy
from lib.wave.spectral_core import restore_data
from lib.wave.spectral_core import transform

PHYSICAL = Representation.PHYSICAL
SPECTRAL = Representation.SPECTRAL


def physical(grid: GridSpec, values) -> Field:
    return Field(grid, PHYSICAL, values)


def test_parse_grid():
    grid = GridSpec.parse("2d:64")
    assert grid.dimension == 2
    assert grid.points == 64
    assert grid.period == pytest.approx(2 * math.pi)
    assert grid.shape == (64, 64)
    assert grid.size == 4096


def test_parse_grid_with_period():
    grid = GridSpec.parse("1d:32@6.0")
    assert grid.period == 6.0
    assert GridSpec.parse(grid.label) == grid


@pytest.mark.parametrize("text", ["256", "1x:16", "1d:abc", "4d:8", "1d:100"])
def test_parse_grid_rejects(text):
    with pytest.raises(ValueError):
        GridSpec.parse(text)


def test_abs_xi_table(tiny_grid):
    table = tiny_grid.abs_xi()
    assert np.count_nonzero(table == 0) == 1
    assert table[0] == 0
    np.testing.assert_allclose(table[1:], table[1:][::-1])
    assert tiny_grid.max_abs_xi() == 8


def test_constant_field_is_a_zero_mode(tiny_grid):
    spectral = transform(
        physical(tiny_grid, np.full(16, 2.0)),
        Direction.FORWARD,
    )
    assert spectral.values[0] == pytest.approx(2.0 * 4)
    np.testing.assert_allclose(spectral.values[1:], 0, atol=1e-14)


def test_pure_mode_transform(tiny_grid):
    (x,) = tiny_grid.coordinates()
    spectral = physical(tiny_grid, np.exp(3j * x)).to(SPECTRAL)
    expected = np.zeros(16, complex)
    expected[3] = 4.0
    np.testing.assert_allclose(spectral.values, expected, atol=1e-13)


def test_transform_checks_representation(tiny_grid):
    with pytest.raises(RepresentationError):
        transform(Field.zeros(tiny_grid, SPECTRAL), Direction.FORWARD)
    with pytest.raises(RepresentationError):
        transform(Field.zeros(tiny_grid), Direction.INVERSE)


def test_field_rejects_wrong_shape(tiny_grid):
    with pytest.raises(GridMismatchError):
        Field(tiny_grid, PHYSICAL, np.zeros(8))


@seed(1)
@settings(max_examples=50, deadline=None)
@given(
    parts=arrays(
        np.float64,
        (2, 8, 8),
        elements=st.floats(-1e3, 1e3, allow_nan=False),
    ),
)
def test_transform_preserves_norm(parts):
    grid = GridSpec.parse("2d:8")
    f = physical(grid, parts[0] + 1j * parts[1])
    spectral = f.to(SPECTRAL)
    assert spectral.norm() == pytest.approx(f.norm(), rel=1e-12, abs=1e-9)
    np.testing.assert_allclose(
        spectral.to(PHYSICAL).values,
        f.values,
        atol=1e-9,
    )


def test_abs_d_scales_pure_mode():
    grid = GridSpec.parse(f"1d:16@{4 * math.pi!r}")
    (x,) = grid.coordinates()
    f = physical(grid, np.exp(0.5j * x))
    np.testing.assert_allclose(
        apply_abs_d(f, 1).values,
        0.5 * f.values,
        atol=1e-13,
    )


def test_abs_d_annihilates_constants(tiny_grid):
    f = physical(tiny_grid, np.full(16, 3.0))
    np.testing.assert_allclose(apply_abs_d(f, 1).values, 0, atol=1e-13)
    np.testing.assert_allclose(apply_abs_d(f, -1).values, 0, atol=1e-13)


def test_abs_d_powers_invert_on_mean_free_fields(tiny_grid, rng):
    spectral = rng.standard_normal(16) + 1j * rng.standard_normal(16)
    spectral[0] = 0
    f = Field(tiny_grid, SPECTRAL, spectral)
    np.testing.assert_allclose(
        apply_abs_d(apply_abs_d(f, 1), -1).values,
        spectral,
        atol=1e-12,
    )


def test_abs_d_rejects_other_powers(tiny_grid):
    with pytest.raises(ValueError):
        apply_abs_d(Field.zeros(tiny_grid), 2)


def test_lift_data(tiny_grid):
    (x,) = tiny_grid.coordinates()
    state = lift_data(
        physical(tiny_grid, np.cos(2 * x)),
        physical(tiny_grid, np.sin(x)),
    )
    assert state.representation == SPECTRAL
    np.testing.assert_allclose(
        state.first.to(PHYSICAL).values,
        2 * np.cos(2 * x),
        atol=1e-13,
    )
    np.testing.assert_allclose(
        state.second.to(PHYSICAL).values,
        np.sin(x),
        atol=1e-13,
    )


def test_restore_drops_the_mean(tiny_grid):
    (x,) = tiny_grid.coordinates()
    u1, u2 = restore_data(
        lift_data(
            physical(tiny_grid, 2 + np.cos(2 * x)),
            physical(tiny_grid, np.sin(x)),
        ),
    )
    assert u1.representation == PHYSICAL
    np.testing.assert_allclose(u1.values, np.cos(2 * x), atol=1e-13)
    np.testing.assert_allclose(u2.values, np.sin(x), atol=1e-13)


def test_lift_needs_one_grid(tiny_grid, mode_grid):
    with pytest.raises(GridMismatchError):
        lift_data(Field.zeros(tiny_grid), Field.zeros(mode_grid))


def test_energy_norm(tiny_grid):
    array = np.zeros((2, 16), complex)
    array[0, 0] = 3
    array[1, 5] = 4j
    state = StateVector.from_array(tiny_grid, array)
    assert energy_norm(state) == pytest.approx(5.0)
    assert energy_norm(state.to(PHYSICAL)) == pytest.approx(5.0)


def test_project_energy_matches_lift_of_restore(tiny_grid, tiny_states):
    array = tiny_states[0].array.copy()
    array[0, 0] = 2.0
    array[1, 0] = 0.5j
    state = StateVector.from_array(tiny_grid, array)
    projected = project_energy(state.to(PHYSICAL))
    assert projected.representation == SPECTRAL
    assert projected.array[0, 0] == 0
    assert projected.array[1, 0] == pytest.approx(0.5j)
    round_trip = lift_data(*restore_data(state))
    np.testing.assert_allclose(projected.array, round_trip.array, atol=1e-13)
    assert array[0, 0] == 2.0


def test_state_arithmetic(tiny_states):
    a, b = tiny_states[:2]
    np.testing.assert_allclose((a + b - b).array, a.array, atol=1e-14)
    np.testing.assert_allclose((2 * a).array, 2 * a.array)
    mixed = a + b.to(PHYSICAL)
    assert mixed.representation == SPECTRAL
    np.testing.assert_allclose(mixed.array, a.array + b.array, atol=1e-13)


def test_state_arithmetic_needs_one_grid(tiny_grid, mode_grid):
    with pytest.raises(GridMismatchError):
        StateVector.zeros(tiny_grid) + StateVector.zeros(mode_grid)
