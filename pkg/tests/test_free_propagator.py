import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import seed
from hypothesis import settings
from hypothesis import strategies as st

from lib.cli.random_data import random_state
from lib.core.errors import RepresentationError
from lib.wave.coefficients import parse_profile
from lib.wave.free_propagator import DIAGONALIZER
from lib.wave.free_propagator import MatrixDirection
from lib.wave.free_propagator import apply_B
from lib.wave.free_propagator import apply_B_compositional
from lib.wave.free_propagator import apply_E0
from lib.wave.free_propagator import apply_M
from lib.wave.free_propagator import apply_R
from lib.wave.free_propagator import apply_U0
from lib.wave.spectral_core import Field
from lib.wave.spectral_core import GridSpec
from lib.wave.spectral_core import Representation
from lib.wave.spectral_core import StateVector
from lib.wave.spectral_core import energy_norm

times = st.floats(-50.0, 50.0, allow_nan=False)


def test_diagonalizer_inverse():
    np.testing.assert_allclose(
        DIAGONALIZER.matrix @ DIAGONALIZER.inverse,
        np.eye(2),
    )


def test_apply_M_round_trip(tiny_states):
    state = tiny_states[0]
    back = apply_M(
        apply_M(state, MatrixDirection.M),
        MatrixDirection.M_INVERSE,
    )
    np.testing.assert_allclose(back.array, state.array, atol=1e-15)
    doubled = energy_norm(apply_M(state, MatrixDirection.M))
    assert doubled == pytest.approx(math.sqrt(2))


@seed(5)
@settings(max_examples=30, deadline=None)
@given(t=times, s=times)
def test_free_group_is_unitary(t, s):
    grid = GridSpec.parse("2d:8")
    state = random_state(grid, np.random.default_rng(0))
    assert energy_norm(apply_E0(t, s, state)) == pytest.approx(1.0)


@seed(6)
@settings(max_examples=30, deadline=None)
@given(t=times, r=times, s=times)
def test_free_group_law(t, r, s):
    grid = GridSpec.parse("1d:16")
    state = random_state(grid, np.random.default_rng(1))
    composed = apply_E0(t, r, apply_E0(r, s, state))
    direct = apply_E0(t, s, state)
    assert energy_norm(composed - direct) <= 1e-11


def test_free_group_needs_spectral_state(tiny_states):
    with pytest.raises(RepresentationError):
        apply_E0(1.0, 0.0, tiny_states[0].to(Representation.PHYSICAL))


def test_coupling_on_constant_profile(tiny_grid, tiny_states):
    model = parse_profile("interval:mu0=2,t0=0,t1=10")
    state = tiny_states[0]
    coupled = apply_B(1.0, state, model)
    total = state.first.values + state.second.values
    np.testing.assert_allclose(coupled.first.values, 1j * total, atol=1e-14)
    np.testing.assert_allclose(coupled.second.values, 1j * total, atol=1e-14)

    (x,) = tiny_grid.coordinates()
    f = Field(tiny_grid, Representation.PHYSICAL, np.cos(x))
    pair = apply_B(1.0, StateVector(f, f), model)
    assert pair.representation == Representation.PHYSICAL
    np.testing.assert_allclose(pair.first.values, 2j * f.values, atol=1e-14)


def test_coupling_outside_support_vanishes(tiny_states, interval_model):
    coupled = apply_B(2.0, tiny_states[0], interval_model)
    assert energy_norm(coupled) == 0


def test_compositional_coupling_agrees(tiny_states, bump_model):
    for t in (0.0, 0.7):
        state = tiny_states[0]
        direct = apply_B(t, state, bump_model)
        literal = apply_B_compositional(t, state, bump_model)
        assert energy_norm(direct - literal) <= 1e-13


def test_twisted_coupling_at_reference_time(tiny_states, bump_model):
    state = tiny_states[1]
    twisted = apply_R(0.4, 0.4, state, bump_model)
    assert energy_norm(twisted - apply_B(0.4, state, bump_model)) <= 1e-14


def test_twisted_coupling_is_conjugated_coupling(tiny_states, bump_model):
    state = tiny_states[2]
    t, s = 0.9, -0.3
    expected = apply_E0(
        s,
        t,
        apply_B(t, apply_E0(t, s, state), bump_model),
    )
    twisted = apply_R(t, s, state, bump_model)
    assert energy_norm(twisted - expected) <= 1e-13


def test_twisted_coupling_bound(tiny_states, bump_model):
    for state in tiny_states:
        norm = energy_norm(apply_R(0.2, 0.0, state, bump_model))
        assert norm <= float(bump_model.mu(0.2)) * bump_model.sup_beta


def test_free_wave_standing_mode(tiny_grid):
    (x,) = tiny_grid.coordinates()
    data = (
        Field(tiny_grid, Representation.PHYSICAL, np.cos(x)),
        Field.zeros(tiny_grid),
    )
    for t in (0.3, 1.0, 2.5):
        u1, u2 = apply_U0(t, data)
        np.testing.assert_allclose(
            u1.values,
            math.cos(t) * np.cos(x),
            atol=1e-13,
        )
        np.testing.assert_allclose(
            u2.values,
            1j * math.sin(t) * np.cos(x),
            atol=1e-13,
        )
