"""Exact building blocks: the diagonalizer M, the free group E0(t, s),
the coupling B(t, x), the twisted coupling R(t, s) and the free wave
group U0(t).

States here are in diagonal coordinates U0 = M^-1 U unless stated.
"""
from dataclasses import dataclass
from enum import Enum
from typing import Tuple
from typing import Union

import numpy as np

from lib.core.errors import RepresentationError
from lib.wave.coefficients import DissipationModel
from lib.wave.spectral_core import Field
from lib.wave.spectral_core import GridSpec
from lib.wave.spectral_core import Representation
from lib.wave.spectral_core import StateVector
from lib.wave.spectral_core import forward_values
from lib.wave.spectral_core import inverse_values
from lib.wave.spectral_core import lift_data
from lib.wave.spectral_core import restore_data


class MatrixDirection(str, Enum):
    """Which of M, M^-1 to apply."""

    M = "M"
    M_INVERSE = "M_inverse"


@dataclass(frozen=True)
class DiagonalizerM:
    """
    Constant matrices diagonalizing the free first-order wave system.

    Attributes:
        matrix: M = [[1, -1], [1, 1]]
        inverse: M^-1 = 1/2 [[1, 1], [-1, 1]]
    """

    matrix: np.ndarray
    inverse: np.ndarray

    def select(self, direction: MatrixDirection) -> np.ndarray:
        if direction == MatrixDirection.M:
            return self.matrix
        return self.inverse


DIAGONALIZER = DiagonalizerM(
    matrix=np.array([[1.0, -1.0], [1.0, 1.0]]),
    inverse=0.5 * np.array([[1.0, 1.0], [-1.0, 1.0]]),
)


def _require_spectral(state: StateVector) -> None:
    if state.representation != Representation.SPECTRAL:
        raise RepresentationError("free propagators act on spectral states")


def apply_M(state: StateVector, direction: MatrixDirection) -> StateVector:
    """Componentwise combination by M or M^-1."""
    matrix = DIAGONALIZER.select(direction)
    values = np.einsum("ij,j...->i...", matrix, state.array)
    return StateVector.from_array(state.grid, values, state.representation)


def free_phase(grid: GridSpec, offsets: np.ndarray) -> np.ndarray:
    """e^{i (t - s) |xi|} for each offset, shape ``(len(offsets), *shape)``.

    Args:
        grid: Spectral grid
        offsets: Array of time differences t - s

    Returns:
        Complex phases, one grid-shaped slab per offset
    """
    offsets = np.asarray(offsets, dtype=float).reshape(
        (-1,) + (1,) * grid.dimension,
    )
    return np.exp(1j * offsets * grid.abs_xi())


def apply_E0(t: float, s: float, state: StateVector) -> StateVector:
    """E0(t, s) = e^{i (t - s) D} with D = diag(|D|, -|D|).

    Args:
        t: Final time
        s: Initial time
        state: Spectral state in diagonal coordinates

    Returns:
        The freely propagated state

    Raises:
        RepresentationError: If the state is not spectral
    """
    _require_spectral(state)
    phase = free_phase(state.grid, np.array([t - s]))[0]
    values = state.array
    values = np.stack([values[0] * phase, values[1] * np.conj(phase)])
    return StateVector.from_array(state.grid, values)


def beta_factor(
    model: DissipationModel,
    grid: GridSpec,
) -> Union[float, np.ndarray]:
    """beta as a scalar for x-independent models, else as a grid array."""
    if model.is_x_independent:
        return float(model.space.value)
    return model.beta(grid)


def multiply_pointwise(
    spectral: np.ndarray,
    grid: GridSpec,
    beta: Union[float, np.ndarray],
) -> np.ndarray:
    """Multiply spectral values by beta(x) in physical space."""
    if np.isscalar(beta):
        return beta * spectral
    return forward_values(beta * inverse_values(spectral, grid), grid)


def twisted_action(
    phase: np.ndarray,
    values: np.ndarray,
    grid: GridSpec,
    beta: Union[float, np.ndarray],
) -> np.ndarray:
    """R(tau, s) for mu = 1 applied to a batch of spectral states.

    Both components of B U equal (i beta / 2)(U1 + U2), so each state costs
    one inverse and one forward transform.

    Args:
        phase: e^{i (tau - s) |xi|} per batch entry, see ``free_phase``
        values: States of shape ``(len(phase), 2, *grid.shape)``
        grid: Spectral grid
        beta: Space profile, scalar when x-independent

    Returns:
        Array of the same shape as ``values``
    """
    total = values[:, 0] * phase + values[:, 1] * np.conj(phase)
    coupled = 0.5j * multiply_pointwise(total, grid, beta)
    return np.stack([coupled * np.conj(phase), coupled * phase], axis=1)


def apply_B(
    t: float,
    state: StateVector,
    model: DissipationModel,
) -> StateVector:
    """B(t, x) U with B = (i b / 2) [[1, 1], [1, 1]].

    Args:
        t: Time
        state: State in either representation
        model: Dissipation model

    Returns:
        B U in the representation of ``state``
    """
    spectral = state.to(Representation.SPECTRAL)
    mu = float(model.mu(t))
    total = spectral.first.values + spectral.second.values
    coupled = 0.5j * mu * multiply_pointwise(
        total,
        state.grid,
        beta_factor(model, state.grid),
    )
    result = StateVector.from_array(state.grid, np.stack([coupled, coupled]))
    return result.to(state.representation)


def apply_B_compositional(
    t: float,
    state: StateVector,
    model: DissipationModel,
) -> StateVector:
    """B U evaluated literally as M^-1 diag(0, i b) M U."""
    physical = apply_M(state.to(Representation.PHYSICAL), MatrixDirection.M)
    b = float(model.mu(t)) * model.beta(state.grid)
    damped = StateVector(
        Field.zeros(state.grid),
        physical.second.with_values(1j * b * physical.second.values),
    )
    result = apply_M(damped, MatrixDirection.M_INVERSE)
    return result.to(state.representation)


def apply_R(
    t: float,
    s: float,
    state: StateVector,
    model: DissipationModel,
) -> StateVector:
    """R(t, s) = E0(s, t) B(t, x) E0(t, s), applied matrix-free.

    Args:
        t: Time of the coupling
        s: Reference time of the twisting
        state: Spectral state in diagonal coordinates
        model: Dissipation model

    Returns:
        R(t, s) U

    Raises:
        RepresentationError: If the state is not spectral
    """
    _require_spectral(state)
    values = twisted_action(
        free_phase(state.grid, np.array([t - s])),
        state.array[np.newaxis],
        state.grid,
        beta_factor(model, state.grid),
    )[0]
    return StateVector.from_array(state.grid, float(model.mu(t)) * values)


def apply_free_group(t: float, state: StateVector) -> StateVector:
    """M E0(t, 0) M^-1 on a lifted state U = (|D| u, D_t u)."""
    spectral = state.to(Representation.SPECTRAL)
    diagonal = apply_M(spectral, MatrixDirection.M_INVERSE)
    return apply_M(apply_E0(t, 0.0, diagonal), MatrixDirection.M)


def apply_U0(t: float, data: Tuple[Field, Field]) -> Tuple[Field, Field]:
    """Free wave group on data (u, D_t u) in the energy space.

    Args:
        t: Time to propagate by
        data: Pair (u, D_t u) at time 0

    Returns:
        Pair (u(t), D_t u(t)) in physical representation
    """
    return restore_data(apply_free_group(t, lift_data(*data)))
