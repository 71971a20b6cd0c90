"""Deterministic random wave data.

Both components are drawn spectrally with amplitude |xi|^-2 and uniform
phases; the zero modes are zero. States are normalized to unit energy.
"""
from typing import List
from typing import Tuple

import numpy as np

from lib.wave.spectral_core import Field
from lib.wave.spectral_core import GridSpec
from lib.wave.spectral_core import StateVector
from lib.wave.spectral_core import abs_d_multiplier
from lib.wave.spectral_core import restore_data


def _component(grid: GridSpec, rng: np.random.Generator) -> np.ndarray:
    envelope = abs_d_multiplier(grid, -1) ** 2
    phases = rng.uniform(0.0, 2 * np.pi, size=grid.shape)
    return envelope * np.exp(1j * phases)


def random_state(grid: GridSpec, rng: np.random.Generator) -> StateVector:
    """Spectral state with unit energy norm.

    Args:
        grid: Grid to draw on
        rng: Random generator

    Returns:
        Lifted state U in spectral representation
    """
    values = np.stack([_component(grid, rng), _component(grid, rng)])
    values /= np.linalg.norm(values.ravel())
    return StateVector.from_array(grid, values)


def random_data(grid: GridSpec, seed: int) -> Tuple[Field, Field]:
    """Physical data (u, D_t u) whose lift is ``random_state``."""
    return restore_data(random_state(grid, np.random.default_rng(seed)))


def random_states(grid: GridSpec, seed: int, count: int) -> List[StateVector]:
    """``count`` independent unit states from one seeded generator."""
    rng = np.random.default_rng(seed)
    return [random_state(grid, rng) for _ in range(count)]
