"""Periodic spectral grid, unitary Fourier transform and the energy lift.

Wave data (u, D_t u) live in the energy space H'^1 x L2. On the torus the
lift U = (|D| u, D_t u) maps that space isometrically onto L2 x L2, which
is where every propagator in this package acts.
"""
import functools
import math
from dataclasses import dataclass
from enum import Enum
from typing import Tuple

import numpy as np
from pydantic import BaseModel
from pydantic import ConfigDict
from pydantic import Field as PydanticField
from pydantic import field_validator

from lib.core.errors import GridMismatchError
from lib.core.errors import RepresentationError


class Representation(str, Enum):
    """Where the values of a field live."""

    PHYSICAL = "physical"
    SPECTRAL = "spectral"


class Direction(str, Enum):
    """Direction of the Fourier transform."""

    FORWARD = "forward"
    INVERSE = "inverse"


class GridSpec(BaseModel):
    """Uniform periodic grid on the torus (0, L]^n."""

    model_config = ConfigDict(frozen=True)

    dimension: int = PydanticField(ge=1, le=3)
    points: int = PydanticField(ge=2, description="Points per axis")
    period: float = PydanticField(default=2 * math.pi, gt=0)

    @field_validator("points")
    @classmethod
    def validate_points(cls, v: int) -> int:
        """Validate that the points per axis are a power of two."""
        if v & (v - 1):
            raise ValueError("points per axis must be a power of two")
        return v

    @classmethod
    def parse(cls, text: str) -> "GridSpec":
        """Parse the ``1d:256`` grammar, optionally suffixed ``@period``.

        Args:
            text: Grid specification

        Returns:
            Parsed grid

        Raises:
            ValueError: If the text does not follow the grammar
        """
        head, _, period = text.strip().partition("@")
        dim, sep, points = head.partition(":")
        if not sep or not dim.lower().endswith("d"):
            raise ValueError(f"grid must look like '1d:256', got {text!r}")
        try:
            values = {
                "dimension": int(dim[:-1]),
                "points": int(points),
            }
            if period:
                values["period"] = float(period)
        except ValueError as exc:
            raise ValueError(
                f"grid must look like '1d:256', got {text!r}",
            ) from exc
        return cls(**values)

    @property
    def label(self) -> str:
        """Grid in the ``1d:256`` grammar."""
        text = f"{self.dimension}d:{self.points}"
        if self.period != 2 * math.pi:
            text += f"@{self.period!r}"
        return text

    @property
    def shape(self) -> Tuple[int, ...]:
        return (self.points,) * self.dimension

    @property
    def size(self) -> int:
        return self.points**self.dimension

    @property
    def axes(self) -> Tuple[int, ...]:
        """Trailing array axes that carry the grid."""
        return tuple(range(-self.dimension, 0))

    def abs_xi(self) -> np.ndarray:
        """Table of |xi| in FFT ordering, shape ``self.shape``."""
        return _abs_xi_table(self.dimension, self.points, self.period)

    def max_abs_xi(self) -> float:
        return float(self.abs_xi().max())

    def coordinates(self) -> Tuple[np.ndarray, ...]:
        """Physical coordinates x_j = j L / N, one array per axis."""
        axis = np.arange(self.points) * (self.period / self.points)
        return tuple(np.meshgrid(*([axis] * self.dimension), indexing="ij"))


@functools.lru_cache(maxsize=32)
def _abs_xi_table(dimension: int, points: int, period: float) -> np.ndarray:
    wavenumbers = np.fft.fftfreq(points, d=1.0 / points)
    xi = 2 * math.pi * wavenumbers / period
    grids = np.meshgrid(*([xi] * dimension), indexing="ij")
    table = np.sqrt(sum(g**2 for g in grids))
    table.setflags(write=False)
    return table


def forward_values(values: np.ndarray, grid: GridSpec) -> np.ndarray:
    """Unitary forward DFT over the grid axes; leading axes are batched."""
    return np.fft.fftn(values, axes=grid.axes, norm="ortho")


def inverse_values(values: np.ndarray, grid: GridSpec) -> np.ndarray:
    """Unitary inverse DFT over the grid axes; leading axes are batched."""
    return np.fft.ifftn(values, axes=grid.axes, norm="ortho")


@dataclass(frozen=True)
class Field:
    """
    Complex grid function in one representation.

    Attributes:
        grid: grid the values live on
        representation: physical values or spectral coefficients
        values: complex array of shape ``grid.shape``
    """

    grid: GridSpec
    representation: Representation
    values: np.ndarray

    def __post_init__(self) -> None:
        values = np.asarray(self.values, dtype=np.complex128)
        if values.shape != self.grid.shape:
            raise GridMismatchError(
                f"values of shape {values.shape} do not fit grid "
                f"{self.grid.label}",
            )
        object.__setattr__(self, "values", values)

    def norm(self) -> float:
        """Discrete l2 norm, identical in both representations."""
        return float(np.linalg.norm(self.values.ravel()))

    def to(self, representation: Representation) -> "Field":
        """Return the field in the requested representation."""
        if self.representation == representation:
            return self
        if representation == Representation.SPECTRAL:
            return transform(self, Direction.FORWARD)
        return transform(self, Direction.INVERSE)

    def with_values(self, values: np.ndarray) -> "Field":
        return Field(self.grid, self.representation, values)

    @classmethod
    def zeros(
        cls,
        grid: GridSpec,
        representation: Representation = Representation.PHYSICAL,
    ) -> "Field":
        return cls(grid, representation, np.zeros(grid.shape, complex))


def transform(f: Field, direction: Direction) -> Field:
    """Unitary discrete Fourier transform of a field.

    Args:
        f: Field to transform
        direction: Forward maps physical to spectral, inverse the reverse

    Returns:
        The field in the other representation

    Raises:
        RepresentationError: If the field is not in the direction's source
    """
    source = (
        Representation.PHYSICAL
        if direction == Direction.FORWARD
        else Representation.SPECTRAL
    )
    if f.representation != source:
        raise RepresentationError(
            f"{direction.value} transform needs a {source.value} field, "
            f"got {f.representation.value}",
        )
    if direction == Direction.FORWARD:
        return Field(
            f.grid,
            Representation.SPECTRAL,
            forward_values(f.values, f.grid),
        )
    return Field(
        f.grid,
        Representation.PHYSICAL,
        inverse_values(f.values, f.grid),
    )


def abs_d_multiplier(grid: GridSpec, power: int) -> np.ndarray:
    """Spectral multiplier |xi|^power with the zero mode mapped to zero."""
    if power not in (1, -1):
        raise ValueError(f"power must be +1 or -1, got {power}")
    abs_xi = grid.abs_xi()
    multiplier = np.zeros_like(abs_xi)
    nonzero = abs_xi > 0
    multiplier[nonzero] = abs_xi[nonzero] ** power
    return multiplier


def apply_abs_d(f: Field, power: int) -> Field:
    """Apply |D|^power; both powers annihilate the zero mode.

    Args:
        f: Field in either representation
        power: +1 or -1

    Returns:
        Field in the representation of ``f``
    """
    spectral = f.to(Representation.SPECTRAL)
    result = spectral.with_values(
        spectral.values * abs_d_multiplier(f.grid, power),
    )
    return result.to(f.representation)


@dataclass(frozen=True)
class StateVector:
    """
    Two-component state U = (U1, U2) on one grid and representation.

    Attributes:
        first: component U1
        second: component U2
    """

    first: Field
    second: Field

    def __post_init__(self) -> None:
        if self.first.grid != self.second.grid:
            raise GridMismatchError("state components live on different grids")
        if self.first.representation != self.second.representation:
            raise RepresentationError(
                "state components are in different representations",
            )

    @property
    def grid(self) -> GridSpec:
        return self.first.grid

    @property
    def representation(self) -> Representation:
        return self.first.representation

    @property
    def array(self) -> np.ndarray:
        """Stacked values, shape ``(2, *grid.shape)``."""
        return np.stack([self.first.values, self.second.values])

    @classmethod
    def from_array(
        cls,
        grid: GridSpec,
        array: np.ndarray,
        representation: Representation = Representation.SPECTRAL,
    ) -> "StateVector":
        return cls(
            Field(grid, representation, array[0]),
            Field(grid, representation, array[1]),
        )

    @classmethod
    def zeros(cls, grid: GridSpec) -> "StateVector":
        return cls.from_array(grid, np.zeros((2, *grid.shape), complex))

    def to(self, representation: Representation) -> "StateVector":
        return StateVector(
            self.first.to(representation),
            self.second.to(representation),
        )

    def _check(self, other: "StateVector") -> "StateVector":
        if other.grid != self.grid:
            raise GridMismatchError("states live on different grids")
        return other.to(self.representation)

    def __add__(self, other: "StateVector") -> "StateVector":
        other = self._check(other)
        return StateVector.from_array(
            self.grid,
            self.array + other.array,
            self.representation,
        )

    def __sub__(self, other: "StateVector") -> "StateVector":
        other = self._check(other)
        return StateVector.from_array(
            self.grid,
            self.array - other.array,
            self.representation,
        )

    def __mul__(self, scalar: complex) -> "StateVector":
        return StateVector.from_array(
            self.grid,
            scalar * self.array,
            self.representation,
        )

    __rmul__ = __mul__


def lift_data(u1: Field, u2: Field) -> StateVector:
    """Lift wave data (u, D_t u) to U = (|D| u, D_t u).

    The mean of ``u1`` is invisible to |D| and is projected out.

    Args:
        u1: Displacement u at the initial time
        u2: Time derivative D_t u at the initial time

    Returns:
        The lifted state in spectral representation

    Raises:
        GridMismatchError: If the fields live on different grids
    """
    if u1.grid != u2.grid:
        raise GridMismatchError("u1 and u2 live on different grids")
    first = apply_abs_d(u1.to(Representation.SPECTRAL), 1)
    return StateVector(first, u2.to(Representation.SPECTRAL))


def restore_data(state: StateVector) -> Tuple[Field, Field]:
    """Inverse of ``lift_data``: (|D|^-1 U1, U2) in physical representation."""
    spectral = state.to(Representation.SPECTRAL)
    u1 = apply_abs_d(spectral.first, -1)
    return (
        u1.to(Representation.PHYSICAL),
        spectral.second.to(Representation.PHYSICAL),
    )


def project_energy(state: StateVector) -> StateVector:
    """Drop the U1 zero mode, which no lifted data (|D| u, D_t u) carries."""
    spectral = state.to(Representation.SPECTRAL)
    first = spectral.first.values.copy()
    first[spectral.grid.abs_xi() == 0] = 0
    return StateVector(spectral.first.with_values(first), spectral.second)


def energy_norm(state: StateVector) -> float:
    """(||U1||^2 + ||U2||^2)^(1/2), the energy norm of the lifted data."""
    return float(np.linalg.norm(state.array.ravel()))


def state_from_data(data: Tuple[Field, Field]) -> StateVector:
    """Convenience wrapper of ``lift_data`` for a data pair."""
    return lift_data(*data)
