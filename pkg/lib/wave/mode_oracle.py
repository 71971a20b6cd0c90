"""Per-mode 2 x 2 reduction of Q and the wave operators for x-independent b.

For b = mu(t) * beta0 every Fourier mode evolves on its own. With
theta = (tau - s) omega the generator is

    i R(tau, s; omega) = -(mu beta0 / 2) [[1, e^{-2 i theta}],
                                          [e^{2 i theta}, 1]],

whose trace is -mu beta0, hence det Q(t, s) = exp(-beta0 * int_s^t mu).
"""
import math
from dataclasses import dataclass
from typing import Optional
from typing import Sequence

import numpy as np
import structlog

from lib.core.errors import ProfileError
from lib.wave.coefficients import DissipationModel
from lib.wave.coefficients import integral_b
from lib.wave.dyson_series import QuadratureRule
from lib.wave.dyson_series import TimeMesh
from lib.wave.free_propagator import DIAGONALIZER
from lib.wave.scattering import DEFAULT_HORIZON_CAP
from lib.wave.scattering import scattering_horizon
from lib.wave.scattering import select_horizon

logger = structlog.get_logger(__name__)

IDENTITY = np.eye(2, dtype=complex)


@dataclass(frozen=True)
class ModeMatrix:
    """
    2 x 2 matrix attached to one frequency magnitude and one interval.

    Attributes:
        matrix: complex 2 x 2 array
        omega: frequency magnitude |xi|
        start: initial time s
        stop: final time t
    """

    matrix: np.ndarray
    omega: float
    start: float
    stop: float

    @property
    def det(self) -> complex:
        return complex(np.linalg.det(self.matrix))

    def conjugated(self) -> "ModeMatrix":
        """M X M^-1."""
        matrix = DIAGONALIZER.matrix @ self.matrix @ DIAGONALIZER.inverse
        return ModeMatrix(matrix, self.omega, self.start, self.stop)


def _require_x_independent(model: DissipationModel) -> float:
    if not model.is_x_independent:
        raise ProfileError("the mode oracle needs an x-independent b")
    return float(model.space.value)


def default_fine_dt(omega: float) -> float:
    return 1e-3 * min(1.0, 1.0 / max(omega, 1.0))


def _generators(
    times: np.ndarray,
    mu: np.ndarray,
    s: float,
    omega: float,
    beta0: float,
) -> np.ndarray:
    # i R(tau, s; omega), shape (len(times), 2, 2)
    rotation = np.exp(2j * (times - s) * omega)
    scale = -0.5 * beta0 * mu
    out = np.empty((len(times), 2, 2), complex)
    out[:, 0, 0] = scale
    out[:, 1, 1] = scale
    out[:, 0, 1] = scale * np.conj(rotation)
    out[:, 1, 0] = scale * rotation
    return out


def ordered_product(steps: np.ndarray) -> np.ndarray:
    """P_{m-1} ... P_1 P_0 by pairwise reduction, later factors on the left.

    Args:
        steps: Step matrices in time order, shape ``(m, 2, 2)``

    Returns:
        The time-ordered product
    """
    if len(steps) == 0:
        return IDENTITY.copy()
    while len(steps) > 1:
        if len(steps) % 2:
            steps = np.concatenate([steps, IDENTITY[np.newaxis]])
        steps = np.matmul(steps[1::2], steps[0::2])
    return steps[0]


def mode_Q(
    omega: float,
    s: float,
    t: float,
    model: DissipationModel,
    fine_dt: Optional[float] = None,
) -> ModeMatrix:
    """Q(t, s) restricted to frequency magnitude omega.

    Fourth-order step matrices are built for all steps at once and then
    multiplied in time order.

    Args:
        omega: Frequency magnitude, >= 0
        s: Initial time
        t: Final time, ``t >= s``
        model: x-independent dissipation model
        fine_dt: Step size; defaults to 1e-3 min(1, 1 / max(omega, 1))

    Returns:
        The 2 x 2 matrix

    Raises:
        ProfileError: If the model depends on x
    """
    if omega < 0:
        raise ValueError(f"omega must be non-negative, got {omega}")
    beta0 = _require_x_independent(model)
    if t == s or model.vanishes:
        return ModeMatrix(IDENTITY.copy(), omega, s, t)
    fine_dt = fine_dt or default_fine_dt(omega)
    mesh = TimeMesh.build(
        s,
        t,
        model=model,
        density=math.ceil(1.0 / fine_dt),
        rule=QuadratureRule.TRAPEZOID,
    )
    start, stop = mesh.nodes[:-1], mesh.nodes[1:]
    h = (stop - start)[:, np.newaxis, np.newaxis]
    mid = start + h[:, 0, 0] / 2
    a0 = _generators(start, model.mu(start, side="right"), s, omega, beta0)
    am = _generators(mid, model.mu(mid), s, omega, beta0)
    a1 = _generators(stop, model.mu(stop, side="left"), s, omega, beta0)
    k1 = a0
    k2 = am + (h / 2) * np.matmul(am, k1)
    k3 = am + (h / 2) * np.matmul(am, k2)
    k4 = a1 + h * np.matmul(a1, k3)
    steps = IDENTITY + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
    return ModeMatrix(ordered_product(steps), omega, s, t)


def mode_wave_operator(
    omega: float,
    model: DissipationModel,
    tail_tol: float = 1e-10,
    horizon: Optional[float] = None,
    horizon_cap: float = DEFAULT_HORIZON_CAP,
    fine_dt: Optional[float] = None,
) -> ModeMatrix:
    """W+(xi) = M Q(T, 0; omega) M^-1 with T from the tail rule.

    Args:
        omega: Frequency magnitude
        model: x-independent dissipation model
        tail_tol: Tolerance on tail(T) * exp(int_0^inf ||b||)
        horizon: Explicit horizon T
        horizon_cap: Largest admissible horizon
        fine_dt: Step size of the mode integration

    Returns:
        The conjugated 2 x 2 matrix

    Raises:
        HorizonError: If the tail tolerance needs a horizon past the cap
    """
    _require_x_independent(model)
    if horizon is None:
        horizon = select_horizon(model, 1.0, tail_tol, horizon_cap)
    return mode_Q(omega, 0.0, horizon, model, fine_dt).conjugated()


def mode_scattering_matrix(
    omega: float,
    model: DissipationModel,
    tail_tol: float = 1e-10,
    horizon: Optional[float] = None,
    horizon_cap: float = DEFAULT_HORIZON_CAP,
    fine_dt: Optional[float] = None,
) -> ModeMatrix:
    """S(xi) = W+(xi) W-(xi)^-1, W- built from the time-reflected profile.

    Both factors run to one horizon, selected for unit-norm inputs unless
    given.
    """
    if horizon is None:
        horizon = scattering_horizon(model, 1.0, tail_tol, horizon_cap)
    plus = mode_wave_operator(omega, model, horizon=horizon, fine_dt=fine_dt)
    minus = mode_wave_operator(
        omega,
        model.reflected(),
        horizon=horizon,
        fine_dt=fine_dt,
    )
    matrix = plus.matrix @ np.linalg.inv(minus.matrix)
    return ModeMatrix(matrix, omega, -minus.stop, plus.stop)


def liouville_det(model: DissipationModel, s: float, t: float) -> float:
    """exp(-int_s^t b), the determinant of Q(t, s) on any mode."""
    return math.exp(-integral_b(model, s, t))


def omega_continuity(
    omegas: Sequence[float],
    model: DissipationModel,
    tail_tol: float = 1e-10,
    **options,
) -> float:
    """Largest entrywise difference quotient of W+(xi) along omegas.

    Args:
        omegas: Increasing frequency magnitudes
        model: x-independent dissipation model
        tail_tol: Horizon tolerance
        options: Forwarded to ``mode_wave_operator``

    Returns:
        max |W(omega_j+1) - W(omega_j)| / (omega_j+1 - omega_j)
    """
    if len(omegas) < 2:
        raise ValueError("continuity needs at least two frequencies")
    matrices = [
        mode_wave_operator(omega, model, tail_tol, **options).matrix
        for omega in omegas
    ]
    quotients = [
        float(np.max(np.abs(b - a))) / (w1 - w0)
        for a, b, w0, w1 in zip(
            matrices[:-1],
            matrices[1:],
            omegas[:-1],
            omegas[1:],
        )
    ]
    constant = max(quotients)
    logger.info("Frequency continuity measured", constant=constant)
    return constant
