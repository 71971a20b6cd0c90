"""Strang splitting for the damped first-order system.

In lifted coordinates U = (|D| u, D_t u) the equation reads
dU/dt = i A U - diag(0, b) U. Each step is a half step of the exact free
group, an exact pointwise damping of U2 with b frozen at the midpoint,
and a second half step of the free group.
"""
import math
from typing import Optional
from typing import Sequence
from typing import Tuple

import numpy as np
import structlog

from lib.wave.coefficients import DissipationModel
from lib.wave.free_propagator import apply_free_group
from lib.wave.free_propagator import beta_factor
from lib.wave.free_propagator import multiply_pointwise
from lib.wave.spectral_core import Field
from lib.wave.spectral_core import Representation
from lib.wave.spectral_core import StateVector
from lib.wave.spectral_core import energy_norm
from lib.wave.spectral_core import lift_data
from lib.wave.spectral_core import restore_data

logger = structlog.get_logger(__name__)


def step_count(t0: float, t1: float, dt: float) -> int:
    """Number of steps of size ``dt`` in [t0, t1].

    Raises:
        ValueError: If dt is not positive or does not divide t1 - t0
    """
    if dt <= 0:
        raise ValueError(f"dt must be positive, got {dt}")
    span = t1 - t0
    if span < 0:
        raise ValueError(f"need t0 <= t1, got ({t0}, {t1})")
    steps = round(span / dt)
    if not math.isclose(steps * dt, span, rel_tol=1e-9, abs_tol=1e-12):
        raise ValueError(f"dt={dt} does not divide [{t0}, {t1}]")
    return steps


def damping_step(
    state: StateVector,
    model: DissipationModel,
    tau: float,
    dt: float,
) -> StateVector:
    """U2 <- U2 exp(-b(tau, x) dt), exact for b frozen in time."""
    mu = float(model.mu(tau))
    if mu == 0:
        return state
    beta = beta_factor(model, state.grid)
    factor = np.exp(-mu * dt * np.asarray(beta))
    second = state.second.values
    if factor.ndim == 0:
        damped = float(factor) * second
    else:
        damped = multiply_pointwise(second, state.grid, factor)
    return StateVector(state.first, state.second.with_values(damped))


def strang_state(
    t0: float,
    t1: float,
    state: StateVector,
    model: DissipationModel,
    dt: float,
) -> StateVector:
    """Propagate a lifted state U from t0 to t1 by Strang splitting.

    Args:
        t0: Initial time
        t1: Final time
        state: Lifted state U = (|D| u, D_t u)
        model: Dissipation model
        dt: Step size dividing t1 - t0

    Returns:
        U(t1) in spectral representation
    """
    steps = step_count(t0, t1, dt)
    current = state.to(Representation.SPECTRAL)
    for j in range(steps):
        tau = t0 + j * dt
        current = apply_free_group(dt / 2, current)
        current = damping_step(current, model, tau + dt / 2, dt)
        current = apply_free_group(dt / 2, current)
    logger.debug("Strang propagation done", t0=t0, t1=t1, steps=steps)
    return current


def strang_solve(
    t0: float,
    t1: float,
    data: Tuple[Field, Field],
    model: DissipationModel,
    dt: float,
) -> Tuple[Field, Field]:
    """Physical data (u, D_t u) at t1 from data at t0.

    Args:
        t0: Initial time
        t1: Final time
        data: Pair (u(t0), D_t u(t0))
        model: Dissipation model
        dt: Step size dividing t1 - t0

    Returns:
        Pair (u(t1), D_t u(t1)) in physical representation

    Raises:
        ValueError: If dt does not divide the interval
    """
    return restore_data(strang_state(t0, t1, lift_data(*data), model, dt))


def richardson_extrapolate(
    coarse: StateVector,
    fine: StateVector,
    order: int = 2,
) -> StateVector:
    """Combine results at dt and dt / 2 to cancel the leading error term."""
    weight = 1.0 / (2**order - 1)
    return fine + (fine - coarse) * weight


def observed_order(
    results: Sequence[StateVector],
    reference: Optional[StateVector] = None,
) -> float:
    """Convergence order from results at successively halved step sizes.

    Without a reference the differences of consecutive results are
    compared, which needs at least three results.

    Args:
        results: Results at dt, dt / 2, dt / 4, ...
        reference: Optional trusted solution

    Returns:
        log2 of the ratio of the last two error estimates
    """
    if reference is not None:
        errors = [energy_norm(r - reference) for r in results]
    else:
        if len(results) < 3:
            raise ValueError("self-referenced order needs three results")
        errors = [
            energy_norm(a - b) for a, b in zip(results[:-1], results[1:])
        ]
    coarse, fine = errors[-2], errors[-1]
    if fine == 0:
        return math.inf
    return math.log2(coarse / fine)
