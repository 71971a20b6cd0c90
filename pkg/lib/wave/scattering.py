"""Wave operators, their inverses, the scattering operator, the rate
experiment and operator norm estimation.

All operators act on lifted states U = (|D| u, D_t u). The wave operator
at horizon T is M Q(T, 0) M^-1; T is chosen from the tail of the
integral of sup_x |b| so that the distance to the limit is certified.
"""
import functools
import math
from dataclasses import dataclass
from enum import Enum
from typing import Any
from typing import Callable
from typing import Dict
from typing import List
from typing import Optional
from typing import Sequence

import numpy as np
import structlog
from scipy import linalg
from scipy import optimize

from lib.core.errors import AdjointUnavailableError
from lib.core.errors import HorizonError
from lib.wave.coefficients import DissipationModel
from lib.wave.coefficients import integral_sup_b
from lib.wave.coefficients import tail_integral
from lib.wave.dyson_series import DEFAULT_DENSITY
from lib.wave.dyson_series import DEFAULT_MAX_TERMS
from lib.wave.dyson_series import DEFAULT_TOL
from lib.wave.dyson_series import TimeMesh
from lib.wave.dyson_series import peano_baker_apply
from lib.wave.dyson_series import propagate_physical
from lib.wave.dyson_series import q_adjoint_apply
from lib.wave.dyson_series import q_inverse_apply
from lib.wave.dyson_series import q_ode_apply
from lib.wave.dyson_series import q_ode_checkpoints
from lib.wave.free_propagator import MatrixDirection
from lib.wave.free_propagator import apply_E0
from lib.wave.free_propagator import apply_M
from lib.wave.free_propagator import apply_U0
from lib.wave.reference_solver import strang_state
from lib.wave.spectral_core import GridSpec
from lib.wave.spectral_core import Representation
from lib.wave.spectral_core import StateVector
from lib.wave.spectral_core import energy_norm
from lib.wave.spectral_core import lift_data
from lib.wave.spectral_core import project_energy
from lib.wave.spectral_core import restore_data

logger = structlog.get_logger(__name__)

DEFAULT_HORIZON_CAP = 64.0
DENSE_LIMIT = 1024
POWER_RTOL = 1e-8
POWER_MAX_ITER = 500

Action = Callable[[StateVector], StateVector]


class Sign(str, Enum):
    """Which wave operator: t -> +inf or t -> -inf."""

    PLUS = "+"
    MINUS = "-"


class WaveMethod(str, Enum):
    """Evaluation path of the wave operator."""

    VIA_Q = "via_Q"
    VIA_GROUP = "via_group"


class NormMode(str, Enum):
    """Operator norm estimation strategy."""

    POWER_ITERATION = "power_iteration"
    DENSE_ASSEMBLY = "dense_assembly"


@dataclass(frozen=True)
class OperatorHandle:
    """
    Named linear action on states, with an optional adjoint.

    Attributes:
        name: label used in norm reports
        grid: grid the action lives on
        action: the linear map
        adjoint: its adjoint, if available
        horizon: horizon T used for limit operators
        truncation_bound: certified distance to the limit per unit input
    """

    name: str
    grid: GridSpec
    action: Action
    adjoint: Optional[Action] = None
    horizon: Optional[float] = None
    truncation_bound: float = 0.0

    def apply(self, state: StateVector) -> StateVector:
        return self.action(state.to(Representation.SPECTRAL))

    def apply_adjoint(self, state: StateVector) -> StateVector:
        """Apply the adjoint action.

        Raises:
            AdjointUnavailableError: If the handle carries no adjoint
        """
        if self.adjoint is None:
            raise AdjointUnavailableError(f"{self.name} has no adjoint")
        return self.adjoint(state.to(Representation.SPECTRAL))


def select_horizon(
    model: DissipationModel,
    norm: float,
    tol: float,
    cap: float = DEFAULT_HORIZON_CAP,
) -> float:
    """Smallest horizon T with norm * tail(T) * exp(I(0, inf)) <= tol.

    Profiles with bounded support return the end of their support, where
    the tail vanishes exactly.

    Args:
        model: Dissipation model
        norm: Norm of the state the operator is applied to
        tol: Absolute tolerance, > 0
        cap: Largest admissible horizon

    Returns:
        The horizon T >= 0

    Raises:
        HorizonError: If no T <= cap meets the tolerance
    """
    if tol <= 0:
        raise ValueError(f"tol must be positive, got {tol}")
    if model.vanishes or norm == 0:
        return 0.0
    end = model.time.support[1]
    if math.isfinite(end):
        if end > cap:
            raise HorizonError(f"support ends at {end}, beyond cap {cap}")
        return max(end, 0.0)
    growth = math.exp(integral_sup_b(model, 0.0, math.inf))

    def excess(horizon: float) -> float:
        return norm * tail_integral(model, horizon) * growth - tol

    if excess(0.0) <= 0:
        return 0.0
    if excess(cap) > 0:
        raise HorizonError(
            f"tail bound {excess(cap) + tol:.3e} at cap {cap} exceeds "
            f"tol {tol:.3e}",
        )
    # the excess decreases in T; step just past the bracketed root
    horizon = min(cap, optimize.brentq(excess, 0.0, cap, xtol=1e-12) + 1e-9)
    logger.debug("Horizon selected", horizon=horizon, tol=tol, norm=norm)
    return horizon


def horizon_bound(model: DissipationModel, horizon: float) -> float:
    """tail(T) * exp(I(0, inf)): certified distance of W(T) to W."""
    if model.vanishes:
        return 0.0
    end = model.time.support[1]
    if math.isfinite(end) and horizon >= end:
        return 0.0
    return tail_integral(model, horizon) * math.exp(
        integral_sup_b(model, 0.0, math.inf),
    )


def _oriented(sign: Sign, model: DissipationModel) -> DissipationModel:
    # t -> -t is applied to the profile for the past wave operator
    return model if Sign(sign) == Sign.PLUS else model.reflected()


def _resolve_horizon(
    model: DissipationModel,
    state: StateVector,
    tol: float,
    horizon: Optional[float],
    cap: float,
) -> float:
    if horizon is not None:
        if horizon < 0:
            raise ValueError(f"horizon must be non-negative, got {horizon}")
        return horizon
    return select_horizon(model, energy_norm(state), tol, cap)


def _mesh(
    model: DissipationModel,
    grid: GridSpec,
    horizon: float,
    density: int,
) -> TimeMesh:
    return TimeMesh.build(
        0.0,
        horizon,
        model=model,
        grid=grid,
        density=density,
    )


def wave_operator_apply(
    sign: Sign,
    state: StateVector,
    model: DissipationModel,
    tol: float = 1e-8,
    method: WaveMethod = WaveMethod.VIA_Q,
    horizon: Optional[float] = None,
    horizon_cap: float = DEFAULT_HORIZON_CAP,
    density: int = DEFAULT_DENSITY,
    series_tol: float = DEFAULT_TOL,
    max_terms: int = DEFAULT_MAX_TERMS,
) -> StateVector:
    """Apply W+ or W- to a lifted state.

    ``via_Q`` evaluates M Q(T, 0) M^-1 U; ``via_group`` restores the data,
    propagates it with the damped equation to T and pulls it back with
    the free group U0(-T).
    Both paths act on the energy space: the U1 zero mode is dropped.

    Args:
        sign: PLUS for t -> +inf, MINUS for the time-reflected profile
        state: Lifted state U
        model: Dissipation model
        tol: Horizon tolerance
        method: Evaluation path
        horizon: Explicit horizon T, overriding the selection rule
        horizon_cap: Largest admissible horizon
        density: Base mesh nodes per unit time
        series_tol: Series truncation tolerance
        max_terms: Largest admissible number of series terms

    Returns:
        W U in spectral representation

    Raises:
        HorizonError: If the horizon cap is exceeded before tol is met
    """
    model = _oriented(sign, model)
    state = project_energy(state)
    model = model.on_grid(state.grid)
    horizon = _resolve_horizon(model, state, tol, horizon, horizon_cap)
    if horizon == 0 or model.vanishes:
        return state
    mesh = _mesh(model, state.grid, horizon, density)
    if WaveMethod(method) == WaveMethod.VIA_GROUP:
        data = restore_data(state)
        evolved = propagate_physical(
            0.0,
            horizon,
            data,
            model,
            mesh,
            series_tol,
            max_terms,
        )
        return lift_data(*apply_U0(-horizon, evolved))
    diagonal = apply_M(state, MatrixDirection.M_INVERSE)
    result = peano_baker_apply(
        0.0,
        horizon,
        diagonal,
        model,
        mesh,
        series_tol,
        max_terms,
    )
    return apply_M(result.state, MatrixDirection.M)


def wave_operator_inverse_apply(
    sign: Sign,
    state: StateVector,
    model: DissipationModel,
    tol: float = 1e-8,
    horizon: Optional[float] = None,
    horizon_cap: float = DEFAULT_HORIZON_CAP,
    density: int = DEFAULT_DENSITY,
) -> StateVector:
    """Apply the inverse wave operator M Q(T, 0)^-1 M^-1 to a lifted state.

    Args:
        sign: PLUS or MINUS
        state: Lifted state U
        model: Dissipation model
        tol: Horizon tolerance
        horizon: Explicit horizon T
        horizon_cap: Largest admissible horizon
        density: Base mesh nodes per unit time

    Returns:
        W^-1 U in spectral representation
    """
    model = _oriented(sign, model)
    state = project_energy(state)
    model = model.on_grid(state.grid)
    horizon = _resolve_horizon(model, state, tol, horizon, horizon_cap)
    if horizon == 0 or model.vanishes:
        return state
    mesh = _mesh(model, state.grid, horizon, density)
    diagonal = apply_M(state, MatrixDirection.M_INVERSE)
    result = q_inverse_apply(0.0, horizon, diagonal, model, mesh)
    return apply_M(result, MatrixDirection.M)


def scattering_horizon(
    model: DissipationModel,
    norm: float,
    tol: float,
    cap: float = DEFAULT_HORIZON_CAP,
) -> float:
    """One horizon meeting ``tol`` for both the future and the past profile.

    Args:
        model: Dissipation model
        norm: Energy norm of the data
        tol: Horizon tolerance
        cap: Largest admissible horizon

    Returns:
        The larger of the two selected horizons
    """
    return max(
        select_horizon(model, norm, tol, cap),
        select_horizon(model.reflected(), norm, tol, cap),
    )


def _shared_horizon(
    state: StateVector,
    model: DissipationModel,
    tol: float,
    options: Dict[str, Any],
) -> Dict[str, Any]:
    if options.get("horizon") is not None:
        return options
    cap = options.get("horizon_cap", DEFAULT_HORIZON_CAP)
    horizon = scattering_horizon(
        model.on_grid(state.grid),
        energy_norm(state),
        tol,
        cap,
    )
    return {**options, "horizon": horizon}


def scattering_apply(
    state: StateVector,
    model: DissipationModel,
    tol: float = 1e-8,
    **options,
) -> StateVector:
    """S U = W+ W-^-1 U.

    Args:
        state: Lifted state U
        model: Dissipation model
        tol: Horizon tolerance for both factors
        options: ``horizon``, ``horizon_cap`` and ``density``; one
            horizon serves both factors

    Returns:
        S U in spectral representation
    """
    options = _shared_horizon(state, model, tol, options)
    inner = wave_operator_inverse_apply(
        Sign.MINUS,
        state,
        model,
        tol,
        **options,
    )
    return wave_operator_apply(Sign.PLUS, inner, model, tol, **options)


def scattering_inverse_apply(
    state: StateVector,
    model: DissipationModel,
    tol: float = 1e-8,
    **options,
) -> StateVector:
    """S^-1 U = W- W+^-1 U."""
    options = _shared_horizon(state, model, tol, options)
    inner = wave_operator_inverse_apply(
        Sign.PLUS,
        state,
        model,
        tol,
        **options,
    )
    return wave_operator_apply(Sign.MINUS, inner, model, tol, **options)


@dataclass(frozen=True)
class RateRow:
    """
    One row of the convergence rate table.

    Attributes:
        t: sweep time
        err: energy distance between damped and free asymptotic evolution
        tail: integral of sup_x |b| over (t, inf)
        ratio: err / (||data|| * tail)
    """

    t: float
    err: float
    tail: float
    ratio: float


def _ratio(err: float, scale: float) -> float:
    if scale == 0:
        return 0.0 if err == 0 else math.inf
    return err / scale


def rate_sweep(
    data: tuple,
    model: DissipationModel,
    times: Sequence[float],
    density: int = DEFAULT_DENSITY,
) -> List[RateRow]:
    """Distance between the damped evolution and the free evolution of the
    wave-operator image, at each sweep time.

    The limit Q(inf, 0) V is taken at the reference horizon 2 max(times),
    corrected by tail-ratio extrapolation between max(times) and the
    reference horizon.

    Args:
        data: Pair (u, D_t u) at time 0
        model: Dissipation model
        times: Increasing non-negative sweep times
        density: Base mesh nodes per unit time

    Returns:
        One RateRow per sweep time
    """
    times = [float(t) for t in times]
    if not times or any(t < 0 for t in times):
        raise ValueError("sweep times must be non-negative")
    if any(b <= a for a, b in zip(times[:-1], times[1:])):
        raise ValueError("sweep times must be increasing")
    lifted = lift_data(*data)
    norm = energy_norm(lifted)
    model = model.on_grid(lifted.grid)
    diagonal = apply_M(lifted, MatrixDirection.M_INVERSE)
    last = times[-1]
    reference = 2 * last if last > 0 else 1.0
    if model.vanishes:
        trajectory = [diagonal] * (len(times) + 1)
    else:
        trajectory = q_ode_checkpoints(
            0.0,
            times + [reference],
            diagonal,
            model,
            density,
        )
    limit = trajectory[-1]
    tail_last = tail_integral(model, last)
    tail_ref = tail_integral(model, reference)
    if tail_last > tail_ref:
        weight = tail_ref / (tail_last - tail_ref)
        limit = limit + (limit - trajectory[-2]) * weight

    rows = []
    for t, evolved in zip(times, trajectory):
        gap = apply_M(apply_E0(t, 0.0, evolved - limit), MatrixDirection.M)
        err = energy_norm(gap)
        tail = tail_integral(model, t)
        rows.append(RateRow(t, err, tail, _ratio(err, norm * tail)))
    unbounded = [row.t for row in rows if math.isinf(row.ratio)]
    if unbounded:
        logger.warning(
            "Tail vanishes before the error does; ratio is infinite",
            times=unbounded,
        )
    logger.info(
        "Rate sweep done",
        times=len(times),
        reference=reference,
        max_ratio=max(row.ratio for row in rows),
    )
    return rows


def loglog_slope(rows: Sequence[RateRow]) -> float:
    """Least-squares slope of log err against log(1 + t)."""
    points = [(row.t, row.err) for row in rows if row.err > 0]
    if len(points) < 2:
        raise ValueError("slope needs two rows with positive error")
    t, err = np.array(points).T
    slope, _ = np.polyfit(np.log1p(t), np.log(err), 1)
    return float(slope)


def random_probe(grid: GridSpec, rng: np.random.Generator) -> StateVector:
    """Complex gaussian state of unit norm."""
    shape = (2, *grid.shape)
    values = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    values /= np.linalg.norm(values.ravel())
    return StateVector.from_array(grid, values)


def _power_iteration(op: OperatorHandle, seed: int) -> float:
    probe = random_probe(op.grid, np.random.default_rng(seed))
    estimate = 0.0
    for iteration in range(1, POWER_MAX_ITER + 1):
        image = op.apply_adjoint(op.apply(probe))
        value = energy_norm(image)
        if value == 0:
            return 0.0
        probe = image * (1.0 / value)
        if abs(value - estimate) <= POWER_RTOL * value:
            estimate = value
            break
        estimate = value
    else:
        logger.warning("Power iteration hit the cap", handle=op.name)
    logger.debug(
        "Power iteration done",
        handle=op.name,
        iterations=iteration,
        estimate=math.sqrt(estimate),
    )
    return math.sqrt(estimate)


def assemble_dense(op: OperatorHandle) -> np.ndarray:
    """Matrix of the handle in the spectral basis, probed column by column.

    Raises:
        ValueError: If the grid exceeds the dense assembly limit
    """
    grid = op.grid
    if grid.size > DENSE_LIMIT:
        raise ValueError(
            f"dense assembly needs at most {DENSE_LIMIT} points, grid "
            f"{grid.label} has {grid.size}",
        )
    width = 2 * grid.size
    columns = []
    for index in range(width):
        basis = np.zeros(width, complex)
        basis[index] = 1.0
        state = StateVector.from_array(grid, basis.reshape(2, *grid.shape))
        columns.append(op.apply(state).array.ravel())
    return np.stack(columns, axis=1)


def operator_norm_estimate(
    op: OperatorHandle,
    grid: Optional[GridSpec] = None,
    mode: NormMode = NormMode.POWER_ITERATION,
    seed: int = 0,
) -> float:
    """Estimate the l2 -> l2 norm of a handle.

    Args:
        op: Operator handle
        grid: Grid to estimate on; defaults to the handle's grid
        mode: Power iteration on adjoint . op, or dense assembly followed
            by singular values (grids up to 1024 points)
        seed: Seed of the power iteration start vector

    Returns:
        Norm estimate

    Raises:
        AdjointUnavailableError: If power iteration meets a handle without
            adjoint
    """
    if grid is not None and grid != op.grid:
        raise ValueError(f"{op.name} lives on {op.grid.label}")
    if NormMode(mode) == NormMode.DENSE_ASSEMBLY:
        return float(linalg.svdvals(assemble_dense(op))[0])
    if op.adjoint is None:
        raise AdjointUnavailableError(
            f"power iteration needs the adjoint of {op.name}",
        )
    return _power_iteration(op, seed)


def compose(
    outer: OperatorHandle,
    inner: OperatorHandle,
    name: str,
) -> OperatorHandle:
    """Handle of outer . inner; the adjoint is inner^* . outer^*."""
    adjoint = None
    if outer.adjoint is not None and inner.adjoint is not None:

        def adjoint(state: StateVector) -> StateVector:
            return inner.adjoint(outer.adjoint(state))

    horizons = [h for h in (outer.horizon, inner.horizon) if h is not None]
    return OperatorHandle(
        name=name,
        grid=inner.grid,
        action=lambda state: outer.action(inner.action(state)),
        adjoint=adjoint,
        horizon=max(horizons) if horizons else None,
        truncation_bound=outer.truncation_bound + inner.truncation_bound,
    )


def identity_handle(grid: GridSpec) -> OperatorHandle:
    return OperatorHandle("identity", grid, lambda v: v, lambda v: v)


def free_handle(grid: GridSpec, t: float, s: float = 0.0) -> OperatorHandle:
    """E0(t, s) with adjoint E0(s, t)."""
    return OperatorHandle(
        "E0",
        grid,
        lambda v: apply_E0(t, s, v),
        lambda v: apply_E0(s, t, v),
    )


def q_minus_identity_handle(
    grid: GridSpec,
    model: DissipationModel,
    t: float,
    s: float = 0.0,
    density: int = DEFAULT_DENSITY,
) -> OperatorHandle:
    """Q(t, s) - I in diagonal coordinates."""
    mesh = TimeMesh.build(s, t, model=model, grid=grid, density=density)

    def action(state: StateVector) -> StateVector:
        return peano_baker_apply(s, t, state, model, mesh).state - state

    def adjoint(state: StateVector) -> StateVector:
        return q_adjoint_apply(s, t, state, model, mesh) - state

    return OperatorHandle("Q-I", grid, action, adjoint, horizon=t)


def _conjugated(action: Callable, state: StateVector) -> StateVector:
    diagonal = apply_M(state, MatrixDirection.M_INVERSE)
    return apply_M(action(diagonal), MatrixDirection.M)


def wave_operator_handle(
    sign: Sign,
    grid: GridSpec,
    model: DissipationModel,
    tol: float = 1e-8,
    horizon: Optional[float] = None,
    horizon_cap: float = DEFAULT_HORIZON_CAP,
    density: int = DEFAULT_DENSITY,
    inverse: bool = False,
) -> OperatorHandle:
    """W or W^-1 at a fixed horizon, selected for unit-norm inputs.

    M^* = 2 M^-1, so the adjoint of M X M^-1 is M X^* M^-1.

    Args:
        sign: PLUS or MINUS
        grid: Grid the handle acts on
        model: Dissipation model
        tol: Horizon tolerance per unit input
        horizon: Explicit horizon
        horizon_cap: Largest admissible horizon
        density: Base mesh nodes per unit time
        inverse: Build W^-1 instead of W

    Returns:
        The handle, with its horizon and truncation bound recorded
    """
    oriented = _oriented(sign, model).on_grid(grid)
    if horizon is None:
        horizon = select_horizon(oriented, 1.0, tol, horizon_cap)
    mesh = _mesh(oriented, grid, horizon, density)

    def forward(state: StateVector) -> StateVector:
        return peano_baker_apply(0.0, horizon, state, oriented, mesh).state

    def backward(state: StateVector) -> StateVector:
        return q_inverse_apply(0.0, horizon, state, oriented, mesh)

    def forward_adjoint(state: StateVector) -> StateVector:
        return q_adjoint_apply(0.0, horizon, state, oriented, mesh)

    def backward_adjoint(state: StateVector) -> StateVector:
        # (Q_b^*)^-1 = Q_{-b}
        flipped = oriented.negated()
        return q_ode_apply(0.0, horizon, state, flipped, mesh)

    if inverse:
        action, adjoint = backward, backward_adjoint
    else:
        action, adjoint = forward, forward_adjoint
    label = f"W{Sign(sign).value}" + ("^-1" if inverse else "")
    return OperatorHandle(
        name=label,
        grid=grid,
        action=functools.partial(_conjugated, action),
        adjoint=functools.partial(_conjugated, adjoint),
        horizon=horizon,
        truncation_bound=horizon_bound(oriented, horizon),
    )


def scattering_handle(
    grid: GridSpec,
    model: DissipationModel,
    inverse: bool = False,
    **options,
) -> OperatorHandle:
    """S = W+ W-^-1, or S^-1 = W- W+^-1, both factors at one horizon."""
    if options.get("horizon") is None:
        options["horizon"] = scattering_horizon(
            model.on_grid(grid),
            1.0,
            options.get("tol", 1e-8),
            options.get("horizon_cap", DEFAULT_HORIZON_CAP),
        )
    if inverse:
        outer = wave_operator_handle(Sign.MINUS, grid, model, **options)
        inner = wave_operator_handle(
            Sign.PLUS,
            grid,
            model,
            inverse=True,
            **options,
        )
        return compose(outer, inner, "S^-1")
    outer = wave_operator_handle(Sign.PLUS, grid, model, **options)
    inner = wave_operator_handle(
        Sign.MINUS,
        grid,
        model,
        inverse=True,
        **options,
    )
    return compose(outer, inner, "S")


def strang_handle(
    grid: GridSpec,
    model: DissipationModel,
    t0: float,
    t1: float,
    dt: float,
) -> OperatorHandle:
    """Damped propagator U(t1, t0) on lifted states by Strang splitting.

    No adjoint is available; estimate its norm by dense assembly.
    """
    return OperatorHandle(
        "U",
        grid,
        lambda v: strang_state(t0, t1, v, model, dt),
        horizon=t1,
    )
