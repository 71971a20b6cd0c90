"""Time-ordered series for Q(t, s) and the propagators built from it.

Q(t, s) solves D_t Q = R(t, s) Q, Q(s, s) = I, in diagonal coordinates.
Two independent evaluators are provided: the truncated series with
cumulative quadrature (``peano_baker_apply``) and classical fourth-order
integration of the ODE (``q_ode_apply``). The series truncation is
certified by the factorial bound on the k-th term.
"""
import math
from dataclasses import dataclass
from enum import Enum
from typing import Iterable
from typing import Iterator
from typing import List
from typing import Optional
from typing import Sequence
from typing import Tuple

import numpy as np
import structlog
from scipy import integrate
from scipy import special

from lib.wave.coefficients import DissipationModel
from lib.wave.coefficients import integral_sup_b
from lib.wave.free_propagator import MatrixDirection
from lib.wave.free_propagator import apply_E0
from lib.wave.free_propagator import apply_M
from lib.wave.free_propagator import beta_factor
from lib.wave.free_propagator import free_phase
from lib.wave.free_propagator import twisted_action
from lib.wave.spectral_core import Field
from lib.wave.spectral_core import GridSpec
from lib.wave.spectral_core import Representation
from lib.wave.spectral_core import StateVector
from lib.wave.spectral_core import energy_norm
from lib.wave.spectral_core import lift_data
from lib.wave.spectral_core import restore_data

logger = structlog.get_logger(__name__)

DEFAULT_DENSITY = 256
DEFAULT_TOL = 1e-12
DEFAULT_MAX_TERMS = 60
CHUNK_INTERVALS = 512


class QuadratureRule(str, Enum):
    """Rule used for the cumulative integrals of the series."""

    TRAPEZOID = "trapezoid"
    SIMPSON = "simpson"


def resolve_density(
    model: Optional[DissipationModel] = None,
    grid: Optional[GridSpec] = None,
    base: int = DEFAULT_DENSITY,
) -> int:
    """Nodes per unit time, doubled until the mesh resolves the problem.

    The spacing must resolve the time profile (h <= scale / 16) and the
    fastest phase of the twisted coupling (2 max|xi| h <= 1/2).

    Args:
        model: Dissipation model, if any
        grid: Spectral grid, if any
        base: Starting density

    Returns:
        Nodes per unit time
    """
    density = base
    scale = model.resolution_scale if model is not None else math.inf
    fastest = 2 * grid.max_abs_xi() if grid is not None else 0.0
    while density * scale < 16 or fastest > density / 2:
        density *= 2
    return density


@dataclass(frozen=True)
class TimeMesh:
    """
    Strictly increasing nodes from ``start`` to ``stop``.

    The mesh is a union of uniform segments sharing end nodes; segments
    end at profile breakpoints so that one-sided limits can be used there.

    Attributes:
        start: first node
        stop: last node
        nodes: node array
        rule: quadrature rule for cumulative integrals
        segments: inclusive node index ranges of the uniform segments
    """

    start: float
    stop: float
    nodes: np.ndarray
    rule: QuadratureRule
    segments: Tuple[Tuple[int, int], ...]

    def __post_init__(self) -> None:
        nodes = np.asarray(self.nodes, dtype=float)
        if nodes[0] != self.start or nodes[-1] != self.stop:
            raise ValueError("mesh nodes must run from start to stop")
        if np.any(np.diff(nodes) <= 0):
            raise ValueError("mesh nodes must be strictly increasing")
        if self.rule == QuadratureRule.SIMPSON and any(
            (b - a) % 2 for a, b in self.segments
        ):
            raise ValueError("simpson rule needs an even number of intervals")
        nodes.setflags(write=False)
        object.__setattr__(self, "nodes", nodes)

    @classmethod
    def build(
        cls,
        s: float,
        t: float,
        model: Optional[DissipationModel] = None,
        grid: Optional[GridSpec] = None,
        density: int = DEFAULT_DENSITY,
        rule: QuadratureRule = QuadratureRule.SIMPSON,
        checkpoints: Iterable[float] = (),
    ) -> "TimeMesh":
        """Build a mesh over [s, t] split at breakpoints and checkpoints.

        Args:
            s: First node
            t: Last node
            model: Model whose breakpoints and scale shape the mesh
            grid: Grid whose frequencies shape the mesh
            density: Base nodes per unit time
            rule: Quadrature rule
            checkpoints: Extra times that must be nodes

        Returns:
            The mesh
        """
        if t < s:
            raise ValueError(f"mesh needs s <= t, got ({s}, {t})")
        if t == s:
            return cls(s, t, np.array([s]), rule, ((0, 0),))
        density = resolve_density(model, grid, density)
        cuts = set(checkpoints)
        if model is not None:
            cuts.update(model.breakpoints)
        edges = [s] + sorted(c for c in cuts if s < c < t) + [t]
        pieces: List[np.ndarray] = []
        segments: List[Tuple[int, int]] = []
        offset = 0
        for a, b in zip(edges[:-1], edges[1:]):
            count = max(2, math.ceil((b - a) * density - 1e-9))
            if rule == QuadratureRule.SIMPSON and count % 2:
                count += 1
            piece = np.linspace(a, b, count + 1)
            pieces.append(piece if not pieces else piece[1:])
            segments.append((offset, offset + count))
            offset += count
        return cls(s, t, np.concatenate(pieces), rule, tuple(segments))

    @property
    def size(self) -> int:
        return len(self.nodes)

    def index_of(self, time: float) -> int:
        """Index of the node at ``time``."""
        index = int(np.argmin(np.abs(self.nodes - time)))
        if not math.isclose(self.nodes[index], time, abs_tol=1e-12):
            raise ValueError(f"{time} is not a mesh node")
        return index

    def covers(self, s: float, t: float) -> bool:
        return self.start == s and self.stop == t


@dataclass(frozen=True)
class SeriesResult:
    """
    Output of the series evaluation.

    Attributes:
        state: Q(t, s) V truncated after ``terms_used`` terms
        terms_used: index K of the last term kept
        remainder_bound: certified bound on the discarded tail
        per_term_norms: norms of the terms 0..K at the final time
        converged: False when Kmax was reached before the tolerance
    """

    state: StateVector
    terms_used: int
    remainder_bound: float
    per_term_norms: Tuple[float, ...]
    converged: bool = True


def series_tail(k: int, c: float) -> float:
    """sum_{j >= k} c^j / j!, via the regularized incomplete gamma."""
    if k < 0:
        raise ValueError(f"k must be non-negative, got {k}")
    if k == 0:
        return math.exp(c)
    if c == 0:
        return 0.0
    return math.exp(c) * float(special.gammainc(k, c))


def remainder_bound(
    k: int,
    s: float,
    t: float,
    model: DissipationModel,
) -> float:
    """Bound on the norm of the series tail from term k on, per unit input.

    Args:
        k: First discarded term
        s: Initial time
        t: Final time
        model: Dissipation model

    Returns:
        sum_{j >= k} c^j / j! with c the integral of sup_x |b| over (s, t)
    """
    return series_tail(k, integral_sup_b(model, s, t))


def cauchy_bound(
    s: float,
    t1: float,
    t2: float,
    model: DissipationModel,
) -> float:
    """Bound on ||Q(t2, s) - Q(t1, s)|| for s <= t1 <= t2.

    The integral of ||b(tau)|| exp(I(s, tau)) over (t1, t2) is exactly
    exp(I(s, t2)) - exp(I(s, t1)).
    """
    return math.exp(integral_sup_b(model, s, t2)) - math.exp(
        integral_sup_b(model, s, t1),
    )


def _chunks(
    mesh: TimeMesh,
    size: int = CHUNK_INTERVALS,
) -> Iterator[Tuple[int, int]]:
    # sub-ranges of the segments, each an even number of intervals
    for a, b in mesh.segments:
        start = a
        while start < b:
            stop = min(start + size, b)
            yield start, stop
            start = stop


def _integrate_chunk(
    values: np.ndarray,
    dx: float,
    rule: QuadratureRule,
) -> np.ndarray:
    # cumulative_simpson accumulates in float64 on some scipy releases
    if rule == QuadratureRule.SIMPSON:
        cumulative = integrate.cumulative_simpson
    else:
        cumulative = integrate.cumulative_trapezoid
    real = cumulative(values.real, dx=dx, axis=0, initial=0)
    imag = cumulative(values.imag, dx=dx, axis=0, initial=0)
    return real + 1j * imag


def terms_needed(c: float, norm: float, tol: float, max_terms: int) -> int:
    """Smallest K with series_tail(K + 1, c) * norm <= tol, capped."""
    terms = 0
    while series_tail(terms + 1, c) * norm > tol and terms < max_terms:
        terms += 1
    return terms


def peano_baker_apply(
    s: float,
    t: float,
    state: StateVector,
    model: DissipationModel,
    mesh: Optional[TimeMesh] = None,
    tol: float = DEFAULT_TOL,
    max_terms: int = DEFAULT_MAX_TERMS,
) -> SeriesResult:
    """Apply Q(t, s) through its time-ordered series.

    Term k is i times the cumulative integral of R(., s) applied to term
    k - 1. K is fixed up front as the first index whose analytic remainder
    bound, times ||V||, drops to ``tol``; the mesh is then swept chunk by
    chunk, carrying the running value of every term across chunk ends.

    Args:
        s: Initial time
        t: Final time, ``t >= s``
        state: State V in diagonal coordinates
        model: Dissipation model
        mesh: Mesh over [s, t]; built from the model and grid when omitted
        tol: Absolute truncation tolerance, > 0
        max_terms: Largest admissible K

    Returns:
        SeriesResult; ``converged`` is False if ``max_terms`` was reached
    """
    if tol <= 0:
        raise ValueError(f"tol must be positive, got {tol}")
    state = state.to(Representation.SPECTRAL)
    model = model.on_grid(state.grid)
    norm_in = energy_norm(state)
    c = integral_sup_b(model, s, t)
    if t == s or model.vanishes or norm_in == 0 or c == 0:
        return SeriesResult(state, 0, 0.0, (norm_in,))

    mesh = mesh or TimeMesh.build(s, t, model=model, grid=state.grid)
    if not mesh.covers(s, t):
        raise ValueError("mesh does not span [s, t]")
    grid = state.grid
    beta = beta_factor(model, grid)
    terms_used = terms_needed(c, norm_in, tol, max_terms)

    # carries[k] is term k at the current chunk start
    carries = np.zeros((terms_used + 1, *state.array.shape), complex)
    carries[0] = state.array
    for a, b in _chunks(mesh):
        nodes = mesh.nodes[a : b + 1]
        mu = np.array(model.mu(nodes), dtype=float)
        mu[0] = model.mu(nodes[0], side="right")
        mu[-1] = model.mu(nodes[-1], side="left")
        if not mu.any():
            continue
        mu = mu.reshape((-1,) + (1,) * (state.array.ndim))
        phase = free_phase(grid, nodes - s)
        term = np.broadcast_to(carries[0], (len(nodes), *carries[0].shape))
        for k in range(1, terms_used + 1):
            unit = mu * twisted_action(phase, term, grid, beta)
            piece = _integrate_chunk(unit, nodes[1] - nodes[0], mesh.rule)
            term = carries[k] + 1j * piece
            carries[k] = term[-1]

    norms = tuple(float(np.linalg.norm(v.ravel())) for v in carries)
    achieved = series_tail(terms_used + 1, c) * norm_in
    converged = achieved <= tol
    if not converged:
        logger.warning(
            "Series truncated before tolerance",
            terms_used=terms_used,
            remainder_bound=achieved,
            tol=tol,
        )
    logger.debug(
        "Series evaluated",
        s=s,
        t=t,
        integral=c,
        terms_used=terms_used,
        remainder_bound=achieved,
        nodes=mesh.size,
    )
    return SeriesResult(
        StateVector.from_array(grid, carries.sum(axis=0)),
        terms_used,
        achieved,
        norms,
        converged,
    )


def _rhs(
    tau: float,
    mu: float,
    values: np.ndarray,
    s: float,
    grid: GridSpec,
    beta: object,
) -> np.ndarray:
    if mu == 0:
        return np.zeros_like(values)
    phase = free_phase(grid, np.array([tau - s]))
    return 1j * mu * twisted_action(phase, values[np.newaxis], grid, beta)[0]


def _rk4_sweep(
    s: float,
    mesh: TimeMesh,
    values: np.ndarray,
    model: DissipationModel,
    grid: GridSpec,
    record: Sequence[int],
    backward: bool = False,
) -> List[np.ndarray]:
    # classical RK4 for w' = i R(tau, s) w along the mesh
    nodes = mesh.nodes
    beta = beta_factor(model, grid)
    wanted = set(record)
    recorded = {}
    steps = range(mesh.size - 1)
    if backward:
        steps = reversed(steps)
        current = mesh.size - 1
    else:
        current = 0
    if current in wanted:
        recorded[current] = values.copy()
    for j in steps:
        if backward:
            tau, end, h = nodes[j + 1], nodes[j], nodes[j] - nodes[j + 1]
            mu_start = float(model.mu(tau, side="left"))
            mu_end = float(model.mu(end, side="right"))
        else:
            tau, end, h = nodes[j], nodes[j + 1], nodes[j + 1] - nodes[j]
            mu_start = float(model.mu(tau, side="right"))
            mu_end = float(model.mu(end, side="left"))
        mid = tau + h / 2
        mu_mid = float(model.mu(mid))
        if mu_start or mu_mid or mu_end:
            k1 = _rhs(tau, mu_start, values, s, grid, beta)
            k2 = _rhs(mid, mu_mid, values + h / 2 * k1, s, grid, beta)
            k3 = _rhs(mid, mu_mid, values + h / 2 * k2, s, grid, beta)
            k4 = _rhs(end, mu_end, values + h * k3, s, grid, beta)
            values = values + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        current = j if backward else j + 1
        if current in wanted:
            recorded[current] = values.copy()
    return [recorded[index] for index in record]


def q_ode_checkpoints(
    s: float,
    times: Sequence[float],
    state: StateVector,
    model: DissipationModel,
    density: int = DEFAULT_DENSITY,
) -> List[StateVector]:
    """Q(tau, s) V at each checkpoint from one forward integration.

    Args:
        s: Initial time
        times: Increasing checkpoint times, all >= s
        state: State V in diagonal coordinates
        model: Dissipation model
        density: Base nodes per unit time

    Returns:
        One state per checkpoint, in order
    """
    state = state.to(Representation.SPECTRAL)
    mesh = TimeMesh.build(
        s,
        max(times),
        model=model,
        grid=state.grid,
        density=density,
        checkpoints=times,
    )
    indices = [mesh.index_of(time) for time in times]
    results = _rk4_sweep(s, mesh, state.array, model, state.grid, indices)
    return [StateVector.from_array(state.grid, r) for r in results]


def q_ode_apply(
    s: float,
    t: float,
    state: StateVector,
    model: DissipationModel,
    mesh: Optional[TimeMesh] = None,
) -> StateVector:
    """Apply Q(t, s) by integrating w' = i R(tau, s) w, w(s) = V.

    Args:
        s: Initial time
        t: Final time, ``t >= s``
        state: State V in diagonal coordinates
        model: Dissipation model
        mesh: Step mesh over [s, t]; built when omitted

    Returns:
        w(t)
    """
    state = state.to(Representation.SPECTRAL)
    if t == s or model.vanishes:
        return state
    mesh = mesh or TimeMesh.build(s, t, model=model, grid=state.grid)
    if not mesh.covers(s, t):
        raise ValueError("mesh does not span [s, t]")
    (result,) = _rk4_sweep(
        s,
        mesh,
        state.array,
        model,
        state.grid,
        [mesh.size - 1],
    )
    return StateVector.from_array(state.grid, result)


def q_inverse_apply(
    s: float,
    t: float,
    state: StateVector,
    model: DissipationModel,
    mesh: Optional[TimeMesh] = None,
) -> StateVector:
    """Apply Q(t, s)^-1 by integrating w' = i R(tau, s) w from w(t) = V
    back to tau = s.

    Args:
        s: Initial time
        t: Final time, ``t >= s``
        state: State V in diagonal coordinates
        model: Dissipation model
        mesh: Step mesh over [s, t]; built when omitted

    Returns:
        w(s)
    """
    state = state.to(Representation.SPECTRAL)
    if t == s or model.vanishes:
        return state
    mesh = mesh or TimeMesh.build(s, t, model=model, grid=state.grid)
    if not mesh.covers(s, t):
        raise ValueError("mesh does not span [s, t]")
    (result,) = _rk4_sweep(
        s,
        mesh,
        state.array,
        model,
        state.grid,
        [0],
        backward=True,
    )
    return StateVector.from_array(state.grid, result)


def q_adjoint_apply(
    s: float,
    t: float,
    state: StateVector,
    model: DissipationModel,
    mesh: Optional[TimeMesh] = None,
) -> StateVector:
    """Apply Q(t, s)^*.

    For real b the generator i R is self-adjoint, so Q_b(t, s)^* is the
    inverse of Q for the coefficient -b.
    """
    return q_inverse_apply(s, t, state, model.negated(), mesh)


def propagate_physical(
    s: float,
    t: float,
    data: Tuple[Field, Field],
    model: DissipationModel,
    mesh: Optional[TimeMesh] = None,
    tol: float = DEFAULT_TOL,
    max_terms: int = DEFAULT_MAX_TERMS,
) -> Tuple[Field, Field]:
    """Solution operator U(t, s) of the damped wave equation on data.

    Evaluates restore . M . E0(t, s) . Q(t, s) . M^-1 . lift.

    Args:
        s: Initial time
        t: Final time, ``t >= s``
        data: Pair (u(s), D_t u(s))
        model: Dissipation model
        mesh: Mesh over [s, t] for the series
        tol: Series truncation tolerance
        max_terms: Largest admissible number of series terms

    Returns:
        Pair (u(t), D_t u(t)) in physical representation
    """
    lifted = lift_data(*data)
    diagonal = apply_M(lifted, MatrixDirection.M_INVERSE)
    result = peano_baker_apply(s, t, diagonal, model, mesh, tol, max_terms)
    evolved = apply_M(apply_E0(t, s, result.state), MatrixDirection.M)
    return restore_data(evolved)
