"""Dissipation coefficients b(t, x) = mu(t) beta(x).

Every bound in the scattering pipeline is phrased through sup_x |b| and
its time integrals, so each profile carries an exact sup-norm and a closed
form (or adaptive quadrature) for the integral of |mu| over any interval.
"""
import math
from typing import Annotated
from typing import Any
from typing import Dict
from typing import Literal
from typing import Optional
from typing import Tuple
from typing import Union

import numpy as np
from pydantic import BaseModel
from pydantic import ConfigDict
from pydantic import Field as PydanticField
from pydantic import PrivateAttr
from pydantic import ValidationError
from pydantic import field_validator
from pydantic import model_validator
from scipy import integrate
from scipy import special

from lib.core.errors import ProfileError
from lib.core.errors import ProfileRangeError
from lib.wave.spectral_core import Field
from lib.wave.spectral_core import GridSpec
from lib.wave.spectral_core import Representation

QUAD_RTOL = 1e-10
QUAD_ATOL = 1e-15

# One-sided limits at breakpoints: "left" is the limit from below,
# "right" from above, None the value of the closed-interval convention.
Side = Optional[Literal["left", "right"]]


class _Profile(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")


class IntervalProfile(_Profile):
    """sign * mu0 on [t0, t1], zero elsewhere."""

    kind: Literal["interval"] = "interval"
    mu0: float = PydanticField(ge=0)
    t0: float = 0.0
    t1: float = 1.0
    sign: Literal[1, -1] = 1

    @model_validator(mode="after")
    def validate_interval(self) -> "IntervalProfile":
        """Validate interval ordering."""
        if not self.t1 > self.t0:
            raise ValueError("interval profile requires t1 > t0")
        return self

    def value(self, t: Any, side: Side = None) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        if side == "left":
            inside = (t > self.t0) & (t <= self.t1)
        elif side == "right":
            inside = (t >= self.t0) & (t < self.t1)
        else:
            inside = (t >= self.t0) & (t <= self.t1)
        return np.where(inside, self.sign * self.mu0, 0.0)

    def abs_integral(self, s: float, t: float) -> float:
        overlap = min(t, self.t1) - max(s, self.t0)
        return self.mu0 * max(overlap, 0.0)

    @property
    def breakpoints(self) -> Tuple[float, ...]:
        return (self.t0, self.t1)

    @property
    def resolution_scale(self) -> float:
        return self.t1 - self.t0

    @property
    def support(self) -> Tuple[float, float]:
        return (self.t0, self.t1)

    def reflected(self) -> "IntervalProfile":
        return self.model_copy(update={"t0": -self.t1, "t1": -self.t0})


class AlgebraicProfile(_Profile):
    """sign * mu0 * (1 + |t|)^(-p) with p > 1."""

    kind: Literal["algebraic"] = "algebraic"
    mu0: float = PydanticField(ge=0)
    p: float = 2.0
    sign: Literal[1, -1] = 1

    @field_validator("p")
    @classmethod
    def validate_p(cls, v: float) -> float:
        """Validate the decay exponent."""
        if not v > 1:
            raise ValueError(
                "p must be > 1 so that b is integrable in time "
                "(L1-in-time assumption)",
            )
        return v

    def value(self, t: Any, side: Side = None) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        return self.sign * self.mu0 * (1.0 + np.abs(t)) ** (-self.p)

    def _tail(self, x: float) -> float:
        # integral of (1 + tau)^(-p) over (x, inf) for x >= 0
        if math.isinf(x):
            return 0.0
        return (1.0 + x) ** (1.0 - self.p) / (self.p - 1.0)

    def abs_integral(self, s: float, t: float) -> float:
        if s >= 0:
            shape = self._tail(s) - self._tail(t)
        elif t <= 0:
            shape = self._tail(-t) - self._tail(-s)
        else:
            shape = 2 * self._tail(0.0) - self._tail(-s) - self._tail(t)
        return self.mu0 * shape

    @property
    def breakpoints(self) -> Tuple[float, ...]:
        return (0.0,)

    @property
    def resolution_scale(self) -> float:
        return 1.0

    @property
    def support(self) -> Tuple[float, float]:
        return (-math.inf, math.inf)

    def reflected(self) -> "AlgebraicProfile":
        return self


class GaussianProfile(_Profile):
    """sign * mu0 * exp(-((t - center) / sigma)^2)."""

    kind: Literal["gaussian"] = "gaussian"
    mu0: float = PydanticField(ge=0)
    sigma: float = PydanticField(default=1.0, gt=0)
    center: float = 0.0
    sign: Literal[1, -1] = 1

    def value(self, t: Any, side: Side = None) -> np.ndarray:
        z = (np.asarray(t, dtype=float) - self.center) / self.sigma
        return self.sign * self.mu0 * np.exp(-(z**2))

    def abs_integral(self, s: float, t: float) -> float:
        a = (s - self.center) / self.sigma
        b = (t - self.center) / self.sigma
        # erfc differences keep the far tails accurate
        if a >= 0:
            shape = special.erfc(a) - special.erfc(b)
        elif b <= 0:
            shape = special.erfc(-b) - special.erfc(-a)
        else:
            shape = special.erf(b) - special.erf(a)
        return float(self.mu0 * self.sigma * math.sqrt(math.pi) / 2 * shape)

    @property
    def breakpoints(self) -> Tuple[float, ...]:
        return ()

    @property
    def resolution_scale(self) -> float:
        return self.sigma

    @property
    def support(self) -> Tuple[float, float]:
        return (-math.inf, math.inf)

    def reflected(self) -> "GaussianProfile":
        return self.model_copy(update={"center": -self.center})


class TabulatedProfile(_Profile):
    """Piecewise linear interpolation of tabulated values."""

    kind: Literal["tabulated"] = "tabulated"
    times: Tuple[float, ...]
    values: Tuple[float, ...]
    extrapolation: Literal["error", "zero"] = "error"

    @model_validator(mode="after")
    def validate_table(self) -> "TabulatedProfile":
        """Validate table shape and ordering."""
        if len(self.times) < 2 or len(self.times) != len(self.values):
            raise ValueError(
                "tabulated profile needs at least two times and one value "
                "per time",
            )
        if np.any(np.diff(self.times) <= 0):
            raise ValueError("tabulated times must be strictly increasing")
        return self

    def value(self, t: Any, side: Side = None) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        outside = (t < self.times[0]) | (t > self.times[-1])
        if self.extrapolation == "error" and np.any(outside):
            raise ProfileRangeError(
                f"tabulated profile queried outside "
                f"[{self.times[0]}, {self.times[-1]}]",
            )
        return np.interp(t, self.times, self.values, left=0.0, right=0.0)

    def _clip(self, s: float, t: float) -> Tuple[float, float]:
        lo, hi = self.times[0], self.times[-1]
        if self.extrapolation == "error" and (s < lo or t > hi):
            raise ProfileRangeError(
                f"integral over ({s}, {t}) leaves the table [{lo}, {hi}]",
            )
        return max(s, lo), min(t, hi)

    def abs_integral(self, s: float, t: float) -> float:
        a, b = self._clip(s, t)
        if b <= a:
            return 0.0
        return _quad(
            lambda tau: abs(float(self.value(tau))),
            a,
            b,
            self.times,
        )

    def signed_integral(self, s: float, t: float) -> float:
        a, b = self._clip(s, t)
        if b <= a:
            return 0.0
        return _quad(lambda tau: float(self.value(tau)), a, b, self.times)

    @property
    def breakpoints(self) -> Tuple[float, ...]:
        # every node is a kink of the interpolant
        return tuple(self.times)

    @property
    def resolution_scale(self) -> float:
        return float(np.min(np.diff(self.times)))

    @property
    def support(self) -> Tuple[float, float]:
        return (self.times[0], self.times[-1])

    def reflected(self) -> "TabulatedProfile":
        return self.model_copy(
            update={
                "times": tuple(-t for t in reversed(self.times)),
                "values": tuple(reversed(self.values)),
            },
        )


TimeProfile = Annotated[
    Union[
        IntervalProfile,
        AlgebraicProfile,
        GaussianProfile,
        TabulatedProfile,
    ],
    PydanticField(discriminator="kind"),
]


class ConstantSpace(_Profile):
    """beta(x) = value."""

    kind: Literal["constant"] = "constant"
    value: float = 1.0

    def evaluate(self, grid: GridSpec) -> np.ndarray:
        return np.full(grid.shape, self.value)

    @property
    def sup_norm(self) -> float:
        return abs(self.value)

    def sup_on(self, grid: Optional[GridSpec] = None) -> float:
        return abs(self.value)

    def negated(self) -> "ConstantSpace":
        return self.model_copy(update={"value": -self.value})


class BumpSpace(_Profile):
    """Periodized gaussian bump height * exp(-|x - center|^2 / width^2)."""

    kind: Literal["bump"] = "bump"
    center: float = math.pi
    width: float = PydanticField(default=1.0, gt=0)
    height: float = 1.0

    def evaluate(self, grid: GridSpec) -> np.ndarray:
        exponent = np.zeros(grid.shape)
        for x in grid.coordinates():
            d = np.mod(x - self.center + grid.period / 2, grid.period)
            exponent += ((d - grid.period / 2) / self.width) ** 2
        return self.height * np.exp(-exponent)

    @property
    def sup_norm(self) -> float:
        # continuum sup; bounds the max over any grid
        return abs(self.height)

    def sup_on(self, grid: Optional[GridSpec] = None) -> float:
        """Max of |beta| on the grid, or the continuum sup without a grid."""
        if grid is None:
            return self.sup_norm
        return float(np.max(np.abs(self.evaluate(grid))))

    def negated(self) -> "BumpSpace":
        return self.model_copy(update={"height": -self.height})


class TabulatedSpace(_Profile):
    """beta given point by point on a grid, flattened in C order."""

    kind: Literal["tabulated"] = "tabulated"
    values: Tuple[float, ...]

    def evaluate(self, grid: GridSpec) -> np.ndarray:
        if len(self.values) != grid.size:
            raise ProfileError(
                f"tabulated beta has {len(self.values)} values, grid "
                f"{grid.label} has {grid.size} points",
            )
        return np.asarray(self.values, dtype=float).reshape(grid.shape)

    @property
    def sup_norm(self) -> float:
        return float(np.max(np.abs(self.values)))

    def sup_on(self, grid: Optional[GridSpec] = None) -> float:
        # the values already are the grid values
        return self.sup_norm

    def negated(self) -> "TabulatedSpace":
        return self.model_copy(
            update={"values": tuple(-v for v in self.values)},
        )


SpaceProfile = Annotated[
    Union[ConstantSpace, BumpSpace, TabulatedSpace],
    PydanticField(discriminator="kind"),
]


class DissipationModel(BaseModel):
    """Separable dissipation b(t, x) = mu(t) * beta(x).

    A model bound to a grid caches sup |beta| as the max over its points;
    an unbound model uses the continuum sup.
    """

    model_config = ConfigDict(frozen=True, extra="forbid")

    time: TimeProfile
    space: SpaceProfile = ConstantSpace()
    grid: Optional[GridSpec] = None

    _sup_beta: float = PrivateAttr(default=0.0)

    @model_validator(mode="after")
    def validate_integrable(self) -> "DissipationModel":
        """Check integrability in time and cache sup |beta|."""
        total = _abs_integral_closed(self.time, -math.inf, math.inf)
        if total is not None and not math.isfinite(total):
            raise ValueError("b must be integrable in time (L1-in-time)")
        self._sup_beta = self.space.sup_on(self.grid)
        return self

    @classmethod
    def free(cls) -> "DissipationModel":
        """The model b = 0."""
        return cls(time=IntervalProfile(mu0=0.0))

    @property
    def sup_beta(self) -> float:
        return self._sup_beta

    @property
    def is_x_independent(self) -> bool:
        return isinstance(self.space, ConstantSpace)

    @property
    def vanishes(self) -> bool:
        if self.sup_beta == 0:
            return True
        if isinstance(self.time, TabulatedProfile):
            return not any(self.time.values)
        return self.time.mu0 == 0

    @property
    def breakpoints(self) -> Tuple[float, ...]:
        return self.time.breakpoints

    @property
    def resolution_scale(self) -> float:
        return self.time.resolution_scale

    def defined_on(self, s: float, t: float) -> bool:
        """False when a tabulated profile without extrapolation leaves its
        table somewhere in [s, t]."""
        profile = self.time
        if not isinstance(profile, TabulatedProfile):
            return True
        if profile.extrapolation == "zero":
            return True
        return profile.times[0] <= s and t <= profile.times[-1]

    def mu(self, t: Any, side: Side = None) -> np.ndarray:
        """Signed time profile mu(t)."""
        return self.time.value(t, side)

    def beta(self, grid: GridSpec) -> np.ndarray:
        """Real space profile beta on the grid points."""
        return self.space.evaluate(grid)

    def reflected(self) -> "DissipationModel":
        """Model with time profile mu(-t)."""
        return DissipationModel(
            time=self.time.reflected(),
            space=self.space,
            grid=self.grid,
        )

    def negated(self) -> "DissipationModel":
        """Model with coefficient -b."""
        return DissipationModel(
            time=self.time,
            space=self.space.negated(),
            grid=self.grid,
        )

    def on_grid(self, grid: GridSpec) -> "DissipationModel":
        """The same coefficient with sup |beta| taken over ``grid``."""
        if self.grid == grid:
            return self
        return DissipationModel(time=self.time, space=self.space, grid=grid)


def _quad(func: Any, a: float, b: float, points: Tuple[float, ...]) -> float:
    inner = tuple(p for p in points if a < p < b)
    if math.isfinite(a) and math.isfinite(b):
        value, _ = integrate.quad(
            func,
            a,
            b,
            points=inner or None,
            epsrel=QUAD_RTOL,
            epsabs=QUAD_ATOL,
            limit=500,
        )
        return float(value)
    # quad takes no break points on infinite ranges; integrate the finite
    # middle with them and the two tails without
    if inner:
        lo, hi = min(inner), max(inner)
    else:
        lo = a if math.isfinite(a) else (b if math.isfinite(b) else 0.0)
        hi = lo
    total = 0.0
    if lo < hi:
        total += _quad(func, lo, hi, inner)
    if a < lo:
        total += integrate.quad(
            func, a, lo, epsrel=QUAD_RTOL, epsabs=QUAD_ATOL, limit=500
        )[0]
    if hi < b:
        total += integrate.quad(
            func, hi, b, epsrel=QUAD_RTOL, epsabs=QUAD_ATOL, limit=500
        )[0]
    return float(total)


def _abs_integral_closed(
    profile: Any,
    s: float,
    t: float,
) -> Optional[float]:
    if isinstance(profile, TabulatedProfile):
        return None
    return profile.abs_integral(s, t)


def eval_b(model: DissipationModel, t: float, grid: GridSpec) -> Field:
    """Coefficient b(t, .) as a real-valued physical field.

    Args:
        model: Dissipation model
        t: Time
        grid: Grid to evaluate on

    Returns:
        Physical field mu(t) * beta(x)

    Raises:
        ProfileRangeError: If a tabulated profile is queried outside its table
    """
    mu = float(model.mu(t))
    return Field(grid, Representation.PHYSICAL, mu * model.beta(grid))


def sup_norm_b(model: DissipationModel, t: float) -> float:
    """sup_x |b(t, x)| = |mu(t)| * sup |beta|."""
    return abs(float(model.mu(t))) * model.sup_beta


def integral_sup_b(
    model: DissipationModel,
    s: float,
    t: float,
    quadrature: bool = False,
) -> float:
    """Integral of sup_x |b(tau, x)| over (s, t); endpoints may be infinite.

    Args:
        model: Dissipation model
        s: Lower endpoint
        t: Upper endpoint, ``t >= s``
        quadrature: Force adaptive quadrature instead of the closed form

    Returns:
        Non-negative integral

    Raises:
        ValueError: If ``s > t``
        ProfileRangeError: If a tabulated profile cannot cover the interval
    """
    if s > t:
        raise ValueError(f"integral needs s <= t, got ({s}, {t})")
    if s == t or model.sup_beta == 0:
        return 0.0
    profile = model.time
    if quadrature or isinstance(profile, TabulatedProfile):
        if isinstance(profile, TabulatedProfile):
            shape = profile.abs_integral(s, t)
        else:
            shape = _quad(
                lambda tau: abs(float(profile.value(tau))),
                s,
                t,
                profile.breakpoints,
            )
    else:
        shape = profile.abs_integral(s, t)
    return max(shape, 0.0) * model.sup_beta


def integral_b(model: DissipationModel, s: float, t: float) -> float:
    """Signed integral of mu * beta over (s, t) for x-independent models.

    Raises:
        ProfileError: If the model depends on x
    """
    if not isinstance(model.space, ConstantSpace):
        raise ProfileError("signed time integral needs an x-independent b")
    profile = model.time
    if isinstance(profile, TabulatedProfile):
        shape = profile.signed_integral(s, t)
    else:
        shape = profile.sign * profile.abs_integral(s, t)
    return shape * model.space.value


def tail_integral(model: DissipationModel, t: float) -> float:
    """Integral of sup_x |b| over (t, inf)."""
    return integral_sup_b(model, t, math.inf)


# Grammar: "<time kind>:k=v,...[*<space kind>:k=v,...]", lists joined by ";"
_TIME_KINDS: Dict[str, Any] = {
    "interval": IntervalProfile,
    "algebraic": AlgebraicProfile,
    "gaussian": GaussianProfile,
    "tabulated": TabulatedProfile,
}
_SPACE_KINDS: Dict[str, Any] = {
    "constant": ConstantSpace,
    "bump": BumpSpace,
    "tabulated": TabulatedSpace,
}
_LIST_KEYS = {"times", "values"}


def _parse_part(text: str, kinds: Dict[str, Any]) -> Any:
    kind, _, params = text.strip().partition(":")
    kind = kind.strip().lower()
    if kind not in kinds:
        raise ProfileError(
            f"unknown profile kind {kind!r}; expected one of "
            f"{', '.join(kinds)}",
        )
    model_class = kinds[kind]
    values: Dict[str, Any] = {}
    for item in filter(None, (p.strip() for p in params.split(","))):
        key, sep, raw = item.partition("=")
        key = key.strip()
        if not sep:
            raise ProfileError(f"malformed parameter {item!r} in {text!r}")
        if key not in model_class.model_fields or key == "kind":
            raise ProfileError(f"unknown parameter {key!r} for {kind} profile")
        if key in _LIST_KEYS:
            values[key] = tuple(float(v) for v in raw.split(";") if v)
        elif key == "extrapolation":
            values[key] = raw.strip()
        elif key == "sign":
            values[key] = int(float(raw))
        else:
            try:
                values[key] = float(raw)
            except ValueError as exc:
                raise ProfileError(
                    f"parameter {key!r} of {kind} profile is not a number",
                ) from exc
    try:
        return model_class(**values)
    except ValidationError as exc:
        details = "; ".join(
            f"{'.'.join(str(p) for p in err['loc']) or kind}: {err['msg']}"
            for err in exc.errors()
        )
        raise ProfileError(f"invalid {kind} profile: {details}") from exc


def parse_profile(text: str) -> DissipationModel:
    """Parse the coefficient grammar, e.g. ``gaussian:mu0=1,sigma=1*bump:``.

    Args:
        text: Profile specification

    Returns:
        Dissipation model

    Raises:
        ProfileError: If the specification is malformed or violates an
            assumption on b
    """
    time_text, _, space_text = text.partition("*")
    time = _parse_part(time_text, _TIME_KINDS)
    space = (
        _parse_part(space_text, _SPACE_KINDS)
        if space_text.strip()
        else ConstantSpace()
    )
    try:
        return DissipationModel(time=time, space=space)
    except ValidationError as exc:
        raise ProfileError(str(exc)) from exc


def _format_part(profile: BaseModel) -> str:
    params = []
    for key, value in profile.model_dump().items():
        if key == "kind":
            continue
        if isinstance(value, (tuple, list)):
            value = ";".join(repr(float(v)) for v in value)
        elif isinstance(value, float):
            value = repr(value)
        params.append(f"{key}={value}")
    return f"{profile.kind}:{','.join(params)}"


def format_profile(model: DissipationModel) -> str:
    """Inverse of ``parse_profile``."""
    text = _format_part(model.time)
    if model.space != ConstantSpace():
        text += "*" + _format_part(model.space)
    return text
