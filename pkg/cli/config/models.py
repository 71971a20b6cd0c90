"""Run configuration model."""
from typing import Optional
from typing import Tuple

from pydantic import BaseModel
from pydantic import ConfigDict
from pydantic import Field
from pydantic import ValidationError
from pydantic import field_validator
from pydantic import model_validator

from lib.core.errors import ProfileError
from lib.wave.coefficients import DissipationModel
from lib.wave.coefficients import parse_profile
from lib.wave.dyson_series import QuadratureRule
from lib.wave.spectral_core import GridSpec


class RunConfig(BaseModel):
    """Configuration of one toolkit run."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    grid: str = "1d:256"
    profile: str = "gaussian:mu0=0.5,sigma=1"
    series_tol: float = Field(default=1e-12, gt=0)
    horizon_tol: float = Field(default=1e-8, gt=0)
    max_terms: int = Field(default=60, ge=1)
    nodes_per_unit: int = Field(default=256, ge=2)
    quadrature: QuadratureRule = QuadratureRule.SIMPSON
    strang_dt: float = Field(default=1e-3, gt=0)
    horizon_cap: float = Field(default=64.0, gt=0)
    t_start: float = 0.0
    t_end: float = 1.0
    seed: int = Field(default=0, ge=0)
    out: Optional[str] = None
    times: Tuple[float, ...] = (4.0, 8.0, 16.0, 32.0, 64.0)
    omegas: Tuple[float, ...] = (0.0, 1.0, 2.0, 4.0, 8.0)

    @field_validator("grid")
    @classmethod
    def validate_grid(cls, v: str) -> str:
        """Validate the grid grammar and normalize it."""
        try:
            return GridSpec.parse(v).label
        except ValidationError as exc:
            details = "; ".join(err["msg"] for err in exc.errors())
            raise ValueError(f"invalid grid {v!r}: {details}") from exc

    @field_validator("profile")
    @classmethod
    def validate_profile(cls, v: str) -> str:
        """Validate the coefficient grammar."""
        try:
            parse_profile(v)
        except ProfileError as exc:
            raise ValueError(str(exc)) from exc
        return v.strip()

    @field_validator("times")
    @classmethod
    def validate_times(cls, v: Tuple[float, ...]) -> Tuple[float, ...]:
        """Validate that sweep times are non-negative and increasing."""
        if not v:
            raise ValueError("at least one sweep time is required")
        if any(t < 0 for t in v):
            raise ValueError("sweep times must be non-negative")
        if any(b <= a for a, b in zip(v[:-1], v[1:])):
            raise ValueError("sweep times must be strictly increasing")
        return v

    @field_validator("omegas")
    @classmethod
    def validate_omegas(cls, v: Tuple[float, ...]) -> Tuple[float, ...]:
        """Validate that frequencies are non-negative."""
        if not v:
            raise ValueError("at least one frequency is required")
        if any(w < 0 for w in v):
            raise ValueError("frequencies must be non-negative")
        return v

    @model_validator(mode="after")
    def validate_interval(self) -> "RunConfig":
        """Validate the solve interval."""
        if self.t_end < self.t_start:
            raise ValueError("t_end must not precede t_start")
        return self

    @property
    def grid_spec(self) -> GridSpec:
        return GridSpec.parse(self.grid)

    @property
    def model(self) -> DissipationModel:
        return parse_profile(self.profile).on_grid(self.grid_spec)
