from dataclasses import dataclass
from typing import List


@dataclass
class ConfigIssue:
    """
    ConfigIssue class represents a single configuration failure

    Attributes:
        key: offending configuration key
        constraint: the constraint the value violates
    """

    key: str
    constraint: str

    def __str__(self) -> str:
        return f"{self.key}: {self.constraint}"


class WaveToolkitError(Exception):
    """Base class for all toolkit failures."""


class RepresentationError(WaveToolkitError):
    """Field is not in the representation an operation expects."""


class GridMismatchError(WaveToolkitError):
    """Operands live on different grids."""


class ProfileError(WaveToolkitError):
    """Dissipation model or profile specification is invalid."""


class ProfileRangeError(ProfileError):
    """Tabulated profile queried outside its table."""


class HorizonError(WaveToolkitError):
    """No horizon within the cap meets the requested tolerance."""


class AdjointUnavailableError(WaveToolkitError):
    """Operator handle has no adjoint action."""


class ConfigError(WaveToolkitError):
    """
    Configuration failed validation.

    Attributes:
        issues: one record per violated constraint
    """

    def __init__(self, issues: List[ConfigIssue]) -> None:
        self.issues = issues
        super().__init__("; ".join(str(issue) for issue in issues))
