"""Domain exceptions shared across the package.

Everything raised here means "the input was outside the contract", not "the
library has a bug".  The CLI maps :class:`DomainError` to exit code 1.
"""

from __future__ import annotations


class DomainError(Exception):
    """Base class for contract violations in domain inputs."""


class UnsupportedModelError(DomainError):
    """Model/parameter combination the library deliberately refuses."""


class NotHomoclinicError(DomainError):
    """Two configurations that do not form an in-window homoclinic pair."""


class PathDependenceError(DomainError):
    """Bracket path sums disagree; carries one witness plaquette."""

    def __init__(self, message: str, plaquette=None, sides=None):
        super().__init__(message)
        self.plaquette = plaquette
        self.sides = sides


class InfeasibleBoundaryError(DomainError):
    """Boundary height data admits no valid extension."""


class PreconditionError(DomainError):
    """A stated operation precondition fails (range/degree/size bound)."""


class NonExtendableBoundaryError(DomainError):
    """Boundary pattern with an empty interior pattern set."""


class NotGibbsError(DomainError):
    """Coefficients outside the zero-sum subspace where one is required."""


class ResourceBudgetError(DomainError):
    """Enumeration/search budget exceeded; carries progress so far."""

    def __init__(self, message: str, count: int = 0):
        super().__init__(message)
        self.count = count


class ChainError(DomainError):
    """Pivot chain fails verification; names the first bad step."""

    def __init__(self, message: str, step: int | None = None):
        super().__init__(message)
        self.step = step


class CompletionError(DomainError):
    """Partial tiling fragment that cannot be completed in the window."""


class InvalidConfigurationError(DomainError):
    """Configuration rejected by its model validator."""
