"""Exception types raised across the package."""

import numpy as np


class DomainError(ValueError):
    """Input outside the domain of the requested operation."""


class NotPositiveDefinite(DomainError):
    """A matrix expected to be SPD failed validation."""


class NonConvergence(np.linalg.LinAlgError):
    """The symmetric eigensolver failed to converge."""


class DegenerateLogArgument(ArithmeticError):
    """A log-det argument became non-positive."""


class SingularSystem(np.linalg.LinAlgError):
    """A linear system required by a closed-form update is singular."""


class LineSearchWarning(RuntimeWarning):
    """Backtracking exhausted its budget without finding a decrease."""
