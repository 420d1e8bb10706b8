"""Exception types shared across the package."""

from __future__ import annotations

from dataclasses import dataclass


class SwitchDiffError(Exception):
    """Base class for all package errors."""


class DomainError(SwitchDiffError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class NonConstantDriftError(SwitchDiffError, TypeError):
    """Operation requires constant drifts in both regimes."""


class NonPositiveStepError(SwitchDiffError, ValueError):
    """Integrator step size must be strictly positive."""


class UnknownStatisticError(SwitchDiffError, ValueError):
    """Unrecognized trajectory statistic name."""


class DegenerateInputError(SwitchDiffError, ValueError):
    """Input has no usable variation (too few points, all abscissae equal)."""


class DriftEvaluationError(SwitchDiffError, ValueError):
    """A user-supplied drift returned a non-finite value."""


@dataclass(frozen=True)
class Violation:
    """One validation failure: machine-readable code plus human message."""

    code: str
    field: str
    message: str

    def __str__(self):
        return f"{self.code}({self.field}): {self.message}"


class ModelValidationError(SwitchDiffError, ValueError):
    """Model parameters failed validation; carries every violation found."""

    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__(
            "invalid model: " + "; ".join(str(v) for v in self.violations))


class ConfigError(SwitchDiffError, ValueError):
    """A run-configuration document could not be parsed or validated."""
