"""Model parameters, validation, and the analytic constants attached to them.

A model is a one-dimensional diffusion ``dX = b(X, Z) dt + dW`` driven by a
two-state Markov chain Z.  In the "plus" regime the drift is bounded below by
``r_plus > 0`` and the chain leaves at rate ``lambda_plus``; in the "minus"
regime the drift is bounded below by ``-r_minus`` and the chain leaves at rate
``lambda_minus``.  The noise coefficient is fixed at 1.

The process escapes to +infinity at a linear rate exactly when
``r_plus / lambda_plus > r_minus / lambda_minus``; for drifts held constant at
their bounds the long-run velocity is
``(lambda_minus * r_plus - lambda_plus * r_minus) / (lambda_plus + lambda_minus)``
by renewal-reward.  For non-constant drifts that value is only a lower-bound
heuristic and is labeled as such by callers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Union

import numpy as np

from .errors import DomainError, ModelValidationError, Violation


class Regime(str, Enum):
    PLUS = "plus"
    MINUS = "minus"


@dataclass(frozen=True)
class Constant:
    """Drift held at a fixed value."""

    value: float


@dataclass(frozen=True)
class Bounded:
    """Drift given by a callable with a declared lower bound.

    The bound cannot be proven from a callable; validation probes it on a
    finite grid and the declared value is trusted elsewhere.
    """

    fn: Callable[[float], float]
    lower: float


Drift = Union[Constant, Bounded]


def _as_drift(value) -> Drift:
    if isinstance(value, (Constant, Bounded)):
        return value
    if isinstance(value, (int, float)):
        return Constant(float(value))
    raise TypeError(f"drift must be Constant, Bounded or a number, got {value!r}")


@dataclass(frozen=True)
class ModelSpec:
    """User-facing model description; validate() turns it into a ValidatedModel.

    sup_b_plus / sup_b_minus are declared sup-norm bounds on |b|; they default
    to |value| for constant drifts and are required for callable drifts.
    """

    lambda_plus: float
    lambda_minus: float
    drift_plus: Drift
    drift_minus: Drift
    r_plus: float
    r_minus: float
    sup_b_plus: float | None = None
    sup_b_minus: float | None = None
    x0: float = 0.0
    z0: Regime = Regime.PLUS

    def __post_init__(self):
        object.__setattr__(self, "drift_plus", _as_drift(self.drift_plus))
        object.__setattr__(self, "drift_minus", _as_drift(self.drift_minus))
        object.__setattr__(self, "z0", Regime(self.z0))


def _finite(x) -> bool:
    return isinstance(x, (int, float)) and math.isfinite(x)


def _sup_default(drift: Drift, declared) -> float | None:
    if declared is not None:
        return float(declared)
    if isinstance(drift, Constant):
        return abs(drift.value)
    return None


def collect_violations(spec: ModelSpec, probe_lo: float | None = None,
                       probe_hi: float | None = None,
                       probe_points: int = 1001) -> list[Violation]:
    """All validation failures of a model spec (empty list when valid).

    Callable drifts are checked on a probe grid, by default 1001 points over
    [x0 - 100, x0 + 100]; a sup over all reals is not testable.
    """
    out: list[Violation] = []

    for name in ("lambda_plus", "lambda_minus", "r_plus", "r_minus", "x0"):
        v = getattr(spec, name)
        if not _finite(v):
            out.append(Violation("NonFiniteField", name, f"{name}={v!r}"))
    if out:
        return out

    if spec.lambda_plus <= 0:
        out.append(Violation("NonPositiveIntensity", "lambda_plus",
                             f"lambda_plus={spec.lambda_plus} must be > 0"))
    if spec.lambda_minus <= 0:
        out.append(Violation("NonPositiveIntensity", "lambda_minus",
                             f"lambda_minus={spec.lambda_minus} must be > 0"))
    if spec.r_plus <= 0:
        out.append(Violation("NonPositiveDriftBound", "r_plus",
                             f"r_plus={spec.r_plus} must be > 0"))
    if spec.r_minus <= 0:
        out.append(Violation("NonPositiveDriftBound", "r_minus",
                             f"r_minus={spec.r_minus} must be > 0"))

    sup_p = _sup_default(spec.drift_plus, spec.sup_b_plus)
    sup_m = _sup_default(spec.drift_minus, spec.sup_b_minus)
    if sup_p is None:
        out.append(Violation("MissingSupBound", "sup_b_plus",
                             "sup_b_plus is required for a callable drift"))
    if sup_m is None:
        out.append(Violation("MissingSupBound", "sup_b_minus",
                             "sup_b_minus is required for a callable drift"))
    for name, sup in (("sup_b_plus", sup_p), ("sup_b_minus", sup_m)):
        if sup is not None and not _finite(sup):
            out.append(Violation("NonFiniteField", name, f"{name}={sup!r}"))
            return out
    if sup_p is not None and spec.r_plus > 0 and spec.r_plus > sup_p:
        out.append(Violation("InconsistentSupBound", "sup_b_plus",
                             f"r_plus={spec.r_plus} exceeds sup_b_plus={sup_p}"))
    if sup_m is not None and spec.r_minus > 0 and spec.r_minus > sup_m:
        out.append(Violation("InconsistentSupBound", "sup_b_minus",
                             f"r_minus={spec.r_minus} exceeds sup_b_minus={sup_m}"))

    lo = spec.x0 - 100.0 if probe_lo is None else probe_lo
    hi = spec.x0 + 100.0 if probe_hi is None else probe_hi
    grid = np.linspace(lo, hi, probe_points)

    def check_drift(name: str, drift: Drift, floor: float, sup: float | None):
        if isinstance(drift, Constant):
            if not _finite(drift.value):
                out.append(Violation("NonFiniteField", name,
                                     f"{name}={drift.value!r}"))
            elif drift.value < floor:
                out.append(Violation(
                    "BoundViolatedAtProbe", name,
                    f"{name}={drift.value} is below its declared bound {floor}"))
            elif sup is not None and abs(drift.value) > sup:
                out.append(Violation(
                    "BoundViolatedAtProbe", name,
                    f"|{name}|={abs(drift.value)} exceeds sup bound {sup}"))
            return
        for x in grid:
            v = drift.fn(float(x))
            if not _finite(v):
                out.append(Violation("NonFiniteField", name,
                                     f"{name}({x})={v!r}"))
                return
            if v < floor:
                out.append(Violation(
                    "BoundViolatedAtProbe", name,
                    f"{name}({x})={v} is below its declared bound {floor}"))
                return
            if sup is not None and abs(v) > sup:
                out.append(Violation(
                    "BoundViolatedAtProbe", name,
                    f"|{name}({x})|={abs(v)} exceeds sup bound {sup}"))
                return

    if spec.r_plus > 0:
        check_drift("drift_plus", spec.drift_plus, spec.r_plus, sup_p)
    if spec.r_minus > 0:
        check_drift("drift_minus", spec.drift_minus, -spec.r_minus, sup_m)
    return out


@dataclass(frozen=True)
class ValidatedModel:
    """A model spec that passed validation, with resolved sup bounds."""

    spec: ModelSpec
    sup_b_plus: float
    sup_b_minus: float

    @property
    def lambda_plus(self) -> float:
        return self.spec.lambda_plus

    @property
    def lambda_minus(self) -> float:
        return self.spec.lambda_minus

    @property
    def r_plus(self) -> float:
        return self.spec.r_plus

    @property
    def r_minus(self) -> float:
        return self.spec.r_minus

    @property
    def x0(self) -> float:
        return self.spec.x0

    @property
    def z0(self) -> Regime:
        return self.spec.z0

    @property
    def starts_minus(self) -> bool:
        return self.spec.z0 is Regime.MINUS

    @property
    def has_constant_drifts(self) -> bool:
        return (isinstance(self.spec.drift_plus, Constant)
                and isinstance(self.spec.drift_minus, Constant))

    def constant_drift_values(self) -> tuple[float, float]:
        """(b_plus, b_minus) or NonConstantDriftError."""
        from .errors import NonConstantDriftError

        if not self.has_constant_drifts:
            raise NonConstantDriftError(
                "operation requires Constant drifts in both regimes")
        return (self.spec.drift_plus.value, self.spec.drift_minus.value)

    def drift_value(self, x: float, regime: Regime) -> float:
        d = self.spec.drift_plus if regime is Regime.PLUS else self.spec.drift_minus
        return d.value if isinstance(d, Constant) else float(d.fn(x))


def validate(spec: ModelSpec, probe_lo: float | None = None,
             probe_hi: float | None = None,
             probe_points: int = 1001) -> ValidatedModel:
    """Validate a spec or raise ModelValidationError with all violations."""
    violations = collect_violations(spec, probe_lo, probe_hi, probe_points)
    if violations:
        raise ModelValidationError(violations)
    return ValidatedModel(
        spec=spec,
        sup_b_plus=_sup_default(spec.drift_plus, spec.sup_b_plus),
        sup_b_minus=_sup_default(spec.drift_minus, spec.sup_b_minus),
    )


def transience_condition(r_plus: float, lambda_plus: float, r_minus: float,
                         lambda_minus: float) -> bool:
    """Strict escape condition r_plus/lambda_plus > r_minus/lambda_minus."""
    for name, v in (("r_plus", r_plus), ("lambda_plus", lambda_plus),
                    ("r_minus", r_minus), ("lambda_minus", lambda_minus)):
        if not _finite(v) or v <= 0:
            raise DomainError(f"{name}={v!r} must be a positive finite number")
    return r_plus / lambda_plus > r_minus / lambda_minus


@dataclass(frozen=True)
class ModelConstants:
    """Closed-form constants of a validated model.

    mean_cycle      - expected duration of one plus+minus cycle,
                      1/lambda_plus + 1/lambda_minus.
    velocity_star   - long-run velocity for constant-at-bound drifts
                      (renewal-reward); a lower-bound heuristic otherwise.
    time_weight_max - upper edge of the admissible window for the time weight
                      in the stopped exponential functional (same expression
                      as velocity_star).
    rate_cap        - min(mean_cycle, time_weight_max); cap used when choosing
                      per-cycle displacement targets.  The two operands carry
                      different units (a time and a velocity); the min is kept
                      as-is deliberately, since both constraints bind.
    transient       - whether the strict escape condition holds.
    """

    mean_cycle: float
    velocity_star: float
    time_weight_max: float
    rate_cap: float
    transient: bool


def analytic_constants(model: ValidatedModel) -> ModelConstants:
    """Pure function of the validated parameters; bit-stable across calls."""
    lp, lm = model.lambda_plus, model.lambda_minus
    rp, rm = model.r_plus, model.r_minus
    mean_cycle = 1.0 / lp + 1.0 / lm
    velocity = (lm * rp - lp * rm) / (lp + lm)
    return ModelConstants(
        mean_cycle=mean_cycle,
        velocity_star=velocity,
        time_weight_max=velocity,
        rate_cap=min(mean_cycle, velocity),
        transient=transience_condition(rp, lp, rm, lm),
    )


def stopped_moment_decay(time_weight: float, r_plus: float, r_minus: float,
                         lambda_plus: float, lambda_minus: float
                         ) -> tuple[float, bool]:
    """Per-cycle decay coefficient of the stopped exponential functional.

    For the functional E exp(-lam*(X_T - x0) + time_weight*lam*T) stopped at
    cycle boundaries, one cycle contributes a factor 1 - coeff*lam + o(lam)
    with

        coeff = -[(w - r_plus)/lambda_plus + (w + r_minus)/lambda_minus]

    Returns (coeff, in_window) where in_window says whether
    0 < time_weight < time_weight_max, the window on which coeff > 0.
    """
    w = float(time_weight)
    coeff = -((w - r_plus) / lambda_plus + (w + r_minus) / lambda_minus)
    w_max = (lambda_minus * r_plus - lambda_plus * r_minus) / (lambda_plus + lambda_minus)
    return coeff, (0.0 < w < w_max)
