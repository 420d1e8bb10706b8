"""Closed forms and bound machinery for cycle-time sums.

Let T_{2n} be the time of the n-th full cycle of the switching skeleton.  For
a tilt parameter lam and a reference cycle length L ("cycle_mean" below, a
free parameter of the identity, usually set to the true mean cycle):

    E exp(lam (L n - T_{2n}))   [deficit side]
        = [lm/(lm+lam)] * ( lp lm e^{L lam} / ((lp+lam)(lm+lam)) )^n
    E exp(lam (T_{2n} - L n))   [excess side, lam < min(lp, lm)]
        = [lm/(lm-lam)] * ( lp lm e^{-L lam} / ((lp-lam)(lm-lam)) )^n

with lp = lambda_plus, lm = lambda_minus.  The leading factor is the entry
time's transform, present when the chain starts in the minus regime; both
identities are exact products of exponential integrals, not bounds.

All evaluation is in log space so that n up to 1e6 and lam * L up to 50 never
overflow; the plain-value forms simply exponentiate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateInputError, DomainError
from .model import stopped_moment_decay

LOWER_TAIL = "lower_tail"
UPPER_TAIL = "upper_tail"

DEFAULT_LAMBDA_CAP = 1.0e3
_SCAN_POINTS = 256
_GOLDEN_TOL = 1.0e-10


def _check_rates(lam_plus: float, lam_minus: float) -> None:
    if not (lam_plus > 0 and math.isfinite(lam_plus)):
        raise DomainError(f"lambda_plus={lam_plus!r} must be positive finite")
    if not (lam_minus > 0 and math.isfinite(lam_minus)):
        raise DomainError(f"lambda_minus={lam_minus!r} must be positive finite")


def log_mgf_deficit(lam: float, n: int, cycle_mean: float, lam_plus: float,
                    lam_minus: float, include_entry: bool = True) -> float:
    """log E exp(lam (cycle_mean * n - T_{2n})) for lam >= 0."""
    _check_rates(lam_plus, lam_minus)
    if not (lam >= 0 and math.isfinite(lam)):
        raise DomainError(f"lam={lam!r} must be >= 0 and finite")
    if n < 0:
        raise DomainError(f"n={n!r} must be >= 0")
    if not (cycle_mean > 0 and math.isfinite(cycle_mean)):
        raise DomainError(f"cycle_mean={cycle_mean!r} must be positive finite")
    entry = math.log(lam_minus) - math.log(lam_minus + lam) if include_entry else 0.0
    # paired differences cancel exactly at lam = 0, keeping the value 1 there
    per_cycle = ((math.log(lam_plus) - math.log(lam_plus + lam))
                 + (math.log(lam_minus) - math.log(lam_minus + lam))
                 + cycle_mean * lam)
    return entry + n * per_cycle


def mgf_deficit(lam: float, n: int, cycle_mean: float, lam_plus: float,
                lam_minus: float, include_entry: bool = True) -> float:
    return math.exp(log_mgf_deficit(lam, n, cycle_mean, lam_plus, lam_minus,
                                    include_entry))


def log_mgf_excess(lam: float, n: int, cycle_mean: float, lam_plus: float,
                   lam_minus: float, include_entry: bool = True) -> float:
    """log E exp(lam (T_{2n} - cycle_mean * n)); diverges at min(lp, lm)."""
    _check_rates(lam_plus, lam_minus)
    if not (lam >= 0 and math.isfinite(lam)):
        raise DomainError(f"lam={lam!r} must be >= 0 and finite")
    if lam >= min(lam_plus, lam_minus):
        raise DomainError(
            f"lam={lam!r} must be < min(lambda_plus, lambda_minus)="
            f"{min(lam_plus, lam_minus)}: the transform diverges at the pole")
    if n < 0:
        raise DomainError(f"n={n!r} must be >= 0")
    if not (cycle_mean > 0 and math.isfinite(cycle_mean)):
        raise DomainError(f"cycle_mean={cycle_mean!r} must be positive finite")
    entry = math.log(lam_minus) - math.log(lam_minus - lam) if include_entry else 0.0
    per_cycle = ((math.log(lam_plus) - math.log(lam_plus - lam))
                 + (math.log(lam_minus) - math.log(lam_minus - lam))
                 - cycle_mean * lam)
    return entry + n * per_cycle


def mgf_excess(lam: float, n: int, cycle_mean: float, lam_plus: float,
               lam_minus: float, include_entry: bool = True) -> float:
    return math.exp(log_mgf_excess(lam, n, cycle_mean, lam_plus, lam_minus,
                                   include_entry))


@dataclass(frozen=True)
class ChernoffResult:
    """Optimized exponential tail bound for the average cycle time.

    bound = kappa ** n_cycles may underflow to 0.0 for very large n;
    log_bound is always finite and authoritative.
    """

    direction: str
    epsilon: float
    n_cycles: int
    lambda_star: float
    bound: float
    kappa: float
    log_bound: float
    log_kappa: float
    boundary_hit: bool


def _per_cycle_log_objective(direction, epsilon, lam_plus, lam_minus):
    cycle_mean = 1.0 / lam_plus + 1.0 / lam_minus
    if direction == LOWER_TAIL:
        def g(lam):
            return -lam * epsilon + (
                (math.log(lam_plus) - math.log(lam_plus + lam))
                + (math.log(lam_minus) - math.log(lam_minus + lam))
                + cycle_mean * lam)
        return g
    if direction == UPPER_TAIL:
        def g(lam):
            return -lam * epsilon + (
                (math.log(lam_plus) - math.log(lam_plus - lam))
                + (math.log(lam_minus) - math.log(lam_minus - lam))
                - cycle_mean * lam)
        return g
    raise DomainError(f"direction must be {LOWER_TAIL!r} or {UPPER_TAIL!r}, "
                      f"got {direction!r}")


def _golden_section(g, lo: float, hi: float, tol: float) -> float:
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    gc, gd = g(c), g(d)
    while b - a > tol:
        if gc < gd:
            b, d, gd = d, c, gc
            c = b - invphi * (b - a)
            gc = g(c)
        else:
            a, c, gc = c, d, gd
            d = a + invphi * (b - a)
            gd = g(d)
    return 0.5 * (a + b)


def chernoff_skeleton(direction: str, epsilon: float, n_cycles: int,
                      lam_plus: float, lam_minus: float,
                      lambda_cap: float = DEFAULT_LAMBDA_CAP) -> ChernoffResult:
    """Markov-inequality tail bound on T_{2n}/n, optimized over the tilt.

    Bounds P(T_{2n}/n - mean_cycle < -epsilon) for lower_tail (resp. > epsilon
    for upper_tail) by min over lam of exp(-lam epsilon n) * E exp(...), for a
    skeleton started in the plus regime, so the bound is a clean n-th power of
    a per-cycle factor kappa and the optimal tilt does not depend on n.

    The optimizer is a 256-point coarse scan bracketing a golden-section
    refinement to 1e-10 absolute.  The tilt search stops at lambda_cap on the
    lower side (the objective is monotone decreasing when epsilon is at least
    the mean cycle, since the event becomes impossible) and just below the
    transform's pole on the upper side; boundary_hit reports a capped search.
    """
    _check_rates(lam_plus, lam_minus)
    if not (epsilon > 0 and math.isfinite(epsilon)):
        raise DomainError(f"epsilon={epsilon!r} must be positive finite")
    if n_cycles < 1:
        raise DomainError(f"n_cycles={n_cycles!r} must be >= 1")
    if not (lambda_cap > 0 and math.isfinite(lambda_cap)):
        raise DomainError(f"lambda_cap={lambda_cap!r} must be positive finite")

    g = _per_cycle_log_objective(direction, epsilon, lam_plus, lam_minus)
    if direction == UPPER_TAIL:
        cap = min(lambda_cap, min(lam_plus, lam_minus) * (1.0 - 1.0e-9))
    else:
        cap = lambda_cap

    grid = [cap * i / _SCAN_POINTS for i in range(1, _SCAN_POINTS + 1)]
    values = [g(x) for x in grid]
    best = min(range(len(grid)), key=values.__getitem__)
    lo = grid[best - 1] if best > 0 else 0.0
    hi = grid[best + 1] if best + 1 < len(grid) else cap
    lam_star = _golden_section(g, lo, hi, _GOLDEN_TOL)

    boundary_hit = False
    if g(cap) <= g(lam_star):
        lam_star = cap
        boundary_hit = True

    log_kappa = g(lam_star)
    # the tilt 0 gives the trivial bound 1 exactly; never report worse than it
    if log_kappa > 0.0:
        lam_star = 0.0
        log_kappa = 0.0
        boundary_hit = False
    log_bound = n_cycles * log_kappa
    return ChernoffResult(
        direction=direction,
        epsilon=float(epsilon),
        n_cycles=int(n_cycles),
        lambda_star=float(lam_star),
        bound=math.exp(log_bound),
        kappa=math.exp(log_kappa),
        log_bound=log_bound,
        log_kappa=log_kappa,
        boundary_hit=boundary_hit,
    )


def stopped_moment_bound(lam: float, time_weight: float, n_cycles: int,
                         r_plus: float, r_minus: float, lam_plus: float,
                         lam_minus: float) -> float:
    """Geometric bound (1 - coeff*lam)^n on the stopped exponential moment.

    coeff is the per-cycle decay coefficient from stopped_moment_decay; the
    bound only makes sense while it is positive and coeff*lam < 1.
    """
    _check_rates(lam_plus, lam_minus)
    if not (lam >= 0 and math.isfinite(lam)):
        raise DomainError(f"lam={lam!r} must be >= 0 and finite")
    if n_cycles < 0:
        raise DomainError(f"n_cycles={n_cycles!r} must be >= 0")
    coeff, _ = stopped_moment_decay(time_weight, r_plus, r_minus, lam_plus,
                                    lam_minus)
    if coeff <= 0:
        raise DomainError(
            f"decay coefficient {coeff} is not positive; time_weight="
            f"{time_weight!r} lies outside the admissible window")
    if coeff * lam >= 1:
        raise DomainError(
            f"coeff*lam={coeff * lam} must be < 1 for the geometric bound")
    return (1.0 - coeff * lam) ** n_cycles


@dataclass(frozen=True)
class DecayFit:
    """OLS fit of log-probability against time.

    residual is the unexplained fraction of total variation (1 - R^2),
    0 for an exact linear fit.
    """

    slope: float
    intercept: float
    residual: float


def decay_rate_fit(points) -> DecayFit:
    """Least-squares slope of log p over t; slope estimates the decay rate."""
    pts = [(float(t), float(y)) for t, y in points]
    if len(pts) < 3:
        raise DegenerateInputError(
            f"need at least 3 points, got {len(pts)}")
    t = np.array([p[0] for p in pts])
    y = np.array([p[1] for p in pts])
    if not (np.all(np.isfinite(t)) and np.all(np.isfinite(y))):
        raise DomainError("points must have finite coordinates")
    if np.all(t == t[0]):
        raise DegenerateInputError("all abscissae are equal; no slope exists")
    design = np.column_stack([t, np.ones_like(t)])
    coef, _, _, _ = np.linalg.lstsq(design, y, rcond=None)
    slope, intercept = float(coef[0]), float(coef[1])
    fitted = design @ coef
    ss_res = float(np.sum((y - fitted) ** 2))
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    residual = 0.0 if ss_tot == 0.0 and ss_res <= 1e-30 else (
        ss_res / ss_tot if ss_tot > 0 else float("inf"))
    return DecayFit(slope=slope, intercept=intercept, residual=residual)
