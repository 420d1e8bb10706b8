"""Deterministic, parallel Monte Carlo harness.

Every sample i of a run draws from the counter-based stream
(master_seed, i), so the value of sample i does not depend on how samples
are partitioned among worker threads.  Results are assembled into a single
per-sample array and reduced once, in index order; estimates are therefore
bit-identical for any thread count, which is the public reproducibility
contract of this module.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.special import ndtri

from . import _kernels
from .bounds import (DEFAULT_LAMBDA_CAP, LOWER_TAIL, DecayFit,
                     chernoff_skeleton, decay_rate_fit, log_mgf_deficit,
                     log_mgf_excess, mgf_deficit, mgf_excess,
                     stopped_moment_bound)
from .errors import DomainError, SwitchDiffError
from .model import ValidatedModel, analytic_constants, stopped_moment_decay
from .reporting import (BoundReport, McEstimate, VERDICT_BOUND_HOLDS,
                        VERDICT_BOUND_VIOLATED, VERDICT_CONSISTENT,
                        VERDICT_INCONCLUSIVE, agreement_verdict,
                        upper_bound_verdict, z_score)
from .rng import PhiloxStream

DEFAULT_CI_LEVEL = 0.999
EXACT = "exact"
EM = "em"

# samples per work unit; fixed so that results never depend on thread count
_SPAN = 16384


# ---------------------------------------------------------------------------
# statistic specifications

@dataclass(frozen=True)
class CycleAverageTime:
    """T_{2n} / n of a skeleton with n full cycles."""

    n_cycles: int


@dataclass(frozen=True)
class CycleTimeDeficitExp:
    """exp(lam * (mean_cycle * n - T_{2n}))."""

    lam: float
    n_cycles: int


@dataclass(frozen=True)
class CycleTimeExcessExp:
    """exp(lam * (T_{2n} - mean_cycle * n))."""

    lam: float
    n_cycles: int


@dataclass(frozen=True)
class CycleDeficitIndicator:
    """1{ T_{2n}/n - mean_cycle < -epsilon }."""

    epsilon: float
    n_cycles: int


@dataclass(frozen=True)
class CycleExcessIndicator:
    """1{ T_{2n}/n - mean_cycle > epsilon }."""

    epsilon: float
    n_cycles: int


@dataclass(frozen=True)
class StoppedExponential:
    """exp(-lam * (X at T_{2n} - x0) + time_weight * lam * T_{2n})."""

    lam: float
    time_weight: float
    n_cycles: int


@dataclass(frozen=True)
class TerminalVelocity:
    """(X at horizon - x0) / horizon."""

    horizon: float
    method: str = EXACT
    dt: float = 0.01


@dataclass(frozen=True)
class LowVelocityIndicator:
    """1{ (X at horizon - x0) / horizon < threshold }."""

    horizon: float
    threshold: float
    method: str = EXACT
    dt: float = 0.01


@dataclass(frozen=True)
class ConstantStatistic:
    """Fixed value regardless of the sample; for harness tests."""

    value: float


@dataclass(frozen=True)
class CallableStatistic:
    """Arbitrary per-sample statistic fn(model, stream) -> float (slow path)."""

    fn: Callable[[ValidatedModel, PhiloxStream], float]
    probability: bool = False


_INDICATORS = (CycleDeficitIndicator, CycleExcessIndicator, LowVelocityIndicator)


def is_probability_statistic(stat) -> bool:
    if isinstance(stat, _INDICATORS):
        return True
    return isinstance(stat, CallableStatistic) and stat.probability


def _terminal_values(stat, model, master_seed, start, count) -> np.ndarray:
    b_plus, b_minus = model.constant_drift_values()
    if stat.method == EXACT:
        return _kernels.horizon_terminal_exact(
            master_seed, start, count, stat.horizon, model.lambda_plus,
            model.lambda_minus, model.starts_minus, b_plus, b_minus, model.x0)
    if stat.method == EM:
        if not (stat.dt > 0 and math.isfinite(stat.dt)):
            raise DomainError(f"dt={stat.dt!r} must be positive finite")
        return _kernels.horizon_terminal_em(
            master_seed, start, count, stat.horizon, stat.dt,
            model.lambda_plus, model.lambda_minus, model.starts_minus,
            b_plus, b_minus, model.x0)
    raise DomainError(f"method must be {EXACT!r} or {EM!r}, got {stat.method!r}")


def sample_statistic(stat, model: ValidatedModel, master_seed: int,
                     start: int, count: int) -> np.ndarray:
    """Values of the statistic for samples start .. start+count-1."""
    lam_p, lam_m = model.lambda_plus, model.lambda_minus
    sm = model.starts_minus
    mean_cycle = 1.0 / lam_p + 1.0 / lam_m

    if isinstance(stat, (CycleAverageTime, CycleDeficitIndicator,
                         CycleExcessIndicator)) and stat.n_cycles < 1:
        raise DomainError(f"{type(stat).__name__} needs n_cycles >= 1")

    if isinstance(stat, CycleAverageTime):
        t = _kernels.cycle_time_totals(master_seed, start, count,
                                       stat.n_cycles, lam_p, lam_m, sm)
        return t / stat.n_cycles
    if isinstance(stat, CycleTimeDeficitExp):
        t = _kernels.cycle_time_totals(master_seed, start, count,
                                       stat.n_cycles, lam_p, lam_m, sm)
        return np.exp(stat.lam * (mean_cycle * stat.n_cycles - t))
    if isinstance(stat, CycleTimeExcessExp):
        t = _kernels.cycle_time_totals(master_seed, start, count,
                                       stat.n_cycles, lam_p, lam_m, sm)
        return np.exp(stat.lam * (t - mean_cycle * stat.n_cycles))
    if isinstance(stat, CycleDeficitIndicator):
        t = _kernels.cycle_time_totals(master_seed, start, count,
                                       stat.n_cycles, lam_p, lam_m, sm)
        return (t / stat.n_cycles - mean_cycle < -stat.epsilon).astype(np.float64)
    if isinstance(stat, CycleExcessIndicator):
        t = _kernels.cycle_time_totals(master_seed, start, count,
                                       stat.n_cycles, lam_p, lam_m, sm)
        return (t / stat.n_cycles - mean_cycle > stat.epsilon).astype(np.float64)
    if isinstance(stat, StoppedExponential):
        b_plus, b_minus = model.constant_drift_values()
        x, t = _kernels.cycle_terminal_state(
            master_seed, start, count, stat.n_cycles, lam_p, lam_m, sm,
            b_plus, b_minus, model.x0)
        return np.exp(-stat.lam * (x - model.x0)
                      + stat.time_weight * stat.lam * t)
    if isinstance(stat, TerminalVelocity):
        x = _terminal_values(stat, model, master_seed, start, count)
        return (x - model.x0) / stat.horizon
    if isinstance(stat, LowVelocityIndicator):
        x = _terminal_values(stat, model, master_seed, start, count)
        return ((x - model.x0) / stat.horizon < stat.threshold).astype(np.float64)
    if isinstance(stat, ConstantStatistic):
        return np.full(count, float(stat.value))
    if isinstance(stat, CallableStatistic):
        out = np.empty(count, dtype=np.float64)
        for i in range(count):
            index = start + i
            try:
                out[i] = stat.fn(model, PhiloxStream(master_seed, index))
            except Exception as exc:
                raise SwitchDiffError(
                    f"statistic failed at sample index {index}: {exc}") from exc
        return out
    raise DomainError(f"unknown statistic spec {stat!r}")


# ---------------------------------------------------------------------------
# estimation

def wilson_interval(successes: float, n: int, level: float) -> tuple[float, float]:
    """Wilson score interval for a binomial proportion."""
    z = float(ndtri(0.5 + level / 2.0))
    p = successes / n
    denom = 1.0 + z * z / n
    center = (p + z * z / (2.0 * n)) / denom
    half = z * math.sqrt(p * (1.0 - p) / n + z * z / (4.0 * n * n)) / denom
    # the interval provably contains the point estimate; enforce that (and
    # the unit range) against floating-point rounding of the endpoints
    lo = max(min(center - half, p), 0.0)
    hi = min(max(center + half, p), 1.0)
    return lo, hi


def estimate(stat, model: ValidatedModel, n_samples: int, master_seed: int,
             threads: int = 1, ci_level: float = DEFAULT_CI_LEVEL) -> McEstimate:
    """Mean (or frequency) of a statistic over per-index streams.

    Sample i always uses stream (master_seed, i); the reduction runs over the
    assembled per-sample array in index order, so the result does not depend
    on `threads`.
    """
    if not isinstance(n_samples, int) or n_samples < 2:
        raise DomainError(f"n_samples={n_samples!r} must be an integer >= 2")
    if not (0.0 < ci_level < 1.0):
        raise DomainError(f"ci_level={ci_level!r} must lie in (0, 1)")
    values = np.empty(n_samples, dtype=np.float64)
    threads = max(1, int(threads))
    # span geometry is a function of n_samples alone, never of `threads`:
    # workers pick up identical work units, so the kernel call pattern (and
    # with it every sampled value) cannot depend on the thread count
    chunk = min(n_samples, _SPAN)
    spans = [(lo, min(lo + chunk, n_samples))
             for lo in range(0, n_samples, chunk)]

    def fill(span):
        lo, hi = span
        values[lo:hi] = sample_statistic(stat, model, master_seed, lo,
                                         hi - lo)

    if threads == 1:
        for span in spans:
            fill(span)
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            futures = {pool.submit(fill, span): span for span in spans}
            errors = []
            for fut, span in futures.items():
                exc = fut.exception()
                if exc is not None:
                    errors.append((span[0], exc))
            if errors:
                errors.sort(key=lambda e: e[0])
                raise errors[0][1]

    mean = float(np.mean(values))
    if is_probability_statistic(stat):
        se = math.sqrt(mean * (1.0 - mean) / n_samples)
        lo, hi = wilson_interval(float(np.sum(values)), n_samples, ci_level)
        # the point estimate always lies inside the Wilson interval
        return McEstimate(mean=mean, std_error=se, n_samples=n_samples,
                          ci_low=lo, ci_high=hi, kind="probability",
                          level=ci_level)
    sd = float(np.std(values, ddof=1))
    se = sd / math.sqrt(n_samples)
    z = float(ndtri(0.5 + ci_level / 2.0))
    return McEstimate(mean=mean, std_error=se, n_samples=n_samples,
                      ci_low=mean - z * se, ci_high=mean + z * se,
                      kind="mean_of_real", level=ci_level)


# ---------------------------------------------------------------------------
# verification campaigns

def verify_mgf(model: ValidatedModel, lambdas, cycles, n_samples: int,
               master_seed: int, which: str = "both",
               threads: int = 1) -> list[BoundReport]:
    """Closed-form cycle-time transforms against their Monte Carlo means.

    One report row per (lam, n) pair and side; consistent iff |z| <= 4.  The
    entry-time factor of the closed forms is included exactly when the model
    starts in the minus regime, matching what the sampled T_{2n} contains.
    """
    if which not in ("deficit", "excess", "both"):
        raise DomainError(f"which={which!r} must be deficit, excess or both")
    include_entry = model.starts_minus
    lam_p, lam_m = model.lambda_plus, model.lambda_minus
    mean_cycle = analytic_constants(model).mean_cycle
    sides = [s for s in ("deficit", "excess") if which in (s, "both")]
    # domain screening before any sampling, so bad rows fail the whole call
    if "excess" in sides:
        pole = min(lam_p, lam_m)
        for lam in lambdas:
            if lam >= pole:
                raise DomainError(
                    f"excess transform row lam={lam!r} is at or beyond the "
                    f"pole min(lambda_plus, lambda_minus)={pole}")
    reports = []
    for side in sides:
        for n in cycles:
            for lam in lambdas:
                if side == "deficit":
                    stat = CycleTimeDeficitExp(lam=float(lam), n_cycles=int(n))
                    analytic = mgf_deficit(lam, n, mean_cycle, lam_p, lam_m,
                                           include_entry)
                else:
                    stat = CycleTimeExcessExp(lam=float(lam), n_cycles=int(n))
                    analytic = mgf_excess(lam, n, mean_cycle, lam_p, lam_m,
                                          include_entry)
                est = estimate(stat, model, n_samples, master_seed,
                               threads=threads)
                z = z_score(est.mean, analytic, est.std_error)
                reports.append(BoundReport(
                    quantity=f"mgf_{side}[lam={float(lam)!r},n={int(n)}]",
                    analytic=analytic, estimate=est, z=z,
                    verdict=agreement_verdict(z)))
    return reports


def verify_velocity(model: ValidatedModel, horizon: float, n_samples: int,
                    master_seed: int, method: str = EXACT, dt: float = 0.01,
                    threads: int = 1) -> BoundReport:
    """Terminal velocity against the renewal-reward value.

    Requires constant drifts held at their declared bounds, where the
    long-run velocity is exactly velocity_star.  The finite-horizon mean
    carries an O(1/horizon) bias from the incomplete last cycle and the
    relaxation of the regime chain; at the horizons this is used with, that
    bias is far below the Monte Carlo resolution.
    """
    b_plus, b_minus = model.constant_drift_values()
    if b_plus != model.r_plus or b_minus != -model.r_minus:
        raise DomainError(
            "verify_velocity requires drifts held at their bounds: "
            f"b_plus={b_plus} vs r_plus={model.r_plus}, b_minus={b_minus} "
            f"vs -r_minus={-model.r_minus}")
    if not (horizon > 0 and math.isfinite(horizon)):
        raise DomainError(f"horizon={horizon!r} must be positive finite")
    analytic = analytic_constants(model).velocity_star
    stat = TerminalVelocity(horizon=float(horizon), method=method, dt=dt)
    est = estimate(stat, model, n_samples, master_seed, threads=threads)
    z = z_score(est.mean, analytic, est.std_error)
    return BoundReport(
        quantity=f"terminal_velocity[t={float(horizon)!r},{method}]",
        analytic=analytic, estimate=est, z=z, verdict=agreement_verdict(z))


def verify_stopped_moment(model: ValidatedModel, lam: float,
                          time_weight: float, n_cycles: int, n_samples: int,
                          master_seed: int, slack: float = 0.05,
                          threads: int = 1) -> BoundReport:
    """Geometric bound on the stopped exponential moment, with per-cycle slack.

    The bound (1 - coeff*lam)^n drops o(lam) terms once per cycle, so at any
    fixed lam > 0 the true expectation exceeds it by a factor
    (1 + O(lam^2))^n.  The slack budgets for that: the verdict is bound_holds
    iff the estimate's lower confidence limit is at most
    ((1 - coeff*lam) * (1 + slack))^n, i.e. slack is applied per cycle, not
    globally.  analytic always reports the unslackened bound.
    """
    b_plus, b_minus = model.constant_drift_values()
    if b_plus != model.r_plus or b_minus != -model.r_minus:
        raise DomainError(
            "verify_stopped_moment requires drifts held at their bounds "
            "(the bound's worst case)")
    if slack < 0:
        raise DomainError(f"slack={slack!r} must be >= 0")
    analytic = stopped_moment_bound(lam, time_weight, n_cycles, model.r_plus,
                                    model.r_minus, model.lambda_plus,
                                    model.lambda_minus)
    coeff, _ = stopped_moment_decay(time_weight, model.r_plus, model.r_minus,
                                    model.lambda_plus, model.lambda_minus)
    threshold = ((1.0 - coeff * lam) * (1.0 + slack)) ** n_cycles
    stat = StoppedExponential(lam=float(lam), time_weight=float(time_weight),
                              n_cycles=int(n_cycles))
    est = estimate(stat, model, n_samples, master_seed, threads=threads)
    verdict = VERDICT_BOUND_HOLDS if est.ci_low <= threshold \
        else VERDICT_BOUND_VIOLATED
    z = z_score(est.mean, analytic, est.std_error)
    return BoundReport(
        quantity=(f"stopped_moment[lam={float(lam)!r},"
                  f"w={float(time_weight)!r},n={int(n_cycles)}]"),
        analytic=analytic, estimate=est, z=z, verdict=verdict)


def chernoff_frequency_check(model: ValidatedModel, epsilon: float, cycles,
                             n_samples: int, master_seed: int,
                             direction: str = LOWER_TAIL,
                             lambda_cap: float = DEFAULT_LAMBDA_CAP,
                             threads: int = 1) -> list[BoundReport]:
    """Optimized tail bounds against empirical cycle-time tail frequencies.

    The per-cycle factor kappa is optimized for a plus-start skeleton; when
    the model starts in minus, the reported per-n bound additionally carries
    the exact entry-time factor at the optimized tilt, keeping it a valid
    upper bound for the sampled frequency.
    """
    lam_p, lam_m = model.lambda_plus, model.lambda_minus
    mean_cycle = analytic_constants(model).mean_cycle
    reports = []
    for n in cycles:
        res = chernoff_skeleton(direction, epsilon, int(n), lam_p, lam_m,
                                lambda_cap=lambda_cap)
        if model.starts_minus:
            if direction == LOWER_TAIL:
                log_entry = (log_mgf_deficit(res.lambda_star, 0, mean_cycle,
                                             lam_p, lam_m, True))
            else:
                log_entry = (log_mgf_excess(res.lambda_star, 0, mean_cycle,
                                            lam_p, lam_m, True))
        else:
            log_entry = 0.0
        bound = math.exp(res.log_bound + log_entry)
        if direction == LOWER_TAIL:
            stat = CycleDeficitIndicator(epsilon=float(epsilon), n_cycles=int(n))
        else:
            stat = CycleExcessIndicator(epsilon=float(epsilon), n_cycles=int(n))
        est = estimate(stat, model, n_samples, master_seed, threads=threads)
        reports.append(BoundReport(
            quantity=f"cycle_tail_freq[{direction},eps={float(epsilon)!r},n={int(n)}]",
            analytic=bound, estimate=est, z=None,
            verdict=upper_bound_verdict(est, bound)))
        reports.append(BoundReport(
            quantity=f"chernoff_lambda_star[{direction},eps={float(epsilon)!r},n={int(n)}]",
            analytic=res.lambda_star, estimate=None, z=None,
            verdict=VERDICT_INCONCLUSIVE))
        reports.append(BoundReport(
            quantity=f"chernoff_kappa[{direction},eps={float(epsilon)!r},n={int(n)}]",
            analytic=res.kappa, estimate=None, z=None,
            verdict=VERDICT_INCONCLUSIVE))
    return reports


def verify_spatial_tail(model: ValidatedModel, c0: float, epsilon: float,
                        horizons, n_samples: int, master_seed: int,
                        method: str = EXACT, dt: float = 0.01,
                        threads: int = 1,
                        residual_threshold: float = 0.1
                        ) -> tuple[list[BoundReport], DecayFit | None]:
    """Exponential decay of P((X_t - x0)/t - c0 < -epsilon) over horizons.

    Emits one frequency row per horizon (no analytic value: the decay
    constant is not known in closed form) and a final fit row whose estimate
    column carries the fitted slope of log-frequency against t and whose `se`
    column carries the unexplained variation fraction of the fit.  Verdict of
    the fit row: consistent iff the slope is strictly negative with residual
    below the threshold, or every frequency fell below 1/n_samples
    ("below resolution"); inconclusive otherwise.
    """
    horizons = [float(t) for t in horizons]
    if len(horizons) < 3:
        raise DomainError("need at least 3 horizons for a decay fit")
    if not (epsilon > 0 and math.isfinite(epsilon)):
        raise DomainError(f"epsilon={epsilon!r} must be positive finite")
    threshold = c0 - epsilon
    reports = []
    freqs = []
    for t in horizons:
        stat = LowVelocityIndicator(horizon=t, threshold=threshold,
                                    method=method, dt=dt)
        est = estimate(stat, model, n_samples, master_seed, threads=threads)
        freqs.append(est.mean)
        reports.append(BoundReport(
            quantity=f"tail_freq[t={t!r}]", analytic=None, estimate=est,
            z=None, verdict=VERDICT_INCONCLUSIVE))
    positive = [(t, math.log(f)) for t, f in zip(horizons, freqs) if f > 0]
    if not any(f > 0 for f in freqs):
        reports.append(BoundReport(
            quantity="tail_decay_slope[below_resolution]", analytic=None,
            estimate=None, z=None, verdict=VERDICT_CONSISTENT))
        return reports, None
    if len(positive) < 3:
        reports.append(BoundReport(
            quantity="tail_decay_slope[insufficient_data]", analytic=None,
            estimate=None, z=None, verdict=VERDICT_INCONCLUSIVE))
        return reports, None
    fit = decay_rate_fit(positive)
    ok = fit.slope < 0 and fit.residual <= residual_threshold
    est = McEstimate(mean=fit.slope, std_error=fit.residual,
                     n_samples=len(positive), ci_low=fit.slope,
                     ci_high=fit.slope, kind="mean_of_real", level=1.0)
    reports.append(BoundReport(
        quantity="tail_decay_slope", analytic=None, estimate=est, z=None,
        verdict=VERDICT_CONSISTENT if ok else VERDICT_INCONCLUSIVE))
    return reports, fit
