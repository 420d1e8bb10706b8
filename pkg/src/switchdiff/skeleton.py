"""Switching-time skeletons of the regime chain.

A skeleton records the alternation times of the two-state chain: ``t0`` is
the first entry into the plus regime (0 when starting there, an
Exp(lambda_minus) holding time when starting in minus), followed by
alternating Exp(lambda_plus) / Exp(lambda_minus) holding times.  A "cycle" is
one plus leg followed by one minus leg, so a skeleton of n cycles carries
2n switch times after t0.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .model import Regime, ValidatedModel, analytic_constants
from .rng import take_uniforms


def sample_holding_time(rate: float, u: float) -> float:
    """Inverse-CDF exponential draw: -ln(u)/rate for u in (0, 1].

    Chosen over rejection sampling so tests can stub the uniform exactly.
    """
    if not (isinstance(rate, (int, float)) and math.isfinite(rate) and rate > 0):
        raise DomainError(f"rate={rate!r} must be a positive finite number")
    if not (isinstance(u, (int, float)) and 0.0 < u <= 1.0):
        raise DomainError(f"u={u!r} must lie in (0, 1]")
    return -math.log(u) / rate


@dataclass(frozen=True)
class Skeleton:
    """Switch times of one realization of the regime chain.

    t0            - first entry into the plus regime (= 0 iff started there)
    switch_times  - T_1 .. T_{2n}, strictly increasing, measured from time 0
    initial_regime- regime at time 0
    """

    t0: float
    switch_times: np.ndarray
    initial_regime: Regime

    def __post_init__(self):
        times = np.asarray(self.switch_times, dtype=np.float64)
        object.__setattr__(self, "switch_times", times)
        if self.t0 < 0:
            raise DomainError(f"t0={self.t0} must be >= 0")
        if (self.t0 == 0.0) != (self.initial_regime is Regime.PLUS):
            raise DomainError("t0 must be 0 exactly when starting in plus")
        seq = np.concatenate([[self.t0], times])
        if np.any(np.diff(seq) <= 0):
            raise DomainError("switch times must be strictly increasing")

    @property
    def n_cycles(self) -> int:
        return len(self.switch_times) // 2

    @property
    def end_time(self) -> float:
        return float(self.switch_times[-1]) if len(self.switch_times) else self.t0

    def times(self) -> np.ndarray:
        """All alternation times: t0 followed by the switch times."""
        return np.concatenate([[self.t0], self.switch_times])

    def regime_at(self, t: float) -> Regime:
        """Regime in effect at time t (right-continuous)."""
        times = self.times() if self.initial_regime is Regime.MINUS \
            else self.switch_times
        flips = int(np.searchsorted(times, t, side="right"))
        first = self.initial_regime
        return first if flips % 2 == 0 else (
            Regime.MINUS if first is Regime.PLUS else Regime.PLUS)


def sample_skeleton(model: ValidatedModel, n_cycles: int, rng) -> Skeleton:
    """Skeleton of n_cycles full cycles drawn from the given stream.

    Draw layout: one uniform per holding time, in chronological order (the
    t0 leg first when starting in minus).
    """
    if not isinstance(n_cycles, int) or n_cycles < 1:
        raise DomainError(f"n_cycles={n_cycles!r} must be an integer >= 1")
    starts_minus = model.starts_minus
    n_legs = 2 * n_cycles + (1 if starts_minus else 0)
    u = take_uniforms(rng, n_legs)
    j = np.arange(n_legs)
    plus_leg = ((j + (1 if starts_minus else 0)) % 2) == 0
    rates = np.where(plus_leg, model.lambda_plus, model.lambda_minus)
    times = np.cumsum(-np.log(u) / rates)
    if starts_minus:
        return Skeleton(t0=float(times[0]), switch_times=times[1:],
                        initial_regime=Regime.MINUS)
    return Skeleton(t0=0.0, switch_times=times, initial_regime=Regime.PLUS)


def cycle_statistic(skeleton: Skeleton) -> float:
    """Average cycle duration T_{2n} / n of a skeleton of n full cycles."""
    n = skeleton.n_cycles
    if n < 1:
        raise DomainError("skeleton covers no full cycle")
    return float(skeleton.switch_times[2 * n - 1]) / n


def skeleton_to_csv(skeleton: Skeleton, path) -> None:
    """Write rows (index, time, regime_after) for t0 and every switch."""
    first_after = Regime.PLUS  # t0 is by definition the entry into plus
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["index", "time", "regime_after"])
        w.writerow([0, repr(skeleton.t0), first_after.value])
        regime = first_after
        for i, t in enumerate(skeleton.switch_times, start=1):
            regime = Regime.MINUS if regime is Regime.PLUS else Regime.PLUS
            w.writerow([i, repr(float(t)), regime.value])


def lln_check(model: ValidatedModel, n_cycles: int, tolerance: float, rng):
    """One long skeleton's average cycle time against the mean cycle.

    Returns a BoundReport whose estimate is the single realized value of
    T_{2n}/n (no standard error; verdict from |deviation| <= tolerance).
    """
    from .reporting import (BoundReport, McEstimate, VERDICT_BOUND_VIOLATED,
                            VERDICT_CONSISTENT)

    if tolerance <= 0:
        raise DomainError(f"tolerance={tolerance!r} must be > 0")
    skel = sample_skeleton(model, n_cycles, rng)
    stat = cycle_statistic(skel)
    target = analytic_constants(model).mean_cycle
    deviation = abs(stat - target)
    est = McEstimate(mean=stat, std_error=0.0, n_samples=1, ci_low=stat,
                     ci_high=stat, kind="mean_of_real", level=1.0)
    verdict = VERDICT_CONSISTENT if deviation <= tolerance else VERDICT_BOUND_VIOLATED
    return BoundReport(
        quantity=f"cycle_time_lln[n={n_cycles},tol={tolerance!r}]",
        analytic=target, estimate=est, z=None, verdict=verdict)
