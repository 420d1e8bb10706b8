"""Trajectories of the diffusion on top of a sampled skeleton.

Two integrators:

* exact Gaussian transitions for constant drifts (between event times s < t
  in one regime, X_t = X_s + b (t-s) + N(0, t-s)), sampled at every switch
  time and at the horizon;
* switch-aligned Euler-Maruyama for general bounded drifts.  Steps are split
  at every switch time: a regime flip inside a step is the dominant
  discretization error, O(dt) in the terminal value, so alignment is
  mandatory rather than optional.

X is continuous across switches; no jump is ever inserted.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from .errors import (DomainError, DriftEvaluationError, NonPositiveStepError,
                     UnknownStatisticError)
from .model import Regime, ValidatedModel
from .rng import take_normals
from .skeleton import Skeleton


@dataclass(frozen=True)
class Trajectory:
    """Sampled path: times[0] = 0, values[0] = x0, aligned with a skeleton."""

    times: np.ndarray
    values: np.ndarray
    skeleton: Skeleton

    def __post_init__(self):
        object.__setattr__(self, "times", np.asarray(self.times, dtype=np.float64))
        object.__setattr__(self, "values", np.asarray(self.values, dtype=np.float64))


def _flip_times(skeleton: Skeleton) -> np.ndarray:
    """Times at which the regime actually changes, in increasing order."""
    if skeleton.initial_regime is Regime.MINUS:
        return skeleton.times()
    return skeleton.switch_times


def _check_horizon(skeleton: Skeleton, horizon: float) -> None:
    if not (isinstance(horizon, (int, float)) and horizon > 0
            and math.isfinite(horizon)):
        raise DomainError(f"horizon={horizon!r} must be a positive finite number")
    if skeleton.end_time < horizon:
        raise DomainError(
            f"skeleton ends at {skeleton.end_time}, before horizon {horizon}; "
            "sample more cycles")


def simulate_exact_constant(model: ValidatedModel, skeleton: Skeleton,
                            horizon: float, rng) -> Trajectory:
    """Exact transition sampling for constant drifts.

    Consumes one Gaussian per segment between consecutive event times
    (switches within the horizon, then the horizon itself).
    """
    b_plus, b_minus = model.constant_drift_values()
    _check_horizon(skeleton, horizon)
    flips = _flip_times(skeleton)
    inner = flips[(flips > 0.0) & (flips < horizon)]
    times = np.concatenate([[0.0], inner, [horizon]])
    segs = np.diff(times)
    regime = skeleton.initial_regime
    drifts = np.empty(segs.size, dtype=np.float64)
    for k in range(segs.size):
        drifts[k] = b_plus if regime is Regime.PLUS else b_minus
        regime = Regime.MINUS if regime is Regime.PLUS else Regime.PLUS
    z = take_normals(rng, segs.size)
    steps = np.concatenate([[model.x0], drifts * segs + np.sqrt(segs) * z])
    return Trajectory(times=times, values=np.cumsum(steps), skeleton=skeleton)


def _merged_grid(skeleton: Skeleton, dt: float, horizon: float) -> np.ndarray:
    """Step targets: nominal multiples of dt, switch times, then the horizon."""
    n_nominal = int(math.ceil(horizon / dt))
    nominal = np.arange(1, n_nominal + 1, dtype=np.float64) * dt
    nominal = nominal[nominal < horizon]
    flips = _flip_times(skeleton)
    inner = flips[(flips > 0.0) & (flips < horizon)]
    return np.unique(np.concatenate([nominal, inner, [horizon]]))


def simulate_em(model: ValidatedModel, skeleton: Skeleton, dt: float,
                horizon: float, rng) -> Trajectory:
    """Euler-Maruyama with steps split at every switch time.

    X_{t+h} = X_t + b_regime(X_t) h + N(0, h); h never crosses a switch.
    """
    if not (isinstance(dt, (int, float)) and dt > 0 and math.isfinite(dt)):
        raise NonPositiveStepError(f"dt={dt!r} must be a positive finite number")
    _check_horizon(skeleton, horizon)
    targets = _merged_grid(skeleton, dt, horizon)
    times = np.concatenate([[0.0], targets])
    flips = _flip_times(skeleton)
    n_done = np.searchsorted(flips, times[:-1], side="right")
    first = skeleton.initial_regime
    other = Regime.MINUS if first is Regime.PLUS else Regime.PLUS
    z = take_normals(rng, targets.size)
    values = np.empty(times.size, dtype=np.float64)
    values[0] = model.x0
    x = model.x0
    for k in range(targets.size):
        regime = first if n_done[k] % 2 == 0 else other
        b = model.drift_value(x, regime)
        if not math.isfinite(b):
            raise DriftEvaluationError(
                f"drift returned {b!r} at x={x}, regime={regime.value}")
        h = targets[k] - times[k]
        x = x + (b * h + math.sqrt(h) * z[k])
        values[k + 1] = x
    return Trajectory(times=times, values=values, skeleton=skeleton)


def simulate_em_coupled(model: ValidatedModel, skeleton: Skeleton,
                        dts, horizon: float, rng) -> list[Trajectory]:
    """EM at several step sizes driven by one shared Brownian path.

    Increments are drawn on the union of all step grids and summed for the
    coarser ones, so refining dt isolates the discretization error.  Intended
    for convergence studies; the draw layout differs from simulate_em.
    """
    dts = [float(d) for d in dts]
    if not dts:
        raise DomainError("dts must be a non-empty list")
    for d in dts:
        if d <= 0:
            raise NonPositiveStepError(f"dt={d!r} must be positive")
    _check_horizon(skeleton, horizon)
    grids = {d: _merged_grid(skeleton, d, horizon) for d in dts}
    master = np.unique(np.concatenate(list(grids.values())))
    lefts = np.concatenate([[0.0], master[:-1]])
    dW = np.sqrt(master - lefts) * take_normals(rng, master.size)
    flips = _flip_times(skeleton)
    first = skeleton.initial_regime
    other = Regime.MINUS if first is Regime.PLUS else Regime.PLUS
    out = []
    for d in dts:
        targets = grids[d]
        idx = np.searchsorted(master, targets)
        starts = np.concatenate([[0], idx[:-1] + 1])
        incr = np.add.reduceat(dW, starts)
        times = np.concatenate([[0.0], targets])
        n_done = np.searchsorted(flips, times[:-1], side="right")
        values = np.empty(times.size, dtype=np.float64)
        values[0] = model.x0
        x = model.x0
        for k in range(targets.size):
            regime = first if n_done[k] % 2 == 0 else other
            b = model.drift_value(x, regime)
            if not math.isfinite(b):
                raise DriftEvaluationError(
                    f"drift returned {b!r} at x={x}, regime={regime.value}")
            h = targets[k] - times[k]
            x = x + (b * h + incr[k])
            values[k + 1] = x
        out.append(Trajectory(times=times, values=values, skeleton=skeleton))
    return out


VELOCITY_AT_HORIZON = "velocity_at_horizon"
SKELETON_VELOCITY = "skeleton_velocity"
MIN_OVER_PATH = "min_over_path"


def statistic_at(traj: Trajectory, kind: str) -> float:
    """Scalar summaries of a trajectory.

    velocity_at_horizon - (X_end - x0) / t_end
    skeleton_velocity   - (X at the last full cycle boundary - x0) / n_cycles
    min_over_path       - minimum sampled value
    """
    if traj.times.size == 0:
        raise DomainError("empty trajectory")
    x0 = traj.values[0]
    if kind == VELOCITY_AT_HORIZON:
        t_end = traj.times[-1]
        if t_end <= 0:
            raise DomainError("trajectory has zero duration")
        return float((traj.values[-1] - x0) / t_end)
    if kind == SKELETON_VELOCITY:
        boundaries = traj.skeleton.switch_times[1::2]  # ends of full cycles
        end = traj.times[-1]
        n = int(np.searchsorted(boundaries, end, side="right"))
        if n < 1:
            raise DomainError("trajectory covers no full cycle")
        t_boundary = boundaries[n - 1]
        k = int(np.searchsorted(traj.times, t_boundary))
        if k >= traj.times.size or traj.times[k] != t_boundary:
            raise DomainError(
                "cycle boundary is not a sampled time of this trajectory")
        return float((traj.values[k] - x0) / n)
    if kind == MIN_OVER_PATH:
        return float(traj.values.min())
    raise UnknownStatisticError(f"unknown statistic kind {kind!r}")


def trajectory_to_csv(traj: Trajectory, path) -> None:
    """Write rows (time, x, regime) with the regime in effect after each time."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["time", "x", "regime"])
        for t, x in zip(traj.times, traj.values):
            w.writerow([repr(float(t)), repr(float(x)),
                        traj.skeleton.regime_at(float(t)).value])
