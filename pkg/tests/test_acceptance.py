"""Acceptance suite: one test per criterion, at the stated tolerances.

Run with `pytest tests/test_acceptance.py -v -s` to see one PASS/FAIL line
per criterion alongside the measured numbers.  Every run is seeded and
deterministic for a given backend.
"""

import math
import time

import numpy as np
import pytest

from switchdiff import (PhiloxStream, Regime, Skeleton, chernoff_skeleton,
                        chernoff_frequency_check, lln_check, simulate_em,
                        simulate_exact_constant, verify_mgf,
                        verify_spatial_tail, verify_stopped_moment,
                        verify_velocity)
from switchdiff import _kernels
from switchdiff.bounds import LOWER_TAIL, mgf_deficit, mgf_excess
from switchdiff.cli import main as cli_main
from switchdiff.reporting import (VERDICT_BOUND_HOLDS, VERDICT_CONSISTENT)

from conftest import (ZeroNoiseStream, deficit_oracle, excess_oracle,
                      make_model)


def _report(criterion: str, passed: bool, detail: str, elapsed: float,
            budget: float):
    status = "PASS" if (passed and elapsed < budget) else "FAIL"
    print(f"ACCEPTANCE {criterion}: {status} [{elapsed:.1f}s / "
          f"budget {budget:.0f}s] {detail}")
    assert passed, f"{criterion}: {detail}"
    assert elapsed < budget, f"{criterion}: runtime {elapsed:.1f}s over budget"


def test_criterion_1_mgf_deficit_exactness():
    t0 = time.monotonic()
    model = make_model(lambda_plus=1.0, lambda_minus=1.0, z0=Regime.MINUS)
    lambdas, cycles = [0.05, 0.1, 0.2], [1, 3, 5]
    reports = verify_mgf(model, lambdas, cycles, 10 ** 6, 1001,
                         which="deficit")
    worst_z = max(abs(r.z) for r in reports)
    all_consistent = all(r.verdict == VERDICT_CONSISTENT for r in reports)
    worst_rel = 0.0
    for n in cycles:
        for lam in lambdas:
            closed = mgf_deficit(lam, n, 2.0, 1.0, 1.0, True)
            oracle = deficit_oracle(lam, n, 2.0, 1.0, 1.0)
            worst_rel = max(worst_rel, abs(closed - oracle) / oracle)
    _report("1 (deficit transform exactness)",
            all_consistent and worst_rel < 1e-6,
            f"max |z| = {worst_z:.2f} <= 4, max oracle rel err = "
            f"{worst_rel:.2e} < 1e-6 over {len(reports)} rows",
            time.monotonic() - t0, 60.0)


def test_criterion_2_mgf_excess_exactness():
    t0 = time.monotonic()
    model = make_model(lambda_plus=2.0, lambda_minus=3.0, z0=Regime.MINUS)
    lambdas, cycles = [0.25, 0.5, 1.0], [1, 3, 5]
    reports = verify_mgf(model, lambdas, cycles, 10 ** 6, 1002,
                         which="excess")
    worst_z = max(abs(r.z) for r in reports)
    all_consistent = all(r.verdict == VERDICT_CONSISTENT for r in reports)
    cycle_mean = 1.0 / 2.0 + 1.0 / 3.0
    worst_rel = 0.0
    for n in cycles:
        for lam in lambdas:
            closed = mgf_excess(lam, n, cycle_mean, 2.0, 3.0, True)
            oracle = excess_oracle(lam, n, cycle_mean, 2.0, 3.0)
            worst_rel = max(worst_rel, abs(closed - oracle) / oracle)
    _report("2 (excess transform exactness)",
            all_consistent and worst_rel < 1e-6,
            f"max |z| = {worst_z:.2f} <= 4, max oracle rel err = "
            f"{worst_rel:.2e} < 1e-6 over {len(reports)} rows",
            time.monotonic() - t0, 60.0)


def test_criterion_3_cycle_time_lln():
    t0 = time.monotonic()
    model = make_model(lambda_plus=1.0, lambda_minus=1.0)
    worst = 0.0
    for seed in range(1003, 1023):  # 20 seeds
        rep = lln_check(model, 10 ** 6, 0.01, PhiloxStream(seed, 0))
        worst = max(worst, abs(rep.estimate.mean - 2.0))
        if rep.verdict != VERDICT_CONSISTENT:
            _report("3 (cycle-time law of large numbers)", False,
                    f"seed {seed} deviated by {abs(rep.estimate.mean - 2.0)}",
                    time.monotonic() - t0, 30.0)
    _report("3 (cycle-time law of large numbers)", True,
            f"max |T_2n/n - 2| = {worst:.5f} < 0.01 over 20 seeds",
            time.monotonic() - t0, 30.0)


def _grid_search_kappa_lower(epsilon, lp, lm, lo, hi, resolution=1e-6):
    L = 1.0 / lp + 1.0 / lm
    lams = np.arange(lo, hi, resolution)
    logk = (-lams * epsilon + math.log(lp) + math.log(lm)
            - np.log(lp + lams) - np.log(lm + lams) + L * lams)
    i = int(np.argmin(logk))
    return float(lams[i]), float(np.exp(logk[i]))


def test_criterion_4_skeleton_chernoff():
    t0 = time.monotonic()
    model = make_model(lambda_plus=1.0, lambda_minus=1.0)
    reports = chernoff_frequency_check(model, 0.5, [5, 10, 20], 10 ** 6, 1004)
    freq_rows = [r for r in reports if r.quantity.startswith("cycle_tail_freq")]
    holds = all(r.verdict == VERDICT_BOUND_HOLDS for r in freq_rows)
    margins = ", ".join(
        f"n={n}: {r.estimate.mean:.4f} <= {r.analytic:.4f}"
        for n, r in zip([5, 10, 20], freq_rows))
    res = chernoff_skeleton(LOWER_TAIL, 0.5, 5, 1.0, 1.0)
    lam_grid, kappa_grid = _grid_search_kappa_lower(0.5, 1.0, 1.0, 1e-6, 2.0)
    optimizer_ok = (abs(res.lambda_star - 1.0 / 3.0) < 1e-6
                    and abs(res.kappa - kappa_grid) <= 1e-5
                    and abs(res.kappa - 0.927406) <= 1e-5
                    and abs(res.lambda_star - lam_grid) <= 1e-5)
    _report("4 (skeleton tail bounds)", holds and optimizer_ok,
            f"{margins}; lambda* = {res.lambda_star:.8f} (1/3), kappa = "
            f"{res.kappa:.7f} vs grid {kappa_grid:.7f}",
            time.monotonic() - t0, 120.0)


def test_criterion_5_escape_velocity():
    t0 = time.monotonic()
    transient = make_model(lambda_plus=1.0, lambda_minus=2.0)
    rep = verify_velocity(transient, 1.0e4, 1000, 1005, method="exact")
    ok_pos = (rep.verdict == VERDICT_CONSISTENT
              and rep.analytic == pytest.approx(1.0 / 3.0, rel=1e-15))
    control = make_model(lambda_plus=2.0, lambda_minus=1.0)
    rep2 = verify_velocity(control, 1.0e4, 1000, 1005, method="exact")
    ok_neg = (rep2.verdict == VERDICT_CONSISTENT
              and rep2.analytic == pytest.approx(-1.0 / 3.0, rel=1e-15))
    _report("5 (escape velocity, exact sampler)", ok_pos and ok_neg,
            f"transient: mean = {rep.estimate.mean:.5f} vs 1/3 "
            f"(z = {rep.z:.2f}); control: mean = {rep2.estimate.mean:.5f} "
            f"vs -1/3 (z = {rep2.z:.2f})",
            time.monotonic() - t0, 10.0)


def test_criterion_6_stopped_moment_bound():
    t0 = time.monotonic()
    model = make_model(lambda_plus=1.0, lambda_minus=1.0, drift_minus=-0.2,
                       r_minus=0.2)
    rep = verify_stopped_moment(model, 0.05, 0.0, 20, 10 ** 5, 1006,
                                slack=0.05)
    bound_ok = rep.analytic == pytest.approx(0.4420024338794074, rel=1e-12)
    _report("6 (stopped-moment geometric bound)",
            rep.verdict == VERDICT_BOUND_HOLDS and bound_ok,
            f"estimate = {rep.estimate.mean:.4f}, bound = {rep.analytic:.4f},"
            f" threshold with 5% per-cycle slack = "
            f"{(0.96 * 1.05) ** 20:.4f}",
            time.monotonic() - t0, 60.0)


def test_criterion_7_spatial_exponential_tail():
    t0 = time.monotonic()
    model = make_model(lambda_plus=1.0, lambda_minus=2.0)
    reports, fit = verify_spatial_tail(model, 1.0 / 6.0, 1.0 / 12.0,
                                       [50.0, 100.0, 200.0, 400.0], 10 ** 5,
                                       1007, method="exact")
    slope_row = reports[-1]
    below_res = slope_row.quantity.endswith("[below_resolution]")
    if below_res:
        ok, detail = True, "all frequencies below 1/N (below resolution)"
    else:
        ok = (slope_row.verdict == VERDICT_CONSISTENT and fit is not None
              and fit.slope < 0 and fit.residual < 0.10)
        freqs = ", ".join(f"{r.estimate.mean:.2e}" for r in reports[:-1])
        detail = (f"freqs = [{freqs}], slope = {fit.slope:.4f} < 0, "
                  f"residual fraction = {fit.residual:.4f} < 0.10")
    _report("7 (spatial exponential tail)", ok, detail,
            time.monotonic() - t0, 600.0)


def test_criterion_8_integrator_correctness():
    t0 = time.monotonic()
    model = make_model()
    # zero-noise exactness, single leg and across a switch
    skel = Skeleton(0.0, [0.7, 1.5], Regime.PLUS)
    a = simulate_exact_constant(model, skel, 0.7, ZeroNoiseStream())
    exact_leg = abs(a.values[-1] - 0.7) < 1e-12
    skel2 = Skeleton(0.0, [0.5, 1.0], Regime.PLUS)
    b = simulate_exact_constant(model, skel2, 1.0, ZeroNoiseStream())
    exact_switch = abs(b.values[-1] - 0.0) < 1e-12
    c = simulate_em(model, Skeleton(0.0, [10.0, 20.0], Regime.PLUS), 0.01,
                    1.0, ZeroNoiseStream())
    em_exact = abs(c.values[-1] - 1.0) < 1e-12
    # a step must split at the switch at 0.005 inside the first dt = 0.01
    d = simulate_em(model, Skeleton(0.0, [0.005, 10.0], Regime.PLUS), 0.01,
                    0.01, ZeroNoiseStream())
    split_ok = abs(d.values[-1] - 0.0) < 1e-12
    # distributional agreement, EM dt = 1e-3 vs exact, N = 1e4
    n = 10 ** 4
    xe = _kernels.horizon_terminal_em(1008, 0, n, 1.0, 1e-3, 1.0, 1.0, False,
                                      1.0, -1.0, 0.0)
    xx = _kernels.horizon_terminal_exact(2008, 0, n, 1.0, 1.0, 1.0, False,
                                         1.0, -1.0, 0.0)
    se = math.sqrt(xe.var(ddof=1) / n + xx.var(ddof=1) / n)
    mean_ok = abs(xe.mean() - xx.mean()) < 4 * se
    var_ok = abs(xe.var(ddof=1) - xx.var(ddof=1)) / xx.var(ddof=1) < 0.05
    _report("8 (integrator correctness)",
            exact_leg and exact_switch and em_exact and split_ok
            and mean_ok and var_ok,
            f"zero-noise checks exact to 1e-12; switch split exact; "
            f"EM vs exact means differ {abs(xe.mean() - xx.mean()):.4f} "
            f"< {4 * se:.4f}, variance gap "
            f"{abs(xe.var(ddof=1) - xx.var(ddof=1)) / xx.var(ddof=1):.3f} "
            f"< 0.05",
            time.monotonic() - t0, 60.0)


def test_criterion_9_thread_determinism(tmp_path):
    import json

    t0 = time.monotonic()
    config = {
        "model": {"lambda_plus": 1.0, "lambda_minus": 2.0, "drift_plus": 1.0,
                  "drift_minus": -1.0, "r_plus": 1.0, "r_minus": 1.0,
                  "x0": 0.0, "z0": "plus"},
        "command": "escape-rate",
        "params": {"horizon": 1.0e4, "n_samples": 1000, "seed": 1009,
                   "method": "exact", "dt": 0.01},
        "output": {"dir": "unused", "format": "csv"},
    }
    blobs = {}
    for threads in (1, 4, 16):
        cfg = tmp_path / f"cfg{threads}.json"
        out = tmp_path / f"out{threads}"
        config["output"]["dir"] = str(out)
        cfg.write_text(json.dumps(config))
        code = cli_main(["escape-rate", "--config", str(cfg),
                         "--threads", str(threads)])
        assert code == 0
        blobs[threads] = (out / "report.csv").read_bytes()
    identical = blobs[1] == blobs[4] == blobs[16]

    config2 = dict(config)
    config2["command"] = "verify-lemma2"
    config2["model"] = dict(config["model"], drift_minus=-0.2, r_minus=0.2,
                            lambda_minus=1.0)
    config2["params"] = {"lam": 0.05, "a_hat": 0.0, "n_cycles": 20,
                         "n_samples": 20000, "slack": 0.05, "seed": 1009}
    blobs2 = {}
    for threads in (1, 4, 16):
        cfg = tmp_path / f"l{threads}.json"
        out = tmp_path / f"lout{threads}"
        config2["output"] = {"dir": str(out), "format": "json"}
        cfg.write_text(json.dumps(config2))
        assert cli_main(["verify-lemma2", "--config", str(cfg),
                         "--threads", str(threads)]) == 0
        blobs2[threads] = (out / "report.json").read_bytes()
    identical2 = blobs2[1] == blobs2[4] == blobs2[16]

    _report("9 (thread-count determinism)", identical and identical2,
            "report files byte-identical at 1, 4, 16 threads for "
            "escape-rate (csv) and verify-lemma2 (json)",
            time.monotonic() - t0, 120.0)
