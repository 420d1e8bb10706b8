"""Skeleton sampling: inverse-CDF draws, alternation, distribution checks."""

import math

import numpy as np
import pytest
import scipy.stats

from switchdiff import (DomainError, PhiloxStream, Regime, Skeleton,
                        cycle_statistic, lln_check, sample_holding_time,
                        sample_skeleton, skeleton_to_csv)
from switchdiff import _kernels
from switchdiff.reporting import VERDICT_CONSISTENT

from conftest import FixedUniformStream, make_model

LN2 = math.log(2.0)


def test_sample_holding_time_examples():
    assert sample_holding_time(1.0, 0.5) == pytest.approx(LN2, rel=1e-15)
    assert sample_holding_time(1.0, 0.5) == pytest.approx(0.693147, abs=1e-6)
    assert sample_holding_time(2.0, 0.5) == pytest.approx(0.346574, abs=1e-6)
    assert sample_holding_time(1.0, 1.0) == 0.0  # boundary of support


@pytest.mark.parametrize("rate,u", [(0.0, 0.5), (-1.0, 0.5), (1.0, 0.0),
                                    (1.0, 1.5), (float("nan"), 0.5)])
def test_sample_holding_time_domain_errors(rate, u):
    with pytest.raises(DomainError):
        sample_holding_time(rate, u)


def test_sample_skeleton_stubbed_plus_start():
    skel = sample_skeleton(make_model(), 1, FixedUniformStream(0.5))
    assert skel.t0 == 0.0
    assert skel.initial_regime is Regime.PLUS
    np.testing.assert_allclose(skel.switch_times, [LN2, 2 * LN2], rtol=1e-15)
    np.testing.assert_allclose(skel.switch_times, [0.693147, 1.386294],
                               atol=1e-6)


def test_sample_skeleton_stubbed_minus_start():
    skel = sample_skeleton(make_model(z0=Regime.MINUS), 1,
                           FixedUniformStream(0.5))
    assert skel.t0 == pytest.approx(LN2, rel=1e-15)
    np.testing.assert_allclose(skel.switch_times, [2 * LN2, 3 * LN2],
                               rtol=1e-15)
    np.testing.assert_allclose(skel.switch_times, [1.386294, 2.079442],
                               atol=1e-6)


def test_sample_skeleton_rejects_zero_cycles(unit_model):
    with pytest.raises(DomainError):
        sample_skeleton(unit_model, 0, FixedUniformStream())


def test_skeleton_invariants_enforced():
    with pytest.raises(DomainError):
        Skeleton(t0=0.5, switch_times=[1.0], initial_regime=Regime.PLUS)
    with pytest.raises(DomainError):
        Skeleton(t0=0.0, switch_times=[1.0], initial_regime=Regime.MINUS)
    with pytest.raises(DomainError):
        Skeleton(t0=0.0, switch_times=[1.0, 1.0], initial_regime=Regime.PLUS)


def test_cycle_statistic_examples():
    s1 = Skeleton(0.0, [0.693147, 1.386294], Regime.PLUS)
    assert cycle_statistic(s1) == pytest.approx(1.386294)
    s2 = sample_skeleton(make_model(z0=Regime.MINUS), 1,
                         FixedUniformStream(0.5))
    assert cycle_statistic(s2) == pytest.approx(2.079442, abs=1e-6)
    s3 = Skeleton(0.0, [1.0, 2.0, 3.0, 4.0], Regime.PLUS)
    assert cycle_statistic(s3) == 2.0


def test_regime_alternation_reconstruction(unit_model):
    skel = sample_skeleton(unit_model, 5, PhiloxStream(3, 0))
    times = skel.times()
    probes = (times[:-1] + times[1:]) / 2.0
    expected = Regime.PLUS
    for t in probes:
        assert skel.regime_at(float(t)) is expected
        expected = Regime.MINUS if expected is Regime.PLUS else Regime.PLUS


def test_holding_time_distribution_ks():
    # plus holding times of a long skeleton vs Exp(lambda_plus), N = 1e5
    lam_plus = 1.7
    model = make_model(lambda_plus=lam_plus, drift_plus=1.0, r_plus=1.0)
    skel = sample_skeleton(model, 100000, PhiloxStream(2718, 0))
    legs = np.diff(np.concatenate([[0.0], skel.switch_times]))
    plus_legs = legs[0::2]
    assert plus_legs.size == 100000
    stat = scipy.stats.kstest(plus_legs, "expon",
                              args=(0, 1.0 / lam_plus)).statistic
    critical = 1.9495 / math.sqrt(plus_legs.size)  # alpha = 0.001
    assert stat < critical


def test_cycle_mean_and_variance():
    lp, lm, n = 1.0, 2.0, 100000
    model = make_model(lambda_plus=lp, lambda_minus=lm)
    skel = sample_skeleton(model, n, PhiloxStream(424242, 0))
    boundaries = skel.switch_times[1::2]
    cycles = np.diff(np.concatenate([[0.0], boundaries]))
    mean, var = cycles.mean(), cycles.var(ddof=1)
    target_mean = 1.0 / lp + 1.0 / lm
    target_var = 1.0 / lp ** 2 + 1.0 / lm ** 2
    se = math.sqrt(target_var / n)
    assert abs(mean - target_mean) < 4 * se
    assert abs(var - target_var) / target_var < 0.10


def test_skeleton_determinism(unit_model):
    a = sample_skeleton(unit_model, 50, PhiloxStream(9, 4))
    b = sample_skeleton(unit_model, 50, PhiloxStream(9, 4))
    assert a.t0 == b.t0
    assert np.array_equal(a.switch_times, b.switch_times)


def test_sample_skeleton_matches_cycle_kernel(unit_model):
    # the skeleton op and the batch kernel share the draw layout
    skel = sample_skeleton(unit_model, 7, PhiloxStream(55, 3))
    total = _kernels.cycle_time_totals(55, 3, 1, 7, 1.0, 1.0, False)[0]
    assert skel.switch_times[-1] == pytest.approx(total, rel=1e-13)


def test_skeleton_csv_export(tmp_path, unit_model):
    skel = sample_skeleton(unit_model, 2, PhiloxStream(1, 0))
    path = tmp_path / "skeleton.csv"
    skeleton_to_csv(skel, path)
    lines = path.read_text().strip().splitlines()
    assert lines[0] == "index,time,regime_after"
    rows = [line.split(",") for line in lines[1:]]
    assert [r[0] for r in rows] == ["0", "1", "2", "3", "4"]
    assert rows[0][1] == "0.0" and rows[0][2] == "plus"
    assert [r[2] for r in rows[1:]] == ["minus", "plus", "minus", "plus"]
    times = [float(r[1]) for r in rows]
    assert times == sorted(times)
    # repr round-trip: parsed times equal the skeleton's exactly
    assert times[1:] == [float(t) for t in skel.switch_times]


def test_lln_check_small_tolerance_dominates(unit_model):
    rep = lln_check(unit_model, 1, 10.0 * 2.0, PhiloxStream(0, 0))
    assert rep.verdict == VERDICT_CONSISTENT


def test_lln_check_large_n(unit_model):
    rep = lln_check(unit_model, 10 ** 6, 0.01, PhiloxStream(1234, 0))
    assert rep.verdict == VERDICT_CONSISTENT
    assert abs(rep.estimate.mean - 2.0) < 0.01


def test_lln_check_reports_deviation():
    model = make_model(lambda_plus=2.0, lambda_minus=3.0)
    rep = lln_check(model, 10 ** 5, 0.05, PhiloxStream(77, 0))
    assert rep.analytic == pytest.approx(5.0 / 6.0, rel=1e-15)
    assert rep.verdict == VERDICT_CONSISTENT


def test_lln_check_rejects_bad_tolerance(unit_model):
    with pytest.raises(DomainError):
        lln_check(unit_model, 10, 0.0, PhiloxStream(0, 0))
