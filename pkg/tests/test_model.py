"""Model validation and analytic constants."""

import math

import numpy as np
import pytest

from switchdiff import (Bounded, Constant, DomainError, ModelSpec,
                        ModelValidationError, Regime, analytic_constants,
                        collect_violations, stopped_moment_decay,
                        transience_condition, validate)

from conftest import make_model


def _codes(spec, **kw):
    return {v.code for v in collect_violations(spec, **kw)}


def test_valid_model_passes():
    m = validate(ModelSpec(lambda_plus=1, lambda_minus=2, drift_plus=1.0,
                           drift_minus=-1.0, r_plus=1, r_minus=1))
    assert m.lambda_plus == 1 and m.lambda_minus == 2
    assert m.sup_b_plus == 1.0 and m.sup_b_minus == 1.0
    assert m.has_constant_drifts


def test_zero_intensity_rejected():
    spec = ModelSpec(lambda_plus=0.0, lambda_minus=2, drift_plus=1.0,
                     drift_minus=-1.0, r_plus=1, r_minus=1)
    assert "NonPositiveIntensity" in _codes(spec)
    with pytest.raises(ModelValidationError):
        validate(spec)


def test_constant_drift_below_declared_bound_rejected():
    spec = ModelSpec(lambda_plus=1, lambda_minus=1, drift_plus=0.5,
                     drift_minus=-1.0, r_plus=1.0, r_minus=1.0)
    assert "BoundViolatedAtProbe" in _codes(spec)


def test_nonpositive_drift_bound_rejected():
    spec = ModelSpec(lambda_plus=1, lambda_minus=1, drift_plus=1.0,
                     drift_minus=-1.0, r_plus=-0.5, r_minus=1.0)
    assert "NonPositiveDriftBound" in _codes(spec)


def test_nan_field_rejected():
    spec = ModelSpec(lambda_plus=float("nan"), lambda_minus=1, drift_plus=1.0,
                     drift_minus=-1.0, r_plus=1, r_minus=1)
    assert _codes(spec) == {"NonFiniteField"}


def test_callable_drift_probed_on_grid():
    good = ModelSpec(lambda_plus=1, lambda_minus=1,
                     drift_plus=Bounded(lambda x: 1.0 + 0.5 * math.sin(x), 0.5),
                     drift_minus=-1.0, r_plus=0.5, r_minus=1.0,
                     sup_b_plus=1.5)
    assert collect_violations(good) == []
    bad = ModelSpec(lambda_plus=1, lambda_minus=1,
                    drift_plus=Bounded(lambda x: 1.0 + 0.5 * math.sin(x), 0.9),
                    drift_minus=-1.0, r_plus=0.9, r_minus=1.0,
                    sup_b_plus=1.5)
    assert "BoundViolatedAtProbe" in _codes(bad)


def test_callable_drift_requires_sup_bound():
    spec = ModelSpec(lambda_plus=1, lambda_minus=1,
                     drift_plus=Bounded(lambda x: 1.0, 1.0),
                     drift_minus=-1.0, r_plus=1.0, r_minus=1.0)
    assert "MissingSupBound" in _codes(spec)


def test_sup_bound_below_floor_rejected():
    spec = ModelSpec(lambda_plus=1, lambda_minus=1, drift_plus=1.0,
                     drift_minus=-1.0, r_plus=1.0, r_minus=1.0,
                     sup_b_plus=0.5)
    codes = _codes(spec)
    assert "InconsistentSupBound" in codes or "BoundViolatedAtProbe" in codes


def test_probe_grid_is_configurable():
    # violation only beyond the default +-100 window
    drift = Bounded(lambda x: 1.0 if abs(x) <= 150 else 0.0, 1.0)
    spec = ModelSpec(lambda_plus=1, lambda_minus=1, drift_plus=drift,
                     drift_minus=-1.0, r_plus=1.0, r_minus=1.0,
                     sup_b_plus=1.0)
    assert collect_violations(spec) == []
    assert "BoundViolatedAtProbe" in _codes(spec, probe_lo=-200, probe_hi=200)


def test_transience_condition_examples():
    assert transience_condition(1, 1, 1, 2) is True
    assert transience_condition(1, 1, 1, 1) is False  # equality is not strict
    assert transience_condition(0.5, 2, 0.1, 1) is True  # 0.25 > 0.1


def test_transience_condition_domain_errors():
    with pytest.raises(DomainError):
        transience_condition(0.0, 1, 1, 1)
    with pytest.raises(DomainError):
        transience_condition(1, 1, -2, 1)
    with pytest.raises(DomainError):
        transience_condition(1, float("inf"), 1, 1)


def test_analytic_constants_examples():
    assert analytic_constants(make_model(1, 1)).mean_cycle == 2.0
    m = make_model(lambda_plus=2.0, lambda_minus=3.0, drift_plus=1.0,
                   drift_minus=-1.0)
    assert analytic_constants(m).mean_cycle == pytest.approx(5.0 / 6.0,
                                                             rel=1e-15)
    m2 = make_model(lambda_plus=1.0, lambda_minus=2.0)
    c = analytic_constants(m2)
    # renewal-reward oracle: (r+/l+ - r-/l-) / (1/l+ + 1/l-)
    oracle = (1.0 / 1.0 - 1.0 / 2.0) / (1.0 / 1.0 + 1.0 / 2.0)
    assert c.velocity_star == pytest.approx(oracle, rel=1e-15)
    assert c.velocity_star == pytest.approx(1.0 / 3.0, rel=1e-15)
    assert c.transient is True
    assert c.time_weight_max == c.velocity_star
    assert c.rate_cap == min(c.mean_cycle, c.velocity_star)


def test_transient_iff_positive_velocity_property():
    rng = np.random.default_rng(12345)
    for _ in range(1000):
        rp, rm, lp, lm = rng.uniform(0.05, 5.0, size=4)
        cond = transience_condition(rp, lp, rm, lm)
        velocity = (lm * rp - lp * rm) / (lp + lm)
        assert cond == (velocity > 0)


def test_stopped_moment_decay_examples():
    coeff, in_window = stopped_moment_decay(0.0, 1.0, 0.2, 1.0, 1.0)
    assert coeff == pytest.approx(0.8, rel=1e-15)
    assert in_window is False  # window is open at 0
    # at the window edge the coefficient vanishes
    coeff_edge, _ = stopped_moment_decay(0.5, 1.0, 0.0, 1.0, 1.0)
    assert coeff_edge == pytest.approx(0.0, abs=1e-15)
    # at 0 the coefficient reduces to r+/l+ - r-/l-
    coeff0, _ = stopped_moment_decay(0.0, 1.3, 0.4, 2.0, 5.0)
    assert coeff0 == pytest.approx(1.3 / 2.0 - 0.4 / 5.0, rel=1e-15)
    _, inside = stopped_moment_decay(0.2, 1.0, 0.2, 1.0, 1.0)
    assert inside is True  # 0 < 0.2 < 0.4


def test_stopped_moment_decay_slope_by_finite_differences():
    rng = np.random.default_rng(7)
    for _ in range(50):
        rp, rm, lp, lm = rng.uniform(0.1, 4.0, size=4)
        w = rng.uniform(0.0, 1.0)
        h = 1e-4
        up, _ = stopped_moment_decay(w + h, rp, rm, lp, lm)
        dn, _ = stopped_moment_decay(w - h, rp, rm, lp, lm)
        fd = (up - dn) / (2 * h)
        expected = -(1.0 / lp + 1.0 / lm)
        assert abs(fd - expected) / abs(expected) < 1e-8


def test_analytic_constants_is_pure():
    m = make_model(lambda_plus=1.7, lambda_minus=0.9, drift_plus=2.0,
                   drift_minus=-0.3, r_plus=2.0, r_minus=0.3)
    a, b = analytic_constants(m), analytic_constants(m)
    assert a == b  # bit-identical fields


def test_drift_coercion_and_regime_enum():
    spec = ModelSpec(lambda_plus=1, lambda_minus=1, drift_plus=1,
                     drift_minus=-1, r_plus=1, r_minus=1, z0="minus")
    assert spec.drift_plus == Constant(1.0)
    assert spec.z0 is Regime.MINUS
    assert validate(spec).starts_minus
