"""Shared fixtures: stub streams, model builders, independent oracles."""

import math

import numpy as np
import pytest
from scipy import integrate, stats

from switchdiff import ModelSpec, Regime, validate


class FixedUniformStream:
    """Stub stream returning one pinned uniform forever; normals are real
    Box-Muller of that uniform only if ever requested."""

    def __init__(self, u=0.5):
        self.u = u

    def uniform(self):
        return self.u


class ZeroNoiseStream:
    """Stub stream whose Gaussians are all exactly zero."""

    def normal(self):
        return 0.0


class ListStream:
    """Stub stream replaying explicit uniform/normal sequences."""

    def __init__(self, uniform_values=(), normal_values=()):
        self._u = list(uniform_values)
        self._n = list(normal_values)

    def uniform(self):
        return self._u.pop(0)

    def normal(self):
        return self._n.pop(0)


def make_model(lambda_plus=1.0, lambda_minus=1.0, drift_plus=1.0,
               drift_minus=-1.0, r_plus=1.0, r_minus=1.0, x0=0.0,
               z0=Regime.PLUS, **kw):
    return validate(ModelSpec(
        lambda_plus=lambda_plus, lambda_minus=lambda_minus,
        drift_plus=drift_plus, drift_minus=drift_minus,
        r_plus=r_plus, r_minus=r_minus, x0=x0, z0=z0, **kw))


def _expectation_quad(s, logpdf):
    def f(t):
        a = s * t + logpdf(t)
        return 0.0 if a < -700.0 else math.exp(a)

    val, _ = integrate.quad(f, 0, np.inf, limit=200)
    return val


def mgf_total_time_quad(s, n, lam_plus, lam_minus, start_minus=True):
    """E exp(s * T_{2n}) by adaptive quadrature of the component densities.

    T_{2n} is Exp(lam_minus) (when starting in minus) plus Gamma(n, lam_plus)
    plus Gamma(n, lam_minus); the expectation factorizes by independence and
    each factor is integrated numerically, independent of any closed form.
    """
    total = 1.0
    if start_minus:
        total *= _expectation_quad(s, stats.expon(scale=1.0 / lam_minus).logpdf)
    if n > 0:
        for rate in (lam_plus, lam_minus):
            total *= _expectation_quad(
                s, stats.gamma(a=n, scale=1.0 / rate).logpdf)
    return total


def deficit_oracle(lam, n, cycle_mean, lam_plus, lam_minus, start_minus=True):
    return math.exp(lam * cycle_mean * n) * mgf_total_time_quad(
        -lam, n, lam_plus, lam_minus, start_minus)


def excess_oracle(lam, n, cycle_mean, lam_plus, lam_minus, start_minus=True):
    return math.exp(-lam * cycle_mean * n) * mgf_total_time_quad(
        lam, n, lam_plus, lam_minus, start_minus)


@pytest.fixture
def unit_model():
    """lambda_plus = lambda_minus = 1, drifts +1/-1 at their bounds."""
    return make_model()
