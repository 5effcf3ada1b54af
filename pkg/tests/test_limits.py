"""Radial extrapolation and decay-rate regression on synthetic and catalog data."""

import numpy as np
import pytest

from asymflux.catalog import MetricSpec
from asymflux.errors import ExtrapolationError
from asymflux.limits import decay_rate, extrapolate, fit_decay_exponent


def test_pure_power_series():
    r = np.array([8.0, 16.0, 32.0, 64.0, 128.0])
    v = 1.0 + 3.0 / r
    limit, err, model = extrapolate(r, v, mode="power")
    assert limit == pytest.approx(1.0, abs=1e-10)
    assert model["sigma"] == pytest.approx(1.0, rel=1e-6)


def test_pure_exponential_series():
    r = np.array([3.0, 4.0, 5.0, 6.0])
    v = 2.0 + 3.0 * np.exp(-2.0 * r)
    limit, err, model = extrapolate(r, v, mode="exp")
    assert limit == pytest.approx(2.0, abs=1e-9)
    assert model["sigma"] == pytest.approx(2.0, rel=1e-4)


def test_constant_series():
    r = np.array([1.0, 2.0, 3.0])
    limit, err, model = extrapolate(r, np.full(3, 5.0), mode="power")
    assert limit == 5.0
    assert err == 0.0


def test_mixed_decay_error_bound():
    """Recovered limit within 10x the first neglected term at the top radius."""
    r = 8.0 * 2.0 ** np.arange(5)
    v = 1.0 + 1.0 / r + 0.5 / r**2
    limit, err, _ = extrapolate(r, v, mode="power")
    neglected = 0.5 / r[-1] ** 2
    assert abs(limit - 1.0) <= 10.0 * neglected


def test_drop_largest_within_reported_error():
    """Rerunning without the largest radius moves the limit less than the
    reported error, on representative catalog-like series."""
    r = 8.0 * 2.0 ** np.arange(5)
    for v in (1.0 + 2.0 / r + 1.0 / r**1.7,
              0.5 - 1.0 / r**2 + 0.3 / r**3):
        full, err, _ = extrapolate(r, v, mode="power")
        trunc, _, _ = extrapolate(r[:-1], v[:-1], mode="power")
        assert abs(full - trunc) <= err * (1 + 1e-9)


def test_sigma_hint():
    r = np.array([2.0, 3.0, 4.0, 5.0])
    v = 7.0 - 4.0 * np.exp(-1.5 * r)
    limit, _, model = extrapolate(r, v, mode="exp", sigma_hint=1.5)
    assert limit == pytest.approx(7.0, abs=1e-12)
    assert model["sigma"] == 1.5


def test_quad_errors_floor_the_estimate():
    r = np.array([8.0, 16.0, 32.0, 64.0])
    v = 1.0 + 1.0 / r
    _, err, _ = extrapolate(r, v, quad_errors=[1e-3] * 4, mode="power")
    assert err >= 1e-3


def test_input_validation():
    with pytest.raises(ExtrapolationError):
        extrapolate([1.0, 2.0], [0.0, 0.0])
    with pytest.raises(ExtrapolationError):
        extrapolate([1.0, 3.0, 2.0], [0.0, 0.0, 0.0])
    with pytest.raises(ExtrapolationError):
        extrapolate([1.0, 2.0, 3.0], [0.0, 1.0, 2.0], mode="nope")


def test_fit_decay_exponent():
    r = np.array([10.0, 20.0, 40.0, 80.0])
    assert fit_decay_exponent(r, 5.0 / r**1.5, "power") == pytest.approx(1.5)
    s = np.array([3.0, 4.0, 5.0])
    assert fit_decay_exponent(s, np.exp(-2 * s), "exp") == pytest.approx(2.0)
    assert fit_decay_exponent(r, np.zeros(4), "power") == np.inf


# ----------------------------------------------------------- catalog decay

def test_decay_rate_schwarzschild():
    radii = 8.0 * 2.0 ** np.arange(5)
    rep = decay_rate(MetricSpec("schwarzschild_conformal", 3, m=1.0), radii)
    assert rep.tau_hat == pytest.approx(1.0, abs=0.1)
    assert rep.threshold == 0.5
    assert rep.satisfied


def test_decay_rate_kottler_geodesic_scale():
    s = 3.0 + 0.75 * np.arange(5)
    rep = decay_rate(MetricSpec("kottler", 3, m=1.0), np.sinh(s))
    assert rep.scale == "exp"
    assert rep.tau_hat == pytest.approx(3.0, abs=0.05)
    assert rep.threshold == 1.5


def test_decay_rate_background_is_infinite():
    rep = decay_rate(MetricSpec("euclidean", 3), [8.0, 16.0, 32.0])
    assert rep.tau_hat == np.inf
    assert rep.satisfied
