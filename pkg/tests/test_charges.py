"""Charge integrands and normalized invariants against closed-form oracles."""

import numpy as np
import pytest

from asymflux.catalog import MetricSpec, background_of, deviation_jet, metric_jet
from asymflux.charges import (adm_integrand, ah_mass, ah_ricci_charge,
                              center_integrand, classical_center,
                              classical_mass, einstein_flux, michel_flux,
                              michel_integrand, michel_integrand_deviation,
                              ricci_center, ricci_mass, rt_diagnostics)
from asymflux.errors import ChartMismatchError, ZeroMassError
from asymflux.fields import conformal_killing, kernel_function
from asymflux.geometry import ScalarJet, SymTensorJet
from asymflux.quadrature import omega, sphere_rule

RNG = np.random.default_rng(42)
FLAT_RADII = 8.0 * 2.0 ** np.arange(5)
HYP_S = 3.0 + 0.75 * np.arange(5)


def random_deviation(count, n):
    value = RNG.normal(size=(count, n, n)) * 0.1
    value = value + np.swapaxes(value, -1, -2)
    d = RNG.normal(size=(count, n, n, n)) * 0.1
    d = d + np.swapaxes(d, -1, -2)
    return SymTensorJet(value, d)


def flat_bjet(x):
    from asymflux.catalog import metric_jet
    return metric_jet(MetricSpec("euclidean", x.shape[-1]), x)


# --------------------------------------------------- integrand specialization

def test_michel_specializes_to_adm():
    """With V = 1 over a flat background, the general charge integrand is the
    classical mass integrand."""
    n = 3
    x = RNG.normal(size=(100, n)) * 4.0
    nu = RNG.normal(size=(100, n))
    nu /= np.linalg.norm(nu, axis=-1, keepdims=True)
    eps = random_deviation(100, n)
    V = kernel_function("const_one", n).scalar_jet(x)
    general = michel_integrand_deviation(V, eps, flat_bjet(x), nu)
    classical = adm_integrand(eps, nu)
    scale = np.max(np.abs(classical)) + 1.0
    assert np.max(np.abs(general - classical)) < 1e-12 * scale


@pytest.mark.parametrize("alpha", [0, 1, 2])
def test_michel_specializes_to_center(alpha):
    n = 3
    x = RNG.normal(size=(100, n)) * 4.0
    nu = RNG.normal(size=(100, n))
    nu /= np.linalg.norm(nu, axis=-1, keepdims=True)
    eps = random_deviation(100, n)
    V = kernel_function("coordinate", n, alpha=alpha).scalar_jet(x)
    general = michel_integrand_deviation(V, eps, flat_bjet(x), nu)
    classical = center_integrand(eps, alpha, x, nu)
    scale = np.max(np.abs(classical)) + 1.0
    assert np.max(np.abs(general - classical)) < 1e-12 * scale


def test_full_jets_agree_with_deviation_path():
    spec = MetricSpec("schwarzschild_conformal", 3, m=1.0)
    x = RNG.normal(size=(20, 3)) * 2.0 + np.array([8.0, 0, 0])
    nu = x / np.linalg.norm(x, axis=-1, keepdims=True)
    V = kernel_function("const_one", 3).scalar_jet(x)
    a = michel_integrand(V, metric_jet(spec, x),
                         metric_jet(background_of(spec), x), nu)
    b = michel_integrand_deviation(V, deviation_jet(spec, x),
                                   metric_jet(background_of(spec), x), nu)
    assert np.allclose(a, b, atol=1e-12)


# ------------------------------------------------------------ flat charges

@pytest.mark.parametrize("n,m", [(3, 1.0), (3, 2.5), (4, 1.0), (5, 2.5)])
def test_classical_flux_closed_form(n, m):
    """Conformal Schwarzschild: normalized flux at radius r is exactly
    m (1 + m/(2 r^{n-2}))^{(6-n)/(n-2)}."""
    spec = MetricSpec("schwarzschild_conformal", n, m=m)
    rule = sphere_rule(n, 12)
    series = classical_mass(spec, FLAT_RADII, rule)
    q = 4.0 / (n - 2)
    for s in series.samples:
        u = 1.0 + m / (2.0 * s.r ** (n - 2))
        assert s.normalized == pytest.approx(m * u ** (q - 1), rel=1e-12)
    assert series.limit == pytest.approx(m, rel=1e-3)


@pytest.mark.parametrize("n,m", [(3, 1.0), (4, 2.5)])
def test_ricci_mass_closed_form(n, m):
    spec = MetricSpec("schwarzschild_conformal", n, m=m)
    series = ricci_mass(spec, FLAT_RADII, sphere_rule(n, 12))
    assert series.limit == pytest.approx(m, rel=1e-10)


def test_measure_choice_does_not_change_the_limit():
    spec = MetricSpec("schwarzschild_conformal", 3, m=1.0)
    rule = sphere_rule(3, 12)
    bg = classical_mass(spec, FLAT_RADII, rule, measure="background")
    mg = classical_mass(spec, FLAT_RADII, rule, measure="metric")
    assert bg.limit == pytest.approx(1.0, abs=2e-3)
    assert mg.limit == pytest.approx(1.0, abs=3e-3)


def test_centers_recover_translation():
    c = (1.0, -0.5, 0.25)
    spec = MetricSpec("schwarzschild_conformal", 3, m=1.0, center=c)
    rule = sphere_rule(3, 12)
    mass = classical_mass(spec, FLAT_RADII, rule).limit
    for a in range(3):
        cc = classical_center(spec, a, FLAT_RADII, rule, mass)
        rc = ricci_center(spec, a, FLAT_RADII, rule, mass)
        assert cc.limit == pytest.approx(c[a], abs=5e-3)
        assert rc.limit == pytest.approx(c[a], abs=5e-3)


def test_euclidean_charges_vanish():
    spec = MetricSpec("euclidean", 3)
    rule = sphere_rule(3, 8)
    assert classical_mass(spec, FLAT_RADII, rule).limit == 0.0
    assert ricci_mass(spec, FLAT_RADII, rule).limit == pytest.approx(0.0,
                                                                     abs=1e-13)


def test_zero_mass_center_rejected():
    spec = MetricSpec("euclidean", 3)
    rule = sphere_rule(3, 8)
    with pytest.raises(ZeroMassError):
        classical_center(spec, 0, FLAT_RADII, rule, mass=0.0)
    with pytest.raises(ZeroMassError):
        ricci_center(spec, 0, FLAT_RADII, rule, mass=1e-14)


def test_type_mismatches_rejected():
    rule = sphere_rule(3, 8)
    with pytest.raises(ChartMismatchError):
        classical_mass(MetricSpec("kottler", 3, m=1.0), np.sinh(HYP_S), rule)
    with pytest.raises(ChartMismatchError):
        ah_mass(MetricSpec("euclidean", 3), 0, FLAT_RADII, rule)


def test_radius_schedule_validation():
    spec = MetricSpec("euclidean", 3)
    rule = sphere_rule(3, 8)
    with pytest.raises(ValueError):
        classical_mass(spec, [8.0, 16.0], rule)
    with pytest.raises(ValueError):
        classical_mass(spec, [8.0, 4.0, 16.0], rule)


# ------------------------------------------------------- hyperbolic charges

@pytest.mark.parametrize("n,m", [(3, 1.0), (3, 2.0), (4, 1.0)])
def test_kottler_mass(n, m):
    spec = MetricSpec("kottler", n, m=m)
    rule = sphere_rule(n, 14)
    series = ah_mass(spec, 0, np.sinh(HYP_S), rule)
    assert series.limit == pytest.approx(m, rel=1e-6)
    # the finite-radius correction decays monotonically
    gaps = np.abs(series.values - m)
    assert np.all(np.diff(gaps) < 0)


def test_kottler_ricci_charge(n=3, m=1.0):
    spec = MetricSpec("kottler", n, m=m)
    series = ah_ricci_charge(spec, 0, np.sinh(HYP_S), sphere_rule(n, 14))
    assert series.limit == pytest.approx(m, rel=1e-6)


def test_kottler_vector_charges_vanish():
    spec = MetricSpec("kottler", 3, m=1.0)
    rule = sphere_rule(3, 14)
    for i in (1, 2, 3):
        assert abs(ah_mass(spec, i, np.sinh(HYP_S), rule).limit) < 1e-10
        assert abs(ah_ricci_charge(spec, i, np.sinh(HYP_S), rule).limit) < 1e-8


def test_geodesic_chart_agrees_with_area_chart():
    """The same hyperbolic-background charge in both polar charts."""
    pert = "0.5 * exp(-3*r)"
    ga = MetricSpec("perturbation", 3,
                    base=MetricSpec("hyperbolic_polar", 3),
                    components={(0, 0): pert})
    rule = sphere_rule(3, 12)
    series = ah_mass(ga, 0, HYP_S, rule)
    pert_rho = "0.5 * exp(-3*log(r + sqrt(1 + r^2))) / (1 + r^2)"
    gb = MetricSpec("perturbation", 3,
                    base=MetricSpec("hyperbolic_area", 3),
                    components={(0, 0): pert_rho})
    series_b = ah_mass(gb, 0, np.sinh(HYP_S), rule)
    assert series_b.limit == pytest.approx(series.limit, rel=1e-8, abs=1e-10)


# -------------------------------------------------------------- diagnostics

def test_rt_diagnostics_translated():
    spec = MetricSpec("schwarzschild_conformal", 3, m=1.0,
                      center=(1.0, 0.5, 0.0))
    rep = rt_diagnostics(spec, FLAT_RADII, sphere_rule(3, 10))
    assert not rep.even
    assert rep.expected == pytest.approx(2.0)
    assert rep.exponent == pytest.approx(2.0, abs=0.3)
    assert rep.status == "pass"


def test_rt_diagnostics_even_metric():
    rep = rt_diagnostics(MetricSpec("schwarzschild_conformal", 3, m=1.0),
                         FLAT_RADII, sphere_rule(3, 10))
    assert rep.even
    assert rep.status == "pass"


# --------------------------------------------------------------- raw fluxes

def test_einstein_flux_orientation():
    spec = MetricSpec("schwarzschild_conformal", 3, m=1.0)
    X = conformal_killing("dilation", 3)
    rule = sphere_rule(3, 12)
    s = einstein_flux(spec, X, 16.0, rule)
    # normalization: raw flux = -(n-1)(n-2) omega m at leading order
    assert s.raw_flux == pytest.approx(-2.0 * omega(3) * 1.0, rel=1e-6)


def test_michel_flux_quad_error_is_small():
    spec = MetricSpec("schwarzschild_conformal", 3, m=1.0)
    V = kernel_function("const_one", 3)
    res = michel_flux(spec, V, 16.0, sphere_rule(3, 12))
    assert res.error_estimate < 1e-10 * max(abs(res.value), 1.0)
