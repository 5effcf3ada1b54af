"""Metric catalog: closed-form jets, deviations, chart transfers, domains."""

import numpy as np
import pytest

from asymflux.catalog import (MetricSpec, background_of, chart_transfer,
                              deviation_jet, metric_jet, transfer_metric_jet)
from asymflux.errors import DomainError
from asymflux.geometry import ChartKind, ChartPoint, curvature

RNG = np.random.default_rng(11)


def polar_points(n, count, rlo=0.5, rhi=3.0):
    pts = np.empty((count, n))
    pts[:, 0] = RNG.uniform(rlo, rhi, count)
    pts[:, 1:n - 1] = RNG.uniform(0.4, np.pi - 0.4, (count, n - 2))
    pts[:, n - 1] = RNG.uniform(0, 2 * np.pi, count)
    return pts


# ----------------------------------------------------------------- closed forms

def test_euclidean_jet():
    jet = metric_jet(MetricSpec("euclidean", 4), RNG.normal(size=(5, 4)))
    assert np.allclose(jet.g, np.eye(4))
    assert np.allclose(jet.dg, 0.0)
    assert np.allclose(jet.ddg, 0.0)


def test_schwarzschild_conformal_value():
    # n=3: g_11(10,0,0) = (1 + m/(2*10))^4 with m=1
    jet = metric_jet(MetricSpec("schwarzschild_conformal", 3, m=1.0),
                     np.array([10.0, 0.0, 0.0]))
    assert jet.g[0, 0] == pytest.approx(1.05**4, rel=1e-14)
    assert np.allclose(jet.g, jet.g[0, 0] * np.eye(3))


@pytest.mark.parametrize("n", [3, 4, 5])
def test_schwarzschild_conformal_scalar_flat(n):
    spec = MetricSpec("schwarzschild_conformal", n, m=1.5)
    pts = RNG.normal(size=(10, n)) * 2.0
    pts[:, 0] += 8.0
    bun = curvature(metric_jet(spec, pts))
    assert np.max(np.abs(bun.scal)) < 1e-10


@pytest.mark.parametrize("n,m", [(3, 1.0), (4, 2.0)])
def test_kottler_scalar_curvature(n, m):
    spec = MetricSpec("kottler", n, m=m)
    pts = polar_points(n, 10, rlo=3.0, rhi=8.0)
    bun = curvature(metric_jet(spec, pts))
    assert np.allclose(bun.scal, -n * (n - 1), atol=1e-10)


def test_kottler_mass_zero_is_hyperbolic():
    pts = polar_points(3, 6, rlo=1.0, rhi=4.0)
    a = metric_jet(MetricSpec("kottler", 3, m=0.0), pts)
    b = metric_jet(MetricSpec("hyperbolic_area", 3), pts)
    assert np.allclose(a.g, b.g)
    assert np.allclose(a.dg, b.dg)
    assert np.allclose(a.ddg, b.ddg)


def test_translated_schwarzschild():
    c = (1.0, -2.0, 0.5)
    spec = MetricSpec("schwarzschild_conformal", 3, m=1.0, center=c)
    x = np.array([7.0, 1.0, 2.0])
    shifted = metric_jet(spec, x)
    centered = metric_jet(MetricSpec("schwarzschild_conformal", 3, m=1.0),
                          x - np.array(c))
    assert np.allclose(shifted.g, centered.g)
    assert np.allclose(shifted.dg, centered.dg)


# ------------------------------------------------------------------- domains

def test_schwarzschild_excised_region():
    spec = MetricSpec("schwarzschild_conformal", 3, m=2.0)
    with pytest.raises(DomainError):
        metric_jet(spec, np.array([0.0, 0.0, 0.0]))


def test_kottler_horizon_rejected():
    spec = MetricSpec("kottler", 3, m=1.0)
    with pytest.raises(DomainError):
        metric_jet(spec, np.array([0.5, 1.0, 1.0]))  # f(rho) <= 0 inside


def test_polar_radial_domain():
    with pytest.raises(DomainError):
        metric_jet(MetricSpec("hyperbolic_polar", 3),
                   np.array([-1.0, 1.0, 1.0]))


# ------------------------------------------------------------- deviation jets

@pytest.mark.parametrize("kind,n,pts_fn", [
    ("schwarzschild_conformal", 3, lambda: RNG.normal(size=(6, 3)) * 3 + 9),
    ("kottler", 3, lambda: polar_points(3, 6, 3.0, 8.0)),
    ("kottler", 4, lambda: polar_points(4, 6, 3.0, 8.0)),
])
def test_deviation_matches_subtraction(kind, n, pts_fn):
    spec = MetricSpec(kind, n, m=1.0)
    pts = pts_fn()
    eps = deviation_jet(spec, pts)
    g = metric_jet(spec, pts)
    b = metric_jet(background_of(spec), pts)
    assert np.allclose(eps.value, g.g - b.g, atol=1e-12)
    assert np.allclose(eps.d, g.dg - b.dg, atol=1e-12)


def test_deviation_stable_at_huge_radius():
    """The closed-form deviation keeps relative accuracy where naive
    subtraction would cancel to noise."""
    spec = MetricSpec("kottler", 3, m=1.0)
    pts = np.array([[1e10, 1.2, 0.7]])
    eps = deviation_jet(spec, pts)
    rho = pts[0, 0]
    expected = 2.0 / rho / ((1 + rho**2 - 2 / rho) * (1 + rho**2))
    assert eps.value[0, 0, 0] == pytest.approx(expected, rel=1e-12)


def test_decay_scaling_property():
    # frame-rescaled schwarzschild deviation scales like 2m/r in n=3
    spec = MetricSpec("schwarzschild_conformal", 3, m=1.0)
    for r in (1e2, 1e4, 1e6):
        eps = deviation_jet(spec, np.array([r, 0.0, 0.0]))
        # leading order 2m/r with an O(1/r^2) correction
        assert abs(eps.value[0, 0] * r / 2.0 - 1.0) < 4.0 / r


# ------------------------------------------------------------ chart transfer

def test_chart_transfer_roundtrip():
    p = ChartPoint(polar_points(3, 5), ChartKind.POLAR_GEODESIC)
    q = chart_transfer(p, ChartKind.POLAR_AREA)
    assert np.allclose(q.coords[:, 0], np.sinh(p.coords[:, 0]))
    back = chart_transfer(q, ChartKind.POLAR_GEODESIC)
    assert np.allclose(back.coords, p.coords, atol=1e-14)


def test_transfer_metric_jet_exact():
    """Pushing the geodesic-chart hyperbolic jet to the area chart reproduces
    the area-chart closed form, including second derivatives."""
    pts = polar_points(3, 6, rlo=0.8, rhi=2.5)
    src = metric_jet(MetricSpec("hyperbolic_polar", 3), pts)
    moved = transfer_metric_jet(src, ChartKind.POLAR_AREA)
    target = metric_jet(MetricSpec("hyperbolic_area", 3), moved.point.coords)
    assert np.allclose(moved.g, target.g, atol=1e-12)
    assert np.allclose(moved.dg, target.dg, atol=1e-12)
    assert np.allclose(moved.ddg, target.ddg, atol=1e-11)


# ------------------------------------------- perturbation/expression metrics

def test_expression_metric_jet():
    comps = {(i, j): "1 + 1/r^2" if i == j else "0"
             for i in range(3) for j in range(3) if i <= j}
    spec = MetricSpec("expression", 3, components=comps)
    x = np.array([2.0, 1.0, -1.0])
    jet = metric_jet(spec, x)
    r2 = np.dot(x, x)
    assert np.allclose(np.diag(jet.g), 1 + 1 / r2)
    eps = deviation_jet(spec, x)
    assert np.allclose(eps.value, jet.g - np.eye(3), atol=1e-14)


def test_perturbation_metric():
    base = MetricSpec("euclidean", 3)
    spec = MetricSpec("perturbation", 3, base=base,
                      components={(0, 0): "2/r"})
    x = np.array([4.0, 0.0, 3.0])
    jet = metric_jet(spec, x)
    assert jet.g[0, 0] == pytest.approx(1.0 + 2.0 / 5.0)
    assert jet.g[1, 1] == pytest.approx(1.0)


def test_perturbation_with_params():
    spec = MetricSpec("perturbation", 3, base=MetricSpec("euclidean", 3),
                      components={(0, 0): "aa/r"}, params={"aa": 3.0})
    jet = metric_jet(spec, np.array([2.0, 0.0, 0.0]))
    assert jet.g[0, 0] == pytest.approx(2.5)


def test_spec_validation():
    with pytest.raises(ValueError):
        MetricSpec("no_such_metric", 3)
    with pytest.raises(ValueError):
        MetricSpec("euclidean", 2)
    with pytest.raises(ValueError):
        MetricSpec("perturbation", 3)  # missing base
