"""Boundary integrands and normalized asymptotic charges.

Implements the general charge integrand pairing a kernel function with the
deviation ``eps = g - b`` from the background,

    U(V, g, b) = V (-delta^b eps - d tr_b eps) + tr_b(eps) dV - eps(grad_b V, .),

its classical specializations (mass with V = 1, center of mass with
V = x^alpha), the Einstein-tensor flux charges paired with conformal Killing
fields, and the hyperbolic-mass functional.  The deviation is evaluated by
the catalog's stable closed forms so that fluxes remain accurate at radii
where ``g - b`` underflows a naive subtraction.

Charge normalizations (exact constants):

* mass:              1 / (2 (n-1) omega_{n-1})
* center of mass:    1 / (2 (n-1) omega_{n-1} m)
* Ricci mass:       -1 / ((n-1)(n-2) omega_{n-1})
* Ricci center:     +1 / (2 (n-1)(n-2) omega_{n-1} m)
* hyperbolic mass:   1 / (2 (n-1) omega_{n-1}); Ricci version as the flat one.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .catalog import (MetricSpec, background_of, deviation_jet, metric_jet,
                      round_sphere_det)
from .errors import ChartMismatchError, DomainError, ZeroMassError
from .fields import (ConformalKilling, KernelFunction, kernel_basis,
                     kernel_function, killing_basis)
from .geometry import (ChartKind, MetricJet, ScalarJet, SymTensorJet,
                       christoffel, divergence_symmetric2, inverse_metric)
from .limits import FluxSample, RadialSeries, extrapolate, fit_decay_exponent
from .quadrature import QuadratureResult, SphereRule, integrate_sphere, omega

__all__ = [
    "michel_integrand", "michel_integrand_deviation", "adm_integrand",
    "center_integrand", "classical_mass", "classical_center", "einstein_flux",
    "ricci_mass", "ricci_center", "ah_mass", "ah_ricci_charge",
    "rt_diagnostics", "RTReport", "mass_normalization", "ricci_mass_normalization",
    "fit_radii", "decay_mode",
]

_MASS_FLOOR = 1e-12


def mass_normalization(n: int) -> float:
    return 1.0 / (2.0 * (n - 1) * omega(n))


def ricci_mass_normalization(n: int) -> float:
    return -1.0 / ((n - 1) * (n - 2) * omega(n))


# --------------------------------------------------------------- integrands

def michel_integrand_deviation(V: ScalarJet, eps: SymTensorJet,
                               b_jet: MetricJet, nu: np.ndarray) -> np.ndarray:
    """Charge integrand ``U(V, g, b)(nu)`` from the deviation ``eps = g - b``.

    ``U`` is linear in the deviation, so passing the closed-form jet of
    ``g - b`` avoids the catastrophic cancellation of subtracting two nearly
    equal metrics at large radii.
    """
    binv = inverse_metric(b_jet.g)
    Gamma = christoffel(b_jet, binv)

    class _Bundle:  # just enough for divergence_symmetric2
        pass

    bundle = _Bundle()
    bundle.ginv, bundle.christoffel = binv, Gamma
    delta_eps = divergence_symmetric2(b_jet, eps, bundle)     # paper-sign delta

    tr_eps = np.einsum("...ij,...ij->...", binv, eps.value)
    dbinv = -np.einsum("...ia,...kab,...bj->...kij", binv, b_jet.dg, binv)
    dtr = (np.einsum("...kij,...ij->...k", dbinv, eps.value)
           + np.einsum("...ij,...kij->...k", binv, eps.d))

    gradV = np.einsum("...ij,...j->...i", binv, V.grad)
    one_form = (V.value[..., None] * (-delta_eps - dtr)
                + tr_eps[..., None] * V.grad
                - np.einsum("...ij,...i->...j", eps.value, gradV))
    return np.einsum("...j,...j->...", one_form, nu)


def michel_integrand(V: ScalarJet, g_jet: MetricJet, b_jet: MetricJet,
                     nu: np.ndarray) -> np.ndarray:
    """``U(V, g, b)(nu)`` from full metric jets (subtracts the jets)."""
    if g_jet.point.chart_kind != b_jet.point.chart_kind:
        raise ChartMismatchError("g and b jets live in different charts")
    eps = SymTensorJet(g_jet.g - b_jet.g, g_jet.dg - b_jet.dg)
    return michel_integrand_deviation(V, eps, b_jet, nu)


def adm_integrand(eps: SymTensorJet, nu: np.ndarray) -> np.ndarray:
    """Flat-chart mass integrand ``(d_i eps_ij - d_j eps_ii) nu^j``."""
    div = np.einsum("...iij->...j", eps.d)
    dtr = np.einsum("...jii->...j", eps.d)
    return np.einsum("...j,...j->...", div - dtr, nu)


def center_integrand(eps: SymTensorJet, alpha: int, points: np.ndarray,
                     nu: np.ndarray) -> np.ndarray:
    """Flat-chart center integrand for the coordinate function x^alpha."""
    div = np.einsum("...iij->...j", eps.d)
    dtr = np.einsum("...jii->...j", eps.d)
    xa = points[..., alpha]
    one_form = xa[..., None] * (div - dtr) - eps.value[..., alpha, :]
    tr = np.einsum("...ii->...", eps.value)
    contr = np.einsum("...j,...j->...", one_form, nu)
    return contr + tr * nu[..., alpha]


# ------------------------------------------------- normals and area elements

def _background_normal(points: np.ndarray, chart_kind: ChartKind, r: float):
    nu = np.zeros_like(points)
    if chart_kind == ChartKind.CARTESIAN:
        nu[:] = points / r
    elif chart_kind == ChartKind.POLAR_GEODESIC:
        nu[..., 0] = 1.0
    else:  # area chart: b_rr = 1/(1+rho^2)
        nu[..., 0] = np.sqrt(1.0 + points[..., 0] ** 2)
    return nu


def _radial_conormal(points: np.ndarray, chart_kind: ChartKind, r: float):
    w = np.zeros_like(points)
    if chart_kind == ChartKind.CARTESIAN:
        w[:] = points / r
    else:
        w[..., 0] = 1.0
    return w


def _metric_normal(jet: MetricJet, points, chart_kind, r):
    ginv = inverse_metric(jet.g)
    w = _radial_conormal(points, chart_kind, r)
    raised = np.einsum("...ij,...j->...i", ginv, w)
    norm = np.sqrt(np.einsum("...i,...i->...", w, raised))
    return raised / norm[..., None], ginv, w


def _background_area(points, chart_kind, r):
    n = points.shape[-1]
    if chart_kind == ChartKind.CARTESIAN:
        return np.full(points.shape[:-1], float(r) ** (n - 1))
    if chart_kind == ChartKind.POLAR_GEODESIC:
        return np.full(points.shape[:-1], np.sinh(r) ** (n - 1))
    return np.full(points.shape[:-1], float(r) ** (n - 1))


def _metric_area(jet: MetricJet, points, chart_kind, r):
    """Area element of S_r in the metric measure, relative to the round sphere.

    Uses ``dA_g = sqrt(det g) |grad r|_g dV_coord/dr``: no explicit embedding
    Jacobian needed.
    """
    detg = np.linalg.det(jet.g)
    ginv = inverse_metric(jet.g)
    w = _radial_conormal(points, chart_kind, r)
    gradnorm = np.sqrt(np.einsum("...ij,...i,...j->...", ginv, w, w))
    if chart_kind == ChartKind.CARTESIAN:
        coord_factor = float(r) ** (points.shape[-1] - 1)
    else:
        coord_factor = 1.0 / np.sqrt(round_sphere_det(points[..., 1:]))
    return np.sqrt(detg) * gradnorm * coord_factor


def _unit_jacobian(rule, r):
    return 1.0


# --------------------------------------------------------------- flux drivers

def michel_flux(spec: MetricSpec, V: KernelFunction, r: float, rule: SphereRule,
                measure: str = "background", nthreads=None) -> QuadratureResult:
    """Raw flux of the charge integrand ``U(V, g, b)`` over S_r."""
    chart = spec.chart_kind
    bspec = background_of(spec)

    def f(points):
        b_jet = metric_jet(bspec, points)
        eps = deviation_jet(spec, points)
        vjet = V.scalar_jet(points)
        if measure == "background":
            nu = _background_normal(points, chart, r)
            area = _background_area(points, chart, r)
        else:
            g_jet = metric_jet(spec, points)
            nu, _, _ = _metric_normal(g_jet, points, chart, r)
            area = _metric_area(g_jet, points, chart, r)
        return michel_integrand_deviation(vjet, eps, b_jet, nu) * area

    return integrate_sphere(f, r, rule, chart, jacobian_fn=_unit_jacobian,
                            nthreads=nthreads)


def einstein_flux(spec: MetricSpec, X: ConformalKilling, r: float,
                  rule: SphereRule, measure: str = "metric",
                  modified: bool = False, nthreads=None) -> FluxSample:
    """Raw flux of ``G(X, nu)`` (or the modified Einstein tensor) over S_r."""
    from .geometry import curvature
    chart = spec.chart_kind

    def f(points):
        jet = metric_jet(spec, points)
        bun = curvature(jet)
        G = bun.modified_einstein if modified else bun.einstein
        xcomp = X.vector_jet(points).comp
        if measure == "metric":
            nu, _, _ = _metric_normal(jet, points, chart, r)
            area = _metric_area(jet, points, chart, r)
        else:
            nu = _background_normal(points, chart, r)
            area = _background_area(points, chart, r)
        return np.einsum("...ij,...i,...j->...", G, xcomp, nu) * area

    res = integrate_sphere(f, r, rule, chart, jacobian_fn=_unit_jacobian,
                           nthreads=nthreads)
    return FluxSample(float(r), res.value, res.value, res.error_estimate)


# --------------------------------------------------------------- radii tools

def decay_mode(spec: MetricSpec) -> str:
    return "power" if spec.is_flat_type else "exp"


def fit_radii(spec: MetricSpec, radii) -> np.ndarray:
    """Radii in the variable whose decay model the chart uses.

    Area-chart radii are converted to geodesic scale (s = asinh rho) so the
    exponential fit is exact.
    """
    radii = np.asarray(radii, dtype=float)
    if spec.chart_kind == ChartKind.POLAR_AREA:
        return np.arcsinh(radii)
    return radii


def _check_radii(radii):
    radii = np.asarray(radii, dtype=float)
    if radii.ndim != 1 or radii.size < 3:
        raise ValueError("need a 1-d schedule of at least 3 radii")
    if np.any(np.diff(radii) <= 0):
        raise ValueError("radii must be strictly increasing")
    return radii


def _series(spec, radii, raw_fluxes, quad_errors, norm, sigma_hint=None):
    samples = [FluxSample(float(r), float(raw), float(raw) * norm,
                          float(err) * abs(norm))
               for r, raw, err in zip(radii, raw_fluxes, quad_errors)]
    limit, limit_error, model = extrapolate(
        fit_radii(spec, radii), [s.normalized for s in samples],
        [s.quad_error for s in samples], decay_mode(spec), sigma_hint)
    return RadialSeries(samples, limit, limit_error, model)


# -------------------------------------------------------------- charge fronts

def classical_mass(spec: MetricSpec, radii, rule: SphereRule,
                   measure: str = "background", nthreads=None) -> RadialSeries:
    """ADM-type mass series, normalized by ``1/(2(n-1) omega_{n-1})``."""
    if not spec.is_flat_type:
        raise ChartMismatchError("classical mass needs a flat-type metric")
    radii = _check_radii(radii)
    V = kernel_function("const_one", spec.n)
    results = [michel_flux(spec, V, r, rule, measure, nthreads) for r in radii]
    return _series(spec, radii, [q.value for q in results],
                   [q.error_estimate for q in results],
                   mass_normalization(spec.n))


def classical_center(spec: MetricSpec, alpha: int, radii, rule: SphereRule,
                     mass: float, measure: str = "background",
                     nthreads=None) -> RadialSeries:
    """Center-of-mass series for component ``alpha`` (0-based)."""
    if not spec.is_flat_type:
        raise ChartMismatchError("center of mass needs a flat-type metric")
    if abs(mass) < _MASS_FLOOR:
        raise ZeroMassError("center of mass undefined for vanishing mass")
    radii = _check_radii(radii)
    V = kernel_function("coordinate", spec.n, alpha=alpha)
    results = [michel_flux(spec, V, r, rule, measure, nthreads) for r in radii]
    return _series(spec, radii, [q.value for q in results],
                   [q.error_estimate for q in results],
                   mass_normalization(spec.n) / mass)


def ricci_mass(spec: MetricSpec, radii, rule: SphereRule,
               measure: str = "metric", nthreads=None) -> RadialSeries:
    """Einstein-tensor mass: flux of ``G(r d_r, nu)``, Ricci normalization."""
    if not spec.is_flat_type:
        raise ChartMismatchError("Ricci mass needs a flat-type metric")
    radii = _check_radii(radii)
    from .fields import conformal_killing
    X = conformal_killing("dilation", spec.n)
    results = [einstein_flux(spec, X, r, rule, measure, nthreads=nthreads)
               for r in radii]
    return _series(spec, radii, [s.raw_flux for s in results],
                   [s.quad_error for s in results],
                   ricci_mass_normalization(spec.n))


def ricci_center(spec: MetricSpec, alpha: int, radii, rule: SphereRule,
                 mass: float, measure: str = "metric",
                 nthreads=None) -> RadialSeries:
    """Einstein-tensor center: flux of ``G(X^(alpha), nu)``; note the + sign."""
    if not spec.is_flat_type:
        raise ChartMismatchError("Ricci center needs a flat-type metric")
    if abs(mass) < _MASS_FLOOR:
        raise ZeroMassError("center of mass undefined for vanishing mass")
    radii = _check_radii(radii)
    from .fields import conformal_killing
    X = conformal_killing("inverted_translation", spec.n, alpha=alpha)
    n = spec.n
    norm = 1.0 / (2.0 * (n - 1) * (n - 2) * omega(n) * mass)
    results = [einstein_flux(spec, X, r, rule, measure, nthreads=nthreads)
               for r in radii]
    return _series(spec, radii, [s.raw_flux for s in results],
                   [s.quad_error for s in results], norm)


def ah_mass(spec: MetricSpec, index: int, radii, rule: SphereRule,
            measure: str = "background", nthreads=None) -> RadialSeries:
    """Hyperbolic mass functional evaluated on kernel element ``V^(index)``."""
    if not spec.is_hyperbolic_type:
        raise ChartMismatchError("hyperbolic mass needs a hyperbolic-type metric")
    radii = _check_radii(radii)
    V = kernel_basis(spec.n, spec.chart_kind)[index]
    results = [michel_flux(spec, V, r, rule, measure, nthreads) for r in radii]
    return _series(spec, radii, [q.value for q in results],
                   [q.error_estimate for q in results],
                   mass_normalization(spec.n))


def ah_ricci_charge(spec: MetricSpec, index: int, radii, rule: SphereRule,
                    measure: str = "metric", nthreads=None) -> RadialSeries:
    """Modified-Einstein-tensor flux against ``X^(index)``, Ricci normalization."""
    if not spec.is_hyperbolic_type:
        raise ChartMismatchError("hyperbolic Ricci charge needs a hyperbolic-type metric")
    radii = _check_radii(radii)
    X = killing_basis(spec.n, spec.chart_kind)[index]
    results = [einstein_flux(spec, X, r, rule, measure, modified=True,
                             nthreads=nthreads) for r in radii]
    return _series(spec, radii, [s.raw_flux for s in results],
                   [s.quad_error for s in results],
                   ricci_mass_normalization(spec.n))


# ----------------------------------------------------------------- diagnostics

@dataclass
class RTReport:
    """Regge-Teitelboim parity diagnostics for a flat-type metric."""

    radii: np.ndarray
    sup_odd: np.ndarray       # per-radius sup of the odd metric part
    exponent: float           # fitted decay exponent of sup_odd (inf if even)
    expected: float           # tau + 1
    even: bool
    status: str               # "pass" or "warn"


def rt_diagnostics(spec: MetricSpec, radii, rule: SphereRule,
                   tau: float | None = None) -> RTReport:
    """Sample the parity-odd part of g over antipodal node pairs and fit its decay."""
    if not spec.is_flat_type:
        raise ChartMismatchError("RT diagnostics apply to flat-type metrics")
    radii = _check_radii(radii)
    sups = np.empty(radii.size)
    for k, r in enumerate(radii):
        pts = r * rule.units
        godd = 0.5 * (metric_jet(spec, pts).g - metric_jet(spec, -pts).g)
        sups[k] = np.abs(godd).max()
    exponent = fit_decay_exponent(radii, sups, "power")
    even = bool(np.all(sups <= 1e-14))
    if tau is None:
        tau = spec.decay_hint if spec.decay_hint is not None else float(spec.n - 2)
    expected = float(tau) + 1.0
    ok = even or (np.isfinite(exponent) and exponent > expected - 0.5)
    return RTReport(radii, sups, exponent, expected, even,
                    "pass" if ok else "warn")
