"""Analytic 2-jets of the reference geometries and structured perturbations.

Flat-type metrics live in a cartesian chart; hyperbolic-type metrics in one
of two polar charts over ``R x S^{n-1}``:

* ``polar_geodesic``: coords ``(r, theta1..theta_{n-2}, phi)`` with background
  ``b = dr^2 + sinh^2 r * round_sphere``,
* ``polar_area``: coords ``(rho, angles)`` with background
  ``b = (1+rho^2)^{-1} drho^2 + rho^2 * round_sphere``  (rho = sinh r).

Jets are produced by evaluating closed-form components with hyper-dual
numbers, so first and second derivatives carry no truncation error.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from . import expr as expr_mod
from . import hyperdual as hd
from .errors import ChartMismatchError, DomainError
from .geometry import (ChartKind, ChartPoint, MetricJet, SymTensorJet,
                       validate_dimension)
from .hyperdual import HyperDual, seed_variables

__all__ = ["MetricSpec", "metric_jet", "background_of", "deviation_jet",
           "chart_transfer", "transfer_metric_jet", "chart_kind_of",
           "sphere_embedding", "sphere_embedding_hd", "round_sphere_diag_hd",
           "FLAT_KINDS", "HYPERBOLIC_KINDS"]

FLAT_KINDS = ("euclidean", "schwarzschild_conformal")
HYPERBOLIC_KINDS = ("hyperbolic_polar", "hyperbolic_area", "kottler")


@dataclass(frozen=True)
class MetricSpec:
    """Catalog identifier plus parameters, or expression-defined components."""

    kind: str
    n: int
    m: float = 0.0
    center: tuple = ()
    base: "MetricSpec | None" = None
    components: Mapping | None = None   # {(i, j): AST or str}, upper triangle
    params: Mapping | None = None       # parameter values for expressions
    decay_hint: float | None = None
    chart: str | None = None            # expression metrics only

    def __post_init__(self):
        validate_dimension(self.n)
        kinds = FLAT_KINDS + HYPERBOLIC_KINDS + ("perturbation", "expression")
        if self.kind not in kinds:
            raise ValueError(f"unknown metric kind {self.kind!r}")
        if self.kind == "perturbation" and self.base is None:
            raise ValueError("perturbation spec requires a base spec")
        if self.kind == "expression" and self.components is None:
            raise ValueError("expression spec requires components")
        if self.kind == "schwarzschild_conformal" and not self.center:
            object.__setattr__(self, "center", (0.0,) * self.n)

    @property
    def chart_kind(self) -> ChartKind:
        return chart_kind_of(self)

    @property
    def is_flat_type(self) -> bool:
        return chart_kind_of(self) == ChartKind.CARTESIAN

    @property
    def is_hyperbolic_type(self) -> bool:
        return not self.is_flat_type


def chart_kind_of(spec: MetricSpec) -> ChartKind:
    if spec.kind in ("euclidean", "schwarzschild_conformal"):
        return ChartKind.CARTESIAN
    if spec.kind == "hyperbolic_polar":
        return ChartKind.POLAR_GEODESIC
    if spec.kind in ("hyperbolic_area", "kottler"):
        return ChartKind.POLAR_AREA
    if spec.kind == "perturbation":
        return chart_kind_of(spec.base)
    # expression metric: explicit chart, default cartesian
    return ChartKind(spec.chart or ChartKind.CARTESIAN)


def background_of(spec: MetricSpec) -> MetricSpec:
    """Background (model) metric of an asymptotic-type spec, same chart."""
    kind = chart_kind_of(spec)
    if kind == ChartKind.CARTESIAN:
        return MetricSpec("euclidean", spec.n)
    if kind == ChartKind.POLAR_GEODESIC:
        return MetricSpec("hyperbolic_polar", spec.n)
    return MetricSpec("hyperbolic_area", spec.n)


# ------------------------------------------------------ sphere parametrization
#
# Angles (theta_1, ..., theta_{n-2}, phi) parametrize S^{n-1}:
#   u_1 = cos theta_1
#   u_j = sin theta_1 ... sin theta_{j-1} cos theta_j      (j <= n-2)
#   u_{n-1} = sin theta_1 ... sin theta_{n-2} cos phi
#   u_n     = sin theta_1 ... sin theta_{n-2} sin phi
# Round metric: sigma = sum_j (prod_{k<j} sin^2 theta_k) d theta_j^2.

def sphere_embedding(angles: np.ndarray) -> np.ndarray:
    """Unit-sphere points from angles, shape ``(..., n-1) -> (..., n)``."""
    angles = np.asarray(angles, dtype=float)
    k = angles.shape[-1]            # number of angles = n - 1
    out = np.empty(angles.shape[:-1] + (k + 1,))
    sin_prod = np.ones(angles.shape[:-1])
    for j in range(k):
        out[..., j] = sin_prod * np.cos(angles[..., j])
        sin_prod = sin_prod * np.sin(angles[..., j])
    out[..., k] = sin_prod
    return out


def sphere_embedding_hd(angle_vars: list[HyperDual]) -> list[HyperDual]:
    """Hyper-dual version of :func:`sphere_embedding` (for exact jets)."""
    k = len(angle_vars)
    out = []
    sin_prod = 1.0
    for j in range(k - 1):
        out.append(sin_prod * hd.cos(angle_vars[j]))
        sin_prod = sin_prod * hd.sin(angle_vars[j])
    phi = angle_vars[k - 1]
    out.append(sin_prod * hd.cos(phi))
    out.append(sin_prod * hd.sin(phi))
    return out


def round_sphere_diag_hd(angle_vars: list[HyperDual], one) -> list:
    """Diagonal entries of the round metric in our angles (hyper-dual)."""
    diag = []
    sin2_prod = one
    for j in range(len(angle_vars)):
        diag.append(sin2_prod)
        s = hd.sin(angle_vars[j])
        sin2_prod = sin2_prod * (s * s)
    return diag


def round_sphere_det(angles: np.ndarray) -> np.ndarray:
    """Determinant of the round metric at given angles."""
    angles = np.asarray(angles, dtype=float)
    k = angles.shape[-1]
    det = np.ones(angles.shape[:-1])
    for j in range(k - 1):
        det = det * np.sin(angles[..., j]) ** (2 * (k - 1 - j))
    return det


# ------------------------------------------------------------- jet assembly

def _assemble(components, coords, chart_kind) -> MetricJet:
    """Pack an upper-triangular dict of HyperDual components into a MetricJet."""
    n = coords.shape[-1]
    shape = coords.shape[:-1]
    g = np.zeros(shape + (n, n))
    dg = np.zeros(shape + (n, n, n))
    ddg = np.zeros(shape + (n, n, n, n))
    for (i, j), comp in components.items():
        if isinstance(comp, HyperDual):
            v = np.broadcast_to(comp.val, shape)
            gr = np.broadcast_to(comp.grad, shape + (n,))
            he = np.broadcast_to(comp.hess, shape + (n, n))
        else:
            v = np.broadcast_to(np.asarray(comp, dtype=float), shape)
            gr = np.zeros(shape + (n,))
            he = np.zeros(shape + (n, n))
        g[..., i, j] = v
        dg[..., :, i, j] = gr
        ddg[..., :, :, i, j] = he
        if i != j:
            g[..., j, i] = v
            dg[..., :, j, i] = gr
            ddg[..., :, :, j, i] = he
    return MetricJet(g, dg, ddg, ChartPoint(coords, chart_kind))


def _coords_of(p) -> np.ndarray:
    if isinstance(p, ChartPoint):
        return np.asarray(p.coords, dtype=float)
    return np.asarray(p, dtype=float)


def _check_polar_domain(coords):
    if np.any(coords[..., 0] <= 0.0):
        raise DomainError("polar radial coordinate must be positive")


def _schwarzschild_log_factor(spec, coords):
    """log of the conformal factor, as ``p * log1p(s)`` with ``s = m/(2 rho^{n-2})``.

    Computed in log form so that the deviation ``g - e`` stays accurate at
    large radii.
    """
    n = spec.n
    x = seed_variables(coords)
    center = spec.center or (0.0,) * n
    rho2 = None
    for i in range(n):
        d = x[i] - float(center[i])
        rho2 = d * d if rho2 is None else rho2 + d * d
    if np.any(rho2.val <= 0.0):
        raise DomainError("schwarzschild_conformal: point at the center")
    rho = hd.sqrt(rho2)
    s = (0.5 * spec.m) * rho ** (-(n - 2))
    if np.any(s.val <= -1.0):
        raise DomainError("schwarzschild_conformal: point inside excised region")
    return (4.0 / (n - 2)) * hd.log1p(s)


def _hyperbolic_polar_components(coords):
    variables = seed_variables(coords)
    r, angles = variables[0], variables[1:]
    sh = hd.sinh(r)
    sh2 = sh * sh
    one = HyperDual.constant(1.0, coords.shape[-1], coords.shape[:-1])
    diag = round_sphere_diag_hd(angles, one)
    comps = {(0, 0): 1.0}
    for j, sigma_jj in enumerate(diag):
        comps[(1 + j, 1 + j)] = sh2 * sigma_jj
    return comps


def _area_chart_components(coords, radial_fn):
    """Polar-area-chart diagonal metric ``radial_fn(rho) drho^2 + rho^2 sigma``."""
    variables = seed_variables(coords)
    rho, angles = variables[0], variables[1:]
    one = HyperDual.constant(1.0, coords.shape[-1], coords.shape[:-1])
    diag = round_sphere_diag_hd(angles, one)
    comps = {(0, 0): radial_fn(rho)}
    rho2 = rho * rho
    for j, sigma_jj in enumerate(diag):
        comps[(1 + j, 1 + j)] = rho2 * sigma_jj
    return comps


def metric_jet(spec: MetricSpec, p) -> MetricJet:
    """Exact analytic 2-jet of the spec's metric at point(s) ``p``."""
    coords = _coords_of(p)
    if coords.shape[-1] != spec.n:
        raise ChartMismatchError(
            f"point has {coords.shape[-1]} coordinates, spec has n={spec.n}")
    kind = chart_kind_of(spec)
    n = spec.n

    if spec.kind == "euclidean":
        comps = {(i, i): 1.0 for i in range(n)}
        return _assemble(comps, coords, kind)

    if spec.kind == "schwarzschild_conformal":
        conf = hd.exp(_schwarzschild_log_factor(spec, coords))
        comps = {(i, i): conf for i in range(n)}
        return _assemble(comps, coords, kind)

    if spec.kind == "hyperbolic_polar":
        _check_polar_domain(coords)
        return _assemble(_hyperbolic_polar_components(coords), coords, kind)

    if spec.kind == "hyperbolic_area":
        _check_polar_domain(coords)
        comps = _area_chart_components(coords, lambda rho: 1.0 / (1.0 + rho * rho))
        return _assemble(comps, coords, kind)

    if spec.kind == "kottler":
        _check_polar_domain(coords)

        def radial(rho):
            f = 1.0 + rho * rho - (2.0 * spec.m) * rho ** (-(n - 2))
            if np.any(f.val <= 0.0):
                raise DomainError("kottler metric function non-positive at point")
            return 1.0 / f

        return _assemble(_area_chart_components(coords, radial), coords, kind)

    if spec.kind == "perturbation":
        base = metric_jet(spec.base, coords)
        eps = _components_jet(spec, coords, kind)
        return MetricJet(base.g + eps.value, base.dg + eps.d,
                         base.ddg + eps.dd, base.point)

    if spec.kind == "expression":
        eps = _components_jet(spec, coords, kind)
        return MetricJet(eps.value, eps.d, eps.dd, ChartPoint(coords, kind))

    raise ValueError(f"unknown metric kind {spec.kind!r}")  # pragma: no cover


@dataclass
class _Sym2Jet2:
    """Symmetric 2-tensor with first AND second derivatives (internal)."""

    value: np.ndarray
    d: np.ndarray
    dd: np.ndarray

    def as_sym_tensor(self) -> SymTensorJet:
        return SymTensorJet(self.value, self.d)


def _components_jet(spec, coords, chart_kind) -> _Sym2Jet2:
    """Evaluate the spec's expression components into a 2-jet tensor."""
    n = spec.n
    shape = coords.shape[:-1]
    value = np.zeros(shape + (n, n))
    d = np.zeros(shape + (n, n, n))
    dd = np.zeros(shape + (n, n, n, n))
    params = dict(spec.params or {})
    for (i, j), ast in spec.components.items():
        if isinstance(ast, str):
            ast = expr_mod.parse(ast, n, chart_kind, tuple(params))
        jet = expr_mod.eval_jet(ast, coords, params, chart_kind)
        for a, b in ((i, j), (j, i)) if i != j else ((i, j),):
            value[..., a, b] = jet.value
            d[..., :, a, b] = jet.grad
            dd[..., :, :, a, b] = jet.hess
    return _Sym2Jet2(value, d, dd)


def deviation_jet(spec: MetricSpec, p) -> SymTensorJet:
    """Stable closed-form jet of ``g - b`` (no large-radius cancellation)."""
    coords = _coords_of(p)
    n = spec.n
    shape = coords.shape[:-1]

    if spec.kind in ("euclidean", "hyperbolic_polar", "hyperbolic_area"):
        return SymTensorJet(np.zeros(shape + (n, n)), np.zeros(shape + (n, n, n)))

    if spec.kind == "schwarzschild_conformal":
        w = hd.expm1(_schwarzschild_log_factor(spec, coords))
        value = np.zeros(shape + (n, n))
        d = np.zeros(shape + (n, n, n))
        for i in range(n):
            value[..., i, i] = w.val
            d[..., :, i, i] = w.grad
        return SymTensorJet(value, d)

    if spec.kind == "kottler":
        _check_polar_domain(coords)
        variables = seed_variables(coords)
        rho = variables[0]
        # 1/f - 1/f0 = (f0 - f) / (f f0) with f0 = 1 + rho^2
        f0 = 1.0 + rho * rho
        f = f0 - (2.0 * spec.m) * rho ** (-(n - 2))
        if np.any(f.val <= 0.0):
            raise DomainError("kottler metric function non-positive at point")
        e_rr = ((2.0 * spec.m) * rho ** (-(n - 2))) / (f * f0)
        value = np.zeros(shape + (n, n))
        d = np.zeros(shape + (n, n, n))
        value[..., 0, 0] = e_rr.val
        d[..., :, 0, 0] = e_rr.grad
        return SymTensorJet(value, d)

    if spec.kind == "perturbation":
        base_dev = deviation_jet(spec.base, coords)
        eps = _components_jet(spec, coords, chart_kind_of(spec))
        return SymTensorJet(base_dev.value + eps.value, base_dev.d + eps.d)

    # expression metrics: plain subtraction from the chart background
    jet = metric_jet(spec, coords)
    bjet = metric_jet(background_of(spec), coords)
    return SymTensorJet(jet.g - bjet.g, jet.dg - bjet.dg)


# ------------------------------------------------------------ chart transfer

def _radial_map(from_kind: ChartKind, to_kind: ChartKind):
    """Map source-radius = f(target-radius) with derivatives up to third order.

    Returns a callable ``target_r -> (f, f', f'', f''')``; the jet transform
    pulls a source-chart jet back to the target chart.
    """
    if from_kind == ChartKind.POLAR_GEODESIC and to_kind == ChartKind.POLAR_AREA:
        # source geodesic radius s = asinh(rho)
        def fn(rho):
            q = 1.0 + rho**2
            return (np.arcsinh(rho), q**-0.5, -rho * q**-1.5,
                    (2.0 * rho**2 - 1.0) * q**-2.5)
        return fn
    if from_kind == ChartKind.POLAR_AREA and to_kind == ChartKind.POLAR_GEODESIC:
        # source area radius rho = sinh(s)
        def fn(s):
            return (np.sinh(s), np.cosh(s), np.sinh(s), np.cosh(s))
        return fn
    raise ChartMismatchError(
        f"no chart transfer from {from_kind} to {to_kind}")


def chart_transfer(p: ChartPoint, to_kind: ChartKind | str) -> ChartPoint:
    """Transform point coordinates between the two hyperbolic polar charts."""
    to_kind = ChartKind(to_kind)
    if p.chart_kind == to_kind:
        return ChartPoint(p.coords, to_kind)
    coords = np.array(p.coords, dtype=float)
    if p.chart_kind == ChartKind.POLAR_GEODESIC and to_kind == ChartKind.POLAR_AREA:
        coords[..., 0] = np.sinh(coords[..., 0])
    elif p.chart_kind == ChartKind.POLAR_AREA and to_kind == ChartKind.POLAR_GEODESIC:
        coords[..., 0] = np.arcsinh(coords[..., 0])
    else:
        raise ChartMismatchError(
            f"no chart transfer from {p.chart_kind} to {to_kind}")
    return ChartPoint(coords, to_kind)


def transfer_metric_jet(jet: MetricJet, to_kind: ChartKind | str) -> MetricJet:
    """Push a metric 2-jet into another compatible chart (angles unchanged)."""
    to_kind = ChartKind(to_kind)
    src_kind = jet.point.chart_kind
    if src_kind == to_kind:
        return jet
    n = jet.n
    target_point = chart_transfer(jet.point, to_kind)
    y = target_point.coords
    f, f1, f2, f3 = _radial_map(src_kind, to_kind)(y[..., 0])

    shape = y.shape[:-1]
    J = np.zeros(shape + (n, n))        # J[a, i] = d x^a / d y^i
    for a in range(1, n):
        J[..., a, a] = 1.0
    J[..., 0, 0] = f1
    H = np.zeros(shape + (n, n, n))     # H[a, i, j] = d^2 x^a / dy^i dy^j
    H[..., 0, 0, 0] = f2
    T3 = np.zeros(shape + (n, n, n, n))
    T3[..., 0, 0, 0, 0] = f3

    g, dg, ddg = jet.g, jet.dg, jet.ddg
    gp = np.einsum("...ai,...bj,...ab->...ij", J, J, g)

    dgJ = np.einsum("...cab,...ck->...kab", dg, J)   # d_k' g_ab (chain rule)
    dgp = (np.einsum("...aik,...bj,...ab->...kij", H, J, g)
           + np.einsum("...ai,...bjk,...ab->...kij", J, H, g)
           + np.einsum("...ai,...bj,...kab->...kij", J, J, dgJ))

    ddgJ = np.einsum("...dcab,...dl,...ck->...lkab", ddg, J, J) \
        + np.einsum("...cab,...ckl->...lkab", dg, H)            # d_l' d_k' g_ab
    ddgp = (np.einsum("...aikl,...bj,...ab->...lkij", T3, J, g)
            + np.einsum("...aik,...bjl,...ab->...lkij", H, H, g)
            + np.einsum("...aik,...bj,...lab->...lkij", H, J, dgJ)
            + np.einsum("...ail,...bjk,...ab->...lkij", H, H, g)
            + np.einsum("...ai,...bjkl,...ab->...lkij", J, T3, g)
            + np.einsum("...ai,...bjk,...lab->...lkij", J, H, dgJ)
            + np.einsum("...ail,...bj,...kab->...lkij", H, J, dgJ)
            + np.einsum("...ai,...bjl,...kab->...lkij", J, H, dgJ)
            + np.einsum("...ai,...bj,...lkab->...lkij", J, J, ddgJ))
    return MetricJet(gp, dgp, ddgp, target_point)
