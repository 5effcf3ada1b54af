"""Deterministic quadrature over coordinate spheres and annuli.

The sphere rule is a product rule in our angular coordinates: Gauss-Jacobi
nodes in the cosine of each polar angle (weight ``(1-c^2)^{(m-1)/2}`` for the
angle carrying the measure ``sin^m``) tensored with a uniform midpoint rule
in the azimuth.  The combination integrates every spherical polynomial up to
the rule degree exactly.

Reductions use a fixed-order pairwise summation tree and node evaluation is
chunked with a fixed chunk size, so results are bit-for-bit identical
regardless of the worker-thread count (override via the environment variable
``ASYMFLUX_THREADS``).
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.special import roots_jacobi

from .catalog import round_sphere_det, sphere_embedding
from .errors import QuadratureError
from .geometry import ChartKind

__all__ = ["SphereRule", "QuadratureResult", "sphere_rule", "omega",
           "integrate_sphere", "integrate_annulus", "pairwise_sum",
           "sphere_points", "thread_count"]

_CHUNK = 4096
_EMBEDDED_STEP = 4


def omega(n: int) -> float:
    """Volume of the unit round sphere S^{n-1}."""
    return 2.0 * math.pi ** (n / 2.0) / math.gamma(n / 2.0)


def thread_count() -> int:
    env = os.environ.get("ASYMFLUX_THREADS", "")
    try:
        return max(1, int(env))
    except ValueError:
        return 1


@dataclass(frozen=True)
class SphereRule:
    """Product quadrature rule on the unit sphere S^{n-1}."""

    n: int
    degree: int
    angles: np.ndarray    # (N, n-1)
    units: np.ndarray     # (N, n) embedded unit vectors
    weights: np.ndarray   # (N,), sum to omega(n)

    @property
    def node_count(self) -> int:
        return self.weights.shape[0]


@dataclass(frozen=True)
class QuadratureResult:
    value: float
    error_estimate: float
    nodes_used: int


def sphere_rule(n: int, degree: int) -> SphereRule:
    """Product rule exact for spherical polynomials up to ``degree``."""
    if n not in (3, 4, 5):
        raise QuadratureError(f"sphere rules support n in {{3,4,5}}, got {n}")
    if not 1 <= degree <= 60:
        raise QuadratureError(f"rule degree must be in 1..60, got {degree}")
    npolar = max(1, (degree + 2) // 2)          # exact through degree 2*npolar-1
    nazim = 2 * npolar

    polar_nodes = []
    for j in range(n - 2):
        # angle theta_{j+1} carries measure sin^{n-2-j}; Jacobi weight exponent
        alpha = (n - 3 - j) / 2.0
        c, w = roots_jacobi(npolar, alpha, alpha)
        order = np.argsort(c)
        polar_nodes.append((np.arccos(c[order])[::-1], w[order][::-1]))

    phi = (np.arange(nazim) + 0.5) * (2.0 * math.pi / nazim)
    wphi = np.full(nazim, 2.0 * math.pi / nazim)

    grids = [pn[0] for pn in polar_nodes] + [phi]
    wgrids = [pn[1] for pn in polar_nodes] + [wphi]
    mesh = np.meshgrid(*grids, indexing="ij")
    wmesh = np.meshgrid(*wgrids, indexing="ij")
    angles = np.stack([m.ravel() for m in mesh], axis=-1)
    weights = np.ones(angles.shape[0])
    for wm in wmesh:
        weights = weights * wm.ravel()
    units = sphere_embedding(angles)
    return SphereRule(n, degree, angles, units, weights)


def pairwise_sum(values: np.ndarray) -> float:
    """Fixed-order pairwise reduction; deterministic for a given input order."""
    x = np.asarray(values, dtype=float).ravel().copy()
    while x.size > 1:
        m = x.size // 2
        head = x[: 2 * m : 2] + x[1 : 2 * m : 2]
        x = np.concatenate([head, x[2 * m:]]) if x.size % 2 else head
    return float(x[0]) if x.size else 0.0


def _evaluate(f, points, nthreads=None):
    """Chunked (optionally threaded) evaluation; chunking is thread-invariant."""
    nthreads = thread_count() if nthreads is None else max(1, int(nthreads))
    total = points.shape[0]
    chunks = [(i, min(i + _CHUNK, total)) for i in range(0, total, _CHUNK)]
    out = np.empty(total)
    if nthreads == 1 or len(chunks) == 1:
        for lo, hi in chunks:
            out[lo:hi] = np.asarray(f(points[lo:hi]), dtype=float)
    else:
        with ThreadPoolExecutor(max_workers=nthreads) as pool:
            futures = [(lo, hi, pool.submit(lambda s: np.asarray(f(s), dtype=float),
                                            points[lo:hi]))
                       for lo, hi in chunks]
            for lo, hi, fut in futures:
                out[lo:hi] = fut.result()
    bad = ~np.isfinite(out)
    if np.any(bad):
        idx = int(np.argmax(bad))
        raise QuadratureError(
            f"integrand not finite at node {idx} (coords {points[idx]})")
    return out


def sphere_points(rule: SphereRule, r: float, chart_kind: ChartKind) -> np.ndarray:
    """Chart coordinates of the rule nodes placed on the coordinate sphere S_r."""
    chart_kind = ChartKind(chart_kind)
    if chart_kind == ChartKind.CARTESIAN:
        return r * rule.units
    return np.concatenate(
        [np.full(rule.angles.shape[:-1] + (1,), float(r)), rule.angles], axis=-1)


def background_sphere_jacobian(rule: SphereRule, r: float,
                               chart_kind: ChartKind) -> np.ndarray:
    """Area element of S_r in the background measure, relative to the round
    sphere measure carried by the rule weights."""
    chart_kind = ChartKind(chart_kind)
    if chart_kind == ChartKind.CARTESIAN:
        j = float(r) ** (rule.n - 1)
    elif chart_kind == ChartKind.POLAR_GEODESIC:
        j = math.sinh(r) ** (rule.n - 1)
    else:
        j = float(r) ** (rule.n - 1)
    return np.full(rule.node_count, j)


def _sphere_value(f, rule, r, chart_kind, jacobian_fn, nthreads):
    points = sphere_points(rule, r, chart_kind)
    values = _evaluate(f, points, nthreads)
    jac = jacobian_fn(rule, r) if jacobian_fn is not None \
        else background_sphere_jacobian(rule, r, chart_kind)
    return pairwise_sum(values * rule.weights * jac), rule.node_count


def integrate_sphere(f, r: float, rule: SphereRule,
                     chart_kind: ChartKind = ChartKind.CARTESIAN,
                     jacobian_fn=None, nthreads=None) -> QuadratureResult:
    """Integrate ``f`` over the coordinate sphere S_r.

    ``f`` maps an ``(N, n)`` array of chart points to ``(N,)`` values and must
    be pure.  ``jacobian_fn(rule, r)`` supplies the area element relative to
    the round-sphere measure; by default the background area element of the
    chart is used.  The error estimate compares against an embedded rule of
    lower degree.
    """
    hi, nodes_hi = _sphere_value(f, rule, r, chart_kind, jacobian_fn, nthreads)
    lo_rule = sphere_rule(rule.n, max(rule.degree - _EMBEDDED_STEP, 1))
    lo, nodes_lo = _sphere_value(f, lo_rule, r, chart_kind, jacobian_fn, nthreads)
    return QuadratureResult(hi, abs(hi - lo), nodes_hi + nodes_lo)


def _radial_nodes(r0, r1, radial_degree):
    k = max(2, (int(radial_degree) + 2) // 2)
    c, w = np.polynomial.legendre.leggauss(k)
    mid, half = 0.5 * (r0 + r1), 0.5 * (r1 - r0)
    return mid + half * c, half * w


def _annulus_value(f, rule, radii, rweights, chart_kind, volume_fn, nthreads):
    shell_values = np.empty(radii.size)
    nodes = 0
    for i, (r, w) in enumerate(zip(radii, rweights)):
        points = sphere_points(rule, r, chart_kind)
        values = _evaluate(f, points, nthreads)
        jac = volume_fn(rule, r)
        shell_values[i] = w * pairwise_sum(values * rule.weights * jac)
        nodes += rule.node_count
    return pairwise_sum(shell_values), nodes


def integrate_annulus(f, r0: float, r1: float, rule: SphereRule,
                      radial_degree: int = 16,
                      chart_kind: ChartKind = ChartKind.CARTESIAN,
                      volume_fn=None, nthreads=None) -> QuadratureResult:
    """Integrate ``f`` over the annulus A(r0, r1).

    Gauss-Legendre in the radial coordinate tensored with the sphere rule.
    ``volume_fn(rule, r)`` supplies the volume element of the chosen measure
    relative to ``dr x (round sphere)``; by default the background volume
    element of the chart is used.
    """
    if not r0 < r1:
        raise QuadratureError(f"annulus needs r0 < r1, got ({r0}, {r1})")
    if volume_fn is None:
        volume_fn = lambda rl, r: background_sphere_jacobian(rl, r, chart_kind)
    radii, rweights = _radial_nodes(r0, r1, radial_degree)
    hi, nodes_hi = _annulus_value(f, rule, radii, rweights, chart_kind,
                                  volume_fn, nthreads)
    lo_rule = sphere_rule(rule.n, max(rule.degree - _EMBEDDED_STEP, 1))
    lo_radii, lo_rw = _radial_nodes(r0, r1, max(radial_degree - 2, 2))
    lo, nodes_lo = _annulus_value(f, lo_rule, lo_radii, lo_rw, chart_kind,
                                  volume_fn, nthreads)
    return QuadratureResult(hi, abs(hi - lo), nodes_hi + nodes_lo)
