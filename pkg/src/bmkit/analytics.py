"""Hitting-probability laws for Brownian paths.

Closed forms where they exist (zero-set hitting, running maximum), nested
quadrature where they do not: the probability that planar Brownian motion
started at radius ``R`` enters an ``eps``-disk around the origin by time 1
is computed from the first-passage law of the order-zero Bessel process,
whose density involves the modified Bessel functions I₀ and K₀.  Those are
themselves evaluated by quadrature of their classical integral
representations rather than taken from a special-function library, so the
whole chain stays inspectable end to end.

Everything here is pure and deterministic; no sampling.
"""

from __future__ import annotations

import math
from functools import lru_cache
from typing import NamedTuple, Optional

import numpy as np

from .quadrature import (
    DEFAULT_SPEC,
    QuadratureResult,
    QuadratureSpec,
    ToleranceError,
    fourier_cos,
    integrate,
    integrate_to_inf,
)

__all__ = [
    "QuadratureSpec",
    "TWO_INTERVAL_CONSTANT",
    "zero_hit_prob",
    "two_interval_bound",
    "max_cdf",
    "bessel_i0",
    "bessel_k0",
    "bessel_L",
    "level_first_passage",
    "bessel_first_passage",
    "spitzer_limit",
]

EULER_GAMMA = 0.5772156649015329

#: Constant in the two-interval zero bound C·eps/sqrt(a·delta): the product
#: of the two (2/pi)·sqrt factors picked up when the one-interval law is
#: applied at each window.  Exposed rather than baked in so tests can see
#: exactly what is claimed.
TWO_INTERVAL_CONSTANT = 4.0 / math.pi**2


def zero_hit_prob(a: float, eps: float) -> float:
    """Probability that a standard Brownian path vanishes in [a, a+eps].

    The arctangent law: (2/π)·arctan(√(eps/a)).  Strictly increasing in
    ``eps``, strictly decreasing in ``a``, and ~ (2/π)√(eps/a) as the
    window shrinks.
    """
    if a <= 0.0 or eps <= 0.0:
        raise ValueError("zero_hit_prob requires a > 0 and eps > 0")
    return 2.0 / math.pi * math.atan(math.sqrt(eps / a))


def two_interval_bound(a: float, eps: float, delta: float) -> float:
    """Upper bound on the chance of a zero in each of two eps-windows.

    The windows start at ``a`` and lie ``delta`` apart; the bound is
    ``TWO_INTERVAL_CONSTANT · eps / sqrt(a·delta)``.  It is a crude
    product-form bound (often > 1) meant for ruling events out, not a
    probability.
    """
    if a <= 0.0 or eps <= 0.0 or delta <= 0.0:
        raise ValueError("two_interval_bound requires positive arguments")
    return TWO_INTERVAL_CONSTANT * eps / math.sqrt(a * delta)


def max_cdf(a: float, y: float) -> float:
    """Pr(max of a standard Brownian path over [0, y] ≤ a).

    By the reflection principle the running maximum has the law of |B(y)|,
    so the CDF is erf(a / √(2y)); it is 0 for a < 0 since the maximum is
    nonnegative almost surely.
    """
    if y <= 0.0:
        raise ValueError("max_cdf requires y > 0")
    if a < 0.0:
        return 0.0
    return math.erf(a / math.sqrt(2.0 * y))


# ---------------------------------------------------------------------------
# Bessel functions by quadrature of their integral representations.


def bessel_i0(x: float, spec: QuadratureSpec = DEFAULT_SPEC) -> float:
    """Modified Bessel I₀(x) as (1/π)·∫₀^π e^{x cos t} dt."""
    if x < 0.0:
        raise ValueError("bessel_i0 requires x >= 0")
    if x > 709.0:  # e^x beyond float range; the integral genuinely overflows
        return math.inf
    r = integrate(lambda t: math.exp(x * math.cos(t)), 0.0, math.pi, spec)
    return r.value / math.pi


def bessel_k0(x: float, spec: QuadratureSpec = DEFAULT_SPEC) -> float:
    """Modified Bessel K₀(x) as ∫₀^∞ cos(xt)/√(t²+1) dt.

    The integrand only decays like 1/t, so the tail is summed over
    half-periods and accelerated (see :func:`bmkit.quadrature.fourier_cos`)
    instead of being truncated pointwise.
    """
    if x <= 0.0:
        raise ValueError("bessel_k0 requires x > 0")
    return fourier_cos(
        lambda t: 1.0 / math.sqrt(t * t + 1.0), 0.0, x, spec
    ).value


_BESSEL_SPEC = QuadratureSpec(abs_tol=1e-13, rel_tol=1e-11, max_subdivisions=200)


def _log_i0e(z: float) -> float:
    """log of e^{−z} I₀(z), via the same cosine kernel shifted to peak at 1."""
    if z == 0.0:
        return 0.0
    r = integrate(
        lambda t: math.exp(z * (math.cos(t) - 1.0)), 0.0, math.pi, _BESSEL_SPEC
    )
    return math.log(r.value / math.pi)


def _log_k0e(z: float) -> float:
    """log of e^{z} K₀(z), via the decaying kernel e^{−z(cosh u − 1)}.

    Equivalent to the cosine representation but free of oscillation, so it
    stays quadrature-friendly for the very large arguments that show up
    inside the first-passage integrand.  The upper limit is where the
    exponent passes 745, i.e. where the integrand underflows.
    """
    u_max = math.asinh(math.sqrt(745.0 * (745.0 + 2.0 * z)) / z)
    r = integrate(
        lambda u: math.exp(-z * (math.cosh(u) - 1.0)), 0.0, u_max, _BESSEL_SPEC
    )
    return math.log(r.value)


def _log_L(x: float, ratio: float) -> float:
    """log of the resolvent-density ratio L_{0,ratio}(x).

    L = (I₀(ratio·x)K₀(x) − I₀(x)K₀(ratio·x)) / ((K₀ x)² + π²(I₀ x)²),
    assembled from exponentially scaled factors so that no intermediate
    over- or underflows even when ratio·x is in the thousands.
    """
    li0x = _log_i0e(x) + x
    lk0x = _log_k0e(x) - x
    li0rx = _log_i0e(ratio * x) + ratio * x
    lk0rx = _log_k0e(ratio * x) - ratio * x
    n1 = li0rx + lk0x
    n2 = li0x + lk0rx  # < n1 whenever ratio > 1
    d1 = 2.0 * lk0x
    d2 = math.log(math.pi**2) + 2.0 * li0x
    d = max(d1, d2)
    num = n1 + math.log1p(-math.exp(n2 - n1))
    den = d + math.log(math.exp(d1 - d) + math.exp(d2 - d))
    return num - den


def bessel_L(x: float, ratio: float) -> float:
    """The ratio L_{0,ratio}(x) of Bessel cross-products.

    Zero at ratio = 1 (the numerator is antisymmetric in its two scale
    arguments), positive for ratio > 1, and growing like
    e^{(ratio−3)x} for large x — callers integrating it must supply a
    damping factor, which is why the nested first-passage quadrature works
    with its logarithm instead.
    """
    if x <= 0.0:
        raise ValueError("bessel_L requires x > 0")
    if ratio < 1.0:
        raise ValueError("bessel_L requires ratio >= 1")
    if ratio == 1.0:
        return 0.0
    lv = _log_L(x, ratio)
    return math.inf if lv > 709.0 else math.exp(lv)


# ---------------------------------------------------------------------------
# First passage of the radial part to a small disk.


class _LaplaceTable(NamedTuple):
    """Fixed Gauss nodes for ∫₀^∞ (L(x)/x)·e^{−βx} dx, reusable across β.

    ``head`` is the analytic value of the [0, x_lo] piece: there
    L(x)/x ≈ ln(ratio) / (x·(u² + π²)) with u = ln(2/x) − γ, which
    integrates to ln(ratio)·arctan(π/u₀)/π in closed form.  ``log_f``
    holds log(L(x)/x) at the nodes; the e^{−βx} factor is folded in at
    evaluation time so the combined exponent never overflows.
    """

    nodes: np.ndarray
    weights: np.ndarray
    log_f: np.ndarray
    head: float


@lru_cache(maxsize=32)
def _laplace_table(
    ratio: float, x_lo: float, x_hi: float, per_decade: int = 6
) -> _LaplaceTable:
    panels = int(math.ceil(math.log10(x_hi / x_lo) * per_decade))
    edges = np.logspace(math.log10(x_lo), math.log10(x_hi), panels + 1)
    gauss_x, gauss_w = np.polynomial.legendre.leggauss(15)
    nodes = np.concatenate(
        [0.5 * (a + b) + 0.5 * (b - a) * gauss_x for a, b in zip(edges, edges[1:])]
    )
    weights = np.concatenate(
        [0.5 * (b - a) * gauss_w for a, b in zip(edges, edges[1:])]
    )
    log_f = np.array([_log_L(x, ratio) for x in nodes]) - np.log(nodes)
    u0 = math.log(2.0 / x_lo) - EULER_GAMMA
    head = math.log(ratio) * math.atan(math.pi / u0) / math.pi
    return _LaplaceTable(nodes, weights, log_f, head)


def _laplace_value(beta: float, table: _LaplaceTable) -> float:
    return table.head + float(
        np.sum(table.weights * np.exp(table.log_f - beta * table.nodes))
    )


_PASSAGE_SPEC = QuadratureSpec(abs_tol=1e-9, rel_tol=1e-9, max_subdivisions=300)


def level_first_passage(
    delta: float, spec: Optional[QuadratureSpec] = None
) -> float:
    """Pr(a 1-D Brownian path reaches level delta by time 1), by quadrature.

    Integrates the first-passage density delta/√(2πs³)·e^{−delta²/2s} over
    [0, 1]; equals 1 − max_cdf(delta, 1) by the reflection principle, which
    the tests use as an oracle.
    """
    if delta <= 0.0:
        raise ValueError("level_first_passage requires delta > 0")
    spec = spec or _PASSAGE_SPEC
    dd = delta * delta

    def density(s: float) -> float:
        if s <= 0.0:
            return 0.0
        e = dd / (2.0 * s)
        if e > 745.0:
            return 0.0
        return delta / math.sqrt(2.0 * math.pi * s**3) * math.exp(-e)

    peak = dd / 3.0  # mode of the density
    pts = [peak] if 0.0 < peak < 1.0 else None
    return integrate(density, 0.0, 1.0, spec, points=pts).value


def bessel_first_passage(
    R: float, eps: float, spec: Optional[QuadratureSpec] = None
) -> float:
    """Pr(planar Brownian motion from radius R enters the eps-disk by t=1).

    First-passage law of the order-zero Bessel process from R to eps:

        ∫₀¹ ρ(s) ds − ∫₀¹ ρ(s) [∫₀^∞ (L_{0,R/eps}(x)/x)·e^{−x(R−eps)/(eps√s)} dx] ds

    with ρ the level-(R−eps) first-passage density.  The outer integrals
    are adaptive; the inner Laplace transform is evaluated on a cached
    log-spaced Gauss grid shared across all s (only β = (R−eps)/(eps√s)
    changes), with its [0, x_lo] head in closed form and the tail cut at
    x_hi, beyond which the integrand decays at least like e^{−2x}.
    Absolute accuracy is limited by the head approximation to ~1e−6;
    each quadrature stage individually meets ``spec``.
    """
    if not 0.0 < eps < R:
        raise ValueError("bessel_first_passage requires 0 < eps < R")
    spec = spec or _PASSAGE_SPEC
    delta = R - eps
    ratio = R / eps

    # Smallest s with non-negligible density weight fixes the largest β the
    # table must resolve; β·x_lo ≤ 1e−4 keeps the head's e^{−βx} ≈ 1 honest.
    beta_max = math.sqrt(2.0 * math.log(1e16)) / eps
    x_lo = 1e-4 / beta_max
    x_hi = 1.3 * 0.5 * math.log(10.0 / spec.abs_tol)
    table = _laplace_table(ratio, x_lo, x_hi)
    dd = delta * delta

    def density(s: float) -> float:
        if s <= 0.0:
            return 0.0
        e = dd / (2.0 * s)
        if e > 745.0:
            return 0.0
        return delta / math.sqrt(2.0 * math.pi * s**3) * math.exp(-e)

    def weighted(s: float) -> float:
        rho_s = density(s)
        if rho_s == 0.0:
            return 0.0
        beta = delta / (eps * math.sqrt(s))
        return rho_s * _laplace_value(beta, table)

    peak = dd / 3.0
    pts = [peak] if 0.0 < peak < 1.0 else None
    term1 = integrate(density, 0.0, 1.0, spec, points=pts).value
    term2 = integrate(weighted, 0.0, 1.0, spec, points=pts).value
    return term1 - term2


def spitzer_limit(R: float, spec: Optional[QuadratureSpec] = None) -> float:
    """The limit of log(1/eps)·bessel_first_passage(R, eps) as eps → 0.

    Equals ∫_{R²/2}^∞ e^{−x}/(2x) dx, i.e. half the exponential integral
    E₁(R²/2); computed by quadrature with the tail truncated under the
    e^{−x} envelope.
    """
    if R <= 0.0:
        raise ValueError("spitzer_limit requires R > 0")
    spec = spec or DEFAULT_SPEC
    return integrate_to_inf(
        lambda x: math.exp(-x) / (2.0 * x),
        R * R / 2.0,
        spec,
        decay_rate=1.0,
    ).value
