"""Triangular basis functions on [0,1] and the bounds attached to them.

The path series is

    B(t) = xi_ramp * t  +  sum over tent levels i >= 0, j in [0, 2^i) of
           xi[i][j] * tent(i, j, t)

where ``tent(i, j, .)`` is supported on [j*2^-i, (j+1)*2^-i], vanishes at both
ends, and peaks at the interval midpoint with height 2^(-i/2 - 1).  With i.i.d.
standard normal coefficients this is the classical midpoint-displacement
construction of Brownian motion on [0,1]: truncating after tent level n-1
gives the piecewise-linear interpolation of B through the 2^n + 1 dyadic knots
k * 2^-n, and those knot values are *exact* (deeper tents vanish there).

Counters
--------
Coefficients map to RNG counters by ``coefficient_counter``: the ramp is
counter 0, the level-0 tent is counter 1, and tent (i, j) for i >= 1 is
counter 2^i + j.  Levels occupy contiguous counter blocks, and everything
through tent level L is the prefix [0, 2^(L+1)).
"""

from __future__ import annotations

import math

LN2 = math.log(2.0)

#: default modulus-of-continuity constant; sqrt(2) is the critical value, 2
#: leaves a comfortable margin and is validated empirically by the test harness
DEFAULT_C = 2.0

#: refinement never descends past this tent level
MAX_LEVEL = 40


_SQRT_HALF = math.sqrt(0.5)


def peak(i: int) -> float:
    """Peak height of a level-i tent: 2^(-i/2 - 1).

    Assembled from an exact power of two and a single sqrt(1/2) multiply so
    Python and compiled evaluation paths agree bit for bit.
    """
    base = 2.0 ** float(-(i >> 1) - 1)
    return base if i & 1 == 0 else base * _SQRT_HALF


def tent(i: int, j: int, t: float) -> float:
    """Value of the (i, j) tent at t (0 outside its support)."""
    s = t * (1 << i) - j          # position inside the support, in [0,1]
    if s <= 0.0 or s >= 1.0:
        return 0.0
    return (1.0 - abs(2.0 * s - 1.0)) * peak(i)


def coefficient_counter(i: int, j: int = 0) -> int:
    """Counter for tent (i, j); i = -1 means the ramp coefficient."""
    if i < 0:
        return 0
    if i == 0:
        return 1
    return (1 << i) + j


def tail_bound(n: int, c: float = DEFAULT_C) -> float:
    """Sup-norm bound on the sum of all tents at levels >= n.

    c * sqrt(2^-n * n * ln 2) for n >= 1; the n = 0 case (nothing but the
    ramp retained) is covered by doubling the n = 1 bound.
    """
    if n <= 0:
        return 2.0 * tail_bound(1, c)
    return c * math.sqrt(2.0 ** (-n) * n * LN2)


def modulus_pad(h: float, c: float = DEFAULT_C) -> float:
    """Bound on |B(t+d) - B(t)| for all |d| <= h, from the modulus c*sqrt(h ln 1/h).

    Only meaningful where h ln(1/h) is increasing, i.e. h <= 1/e; callers keep
    cells at width <= 1/4.
    """
    if h <= 0.0:
        return 0.0
    if h > 0.25:
        h = 0.25
    return c * math.sqrt(h * math.log(1.0 / h))


def level_for_pad(target: float, c: float = DEFAULT_C, n_min: int = 2) -> int:
    """Smallest dyadic level n with modulus_pad(2^-n) < target."""
    n = max(n_min, 2)
    while modulus_pad(2.0 ** (-n), c) >= target:
        n += 1
        if n > MAX_LEVEL:
            raise ValueError(
                f"pad target {target:g} needs refinement past level {MAX_LEVEL}"
            )
    return n


def modulus_confidence(n: int, c: float = DEFAULT_C) -> float:
    """1 minus the union-bound tail probability that the modulus with constant
    c fails somewhere at dyadic scale n or finer.

    Per-level failure probability is bounded by 2^m * 2 * Phi-bar(c*sqrt(ln 2^m)),
    and the Gaussian tail bound Phi-bar(x) <= exp(-x^2/2)/(x sqrt(2 pi)) turns
    the sum over m >= n into sum 2^(m(1 - c^2/2)) / (c sqrt(2 pi m ln 2)).
    Degenerate (c <= sqrt(2), where the sum diverges) returns 0.5.
    """
    if n < 1:
        n = 1
    if c * c <= 2.0:
        return 0.5
    total = 0.0
    m = n
    while m < n + 400:
        term = 2.0 ** (m * (1.0 - 0.5 * c * c)) / (c * math.sqrt(2.0 * math.pi * m * LN2))
        total += term
        if term < 1e-18 * max(total, 1e-300):
            break
        m += 1
    return max(0.5, 1.0 - 2.0 * total)
