"""Deterministic Gaussian draws from a counter-based generator.

Every random coefficient in this package is produced by the same pipeline:

    Philox 4x64-10, keyed by (seed, stream_id)
        -> 64-bit word at a given counter
        -> uniform in (0,1) via u = (2*(word >> 12) + 1) * 2**-53
        -> standard normal via the inverse CDF (Wichura's AS 241, PPND16)

The uniform map places u on the odd multiples of 2^-53, so u and 1-u are both
exactly representable, the lattice is symmetric about 1/2, and u is never 0
or 1.  Word ``n`` of a stream is word ``n & 3`` of the Philox block with
counter ``((n >> 2) + 1, 0, 0, 0)`` — the +1 matches the stream emitted by
``numpy.random.Philox``, which steps its counter before each block.
Exactly one word is consumed per coefficient, so any
coefficient can be generated in isolation from its counter alone, and the same
(seed, stream_id, counter) triple yields the same float64 on every platform
and at every level of parallelism.

The Philox implementation below is word-for-word compatible with
``numpy.random.Philox`` (tested against it); it is reimplemented here so the
jitted kernels elsewhere in the package can draw coefficients without leaving
compiled code.  The inverse CDF is the PPND16 rational approximation, whose
absolute error is below 1e-9 (in practice ~1e-16) across the open unit
interval.
"""

from __future__ import annotations

import numpy as np
from numba import njit

# Philox 4x64 round multipliers and Weyl key increments (Random123 constants).
_M0 = np.uint64(0xD2E7470EE14C6C93)
_M1 = np.uint64(0xCA5A826395121157)
_W0 = np.uint64(0x9E3779B97F4A7C15)
_W1 = np.uint64(0xBB67AE8584CAA73B)

_MASK32 = np.uint64(0xFFFFFFFF)
_U32 = np.uint64(32)
_U12 = np.uint64(12)
_U2 = np.uint64(2)
_U3 = np.uint64(3)

#: scale for the uniform map onto the odd multiples of 2^-53
_INV53 = 2.0 ** -53


@njit(cache=True, inline="always")
def _mulhi(a, b):
    # high 64 bits of the 128-bit product, via 32-bit limbs
    ah = a >> _U32
    al = a & _MASK32
    bh = b >> _U32
    bl = b & _MASK32
    cross1 = ah * bl + ((al * bl) >> _U32)
    cross2 = al * bh + (cross1 & _MASK32)
    return ah * bh + (cross1 >> _U32) + (cross2 >> _U32)


@njit(cache=True, inline="always")
def philox_block(n, k0, k1):
    """The four output words of block ``n`` under key (k0, k1).

    Matches numpy's emitted block order: numpy's Philox increments the
    counter before generating, so its first block has counter word 1.
    """
    x0 = n + np.uint64(1)
    x1 = np.uint64(0)
    x2 = np.uint64(0)
    x3 = np.uint64(0)
    for _ in range(10):
        hi0 = _mulhi(_M0, x0)
        lo0 = _M0 * x0
        hi1 = _mulhi(_M1, x2)
        lo1 = _M1 * x2
        x0 = hi1 ^ x1 ^ k0
        x1 = lo1
        x2 = hi0 ^ x3 ^ k1
        x3 = lo0
        k0 = k0 + _W0
        k1 = k1 + _W1
    return x0, x1, x2, x3


@njit(cache=True, inline="always")
def raw_word(seed, stream_id, counter):
    """64-bit word at ``counter`` of the (seed, stream_id) stream."""
    w0, w1, w2, w3 = philox_block(counter >> _U2, seed, stream_id)
    r = counter & _U3
    if r == np.uint64(0):
        return w0
    elif r == np.uint64(1):
        return w1
    elif r == np.uint64(2):
        return w2
    return w3


@njit(cache=True, inline="always")
def word_to_uniform(w):
    return (2.0 * np.float64(w >> _U12) + 1.0) * _INV53


@njit(cache=True, inline="always")
def inverse_normal_cdf(p):
    """Phi^{-1}(p) for p in (0,1); AS 241 (PPND16)."""
    q = p - 0.5
    if abs(q) <= 0.425:
        r = 0.180625 - q * q
        num = (((((((2.5090809287301226727e3 * r + 3.3430575583588128105e4) * r
                    + 6.7265770927008700853e4) * r + 4.5921953931549871457e4) * r
                  + 1.3731693765509461125e4) * r + 1.9715909503065514427e3) * r
                + 1.3314166789178437745e2) * r + 3.3871328727963666080e0)
        den = (((((((5.2264952788528545610e3 * r + 2.8729085735721942674e4) * r
                    + 3.9307895800092710610e4) * r + 2.1213794301586595867e4) * r
                  + 5.3941960214247511077e3) * r + 6.8718700749205790830e2) * r
                + 4.2313330701600911252e1) * r + 1.0)
        return q * num / den
    if q < 0.0:
        r = p
    else:
        r = 1.0 - p
    r = np.sqrt(-np.log(r))
    if r <= 5.0:
        r = r - 1.6
        num = (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r
                    + 2.41780725177450611770e-1) * r + 1.27045825245236838258e0) * r
                  + 3.64784832476320460504e0) * r + 5.76949722146069140550e0) * r
                + 4.63033784615654529590e0) * r + 1.42343711074968357734e0)
        den = (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r
                    + 1.51986665636164571966e-2) * r + 1.48103976427480074590e-1) * r
                  + 6.89767334985100004550e-1) * r + 1.67638483018380384940e0) * r
                + 2.05319162663775882187e0) * r + 1.0)
    else:
        r = r - 5.0
        num = (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r
                    + 1.24266094738807843860e-3) * r + 2.65321895265761230930e-2) * r
                  + 2.96560571828504891230e-1) * r + 1.78482653991729133580e0) * r
                + 5.46378491116411436990e0) * r + 6.65790464350110377720e0)
        den = (((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) * r
                    + 1.84631831751005468180e-5) * r + 7.86869131145613259100e-4) * r
                  + 1.48753612908506148525e-2) * r + 1.36929880922735805310e-1) * r
                + 5.99832206555887937690e-1) * r + 1.0)
    val = num / den
    if q < 0.0:
        return -val
    return val


@njit(cache=True, inline="always")
def normal_at_u64(seed, stream_id, counter):
    """Standard normal draw at one counter position (uint64 args; safe to
    call from other jitted code).  The package's only source of randomness."""
    return inverse_normal_cdf(word_to_uniform(raw_word(seed, stream_id, counter)))


@njit(cache=True)
def _normals_range_u64(seed, stream_id, start, n):
    out = np.empty(n, dtype=np.float64)
    for i in range(n):
        out[i] = normal_at_u64(seed, stream_id, start + np.uint64(i))
    return out


@njit(cache=True)
def _normals_gather_u64(seed, stream_id, counters):
    out = np.empty(counters.shape[0], dtype=np.float64)
    for i in range(counters.shape[0]):
        out[i] = normal_at_u64(seed, stream_id, counters[i])
    return out


def _u64(x) -> np.uint64:
    return np.uint64(int(x) & 0xFFFFFFFFFFFFFFFF)


def normal_at(seed, stream_id, counter) -> float:
    """Standard normal draw at one counter position."""
    return normal_at_u64(_u64(seed), _u64(stream_id), _u64(counter))


def normals_range(seed, stream_id, start, n) -> np.ndarray:
    """Draws at counters start, start+1, ..., start+n-1."""
    return _normals_range_u64(_u64(seed), _u64(stream_id), _u64(start), int(n))


def normals_gather(seed, stream_id, counters) -> np.ndarray:
    """Draws at an arbitrary array of counters (random access)."""
    return _normals_gather_u64(
        _u64(seed), _u64(stream_id), np.ascontiguousarray(counters, dtype=np.uint64)
    )


def raw_words(seed: int, stream_id: int, start: int, n: int) -> np.ndarray:
    """Raw 64-bit words (mainly for tests and cross-checks)."""
    out = np.empty(n, dtype=np.uint64)
    s = np.uint64(seed & 0xFFFFFFFFFFFFFFFF)
    t = np.uint64(stream_id & 0xFFFFFFFFFFFFFFFF)
    for i in range(n):
        out[i] = raw_word(s, t, np.uint64(start + i))
    return out


class CoefficientSource:
    """Gaussian stream bound to a (seed, stream_id) key.

    Thin convenience wrapper over the jitted functions; all state is the key,
    so instances are trivially picklable and comparisons by key are exact.
    """

    __slots__ = ("seed", "stream_id", "_s", "_t")

    def __init__(self, seed: int, stream_id: int):
        self.seed = int(seed)
        self.stream_id = int(stream_id)
        self._s = np.uint64(self.seed & 0xFFFFFFFFFFFFFFFF)
        self._t = np.uint64(self.stream_id & 0xFFFFFFFFFFFFFFFF)

    def normal(self, counter: int) -> float:
        return normal_at_u64(self._s, self._t, np.uint64(counter))

    def normals(self, start: int, n: int) -> np.ndarray:
        return _normals_range_u64(self._s, self._t, np.uint64(start), n)

    def gather(self, counters: np.ndarray) -> np.ndarray:
        return _normals_gather_u64(self._s, self._t, counters.astype(np.uint64))

    def __repr__(self) -> str:  # pragma: no cover
        return f"CoefficientSource(seed={self.seed}, stream_id={self.stream_id})"
