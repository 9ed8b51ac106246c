"""Brownian paths as lazily materialized coefficient series.

A path is identified by (seed, stream_id): every coefficient is a fixed
function of that pair through the counter-indexed generator, so any two ways
of touching the same path (bulk grids, pointwise evaluation, deep refinement
inside a search) see identical numbers, in any order, on any thread count.

``PathCoefficients`` lives on [0,1].  ``ExtendedPath`` glues consecutive
streams into a path on [0, inf): window k uses stream base_stream + k, and
B(k + s) = B(k) + W_k(s) where the window increments W_k(1) are just the ramp
coefficients, so integer-time values are exact.  ``scaled`` and ``shifted``
wrap any of these with the Brownian scaling V(t) = B(a^2 t)/a and the restart
W(t) = B(tau + t) - B(tau).

Evaluation returns an ``Enclosure``: the partial sum through a tent level plus
a two-sided truncation bound.  At a dyadic point whose level is covered the
bound collapses to zero width, because finer tents vanish there.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from . import rng, schauder
from .schauder import DEFAULT_C, MAX_LEVEL


@dataclass(frozen=True)
class Enclosure:
    """A certified interval [lo, hi] for a real quantity.

    ``level`` is the refinement depth that produced it; ``confidence`` is the
    probability (over path randomness) that the stated bounds hold — 1.0 for
    purely algebraic facts, slightly less when a modulus-of-continuity bound
    was invoked.
    """

    lo: float
    hi: float
    level: int
    confidence: float = 1.0

    @property
    def width(self) -> float:
        return self.hi - self.lo

    @property
    def mid(self) -> float:
        return 0.5 * (self.lo + self.hi)

    def __contains__(self, x: float) -> bool:
        return self.lo <= x <= self.hi


def _dyadic_level(t: float, cap: int = 62) -> int:
    """Smallest m with t * 2^m an integer, or cap + 1 if deeper than cap.

    Every binary float is dyadic, so this always terminates for finite t; the
    cap just keeps coarse-grained callers from caring about 2^-1060 dust.
    """
    m = 0
    while t != math.floor(t):
        t *= 2.0
        m += 1
        if m > cap:
            return cap + 1
    return m


class PathCoefficients:
    """A Brownian path on [0,1], backed by coefficient arrays per tent level.

    Sampled paths (``seed is not None``) can always be refined deeper: any
    coefficient not yet materialized is produced on demand from the generator.
    Forced paths carry explicit coefficients and are zero beyond them, which
    makes them exactly piecewise linear — handy for worked examples and
    oracle tests.
    """

    __slots__ = ("seed", "stream_id", "_ramp", "_tents")

    def __init__(self, seed, stream_id, ramp, tents):
        self.seed = seed
        self.stream_id = stream_id
        self._ramp = float(ramp)
        self._tents = [np.asarray(a, dtype=np.float64) for a in tents]
        for i, a in enumerate(self._tents):
            if a.shape != (1 << i,):
                raise ValueError(f"tent level {i} needs {1 << i} coefficients, got {a.shape}")

    # -- construction ---------------------------------------------------

    @classmethod
    def sample(cls, seed: int, stream_id: int = 0, level: int = 0) -> "PathCoefficients":
        """Draw the path for (seed, stream_id), materializing tent levels < level."""
        ramp = rng.normal_at(seed, stream_id, 0)
        p = cls(seed, stream_id, ramp, [])
        p.ensure_tent_level(level - 1)
        return p

    @classmethod
    def from_coefficients(cls, ramp: float, tents=()) -> "PathCoefficients":
        """A forced path: given coefficients, all deeper ones zero."""
        return cls(None, None, ramp, list(tents))

    @property
    def forced(self) -> bool:
        return self.seed is None

    # -- coefficient access ---------------------------------------------

    @property
    def ramp(self) -> float:
        return self._ramp

    @property
    def max_tent_level(self) -> int:
        """Deepest materialized tent level (-1 when only the ramp exists)."""
        return len(self._tents) - 1

    def ensure_tent_level(self, i: int) -> None:
        while len(self._tents) <= i:
            k = len(self._tents)
            if self.forced:
                self._tents.append(np.zeros(1 << k))
            else:
                self._tents.append(
                    rng.normals_range(self.seed, self.stream_id, 1 << k, 1 << k)
                )

    def tent_level(self, i: int) -> np.ndarray:
        self.ensure_tent_level(i)
        return self._tents[i]

    def coeff(self, i: int, j: int) -> float:
        """Single tent coefficient, without materializing the whole level."""
        if i <= self.max_tent_level:
            return float(self._tents[i][j])
        if self.forced:
            return 0.0
        return rng.normal_at(self.seed, self.stream_id, (1 << i) + j)

    def truncation_bound(self, n: int, c: float = DEFAULT_C) -> float:
        """Sup-norm bound on the sum of all tents at levels >= n.

        For sampled paths this is the modulus-based tail bound; for forced
        paths the remaining coefficients are known outright, so the bound
        (sum of per-level peak amplitudes) is exact and certain.
        """
        if not self.forced:
            return schauder.tail_bound(n, c)
        total = 0.0
        for m in range(max(n, 0), len(self._tents)):
            a = self._tents[m]
            if a.size:
                total += float(np.abs(a).max()) * schauder.peak(m)
        return total

    # -- evaluation -----------------------------------------------------

    def grid(self, n: int) -> np.ndarray:
        """Exact values at the 2^n + 1 dyadic knots k * 2^-n, by midpoint
        displacement (tents at level >= n vanish on this grid)."""
        v = np.array([0.0, self._ramp])
        for i in range(n):
            xi = self.tent_level(i)
            mids = 0.5 * (v[:-1] + v[1:]) + xi * schauder.peak(i)
            nxt = np.empty(2 * v.size - 1)
            nxt[0::2] = v
            nxt[1::2] = mids
            v = nxt
        return v

    def partial(self, t: float, level: int) -> float:
        """Partial sum through tent level `level` at a single point."""
        acc = self._ramp * t
        for i in range(min(level, MAX_LEVEL) + 1):
            x = t * (1 << i)
            j = int(x)
            if j >= (1 << i):
                j = (1 << i) - 1
            s = x - j
            if 0.0 < s < 1.0:
                acc += self.coeff(i, j) * (1.0 - abs(2.0 * s - 1.0)) * schauder.peak(i)
        return acc

    def eval(self, t: float, level: int, c: float = DEFAULT_C) -> Enclosure:
        """Enclosure of B(t) from the partial sum through `level`.

        Dyadic t at resolution <= level + 1 is exact (width 0, confidence 1);
        otherwise the tail bound for levels > `level` applies, at the modulus
        confidence for that depth.
        """
        if not 0.0 <= t <= 1.0:
            raise ValueError(f"t={t} outside [0,1]")
        m = _dyadic_level(t)
        if m <= level + 1:
            v = self.partial(t, min(level, m - 1))
            return Enclosure(v, v, level, 1.0)
        v = self.partial(t, level)
        tail = self.truncation_bound(level + 1, c)
        conf = 1.0 if self.forced else schauder.modulus_confidence(level + 1, c)
        return Enclosure(v - tail, v + tail, level, conf)

    def eval_many(self, ts: np.ndarray, level: int) -> np.ndarray:
        """Partial sums through `level` at many points (no tail bookkeeping)."""
        ts = np.asarray(ts, dtype=np.float64)
        acc = self._ramp * ts
        for i in range(level + 1):
            x = ts * (1 << i)
            j = np.minimum(x.astype(np.int64), (1 << i) - 1)
            s = x - j
            hat = np.maximum(1.0 - np.abs(2.0 * s - 1.0), 0.0)
            acc += self.tent_level(i)[j] * hat * schauder.peak(i)
        return acc

    # -- serialization --------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "seed": self.seed,
            "stream_id": self.stream_id,
            "max_level": self.max_tent_level,
            "levels": [[self._ramp]] + [lvl.tolist() for lvl in self._tents],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "PathCoefficients":
        levels = d["levels"]
        return cls(d.get("seed"), d.get("stream_id"), levels[0][0], levels[1:])

    def dump(self, fp) -> None:
        json.dump(self.to_dict(), fp, sort_keys=True)

    @classmethod
    def load(cls, fp) -> "PathCoefficients":
        return cls.from_dict(json.load(fp))

    def __repr__(self):
        tag = "forced" if self.forced else f"seed={self.seed}, stream={self.stream_id}"
        return f"PathCoefficients({tag}, tent levels through {self.max_tent_level})"


def sample_path(seed: int, stream_id: int = 0, level: int = 10) -> PathCoefficients:
    """Sample the (seed, stream_id) path with the level-`level` dyadic grid
    materialized, i.e. tent levels 0 .. level-1 plus the ramp."""
    return PathCoefficients.sample(seed, stream_id, level)


class ExtendedPath:
    """Brownian motion on [0, inf) from one stream per unit window."""

    __slots__ = ("seed", "base_stream", "_windows", "_endsums")

    def __init__(self, seed: int, base_stream: int = 0):
        self.seed = seed
        self.base_stream = base_stream
        self._windows: dict[int, PathCoefficients] = {}
        self._endsums = [0.0]  # _endsums[k] = B(k), exactly

    def window(self, k: int) -> PathCoefficients:
        if k < 0:
            raise ValueError("window index must be >= 0")
        w = self._windows.get(k)
        if w is None:
            w = PathCoefficients.sample(self.seed, self.base_stream + k)
            self._windows[k] = w
        return w

    def base_value(self, k: int) -> float:
        """B(k) — a finite sum of ramp coefficients, exact."""
        while len(self._endsums) <= k:
            i = len(self._endsums) - 1
            self._endsums.append(self._endsums[-1] + self.window(i).ramp)
        return self._endsums[k]

    def split(self, t: float) -> tuple[int, float]:
        k = int(math.floor(t))
        return k, t - k

    def eval(self, t: float, level: int, c: float = DEFAULT_C) -> Enclosure:
        if t < 0.0:
            raise ValueError(f"t={t} outside [0, inf)")
        k, s = self.split(t)
        base = self.base_value(k)
        e = self.window(k).eval(s, level, c)
        return Enclosure(base + e.lo, base + e.hi, e.level, e.confidence)


def eval_path(path, t: float, level: int, c: float = DEFAULT_C) -> Enclosure:
    """Evaluate any path-like object (unit, extended, or view) at t."""
    return path.eval(t, level, c)


class ScaledView:
    """V(t) = B(a^2 t) / a for a != 0 — again a standard Brownian motion.

    Bounds map through exactly: an enclosure for B(a^2 t) divided by a (order
    flipped when a < 0) encloses V(t).
    """

    __slots__ = ("base", "a")

    def __init__(self, base, a: float):
        if a == 0.0:
            raise ValueError("scaling factor must be nonzero")
        self.base = base
        self.a = float(a)

    def eval(self, t: float, level: int, c: float = DEFAULT_C) -> Enclosure:
        e = self.base.eval(self.a * self.a * t, level, c)
        lo, hi = e.lo / self.a, e.hi / self.a
        if lo > hi:
            lo, hi = hi, lo
        return Enclosure(lo, hi, e.level, e.confidence)


class ShiftedView:
    """W(t) = B(tau + t) - B(tau) — the path restarted at tau.

    The origin value B(tau) is itself only known as an enclosure unless tau is
    dyadic, so evaluation widths add the origin width.
    """

    __slots__ = ("base", "tau")

    def __init__(self, base, tau: float):
        if tau < 0.0:
            raise ValueError("shift must be >= 0")
        self.base = base
        self.tau = float(tau)

    def eval(self, t: float, level: int, c: float = DEFAULT_C) -> Enclosure:
        e1 = self.base.eval(self.tau + t, level, c)
        e0 = self.base.eval(self.tau, level, c)
        return Enclosure(
            e1.lo - e0.hi,
            e1.hi - e0.lo,
            min(e1.level, e0.level),
            min(e1.confidence, e0.confidence),
        )


def scaled(path, a: float) -> ScaledView:
    return ScaledView(path, a)


def shifted(path, tau: float) -> ShiftedView:
    return ShiftedView(path, tau)
