"""Certified extrema, zero detection, and level crossings for sampled paths.

Everything here runs on one engine: dyadic cells that carry their exact
endpoint values and split by midpoint displacement (one fresh coefficient per
split, fetched by counter, so the numbers are identical no matter how the
search wanders).  A cell [t, t+h] is certified against the modulus bound

    |B(u) - B(v)| <= c * sqrt(d ln 1/d),   d = |u - v| <= h

anchored at its endpoints: all values inside lie in

    [max(vl, vr) - pad(h),  min(vl, vr) + pad(h)],   pad(h) = c sqrt(h ln 1/h).

That gives prune/accept rules for the maximum search and away-from-level
rules for crossing searches; a strict sign change between two exact knot
values is an unconditional crossing witness.  Certificates that invoke the
modulus hold with the probability reported in ``confidence``; witnesses made
of exact values alone are reported at confidence 1.

Forced (hand-built) paths are not Brownian and can violate the modulus at
coarse scales, in which case modulus-based certificates inherit that caveat;
for paths with N(0,1)-sized coefficients the default c = 2 has ample margin.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from enum import Enum

from . import _kernels
from .path import Enclosure, ExtendedPath, PathCoefficients, ScaledView, ShiftedView
from .rng import _u64
from .schauder import (
    DEFAULT_C,
    MAX_LEVEL,
    modulus_confidence,
    modulus_pad,
    peak,
    tail_bound,
)

#: test hook — route sampled paths through the pure-Python engine too
_FORCE_PYTHON = False


class Decision(str, Enum):
    HAS_ZERO = "has_zero"
    NO_ZERO = "no_zero"
    UNDECIDED = "undecided"


@dataclass(frozen=True)
class ZeroDecision:
    """Outcome of a crossing search.

    ``witness`` is an interval certified to contain a crossing (degenerate for
    an exact hit at a knot).  For located first crossings, ``time`` holds the
    estimate and ``slack`` the one-sided error bound |time - true| <= slack.
    """

    decision: Decision
    level: int
    confidence: float
    witness: tuple[float, float] | None = None
    time: float | None = None
    slack: float | None = None


@dataclass(frozen=True)
class HittingRecord:
    """A located first passage: the time, its error bound, and — for planar
    searches — the hit point and the index of the segment hit."""

    time: float
    slack: float
    level: int
    confidence: float
    point: tuple[float, float] | None = None
    segment: int | None = None


class RefinementBudgetError(RuntimeError):
    """Raised when a search cannot certify an answer within its level/node
    budget (e.g. a path that grazes the target level at the cutoff scale)."""


def level_for_tail(eps: float, cap: int = MAX_LEVEL) -> int:
    """Smallest evaluation level whose two-sided truncation width is < eps,
    capped at `cap` (the cap is the best a sampled path can offer)."""
    n = 2
    while n < cap and 2.0 * tail_bound(n + 1) >= eps:
        n += 1
    return n


# --------------------------------------------------------------------------
# window: exact dyadic access to sign * B + offset on one unit interval


class _Window:
    __slots__ = ("path", "sign", "offset", "_cache", "_exact_tail")

    def __init__(self, path: PathCoefficients, sign: float = 1.0, offset: float = 0.0):
        self.path = path
        self.sign = sign
        self.offset = offset
        # knot cache seeded with the interval ends: B(0) = 0, B(1) = ramp
        self._cache = {(0, 0): offset, (0, 1): sign * path.ramp + offset}
        # forced paths have finitely many coefficients, so their in-cell
        # deviation from the chord is known exactly and certs carry no
        # probability at all
        if path.forced:
            depth = path.max_tent_level + 1
            self._exact_tail = [path.truncation_bound(n) for n in range(depth + 1)]
        else:
            self._exact_tail = None

    def bounds(self, n: int, vl: float, vr: float, c: float) -> tuple[float, float, bool]:
        """Certified (lo, hi) for all values inside a level-n cell with
        endpoint values vl, vr; the flag marks the bound as exact."""
        if self._exact_tail is not None:
            f = self._exact_tail[n] if n < len(self._exact_tail) else 0.0
            lo, hi = (vl, vr) if vl <= vr else (vr, vl)
            return lo - f, hi + f, True
        lo, hi = _cell_bounds(vl, vr, modulus_pad(2.0**-n, c))
        return lo, hi, False

    def knot(self, n: int, k: int) -> float:
        """Exact value at k * 2^-n, by recursive midpoint displacement."""
        v = self._cache.get((n, k))
        if v is not None:
            return v
        if k & 1 == 0:
            v = self.knot(n - 1, k >> 1)
        else:
            j = (k - 1) >> 1
            vl = self.knot(n - 1, j)
            vr = self.knot(n - 1, j + 1)
            v = 0.5 * (vl + vr) + self.sign * self.path.coeff(n - 1, j) * peak(n - 1)
        self._cache[(n, k)] = v
        return v

    def mid(self, n: int, k: int, vl: float, vr: float) -> float:
        """Value at the midpoint of cell (n, k), given its endpoint values."""
        v = 0.5 * (vl + vr) + self.sign * self.path.coeff(n, k) * peak(n)
        self._cache[(n + 1, 2 * k + 1)] = v
        return v

    def enclosure(self, s: float, level: int, c: float) -> tuple[float, float, float]:
        e = self.path.eval(s, level, c)
        lo = self.sign * e.lo + self.offset
        hi = self.sign * e.hi + self.offset
        if lo > hi:
            lo, hi = hi, lo
        return lo, hi, e.confidence


def _base_level(width: float) -> int:
    """Starting cell depth: roughly 4-8 cells across the query interval.
    Precision comes from refinement, not from a fine base grid."""
    n = 2
    while 2.0 ** (-n) > 0.25 * width and n < MAX_LEVEL - 2:
        n += 1
    return n


#: sampled-path searches never lean on certificates coarser than this scale.
#: The union bound behind ``modulus_confidence`` is dominated by its coarsest
#: level — at level 2 a c=2 certificate fails for roughly 1% of paths, at
#: level 10 for ~1e-4 — and level-10 knot values are exact and cheap, so
#: starting there buys three nines of confidence for ~1000 generator draws.
_MIN_CERT_LEVEL = 10


def _cert_base_level(width: float, sampled: bool, max_level: int) -> int:
    n = _base_level(width)
    if sampled and n < _MIN_CERT_LEVEL:
        n = _MIN_CERT_LEVEL
    if n > max_level - 1:
        n = max(2, max_level - 1)
    return n


def _cell_bounds(vl: float, vr: float, pad: float) -> tuple[float, float]:
    lo = max(vl, vr) - pad
    hi = min(vl, vr) + pad
    m_lo, m_hi = (vl, vr) if vl <= vr else (vr, vl)
    return min(lo, m_lo), max(hi, m_hi)


# --------------------------------------------------------------------------
# maximum over one window


def _search_conf(win, n0, c):
    return 1.0 if win._exact_tail is not None else modulus_confidence(n0, c)


def _window_max(win, s0, s1, eps, c, max_level, max_nodes):
    """Dispatch: sampled windows run on the compiled kernel, forced windows
    (and the rare kernel stack overflow) on the Python engine."""
    path = win.path
    n0 = _cert_base_level(s1 - s0, not path.forced, max_level)
    if not path.forced and not _FORCE_PYTHON:
        lb, hi, deepest, status = _kernels.max_unit(
            _u64(path.seed), _u64(path.stream_id), win.sign, win.offset,
            s0, s1, eps, c, n0, max_level, max_nodes,
        )
        if status == _kernels.OK:
            return lb, hi, deepest, _search_conf(win, n0, c)
        if status == _kernels.BUDGET:
            raise RefinementBudgetError(
                f"max search stuck at level {deepest} with gap {hi - lb:.3g} > eps={eps:g}"
            )
        # stack overflow: fall through to the unbounded-stack engine
    return _window_max_py(win, s0, s1, eps, c, max_level, max_nodes, n0)


def _window_max_py(win, s0, s1, eps, c, max_level, max_nodes, n0):
    scale = 1 << n0
    k0 = max(0, int(math.floor(s0 * scale)))
    k1 = min(scale, int(math.ceil(s1 * scale)))
    if k1 <= k0:
        k1 = k0 + 1

    lb = -math.inf
    heap = []
    for k in range(k0, k1 + 1):
        t = k / scale
        if s0 <= t <= s1:
            lb = max(lb, win.knot(n0, k))
    for k in range(k0, k1):
        vl = win.knot(n0, k)
        vr = win.knot(n0, k + 1)
        ub = win.bounds(n0, vl, vr, c)[1]
        heapq.heappush(heap, (-ub, n0, k, vl, vr))

    # non-knot interval ends still lower-bound the max
    for s in (s0, s1):
        if s * scale != math.floor(s * scale):
            lo, _, _ = win.enclosure(s, min(max_level - 1, 26), c)
            lb = max(lb, lo)

    deepest = n0
    nodes = 0
    while heap:
        neg_ub, n, k, vl, vr = heapq.heappop(heap)
        ub = -neg_ub
        if ub - lb <= eps:
            return lb, max(ub, lb), deepest, _search_conf(win, n0, c)
        if n >= max_level or nodes >= max_nodes:
            raise RefinementBudgetError(
                f"max search stuck at level {n} with gap {ub - lb:.3g} > eps={eps:g}"
            )
        nodes += 1
        vm = win.mid(n, k, vl, vr)
        nn = n + 1
        deepest = max(deepest, nn)
        h = 2.0**-nn
        tm = (2 * k + 1) * h
        if s0 <= tm <= s1:
            lb = max(lb, vm)
        for kk, (a, b) in ((2 * k, (vl, vm)), (2 * k + 1, (vm, vr))):
            tl = kk * h
            tr = tl + h
            if tr <= s0 or tl >= s1:
                continue
            ub_child = win.bounds(nn, a, b, c)[1]
            if ub_child > lb:  # below-lb cells can never matter
                heapq.heappush(heap, (-ub_child, nn, kk, a, b))
    return lb, lb, deepest, _search_conf(win, n0, c)


def _extremum(path, a, b, eps, c, max_level, max_nodes, sign):
    """Enclosure for max over [a, b] of sign * path; negation is carried as a
    window sign so min and max share all code paths."""
    if not b > a:
        raise ValueError("need a < b")
    if isinstance(path, ScaledView):
        s = path.a
        inner = _extremum(
            path.base, s * s * a, s * s * b, eps * abs(s), c, max_level, max_nodes,
            sign * math.copysign(1.0, s),
        )
        return Enclosure(inner.lo / abs(s), inner.hi / abs(s), inner.level, inner.confidence)
    if isinstance(path, ShiftedView):
        inner = _extremum(
            path.base, path.tau + a, path.tau + b, 0.5 * eps, c, max_level, max_nodes, sign
        )
        # a non-dyadic restart point of a sampled path is only known to the
        # truncation width, so the result can be honestly wider than eps
        e0 = path.base.eval(path.tau, level_for_tail(0.25 * eps, max_level - 1), c)
        off_lo, off_hi = sorted((sign * e0.lo, sign * e0.hi))
        return Enclosure(
            inner.lo - off_hi, inner.hi - off_lo, inner.level, min(inner.confidence, e0.confidence)
        )
    if isinstance(path, ExtendedPath):
        lo = hi = -math.inf
        deepest, conf = 0, 1.0
        for w in range(int(math.floor(a)), int(math.ceil(b))):
            s0, s1 = max(a - w, 0.0), min(b - w, 1.0)
            if s1 <= s0:
                continue
            win = _Window(path.window(w), sign, sign * path.base_value(w))
            wl, wh, dp, cf = _window_max(win, s0, s1, eps, c, max_level, max_nodes)
            lo, hi = max(lo, wl), max(hi, wh)
            deepest, conf = max(deepest, dp), min(conf, cf)
        return Enclosure(lo, hi, deepest, conf)
    if not (0.0 <= a and b <= 1.0):
        raise ValueError("interval outside [0,1]; use an extended path")
    win = _Window(path, sign)
    lo, hi, deepest, conf = _window_max(win, a, b, eps, c, max_level, max_nodes)
    return Enclosure(lo, hi, deepest, conf)


def path_max(
    path,
    a: float = 0.0,
    b: float = 1.0,
    eps: float = 1e-3,
    c: float = DEFAULT_C,
    max_level: int = MAX_LEVEL,
    max_nodes: int = 500_000,
) -> Enclosure:
    """Enclosure of width <= eps for max of the path over [a, b].

    The search keeps a heap of cells ordered by their certified upper bounds
    and the best exact knot value seen as the lower bound; cells whose bound
    cannot beat the incumbent are pruned, the rest are split until the global
    gap closes.
    """
    return _extremum(path, a, b, eps, c, max_level, max_nodes, 1.0)


def path_min(path, a=0.0, b=1.0, eps=1e-3, c=DEFAULT_C, max_level=MAX_LEVEL,
             max_nodes=500_000) -> Enclosure:
    """Enclosure of width <= eps for min of the path over [a, b]."""
    e = _extremum(path, a, b, eps, c, max_level, max_nodes, -1.0)
    return Enclosure(-e.hi, -e.lo, e.level, e.confidence)


# --------------------------------------------------------------------------
# crossings of a level


_POS, _NEG, _UNKNOWN = 1, -1, 0


def _sign_of(v, alo, ahi):
    if v > ahi:
        return _POS
    if v < alo:
        return _NEG
    return _UNKNOWN


class _CrossingResult:
    __slots__ = ("decision", "witness", "time", "slack", "level", "confidence")

    def __init__(self, decision, witness=None, time=None, slack=None, level=0, confidence=1.0):
        self.decision = decision
        self.witness = witness
        self.time = time
        self.slack = slack
        self.level = level
        self.confidence = confidence


def _window_crossings(win, s0, s1, alo, ahi, eps, first, c, max_level, max_nodes):
    """Search one window for times with value in [alo, ahi] ("the level").

    ``first=False`` decides existence anywhere in [s0, s1]; ``first=True``
    runs the two-sided squeeze: a left frontier below which the window is
    certified level-free, and the earliest certified evidence above it,
    narrowed until they are within 2*eps of each other.

    Sampled windows run on the compiled kernel (an exact port, same traversal
    and floats); forced windows and kernel stack overflows use the Python
    engine below.
    """
    path = win.path
    n0 = _cert_base_level(s1 - s0, not path.forced, max_level)
    if not path.forced and win.sign == 1.0 and not _FORCE_PYTHON:
        code, wlo, whi, t, slack, deepest, pads_used, clipped, status = _kernels.crossing_unit(
            _u64(path.seed), _u64(path.stream_id), win.offset,
            s0, s1, alo, ahi, 0.0 if eps is None else eps, first, c, n0,
            max_level, max_nodes,
        )
        deepest = int(deepest)
        if status == _kernels.OK:
            if code == _kernels.HAS:
                if first:
                    conf = _search_conf(win, n0, c) if pads_used else 1.0
                    return _CrossingResult(
                        Decision.HAS_ZERO, (wlo, whi), t, slack, deepest, conf
                    )
                if t == t:  # exact touch at a knot
                    return _CrossingResult(Decision.HAS_ZERO, (wlo, whi), t, slack,
                                           deepest, 1.0)
                conf = _search_conf(win, n0, c) if clipped else 1.0
                return _CrossingResult(Decision.HAS_ZERO, (wlo, whi), level=deepest,
                                       confidence=conf)
            if code == _kernels.UNDECIDED:
                conf = _search_conf(win, n0, c) if pads_used else 1.0
                return _CrossingResult(Decision.UNDECIDED, (wlo, whi), level=deepest,
                                       confidence=conf)
            return _CrossingResult(
                Decision.NO_ZERO, level=deepest, confidence=_search_conf(win, n0, c)
            )
        # stack overflow: rerun on the unbounded-stack engine
    return _window_crossings_py(win, s0, s1, alo, ahi, eps, first, c, max_level, max_nodes, n0)


def _window_crossings_py(win, s0, s1, alo, ahi, eps, first, c, max_level, max_nodes, n0):
    scale = 1 << n0
    k0 = max(0, int(math.floor(s0 * scale)))
    k1 = min(scale, int(math.ceil(s1 * scale)))
    if k1 <= k0:
        k1 = k0 + 1
    exact = alo == ahi

    probes = {}

    def probe(s):
        st = probes.get(s)
        if st is None:
            lo, hi, _ = win.enclosure(s, min(max_level - 1, 26), c)
            st = _POS if lo > ahi else _NEG if hi < alo else _UNKNOWN
            probes[s] = st
        return st

    # stack with leftmost cell on top
    stack = [(n0, k, win.knot(n0, k), win.knot(n0, k + 1)) for k in range(k1 - 1, k0 - 1, -1)]

    prefix = s0
    cap = math.inf  # prefix may never pass a cell the budget left unresolved
    evidence = math.inf  # leftmost certified evidence of a hit
    evidence_exact_at = None
    pads_used = False
    deepest = n0
    nodes = 0
    budget_out = False

    while stack:
        if evidence - prefix <= (2.0 * eps if eps is not None else 0.0) and first:
            break
        n, k, vl, vr = stack.pop()
        h = 2.0**-n
        tl = k * h
        tr = tl + h
        if tl >= s1 or tr <= s0 or tl >= evidence:
            continue
        lo, hi, exact_cert = win.bounds(n, vl, vr, c)
        if lo > ahi or hi < alo:
            pads_used = pads_used or not exact_cert
            if first:
                prefix = max(prefix, min(tr, s1, cap))
            continue

        # exact hits at knots inside the query interval
        if exact:
            hit_t = None
            if vl == alo and s0 <= tl <= s1:
                hit_t = tl
            elif vr == alo and s0 <= tr <= s1:
                hit_t = tr
            if hit_t is not None and hit_t < evidence:
                evidence = hit_t
                evidence_exact_at = hit_t
                if not first:
                    return _CrossingResult(
                        Decision.HAS_ZERO, (hit_t, hit_t), hit_t, 0.0, deepest, 1.0
                    )
                if hit_t == tl:
                    continue  # nothing earlier inside this cell's left knot

        # strict sign change, using boundary probes for clipped ends
        sl = _sign_of(vl, alo, ahi) if tl >= s0 else probe(s0)
        sr = _sign_of(vr, alo, ahi) if tr <= s1 else probe(s1)
        wl, wr = max(tl, s0), min(tr, s1)
        if sl * sr == -1:
            if wr < evidence:
                evidence = wr
            if not first:
                conf = _search_conf(win, n0, c) if (tl < s0 or tr > s1) else 1.0
                return _CrossingResult(Decision.HAS_ZERO, (wl, wr), level=deepest,
                                       confidence=conf)
        if n >= max_level or nodes >= max_nodes:
            budget_out = True
            if first:
                # keep scanning: later cells can still move the evidence
                # earlier, but the zero-free prefix is pinned here for good
                cap = min(cap, max(tl, s0))
            continue
        nodes += 1
        vm = win.mid(n, k, vl, vr)
        nn = n + 1
        deepest = max(deepest, nn)
        kk = 2 * k
        stack.append((nn, kk + 1, vm, vr))
        stack.append((nn, kk, vl, vm))

    if first:
        gap = evidence - prefix
        if evidence < math.inf and gap <= 2.0 * eps:
            t = evidence_exact_at if evidence_exact_at == prefix else 0.5 * (prefix + evidence)
            conf = _search_conf(win, n0, c) if pads_used else 1.0
            return _CrossingResult(
                Decision.HAS_ZERO, (prefix, evidence), t, 0.5 * max(gap, 0.0), deepest, conf
            )
        if evidence < math.inf or budget_out or stack:
            conf = _search_conf(win, n0, c) if pads_used else 1.0
            return _CrossingResult(
                Decision.UNDECIDED, (prefix, min(evidence, s1)), level=deepest,
                confidence=conf,
            )
        return _CrossingResult(
            Decision.NO_ZERO, level=deepest, confidence=_search_conf(win, n0, c)
        )
    if budget_out:
        conf = _search_conf(win, n0, c) if pads_used else 1.0
        return _CrossingResult(Decision.UNDECIDED, (prefix, s1), level=deepest,
                               confidence=conf)
    return _CrossingResult(
        Decision.NO_ZERO, level=deepest, confidence=_search_conf(win, n0, c)
    )


def _crossing_query(path, a, b, alo, ahi, eps, first, c, max_level, max_nodes):
    if not b > a:
        raise ValueError("need a < b")
    if isinstance(path, ScaledView):
        s = path.a
        lo, hi = sorted((s * alo, s * ahi))
        r = _crossing_query(
            path.base, s * s * a, s * s * b, lo, hi,
            None if eps is None else eps * s * s, first, c, max_level, max_nodes,
        )
        inv = 1.0 / (s * s)
        return _CrossingResult(
            r.decision,
            None if r.witness is None else (r.witness[0] * inv, r.witness[1] * inv),
            None if r.time is None else r.time * inv,
            None if r.slack is None else r.slack * inv,
            r.level,
            r.confidence,
        )
    if isinstance(path, ShiftedView):
        e0 = path.base.eval(path.tau, min(26, max_level - 1), c)
        r = _crossing_query(
            path.base, path.tau + a, path.tau + b, alo + e0.lo, ahi + e0.hi,
            eps, first, c, max_level, max_nodes,
        )
        return _CrossingResult(
            r.decision,
            None if r.witness is None else (r.witness[0] - path.tau, r.witness[1] - path.tau),
            None if r.time is None else r.time - path.tau,
            r.slack,
            r.level,
            min(r.confidence, e0.confidence),
        )
    if isinstance(path, ExtendedPath):
        deepest = 0
        conf = 1.0
        for w in range(int(math.floor(a)), int(math.ceil(b))):
            s0, s1 = max(a - w, 0.0), min(b - w, 1.0)
            if s1 <= s0:
                continue
            win = _Window(path.window(w), 1.0, path.base_value(w))
            r = _window_crossings(win, s0, s1, alo, ahi, eps, first, c, max_level, max_nodes)
            deepest = max(deepest, r.level)
            conf = min(conf, r.confidence)
            if r.decision is not Decision.NO_ZERO:
                shift = float(w)
                # a first-passage or bracket answer also leans on the earlier
                # windows' clear certificates, so their confidence folds in;
                # bare existence (first=False HAS) stands on its own evidence
                folded = conf if first or r.decision is Decision.UNDECIDED \
                    else r.confidence
                return _CrossingResult(
                    r.decision,
                    None if r.witness is None else (r.witness[0] + shift, r.witness[1] + shift),
                    None if r.time is None else r.time + shift,
                    r.slack,
                    deepest,
                    folded,
                )
        return _CrossingResult(Decision.NO_ZERO, level=deepest, confidence=conf)
    if not (0.0 <= a and b <= 1.0):
        raise ValueError("interval outside [0,1]; use an extended path")
    win = _Window(path)
    return _window_crossings(win, a, b, alo, ahi, eps, first, c, max_level, max_nodes)


def has_zero(
    path,
    a: float = 0.0,
    b: float = 1.0,
    c: float = DEFAULT_C,
    max_level: int = MAX_LEVEL,
    max_nodes: int = 200_000,
) -> ZeroDecision:
    """Decide whether the path has a zero in [a, b].

    HAS_ZERO comes with a witness interval and is unconditional when the
    witness is a strict sign change between exact values; NO_ZERO relies on
    modulus certificates and carries their confidence; UNDECIDED means the
    budget ran out (e.g. the path grazes zero at the cutoff scale).
    """
    r = _crossing_query(path, a, b, 0.0, 0.0, None, False, c, max_level, max_nodes)
    return ZeroDecision(r.decision, r.level, r.confidence, r.witness, r.time, r.slack)


def first_zero(
    path,
    a: float = 0.0,
    b: float = 1.0,
    eps: float = 1e-6,
    c: float = DEFAULT_C,
    max_level: int = MAX_LEVEL,
    max_nodes: int = 500_000,
) -> ZeroDecision:
    """Locate the first zero in [a, b] to within eps.

    Maintains a growing zero-free prefix and a shrinking earliest-evidence
    bound; when they squeeze to within 2*eps the midpoint is reported with
    slack half the gap.  Note a = 0 finds the trivial zero at the origin.
    """
    r = _crossing_query(path, a, b, 0.0, 0.0, eps, True, c, max_level, max_nodes)
    return ZeroDecision(r.decision, r.level, r.confidence, r.witness, r.time, r.slack)


def first_hit_level(
    path,
    alpha: float,
    q: float = 0.0,
    eps: float = 1e-6,
    horizon: float | None = None,
    c: float = DEFAULT_C,
    max_level: int = MAX_LEVEL,
    max_nodes: int = 500_000,
) -> HittingRecord | None:
    """First time after q at which the path reaches level alpha, or None if
    certified not to happen before the horizon.

    Raises RefinementBudgetError if the search cannot resolve an answer —
    typically a path built to graze the level without crossing.
    """
    if horizon is None:
        horizon = 1.0 if isinstance(path, PathCoefficients) else 32.0
    r = _crossing_query(path, q, horizon, alpha, alpha, eps, True, c, max_level, max_nodes)
    if r.decision is Decision.NO_ZERO:
        return None
    if r.decision is Decision.UNDECIDED:
        raise RefinementBudgetError(
            f"level {alpha} hit undecided in bracket {r.witness} at level {r.level}"
        )
    return HittingRecord(r.time, r.slack, r.level, r.confidence)
