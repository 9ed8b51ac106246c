"""First passage of a planar Brownian path to axis-aligned segments.

A planar path carries two independent coordinate paths
(x, y) = origin + (B_x(t), B_y(t)).  Hitting a segment forces the pinned
coordinate to cross the segment's supporting line, so the search enumerates
those line crossings in time order and classifies each one:

* the free coordinate is certified strictly inside the span -> a hit;
* it is certified outside with clearance m -> no hit is possible while the
  free coordinate moves less than m, which the modulus bound (or the exact
  slope bound of a forced piecewise-linear path) turns into a certified
  hit-free step h; the crossing search restarts at t + 3h/4, safely inside
  the certified window;
* neither -> the crossing time and the evaluation depth are refined on a
  fixed ladder, and if the path still grazes the span edge at the deepest
  rung the search raises rather than guess.

``first_hit_boundary`` runs the same loop over several segments at once,
keeping one restart frontier per segment; the earliest live candidate is
always classified first, so the first certified hit is the first passage to
the union.  A crossing that lands within slack of several segments (a
corner) goes to the segment whose span interior contains the free
coordinate deepest, ties to the lowest index.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .extrema import (
    Decision,
    HittingRecord,
    RefinementBudgetError,
    _crossing_query,
    level_for_tail,
    path_max,
    path_min,
)
from .path import ExtendedPath, PathCoefficients
from .schauder import DEFAULT_C, MAX_LEVEL, modulus_pad


@dataclass(frozen=True)
class Segment:
    """An axis-aligned segment.

    ``fixed_axis`` 0 pins x = offset (a vertical segment with y spanning
    [lo, hi]); 1 pins y = offset (horizontal, x in [lo, hi]).
    """

    fixed_axis: int
    offset: float
    lo: float
    hi: float

    def __post_init__(self):
        if self.fixed_axis not in (0, 1):
            raise ValueError("fixed_axis must be 0 (x pinned) or 1 (y pinned)")
        if not self.lo < self.hi:
            raise ValueError("need lo < hi")

    @classmethod
    def vertical(cls, x: float, ylo: float, yhi: float) -> "Segment":
        return cls(0, x, ylo, yhi)

    @classmethod
    def horizontal(cls, y: float, xlo: float, xhi: float) -> "Segment":
        return cls(1, y, xlo, xhi)

    @property
    def free_axis(self) -> int:
        return 1 - self.fixed_axis

    @property
    def orientation(self) -> str:
        return "vertical" if self.fixed_axis == 0 else "horizontal"

    @property
    def axis_coord(self) -> float:
        """The pinned coordinate's value (alias of ``offset``)."""
        return self.offset

    @property
    def span(self) -> tuple[float, float]:
        return (self.lo, self.hi)

    def clearance(self, v: float) -> float:
        """Distance from v to the span [lo, hi] (0 inside)."""
        if v < self.lo:
            return self.lo - v
        if v > self.hi:
            return v - self.hi
        return 0.0

    def interior_depth(self, v: float) -> float:
        """How deep v sits inside the span (negative outside)."""
        return min(v - self.lo, self.hi - v)

    def point_at(self, v: float) -> tuple[float, float]:
        """The segment point whose free coordinate is v."""
        return (self.offset, v) if self.fixed_axis == 0 else (v, self.offset)


def square_boundary(x0: float, y0: float, side: float) -> list[Segment]:
    """The four sides of an axis-aligned square, indexed left, right,
    bottom, top."""
    if side <= 0.0:
        raise ValueError("need side > 0")
    return [
        Segment.vertical(x0, y0, y0 + side),
        Segment.vertical(x0 + side, y0, y0 + side),
        Segment.horizontal(y0, x0, x0 + side),
        Segment.horizontal(y0 + side, x0, x0 + side),
    ]


class PlanarPath:
    """A planar Brownian path: origin + (B_x(t), B_y(t)) with independent
    coordinate paths.

    Sampled construction gives each coordinate its own block of streams
    (y offset by 2^19 windows by default, matching the solver's allocation);
    ``from_paths`` pairs any two existing paths, e.g. forced unit-interval
    paths for oracle tests.
    """

    __slots__ = ("x", "y", "start")

    def __init__(self, seed: int, base_stream: int = 0,
                 start: tuple[float, float] = (0.0, 0.0),
                 y_stream_offset: int = 1 << 19):
        self.x = ExtendedPath(seed, base_stream)
        self.y = ExtendedPath(seed, base_stream + y_stream_offset)
        self.start = (float(start[0]), float(start[1]))

    @classmethod
    def from_paths(cls, x, y, start: tuple[float, float] = (0.0, 0.0)) -> "PlanarPath":
        pp = cls.__new__(cls)
        pp.x = x
        pp.y = y
        pp.start = (float(start[0]), float(start[1]))
        return pp

    @property
    def x_path(self):
        return self.x

    @property
    def y_path(self):
        return self.y

    def coordinate(self, axis: int):
        return self.x if axis == 0 else self.y

    def position(self, t: float, level: int = 24, c: float = DEFAULT_C):
        """(x, y) enclosures at time t."""
        ex = self.x.eval(t, level, c)
        ey = self.y.eval(t, level, c)
        ox, oy = self.start
        return (
            type(ex)(ox + ex.lo, ox + ex.hi, ex.level, ex.confidence),
            type(ey)(oy + ey.lo, oy + ey.hi, ey.level, ey.confidence),
        )


def _unit_coordinates(pp: PlanarPath) -> bool:
    return isinstance(pp.x, PathCoefficients) and isinstance(pp.y, PathCoefficients)


def _slope_bound(path) -> float | None:
    """Exact Lipschitz constant for a forced piecewise-linear path, else None."""
    if isinstance(path, PathCoefficients) and path.forced:
        n = path.max_tent_level + 1
        g = path.grid(n)
        worst = 0.0
        for k in range(g.size - 1):
            d = abs(g[k + 1] - g[k])
            if d > worst:
                worst = d
        return worst * (1 << n)
    return None


def _free_range(path, origin, t0, t1, c, max_level, max_nodes):
    """Outer bounds on origin + path(t) over [t0, t1], with confidence.

    The range of the coordinate over the whole bracket is what certifies a
    hit or a miss at a crossing whose time is only known to lie inside it;
    it is far tighter than a worst-case modulus pad around the midpoint."""
    t0 = max(t0, 0.0)
    if isinstance(path, PathCoefficients):
        t1 = min(t1, 1.0)
    if t1 <= t0:
        e = path.eval(t0, level_for_tail(1e-5, max_level - 1), c)
        return origin + e.lo, origin + e.hi, e.confidence
    eps = max(3e-5, 0.02 * math.sqrt(t1 - t0))
    emax = path_max(path, t0, t1, eps=eps, c=c, max_level=max_level,
                    max_nodes=max_nodes)
    emin = path_min(path, t0, t1, eps=eps, c=c, max_level=max_level,
                    max_nodes=max_nodes)
    return origin + emin.lo, origin + emax.hi, min(emin.confidence, emax.confidence)


def _solve_pad(budget: float, c: float) -> float:
    """Largest h <= 1/4 with modulus_pad(h) <= budget (pad is monotone there)."""
    if modulus_pad(0.25, c) <= budget:
        return 0.25
    lo, hi = 0.0, 0.25
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        if modulus_pad(mid, c) <= budget:
            lo = mid
        else:
            hi = mid
    return lo


def _step_for_clearance(m: float, c: float, lips: float | None, t: float) -> float:
    """Largest step h from t during which the free coordinate provably moves
    less than m/2.

    Slope-bounded (forced) paths give h = m/(2L) outright.  Sampled paths
    solve pad(h) = m/2, halving the budget to m/4 if the step would straddle
    a window boundary (two in-window increments)."""
    if lips is not None:
        if lips == 0.0:
            return 0.25
        return min(0.25, 0.5 * m / lips)
    h = _solve_pad(0.5 * m, c)
    if math.floor(t) != math.floor(t + h):
        h = _solve_pad(0.25 * m, c)
    return h


# crossing-time slack ladder.  The first rung takes the caller's slack
# as-is; deeper rungs only run when the free coordinate straddles a span
# edge at the current bracket width.  Sampled paths stall out near 1e-9 (the
# certificate pads bottom out, and a squeeze that stalls simply keeps its
# wider bracket); forced paths squeeze all the way down.  The free
# coordinate's resolution at the bottom is a few 1e-5 — hits with less
# interior clearance than that are refused, not guessed.
_RUNGS = (math.inf, 1e-8, 1e-9, 5e-12)

_HIT, _MISS, _UNKNOWN = 1, -1, 0


class _Candidate:
    """One classified line crossing of a segment's support line."""

    __slots__ = ("rec", "kind", "clearance", "free_value", "depth", "conf")

    def __init__(self, rec, kind, clearance, free_value, depth, conf):
        self.rec = rec
        self.kind = kind
        self.clearance = clearance
        self.free_value = free_value
        self.depth = depth
        self.conf = conf


def _next_candidate(pp, seg, restart, horizon, eps, c, max_level, max_nodes):
    """First crossing of the segment's line after `restart`, classified.
    Returns None when the line is certified uncrossed before the horizon.

    A squeeze that stalls (a near-touch of the line at the certificate
    floor) still yields a sound bracket [clear-through, certified-crossing];
    the classification then works with the free coordinate's range over the
    whole bracket, so ambiguity about exactly *when* the line is first
    crossed does not block deciding *whether* the segment is hit."""
    pinned = pp.coordinate(seg.fixed_axis)
    free = pp.coordinate(seg.free_axis)
    target = seg.offset - pp.start[seg.fixed_axis]
    free_origin = pp.start[seg.free_axis]

    last = None
    miss = None
    for slack_target in _RUNGS:
        eps_t = min(eps, slack_target)
        r = _crossing_query(pinned, restart, horizon, target, target, eps_t,
                            True, c, max_level, max_nodes)
        if r.decision is Decision.NO_ZERO:
            return None
        wlo, whi = r.witness
        if r.decision is Decision.HAS_ZERO:
            t, slack = r.time, r.slack
        elif whi < horizon:
            # stalled squeeze, but the right end is still a certified
            # crossing: the first crossing lies somewhere in the bracket
            t = 0.5 * (wlo + whi)
            slack = 0.5 * (whi - wlo)
        else:
            # unresolved stretch with no certain crossing behind it: a
            # barrier at wlo that only matters if nothing else hits earlier
            rec = HittingRecord(wlo, 0.0, r.level, r.confidence)
            return _Candidate(rec, _UNKNOWN, 0.0, 0.0, 0.0, r.confidence)
        lo, hi, fconf = _free_range(free, free_origin, t - slack, t + slack,
                                    c, max_level, max_nodes)
        conf = min(r.confidence, fconf)
        rec = HittingRecord(t, slack, r.level, conf)
        if lo > seg.lo and hi < seg.hi:
            mid = 0.5 * (lo + hi)
            return _Candidate(rec, _HIT, 0.0, mid, seg.interior_depth(mid), conf)
        if hi < seg.lo or lo > seg.hi:
            m = seg.lo - hi if hi < seg.lo else lo - seg.hi
            miss = _Candidate(rec, _MISS, m, 0.5 * (lo + hi), -m, conf)
            # a clearance smaller than the enclosure's own width is an
            # artifact of coarseness; deepen so the hit-free step is sized
            # by the true distance
            if m > hi - lo:
                return miss
        last = rec
        if slack <= 0.0:
            break  # exact crossing time; nothing left to squeeze
    if miss is not None:
        return miss
    return _Candidate(last, _UNKNOWN, 0.0, 0.0, 0.0, last.confidence)


def _default_horizon(pp, segments) -> float:
    """8x the squared diameter of the segments' bounding box (the diffusive
    time to wander across it), capped at 1 for unit-interval coordinates."""
    xs, ys = [], []
    for s in segments:
        (xs if s.fixed_axis == 0 else ys).append(s.offset)
        (ys if s.fixed_axis == 0 else xs).extend((s.lo, s.hi))
    dx = max(xs) - min(xs)
    dy = max(ys) - min(ys)
    h = 8.0 * (dx * dx + dy * dy)
    if h <= 0.0:
        h = 1.0
    if _unit_coordinates(pp):
        h = min(h, 1.0)
    return h


def _first_hit(pp, segments, q, eps, horizon, c, max_level, max_nodes,
               max_restarts):
    if horizon is None:
        horizon = _default_horizon(pp, segments)
    if not horizon > q:
        raise ValueError("need horizon > q")

    # Scan an expanding time window rather than the whole horizon at once: a
    # segment whose line is grazed far in the future must not burn refinement
    # budget when another segment is hit early.  A cached None means "no
    # crossing before the current window end", which the next expansion
    # extends; the restart frontier then resumes at the settled end.
    restarts = [q] * len(segments)
    cands: list[_Candidate | None | bool] = [False] * len(segments)  # False = stale
    conf = 1.0
    work = 0
    wend = min(horizon, q + max((horizon - q) / 64.0, 2.0**-8))

    while True:
        best = None
        best_i = -1
        for i, seg in enumerate(segments):
            if cands[i] is False or (cands[i] is None and restarts[i] < wend):
                if restarts[i] >= wend:
                    cands[i] = None  # nothing left of this window to scan
                    continue
                cands[i] = _next_candidate(pp, seg, restarts[i], wend, eps,
                                           c, max_level, max_nodes)
                work += 1
                if work > max_restarts:
                    raise RefinementBudgetError(
                        f"first passage unresolved after {work} crossings"
                    )
                if cands[i] is None:
                    restarts[i] = wend  # certified clear up to the window end
            cand = cands[i]
            if cand is None:
                continue
            # order by earliest possible time: a wide bracket may hide a
            # passage earlier than its midpoint
            if best is None or (cand.rec.time - cand.rec.slack
                                < best.rec.time - best.rec.slack):
                best = cand
                best_i = i
        if best is None:
            if wend >= horizon:
                return None  # every segment certified unhit before the horizon
            wend = min(horizon, q + 2.0 * (wend - q))
            continue

        if best.kind == _UNKNOWN:
            raise RefinementBudgetError(
                f"crossing at t={best.rec.time:.12g} grazes the span edge of "
                f"segment {best_i} beyond the refinement ladder"
            )
        if best.kind == _MISS:
            seg = segments[best_i]
            lips = _slope_bound(pp.coordinate(seg.free_axis))
            # the free coordinate is clear over the whole crossing bracket;
            # the certified step extends that clearance past its right end
            tend = best.rec.time + best.rec.slack
            h = _step_for_clearance(best.clearance, c, lips, tend)
            if h <= 0.0:
                raise RefinementBudgetError(
                    f"stalled at t={tend:.12g}: clearance "
                    f"{best.clearance:.3g} gives no certified step"
                )
            conf = min(conf, best.conf)
            restarts[best_i] = tend + 0.75 * h
            cands[best_i] = False
            continue

        # a hit — resolve corner ties among candidates within overlapping slack
        winner, w_i = best, best_i
        for i, cand in enumerate(cands):
            if i == w_i or cand is None or cand is False or cand.kind != _HIT:
                continue
            if abs(cand.rec.time - best.rec.time) <= cand.rec.slack + best.rec.slack:
                if cand.depth > winner.depth or (
                    cand.depth == winner.depth and i < w_i
                ):
                    winner, w_i = cand, i
        seg = segments[w_i]
        conf = min(conf, winner.conf)
        return HittingRecord(
            winner.rec.time,
            winner.rec.slack,
            winner.rec.level,
            conf,
            point=seg.point_at(winner.free_value),
            segment=w_i,
        )


def first_hit_segment(
    pp: PlanarPath,
    segment: Segment,
    q: float = 0.0,
    eps: float = 1e-6,
    horizon: float | None = None,
    c: float = DEFAULT_C,
    max_level: int = MAX_LEVEL,
    max_nodes: int = 500_000,
    max_restarts: int = 20_000,
) -> HittingRecord | None:
    """First time after q the planar path reaches the segment, or None if
    certified not to happen before the horizon.

    The record's point is the certified hit location (free coordinate to the
    evaluation resolution) and ``segment`` is 0.  Raises
    RefinementBudgetError when a crossing grazes the span edge too finely to
    classify.
    """
    r = _first_hit(pp, [segment], q, eps, horizon, c, max_level, max_nodes,
                   max_restarts)
    return r


def first_hit_boundary(
    pp: PlanarPath,
    segments: list[Segment],
    q: float = 0.0,
    eps: float = 1e-6,
    horizon: float | None = None,
    c: float = DEFAULT_C,
    max_level: int = MAX_LEVEL,
    max_nodes: int = 500_000,
    max_restarts: int = 20_000,
) -> HittingRecord | None:
    """First passage to a union of segments (e.g. a square boundary).

    ``segment`` on the record is the index of the side hit; corner-grazing
    resolves to the segment whose interior holds the hit point deepest, ties
    to the lower index.
    """
    if not segments:
        raise ValueError("need at least one segment")
    return _first_hit(pp, list(segments), q, eps, horizon, c, max_level,
                      max_nodes, max_restarts)
