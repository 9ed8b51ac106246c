"""Dirichlet problems on dyadic square lattices, solved by exit sampling.

A domain is described from the outside in: a connected collection of closed
squares from the 2^-n grid (the "boundary squares") fences off part of the
plane.  Flood fill from a chosen interior point recovers the enclosed grid
squares; the segments separating them from the fence are where walkers can
land.  Boundary data lives on the fence squares and is transferred to each
segment from the square it faces, so the solver only ever sees a piecewise
constant function on a union of axis-aligned segments.

Harmonic measure does the rest: independent planar paths started at the
query point are run to their first exit, and the boundary values at the exit
points are averaged.  Exits come from a compiled descent over the same path
law the rest of the package uses, so results are reproducible from (seed,
walker index) alone and agree with :func:`bmkit.planar.first_hit_boundary`
trajectory for trajectory.
"""

from __future__ import annotations

import json
import math
from collections import deque
from dataclasses import dataclass
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np

from . import _kernels
from .extrema import RefinementBudgetError
from .planar import DEFAULT_C, PlanarPath, Segment, first_hit_boundary
from .rng import _u64, inverse_normal_cdf

Square = tuple[int, int]

#: a walker that has not left through the boundary after this many unit
#: windows is abandoned: the search horizon starts at one window and doubles
#: eight times before giving up.
WINDOW_CAP = 256

#: hits closer than 2^-(n+3) to a segment endpoint take the average of every
#: segment meeting that corner instead of a one-sided value
CORNER_ZONE_SHIFT = 3

_SIDES = ((-1, 0, 0), (1, 0, 1), (0, -1, 2), (0, 1, 3))


def square_of(x: Sequence[float], resolution: int) -> Square:
    """Index of the grid square containing the point x."""
    s = 1 << resolution
    return (int(math.floor(x[0] * s)), int(math.floor(x[1] * s)))


def _connected(squares: frozenset[Square]) -> bool:
    seen = set()
    stack = [next(iter(squares))]
    while stack:
        sq = stack.pop()
        if sq in seen:
            continue
        seen.add(sq)
        i, j = sq
        for di, dj, _ in _SIDES:
            nb = (i + di, j + dj)
            if nb in squares and nb not in seen:
                stack.append(nb)
    return len(seen) == len(squares)


@dataclass(frozen=True)
class SquaredDomain:
    """A grid-aligned enclosure: boundary squares from the 2^-resolution
    lattice plus a bounding box that flood fill must not escape.

    The squares must be edge-connected so the fence has no gaps a walker
    could slip through diagonally unnoticed; violations raise at
    construction time.
    """

    resolution: int
    boundary_squares: frozenset[Square]
    bbox: tuple[float, float, float, float]

    def __post_init__(self):
        if not 1 <= self.resolution <= 20:
            raise ValueError("resolution out of range")
        squares = frozenset((int(i), int(j)) for i, j in self.boundary_squares)
        if not squares:
            raise ValueError("need at least one boundary square")
        object.__setattr__(self, "boundary_squares", squares)
        if not _connected(squares):
            raise ValueError("boundary squares must be edge-connected")
        x0, y0, x1, y1 = self.bbox
        if not (x0 < x1 and y0 < y1):
            raise ValueError("bbox must be a nonempty rectangle")

    @classmethod
    def from_squares(cls, resolution: int,
                     squares: Iterable[Square],
                     bbox: tuple[float, float, float, float] | None = None,
                     ) -> "SquaredDomain":
        """Build from explicit square indices; bbox defaults to their hull
        plus a one-square margin."""
        sqs = frozenset((int(i), int(j)) for i, j in squares)
        if bbox is None:
            if not sqs:
                raise ValueError("need at least one boundary square")
            h = 2.0 ** -resolution
            imin = min(i for i, _ in sqs)
            imax = max(i for i, _ in sqs)
            jmin = min(j for _, j in sqs)
            jmax = max(j for _, j in sqs)
            bbox = ((imin - 1) * h, (jmin - 1) * h,
                    (imax + 2) * h, (jmax + 2) * h)
        return cls(resolution, sqs, bbox)

    @classmethod
    def from_signed_distance(cls, resolution: int,
                             sdf: Callable[[float, float], float],
                             bbox: tuple[float, float, float, float],
                             band: float = 1.5,
                             ) -> "SquaredDomain":
        """Mark every square in bbox whose center is within band grid
        steps of the zero set of a 1-Lipschitz signed distance function.

        With the default band, any curve point is at most h/2 from the
        center of the square containing it, so the marked squares cover the
        zero set and form a fence around its interior.
        """
        h = 2.0 ** -resolution
        x0, y0, x1, y1 = bbox
        squares = []
        for i in range(int(math.floor(x0 / h)), int(math.ceil(x1 / h))):
            for j in range(int(math.floor(y0 / h)), int(math.ceil(y1 / h))):
                if abs(sdf((i + 0.5) * h, (j + 0.5) * h)) <= band * h:
                    squares.append((i, j))
        return cls.from_squares(resolution, squares, bbox)

    def square_box(self, sq: Square) -> tuple[float, float, float, float]:
        h = 2.0 ** -self.resolution
        i, j = sq
        return (i * h, j * h, (i + 1) * h, (j + 1) * h)


def unit_square_domain(resolution: int) -> SquaredDomain:
    """The unit square [0,1]^2, fenced by one ring of squares just outside
    it.  Flood fill from any interior point recovers exactly the 2^n x 2^n
    grid squares of the open square."""
    n = resolution
    m = 1 << n
    ring = set()
    for k in range(-1, m + 1):
        ring.update({(-1, k), (m, k), (k, -1), (k, m)})
    h = 2.0 ** -n
    return SquaredDomain(n, frozenset(ring), (-2 * h, -2 * h, 1 + 2 * h, 1 + 2 * h))


@dataclass(frozen=True)
class BoundaryCondition:
    """Boundary data sampled on fence squares.

    ``values`` maps each boundary square to a real number and
    ``epsilon_of_n`` bounds, at each resolution, how much the data may jump
    between edge-adjacent squares -- the discretization error the transfer
    to segments can introduce.
    """

    values: Mapping[Square, float]
    epsilon_of_n: Callable[[int], float]

    @classmethod
    def from_function(cls, domain: SquaredDomain,
                      f: Callable[[float, float], float],
                      lipschitz: float) -> "BoundaryCondition":
        """Sample f at the boundary square centers; the Lipschitz bound
        caps adjacent-square jumps at lipschitz * 2^-n."""
        h = 2.0 ** -domain.resolution
        values = {
            (i, j): float(f((i + 0.5) * h, (j + 0.5) * h))
            for i, j in domain.boundary_squares
        }
        return cls(values, lambda n: lipschitz * 2.0 ** -n)

    def validate_against(self, domain: SquaredDomain) -> None:
        """Check coverage and the adjacent-square continuity bound."""
        missing = domain.boundary_squares - set(self.values)
        if missing:
            raise ValueError(f"no boundary value for {len(missing)} squares, "
                             f"e.g. {sorted(missing)[0]}")
        eps = self.epsilon_of_n(domain.resolution)
        for (i, j) in domain.boundary_squares:
            v = self.values[(i, j)]
            for di, dj, _ in _SIDES:
                nb = (i + di, j + dj)
                if nb in domain.boundary_squares:
                    jump = abs(v - self.values[nb])
                    if jump > eps + 1e-12:
                        raise ValueError(
                            f"boundary data jumps by {jump:.3g} between "
                            f"{(i, j)} and {nb}, above epsilon(n)={eps:.3g}")


class InteriorRegion:
    """The flood-filled inside of a :class:`SquaredDomain`.

    Knows its interior squares, the boundary segments separating them from
    the fence, and which fence square each segment faces.  Also owns the
    per-point walk cache: exits depend only on the region geometry, the
    start point and the seed, so one batch of walkers can price any number
    of boundary functions.
    """

    def __init__(self, resolution: int, squares: frozenset[Square],
                 segments: tuple[Segment, ...], owners: tuple[Square, ...]):
        self.resolution = resolution
        self.squares = squares
        self.boundary_segments = segments
        self.segment_owners = owners
        self._edge_to_segment = {}
        self._geometry_cache = None
        self._corner_cache = None
        self._walks: dict = {}

    def contains(self, x: Sequence[float]) -> bool:
        return square_of(x, self.resolution) in self.squares

    def _geometry(self):
        """Interior bitmap plus summed-area table for the exit kernel."""
        if self._geometry_cache is None:
            gi0 = min(i for i, _ in self.squares)
            gj0 = min(j for _, j in self.squares)
            ni = max(i for i, _ in self.squares) - gi0 + 1
            nj = max(j for _, j in self.squares) - gj0 + 1
            mask = np.zeros((ni, nj), np.uint8)
            for i, j in self.squares:
                mask[i - gi0, j - gj0] = 1
            pref = np.zeros((ni + 1, nj + 1), np.int64)
            pref[1:, 1:] = mask.astype(np.int64).cumsum(0).cumsum(1)
            self._geometry_cache = (mask, pref, gi0, gj0)
        return self._geometry_cache

    def _corners(self):
        """Segment-to-corner incidence, for averaging near-corner hits.

        Corners are grid vertices; a vertical segment at x = i*h over
        [j*h, (j+1)*h] touches vertices (i, j) and (i, j+1).  Returns
        (lo_ids, hi_ids, inc_corner, inc_seg, counts): per-segment corner
        ids at each end, the flat incidence lists, and how many segments
        meet each corner.
        """
        if self._corner_cache is None:
            n = self.resolution
            scale = 1 << n
            ids: dict[Square, int] = {}
            lo_ids = np.empty(len(self.boundary_segments), np.int64)
            hi_ids = np.empty(len(self.boundary_segments), np.int64)
            for s, seg in enumerate(self.boundary_segments):
                a = int(round(seg.offset * scale))
                b = int(round(seg.lo * scale))
                if seg.fixed_axis == 0:
                    clo, chi = (a, b), (a, b + 1)
                else:
                    clo, chi = (b, a), (b + 1, a)
                lo_ids[s] = ids.setdefault(clo, len(ids))
                hi_ids[s] = ids.setdefault(chi, len(ids))
            inc_corner = np.concatenate([lo_ids, hi_ids])
            inc_seg = np.concatenate([np.arange(len(lo_ids)), np.arange(len(hi_ids))])
            counts = np.zeros(len(ids), np.int64)
            np.add.at(counts, inc_corner, 1)
            self._corner_cache = (lo_ids, hi_ids, inc_corner, inc_seg, counts)
        return self._corner_cache


def flood_fill_interior(domain: SquaredDomain, x: Sequence[float]) -> InteriorRegion:
    """Grid squares reachable from x without crossing a boundary square.

    Raises if x sits inside the fence itself or if the fill leaks out of
    the domain's bounding box (an unenclosed domain).  The result is
    maximal, so the square across any boundary segment is always a fence
    square -- the fact the boundary-value transfer relies on.
    """
    n = domain.resolution
    start = square_of(x, n)
    if start in domain.boundary_squares:
        raise ValueError(f"start point {tuple(x)} lies in a boundary square")
    h = 2.0 ** -n
    x0, y0, x1, y1 = domain.bbox
    imin = int(math.floor(x0 / h))
    imax = int(math.ceil(x1 / h)) - 1
    jmin = int(math.floor(y0 / h))
    jmax = int(math.ceil(y1 / h)) - 1
    if not (imin <= start[0] <= imax and jmin <= start[1] <= jmax):
        raise ValueError(f"start point {tuple(x)} lies outside the bbox")

    seen = {start}
    queue = deque([start])
    while queue:
        i, j = queue.popleft()
        for di, dj, _ in _SIDES:
            nb = (i + di, j + dj)
            if nb in seen or nb in domain.boundary_squares:
                continue
            if not (imin <= nb[0] <= imax and jmin <= nb[1] <= jmax):
                raise ValueError(
                    "flood fill escaped the bbox: the boundary squares do "
                    "not enclose the start point")
            seen.add(nb)
            queue.append(nb)

    segments = []
    owners = []
    keys = []
    for i, j in sorted(seen):
        for di, dj, side in _SIDES:
            nb = (i + di, j + dj)
            if nb in seen:
                continue
            if side == 0:
                seg = Segment.vertical(i * h, j * h, (j + 1) * h)
            elif side == 1:
                seg = Segment.vertical((i + 1) * h, j * h, (j + 1) * h)
            elif side == 2:
                seg = Segment.horizontal(j * h, i * h, (i + 1) * h)
            else:
                seg = Segment.horizontal((j + 1) * h, i * h, (i + 1) * h)
            segments.append(seg)
            owners.append(nb)
            keys.append((i, j, side))
    region = InteriorRegion(n, frozenset(seen), tuple(segments), tuple(owners))
    region._edge_to_segment = {k: s for s, k in enumerate(keys)}
    return region


def transfer_condition(region: InteriorRegion, bc: BoundaryCondition) -> np.ndarray:
    """Per-segment boundary values: each segment takes the value of the
    fence square it faces."""
    out = np.empty(len(region.boundary_segments))
    for s, owner in enumerate(region.segment_owners):
        try:
            out[s] = bc.values[owner]
        except KeyError:
            raise ValueError(f"no boundary value for square {owner}") from None
    return out


@dataclass(frozen=True)
class RefinementStep:
    """One level of a refining solve: the estimate and its total error
    budget (data jump + transfer scale + confidence half-width)."""

    resolution: int
    value: float
    err_budget: float


@dataclass(frozen=True)
class MonteCarloEstimate:
    """An exit-sampling average with its confidence half-width.

    ``n_samples`` counts the walkers actually averaged; ``lost_walkers``
    the ones abandoned (horizon or refinement budget exhausted) and
    excluded.  Refining solves attach their per-level trace.
    """

    mean: float
    half_width: float
    n_samples: int
    confidence: float
    seed: int
    lost_walkers: int = 0
    trace: tuple[RefinementStep, ...] | None = None
    converged: bool | None = None

    @property
    def interval(self) -> tuple[float, float]:
        return (self.mean - self.half_width, self.mean + self.half_width)


@dataclass(frozen=True)
class _WalkSet:
    """Cached exits for one (start point, walker family): segment index
    (-1 when lost), position along the segment, exit time."""

    seg: np.ndarray
    along: np.ndarray
    time: np.ndarray
    lost: int
    fallbacks: int


def _deep_level(eps_hit: float, c: float) -> int:
    """Descent depth at which the certificate rectangle is below the hit
    resolution, so chord attribution is exact to eps_hit."""
    for m in range(6, 41):
        if 2.0 * _kernels._pad(2.0 ** -m, c) <= eps_hit:
            return m
    return 40


def _reference_exit(region: InteriorRegion, x, w: int, seed: int,
                    eps_hit: float, c: float):
    """One walker through the generic segment solver (the slow engine)."""
    pp = PlanarPath(seed, base_stream=w << 20, start=(x[0], x[1]))
    try:
        rec = first_hit_boundary(pp, list(region.boundary_segments),
                                 eps=eps_hit, horizon=float(WINDOW_CAP), c=c)
    except RefinementBudgetError:
        return None
    if rec is None:
        return None
    seg = region.boundary_segments[rec.segment]
    along = rec.point[seg.free_axis]
    return rec.segment, along, rec.time


def _run_walks(region: InteriorRegion, x, n_walkers: int, seed: int,
               eps_hit: float, c: float, engine: str) -> _WalkSet:
    seg = np.full(n_walkers, -1, np.int64)
    along = np.zeros(n_walkers)
    time = np.zeros(n_walkers)
    lost = 0
    fallbacks = 0
    if engine == "reference":
        for w in range(n_walkers):
            hit = _reference_exit(region, x, w, seed, eps_hit, c)
            if hit is None:
                lost += 1
            else:
                seg[w], along[w], time[w] = hit
        return _WalkSet(seg, along, time, lost, fallbacks)

    mask, pref, gi0, gj0 = region._geometry()
    deep = _deep_level(eps_hit, c)
    code = np.empty(n_walkers, np.int64)
    t = np.empty(n_walkers)
    px = np.empty(n_walkers)
    py = np.empty(n_walkers)
    ci = np.empty(n_walkers, np.int64)
    cj = np.empty(n_walkers, np.int64)
    side = np.empty(n_walkers, np.int64)
    _kernels.walk_exits_batch(
        _u64(seed), _u64(1 << 20), _u64(1 << 19), float(x[0]), float(x[1]),
        mask, pref, gi0, gj0, region.resolution, c, 4, deep, 2_000_000,
        WINDOW_CAP, code, t, px, py, ci, cj, side)
    edge_map = region._edge_to_segment
    for w in range(n_walkers):
        if code[w] == _kernels.W_EXIT:
            s = edge_map.get((int(ci[w]), int(cj[w]), int(side[w])))
            if s is None:
                # attribution landed on an edge that is not a boundary
                # segment; should not happen, but re-walk rather than guess
                hit = _reference_exit(region, x, w, seed, eps_hit, c)
                fallbacks += 1
                if hit is None:
                    lost += 1
                else:
                    seg[w], along[w], time[w] = hit
                continue
            seg[w] = s
            along[w] = py[w] if side[w] <= 1 else px[w]
            time[w] = t[w]
        elif code[w] == _kernels.W_BUDGET:
            hit = _reference_exit(region, x, w, seed, eps_hit, c)
            fallbacks += 1
            if hit is None:
                lost += 1
            else:
                seg[w], along[w], time[w] = hit
        else:
            lost += 1
    return _WalkSet(seg, along, time, lost, fallbacks)


def _segment_values(region: InteriorRegion, psi: np.ndarray, walks: _WalkSet
                    ) -> np.ndarray:
    """Boundary value seen by each surviving walker, corner-smoothed."""
    ok = walks.seg >= 0
    seg = walks.seg[ok]
    along = walks.along[ok]
    lo_ids, hi_ids, inc_corner, inc_seg, counts = region._corners()
    sums = np.zeros(len(counts))
    np.add.at(sums, inc_corner, psi[inc_seg])
    corner_mean = sums / counts
    lo = np.array([s.lo for s in region.boundary_segments])
    hi = np.array([s.hi for s in region.boundary_segments])
    zone = 2.0 ** -(region.resolution + CORNER_ZONE_SHIFT)
    v = psi[seg]
    near_lo = along - lo[seg] <= zone
    near_hi = hi[seg] - along <= zone
    v = np.where(near_lo, corner_mean[lo_ids[seg]], v)
    v = np.where(near_hi & ~near_lo, corner_mean[hi_ids[seg]], v)
    return v


def solve_at(region: InteriorRegion, psi: Sequence[float], x: Sequence[float],
             n_walkers: int, seed: int, *, eps_hit: float = 1e-4,
             confidence: float = 0.99, c: float = DEFAULT_C,
             engine: str = "compiled") -> MonteCarloEstimate:
    """Estimate the harmonic extension of the segment data psi at x.

    Walkers are independent paths keyed by (seed, walker index); walks are
    cached on the region per start point, so solving for several boundary
    functions at the same x reuses one batch of exits.  Lost walkers are
    excluded from the average and reported on the estimate.  Accumulation
    uses exact summation, so the result does not depend on the order
    walkers are accounted in.

    The default 99% confidence interval uses z = 2.5758293035489004.
    """
    psi = np.asarray(psi, float)
    if psi.shape != (len(region.boundary_segments),):
        raise ValueError("psi must have one value per boundary segment")
    if not region.contains(x):
        raise ValueError(f"{tuple(x)} is not inside the region")
    if n_walkers < 2:
        raise ValueError("need at least two walkers")
    if not 0.0 < confidence < 1.0:
        raise ValueError("confidence must be in (0, 1)")
    if engine not in ("compiled", "reference"):
        raise ValueError("engine must be 'compiled' or 'reference'")
    if not 0.0 < eps_hit <= 0.125:
        raise ValueError("eps_hit out of range")

    key = (float(x[0]), float(x[1]), n_walkers, seed, eps_hit, c, engine)
    walks = region._walks.get(key)
    if walks is None:
        walks = _run_walks(region, x, n_walkers, seed, eps_hit, c, engine)
        region._walks[key] = walks

    v = _segment_values(region, psi, walks)
    m = len(v)
    if m == 0:
        raise RefinementBudgetError("every walker was lost before exiting")
    mean = math.fsum(v) / m
    if np.all(v == v[0]):
        half = 0.0
        mean = float(v[0])
    else:
        d = v - mean
        var = math.fsum(d * d) / (m - 1)
        z = inverse_normal_cdf(0.5 * (1.0 + confidence))
        half = z * math.sqrt(var / m)
    return MonteCarloEstimate(mean, half, m, confidence, seed,
                              lost_walkers=walks.lost)


def solve_refining(levels: Sequence[tuple[SquaredDomain, BoundaryCondition]],
                   x: Sequence[float], target_err: float, n_walkers: int,
                   seed: int, *, eps_hit: float = 1e-4,
                   confidence: float = 0.99, c: float = DEFAULT_C,
                   engine: str = "compiled") -> MonteCarloEstimate:
    """Solve on successive refinements until the error budget meets the
    target.

    Each level contributes epsilon(n) + 2^-n (data jump plus transfer
    scale) plus the confidence half-width to its budget; the first level
    whose budget is at or below target_err stops the ladder.  The returned
    estimate is the last level solved, with the full trace attached and
    ``converged`` saying whether the target was met.
    """
    if not levels:
        raise ValueError("need at least one refinement level")
    trace = []
    est = None
    converged = False
    for domain, bc in levels:
        region = flood_fill_interior(domain, x)
        psi = transfer_condition(region, bc)
        est = solve_at(region, psi, x, n_walkers, seed, eps_hit=eps_hit,
                       confidence=confidence, c=c, engine=engine)
        n = domain.resolution
        budget = bc.epsilon_of_n(n) + 2.0 ** -n + est.half_width
        trace.append(RefinementStep(n, est.mean, budget))
        if budget <= target_err:
            converged = True
            break
    return MonteCarloEstimate(est.mean, est.half_width, est.n_samples,
                              est.confidence, est.seed, est.lost_walkers,
                              trace=tuple(trace), converged=converged)


# --- JSON interchange -------------------------------------------------------

#: resolutions recorded in the epsilon table of a serialized boundary
#: condition
_EPS_TABLE_RANGE = range(1, 25)


def dump_domain(domain: SquaredDomain, bc: BoundaryCondition, fp) -> None:
    """Write a domain and its boundary condition as a JSON document.

    The epsilon callable is tabulated over resolutions 1..24; loading
    restores it as a lookup that rejects resolutions outside the table.
    """
    doc = {
        "resolution": domain.resolution,
        "boundary_squares": [list(sq) for sq in sorted(domain.boundary_squares)],
        "bc": {
            "values": [[i, j, bc.values[(i, j)]]
                       for i, j in sorted(bc.values)],
            "epsilon": [[n, bc.epsilon_of_n(n)] for n in _EPS_TABLE_RANGE],
        },
    }
    if hasattr(fp, "write"):
        json.dump(doc, fp, indent=2, sort_keys=True)
    else:
        with open(fp, "w") as f:
            json.dump(doc, f, indent=2, sort_keys=True)


def load_domain(fp) -> tuple[SquaredDomain, BoundaryCondition]:
    """Inverse of :func:`dump_domain`; validates the boundary data against
    the domain before returning."""
    if hasattr(fp, "read"):
        doc = json.load(fp)
    else:
        with open(fp) as f:
            doc = json.load(f)
    domain = SquaredDomain.from_squares(
        int(doc["resolution"]),
        [(int(i), int(j)) for i, j in doc["boundary_squares"]])
    values = {(int(i), int(j)): float(v) for i, j, v in doc["bc"]["values"]}
    table = {int(n): float(e) for n, e in doc["bc"]["epsilon"]}

    def epsilon_of_n(n: int, _table=table) -> float:
        try:
            return _table[n]
        except KeyError:
            raise ValueError(f"no epsilon tabulated for resolution {n}") from None

    bc = BoundaryCondition(values, epsilon_of_n)
    bc.validate_against(domain)
    return domain, bc
