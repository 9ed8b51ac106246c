"""Compiled hot loops for the cell-refinement searches on sampled paths.

These are line-for-line ports of the pure-Python engines in ``extrema``,
specialized to sampled paths (coefficients fetched straight from the
counter-indexed generator, no materialized arrays).  They must stay
arithmetically identical to the Python side: same expression shapes, same
evaluation order, knots built by the same midpoint displacement in the
transformed space sign*B + offset.  The crossing kernel also preserves the
traversal order (leftmost cell first, right child pushed before left), so
decisions, witnesses, and reported times agree bit for bit with the
reference engine.

Forced paths keep using the Python engine — they carry explicit coefficient
arrays and exact truncation tails that have no business being baked into a
kernel signature.
"""

from __future__ import annotations

import numpy as np
from numba import njit

from .rng import normal_at_u64

LN2 = 0.6931471805599453
_SQRT_HALF = np.sqrt(0.5)

# crossing-state codes, matching extrema._POS/_NEG/_UNKNOWN
_POS, _NEG, _UNKNOWN = 1, -1, 0

# outcome codes shared with the wrappers
OK = 0
BUDGET = 1
OVERFLOW = 2

NO = 0
HAS = 1
UNDECIDED = 2

_STACK_CAP = 8192


@njit(cache=True, inline="always")
def _coeff(seed, stream, n, k):
    # tent (n, k) sits at counter 2^n + k; the ramp is counter 0
    return normal_at_u64(seed, stream, np.uint64((1 << n) + k))


@njit(cache=True, inline="always")
def _peak(n):
    base = 2.0 ** float(-(n >> 1) - 1)
    if n & 1 == 0:
        return base
    return base * _SQRT_HALF


@njit(cache=True, inline="always")
def _pad(h, c):
    if h > 0.25:
        h = 0.25
    return c * np.sqrt(h * np.log(1.0 / h))


@njit(cache=True, inline="always")
def _tail(n, c):
    return c * np.sqrt(2.0 ** (-n) * n * LN2)


@njit(cache=True)
def _partial(seed, stream, t, level):
    """Partial sum (ramp + tents through `level`) at one point."""
    acc = normal_at_u64(seed, stream, np.uint64(0)) * t
    for i in range(level + 1):
        x = t * (1 << i)
        j = int(x)
        if j >= (1 << i):
            j = (1 << i) - 1
        s = x - j
        if 0.0 < s < 1.0:
            acc += _coeff(seed, stream, i, j) * (1.0 - abs(2.0 * s - 1.0)) * _peak(i)
    return acc


@njit(cache=True)
def _eval_pair(seed, stream, t, level, c):
    """(lo, hi) enclosure of the raw path at t, mirroring sampled-path eval:
    exact at dyadic points of resolution <= level + 1, else the tail bound."""
    m = 0
    x = t
    while x != np.floor(x):
        x *= 2.0
        m += 1
        if m > 62:
            m = 63
            break
    if m <= level + 1:
        lv = level if level < m - 1 else m - 1
        v = _partial(seed, stream, t, lv)
        return v, v
    v = _partial(seed, stream, t, level)
    tl = _tail(level + 1, c)
    return v - tl, v + tl


@njit(cache=True)
def _grid_transformed(seed, stream, n, sign, offset):
    """Values of sign*B + offset at the 2^n + 1 level-n knots, by midpoint
    displacement carried out in the transformed space (same rounding as the
    Python window, which seeds sign*B(0)+offset and sign*B(1)+offset and
    displaces with sign*coeff)."""
    size = (1 << n) + 1
    v = np.empty(size)
    v[0] = offset
    v[size - 1] = sign * normal_at_u64(seed, stream, np.uint64(0)) + offset
    step = size - 1
    for i in range(n):
        half = step >> 1
        pk = _peak(i)
        idx = 0
        k = 0
        while idx + step < size:
            v[idx + half] = 0.5 * (v[idx] + v[idx + step]) + sign * _coeff(seed, stream, i, k) * pk
            idx += step
            k += 1
        step = half
    return v


@njit(cache=True)
def _knot_transformed(seed, stream, n, k, sign, offset):
    """Value of sign*B + offset at the single knot k * 2^-n, descending the
    midpoint displacement along the knot's ancestor chain — the same
    arithmetic as the full grid, one knot at a time."""
    vl = offset
    vr = sign * normal_at_u64(seed, stream, np.uint64(0)) + offset
    if n == 0:
        return vl if k == 0 else vr
    kk = k
    right = False
    if kk == (1 << n):
        kk -= 1
        right = True
    for m in range(n):
        j = kk >> (n - m)
        vm = 0.5 * (vl + vr) + sign * _coeff(seed, stream, m, j) * _peak(m)
        if (kk >> (n - m - 1)) & 1:
            vl = vm
        else:
            vr = vm
    return vr if right else vl


@njit(cache=True)
def _grid_slice(seed, stream, n, k0, k1, sign, offset):
    """Transformed knot values for indices k0..k1 at level n.  Builds the
    whole window grid when the slice covers most of it; otherwise descends
    to each knot individually, so a deep base level over a tiny query
    interval never materializes the full 2^n grid."""
    m = k1 - k0
    out = np.empty(m + 1)
    if n <= 12 or m >= ((1 << n) >> 1):
        g = _grid_transformed(seed, stream, n, sign, offset)
        for i in range(m + 1):
            out[i] = g[k0 + i]
        return out
    for i in range(m + 1):
        out[i] = _knot_transformed(seed, stream, n, k0 + i, sign, offset)
    return out


@njit(cache=True, inline="always")
def _cell_hi(vl, vr, pad):
    # upper bound of the anchored two-sided cell certificate
    mn = vl if vl < vr else vr
    mx = vl if vl > vr else vr
    hi = mn + pad
    if hi < mx:
        hi = mx
    return hi


@njit(cache=True)
def max_unit(seed, stream, sign, offset, s0, s1, eps, c, n0, max_level, max_nodes):
    """Certified max of sign*B + offset over [s0, s1] within the unit window.

    Returns (lb, hi, deepest, status): an enclosure [lb, hi] with
    hi - lb <= eps when status == OK.  Depth-first with pruning against
    lb + eps; pruned and budget-blocked cells fold their upper bounds into
    hi, so the enclosure stays valid even on BUDGET.
    """
    scale = 1 << n0
    k0 = int(np.floor(s0 * scale))
    if k0 < 0:
        k0 = 0
    k1 = int(np.ceil(s1 * scale))
    if k1 > scale:
        k1 = scale
    if k1 <= k0:
        k1 = k0 + 1
    g = _grid_slice(seed, stream, n0, k0, k1, sign, offset)

    lb = -np.inf
    for k in range(k0, k1 + 1):
        t = k / scale
        if s0 <= t <= s1 and g[k - k0] > lb:
            lb = g[k - k0]

    # non-knot interval ends still lower-bound the max
    probe_level = max_level - 1 if max_level - 1 < 26 else 26
    for side in range(2):
        s = s0 if side == 0 else s1
        if s * scale != np.floor(s * scale):
            elo, ehi = _eval_pair(seed, stream, s, probe_level, c)
            a = sign * elo + offset
            b = sign * ehi + offset
            lo = a if a < b else b
            if lo > lb:
                lb = lo

    sn = np.empty(_STACK_CAP, np.int64)
    sk = np.empty(_STACK_CAP, np.int64)
    svl = np.empty(_STACK_CAP, np.float64)
    svr = np.empty(_STACK_CAP, np.float64)
    top = 0
    for k in range(k1 - 1, k0 - 1, -1):
        sn[top] = n0
        sk[top] = k
        svl[top] = g[k - k0]
        svr[top] = g[k - k0 + 1]
        top += 1

    hi_out = lb
    deepest = n0
    nodes = 0
    status = OK
    while top > 0:
        top -= 1
        n = sn[top]
        k = sk[top]
        vl = svl[top]
        vr = svr[top]
        ub = _cell_hi(vl, vr, _pad(2.0**-n, c))
        if ub - lb <= eps:
            if ub > hi_out:
                hi_out = ub
            continue
        if n >= max_level or nodes >= max_nodes:
            status = BUDGET
            if ub > hi_out:
                hi_out = ub
            continue
        if top + 2 > _STACK_CAP:
            return lb, hi_out, deepest, OVERFLOW
        nodes += 1
        vm = 0.5 * (vl + vr) + sign * _coeff(seed, stream, n, k) * _peak(n)
        nn = n + 1
        if nn > deepest:
            deepest = nn
        h = 2.0**-nn
        tm = (2 * k + 1) * h
        if s0 <= tm <= s1 and vm > lb:
            lb = vm
        for half in range(2):
            kk = 2 * k + half
            tl = kk * h
            tr = tl + h
            if tr <= s0 or tl >= s1:
                continue
            a = vl if half == 0 else vm
            b = vm if half == 0 else vr
            sn[top] = nn
            sk[top] = kk
            svl[top] = a
            svr[top] = b
            top += 1
    if hi_out < lb:
        hi_out = lb
    # a cell blocked at the budget is harmless if later knots raised lb
    # enough to absorb its bound
    if hi_out - lb <= eps:
        status = OK
    else:
        status = BUDGET
    return lb, hi_out, deepest, status


@njit(cache=True, inline="always")
def _sign_of(v, alo, ahi):
    if v > ahi:
        return _POS
    if v < alo:
        return _NEG
    return _UNKNOWN


@njit(cache=True)
def crossing_unit(seed, stream, offset, s0, s1, alo, ahi, eps, first, c, n0,
                  max_level, max_nodes):
    """Level-crossing search for B + offset over [s0, s1], mirroring the
    Python engine cell for cell (same order, same floats).

    Returns (code, wlo, whi, t, slack, deepest, pads_used, clipped, status):
    ``code`` is NO/HAS/UNDECIDED, witness/time/slack use NaN for absent,
    ``pads_used``/``clipped`` let the caller attach the right confidence,
    ``status`` flags stack overflow (caller reruns on the Python engine).
    """
    scale = 1 << n0
    k0 = int(np.floor(s0 * scale))
    if k0 < 0:
        k0 = 0
    k1 = int(np.ceil(s1 * scale))
    if k1 > scale:
        k1 = scale
    if k1 <= k0:
        k1 = k0 + 1
    g = _grid_slice(seed, stream, n0, k0, k1, 1.0, offset)
    exact = alo == ahi
    probe_level = max_level - 1 if max_level - 1 < 26 else 26

    # lazily computed sign states of the clipped interval ends
    p0 = 99
    p1 = 99

    sn = np.empty(_STACK_CAP, np.int64)
    sk = np.empty(_STACK_CAP, np.int64)
    svl = np.empty(_STACK_CAP, np.float64)
    svr = np.empty(_STACK_CAP, np.float64)
    top = 0
    for k in range(k1 - 1, k0 - 1, -1):
        sn[top] = n0
        sk[top] = k
        svl[top] = g[k - k0]
        svr[top] = g[k - k0 + 1]
        top += 1

    prefix = s0
    cap = np.inf
    evidence = np.inf
    evidence_exact_at = np.nan
    pads_used = False
    deepest = n0
    nodes = 0
    budget_out = False

    while top > 0:
        if first and evidence - prefix <= 2.0 * eps:
            break
        top -= 1
        n = sn[top]
        k = sk[top]
        vl = svl[top]
        vr = svr[top]
        h = 2.0**-n
        tl = k * h
        tr = tl + h
        if tl >= s1 or tr <= s0 or tl >= evidence:
            continue
        pad = _pad(h, c)
        mn = vl if vl < vr else vr
        mx = vl if vl > vr else vr
        lo = mx - pad
        if lo > mn:
            lo = mn
        hi = mn + pad
        if hi < mx:
            hi = mx
        if lo > ahi or hi < alo:
            pads_used = True
            if first:
                e = tr if tr < s1 else s1
                if e > cap:
                    e = cap
                if e > prefix:
                    prefix = e
            continue

        if exact:
            hit_t = np.nan
            if vl == alo and s0 <= tl <= s1:
                hit_t = tl
            elif vr == alo and s0 <= tr <= s1:
                hit_t = tr
            if hit_t == hit_t and hit_t < evidence:
                evidence = hit_t
                evidence_exact_at = hit_t
                if not first:
                    return HAS, hit_t, hit_t, hit_t, 0.0, deepest, pads_used, False, OK
                if hit_t == tl:
                    continue

        if tl >= s0:
            sl = _sign_of(vl, alo, ahi)
        else:
            if p0 == 99:
                elo, ehi = _eval_pair(seed, stream, s0, probe_level, c)
                p0 = _sign_of_pair(elo + offset, ehi + offset, alo, ahi)
            sl = p0
        if tr <= s1:
            sr = _sign_of(vr, alo, ahi)
        else:
            if p1 == 99:
                elo, ehi = _eval_pair(seed, stream, s1, probe_level, c)
                p1 = _sign_of_pair(elo + offset, ehi + offset, alo, ahi)
            sr = p1
        wl = tl if tl > s0 else s0
        wr = tr if tr < s1 else s1
        if sl * sr == -1:
            if wr < evidence:
                evidence = wr
            if not first:
                clipped = tl < s0 or tr > s1
                return HAS, wl, wr, np.nan, np.nan, deepest, pads_used, clipped, OK
        if n >= max_level or nodes >= max_nodes:
            budget_out = True
            if first:
                e = tl if tl > s0 else s0
                if e < cap:
                    cap = e
            continue
        if top + 2 > _STACK_CAP:
            return UNDECIDED, prefix, s1, np.nan, np.nan, deepest, pads_used, False, OVERFLOW
        nodes += 1
        vm = 0.5 * (vl + vr) + _coeff(seed, stream, n, k) * _peak(n)
        nn = n + 1
        if nn > deepest:
            deepest = nn
        kk = 2 * k
        sn[top] = nn
        sk[top] = kk + 1
        svl[top] = vm
        svr[top] = vr
        top += 1
        sn[top] = nn
        sk[top] = kk
        svl[top] = vl
        svr[top] = vm
        top += 1

    if first:
        gap = evidence - prefix
        if evidence < np.inf and gap <= 2.0 * eps:
            if evidence_exact_at == prefix:
                t = evidence_exact_at
            else:
                t = 0.5 * (prefix + evidence)
            slack = 0.5 * (gap if gap > 0.0 else 0.0)
            return HAS, prefix, evidence, t, slack, deepest, pads_used, False, OK
        if evidence < np.inf or budget_out or top > 0:
            e = evidence if evidence < s1 else s1
            return UNDECIDED, prefix, e, np.nan, np.nan, deepest, pads_used, False, OK
        return NO, np.nan, np.nan, np.nan, np.nan, deepest, pads_used, False, OK
    if budget_out:
        return UNDECIDED, prefix, s1, np.nan, np.nan, deepest, pads_used, False, OK
    return NO, np.nan, np.nan, np.nan, np.nan, deepest, pads_used, False, OK


@njit(cache=True, inline="always")
def _sign_of_pair(lo, hi, alo, ahi):
    if lo > ahi:
        return _POS
    if hi < alo:
        return _NEG
    return _UNKNOWN


# ---------------------------------------------------------------------------
# planar exit walker
#
# The Dirichlet sampler needs first-exit points for hundreds of thousands of
# planar paths, far beyond what the generic segment solver can do in Python.
# This engine specializes the same cell certificate to a grid-aligned region:
# the interior is a bitmap of dyadic squares, so "this time cell cannot
# contain an exit" becomes a rectangle-of-cells query answered in O(1) from a
# summed-area table.  Paths are the usual midpoint-displacement trees, one
# stream per coordinate per unit window, so trajectories agree bit for bit
# with PlanarPath on the same (seed, stream) layout.

W_EXIT = 0
W_SURVIVE = 1
W_BUDGET = 2


@njit(cache=True, inline="always")
def _rect_all_interior(mask, pref, gi0, gj0, res, xlo, xhi, ylo, yhi):
    """True when every grid square meeting [xlo,xhi] x [ylo,yhi] is interior."""
    scale = float(1 << res)
    ia = int(np.floor(xlo * scale)) - gi0
    ib = int(np.floor(xhi * scale)) - gi0
    ja = int(np.floor(ylo * scale)) - gj0
    jb = int(np.floor(yhi * scale)) - gj0
    if ia < 0 or ja < 0 or ib >= mask.shape[0] or jb >= mask.shape[1]:
        return False
    want = (ib - ia + 1) * (jb - ja + 1)
    got = pref[ib + 1, jb + 1] - pref[ia, jb + 1] - pref[ib + 1, ja] + pref[ia, ja]
    return got == want


@njit(cache=True)
def _chord_exit(mask, gi0, gj0, res, xl, yl, xr, yr):
    """First crossing of the chord (xl,yl)->(xr,yr) into a non-interior
    square, marched edge by edge along the grid.

    Returns (hit, frac, px, py, ci, cj, side): frac is the parameter along
    the chord, (px, py) the crossing point (exactly on a grid line), (ci, cj)
    the absolute index of the interior square being left and side its crossed
    edge (0 left, 1 right, 2 bottom, 3 top).  side == -1 flags a start point
    that is not interior; callers treat that as a budget failure rather than
    guess an attribution.
    """
    scale = float(1 << res)
    h = 1.0 / scale
    ci = int(np.floor(xl * scale)) - gi0
    cj = int(np.floor(yl * scale)) - gj0
    ni = mask.shape[0]
    nj = mask.shape[1]
    if ci < 0 or cj < 0 or ci >= ni or cj >= nj or mask[ci, cj] == 0:
        return True, 0.0, xl, yl, gi0 + ci, gj0 + cj, -1
    dx = xr - xl
    dy = yr - yl
    for _ in range(256):
        if dx > 0.0:
            sx = ((gi0 + ci + 1) * h - xl) / dx
        elif dx < 0.0:
            sx = ((gi0 + ci) * h - xl) / dx
        else:
            sx = 2.0
        if dy > 0.0:
            sy = ((gj0 + cj + 1) * h - yl) / dy
        elif dy < 0.0:
            sy = ((gj0 + cj) * h - yl) / dy
        else:
            sy = 2.0
        s = sx if sx < sy else sy
        if s >= 1.0:
            return False, 0.0, 0.0, 0.0, 0, 0, 0
        if sx <= sy:
            if dx > 0.0:
                ti = ci + 1
                px = (gi0 + ci + 1) * h
                side = 1
            else:
                ti = ci - 1
                px = (gi0 + ci) * h
                side = 0
            py = yl + s * dy
            if ti < 0 or ti >= ni or mask[ti, cj] == 0:
                return True, s, px, py, gi0 + ci, gj0 + cj, side
            ci = ti
        else:
            if dy > 0.0:
                tj = cj + 1
                py = (gj0 + cj + 1) * h
                side = 3
            else:
                tj = cj - 1
                py = (gj0 + cj) * h
                side = 2
            px = xl + s * dx
            if tj < 0 or tj >= nj or mask[ci, tj] == 0:
                return True, s, px, py, gi0 + ci, gj0 + cj, side
            cj = tj
    return True, 0.0, xl, yl, gi0 + ci, gj0 + cj, -1


@njit(cache=True)
def _window_exit(seed, sx, sy, offx, offy, mask, pref, gi0, gj0, res,
                 pads, n0, deep, max_nodes, sn, sk, sxl, sxr, syl, syr):
    """One unit window of the exit walk, starting from (offx, offy).

    Depth-first over time cells, leftmost first.  A cell whose two-coordinate
    enclosure rectangle sits wholly in interior squares is discarded; others
    split by midpoint displacement down to level ``deep``, where the knot
    chord is marched across the grid to attribute the crossing.  A chord that
    stays interior (the enclosure grazed the boundary but the path samples
    did not leave) is discarded too: by then the enclosure width is below the
    hit resolution, so such excursions are beneath attribution scale.

    Returns (code, t, px, py, ci, cj, side, endx, endy, nodes); endx/endy
    carry the window endpoint when code == W_SURVIVE.
    """
    m0 = 1 << n0
    gx = _grid_slice(seed, sx, n0, 0, m0, 1.0, offx)
    gy = _grid_slice(seed, sy, n0, 0, m0, 1.0, offy)
    top = 0
    for k in range(m0 - 1, -1, -1):
        sn[top] = n0
        sk[top] = k
        sxl[top] = gx[k]
        sxr[top] = gx[k + 1]
        syl[top] = gy[k]
        syr[top] = gy[k + 1]
        top += 1
    cap = sn.shape[0]
    nodes = 0
    while top > 0:
        top -= 1
        n = sn[top]
        k = sk[top]
        xl = sxl[top]
        xr = sxr[top]
        yl = syl[top]
        yr = syr[top]
        pad = pads[n]
        mn = xl if xl < xr else xr
        mx = xl if xl > xr else xr
        xlo = mx - pad
        if xlo > mn:
            xlo = mn
        xhi = mn + pad
        if xhi < mx:
            xhi = mx
        mn = yl if yl < yr else yr
        mx = yl if yl > yr else yr
        ylo = mx - pad
        if ylo > mn:
            ylo = mn
        yhi = mn + pad
        if yhi < mx:
            yhi = mx
        if _rect_all_interior(mask, pref, gi0, gj0, res, xlo, xhi, ylo, yhi):
            continue
        if n >= deep:
            hit, frac, px, py, ci, cj, side = _chord_exit(
                mask, gi0, gj0, res, xl, yl, xr, yr)
            if hit:
                t = (k + frac) * 2.0**-n
                code = W_EXIT if side >= 0 else W_BUDGET
                return code, t, px, py, ci, cj, side, 0.0, 0.0, nodes
            continue
        nodes += 1
        if nodes > max_nodes or top + 2 > cap:
            return W_BUDGET, k * 2.0**-n, 0.0, 0.0, 0, 0, -1, 0.0, 0.0, nodes
        xm = 0.5 * (xl + xr) + _coeff(seed, sx, n, k) * _peak(n)
        ym = 0.5 * (yl + yr) + _coeff(seed, sy, n, k) * _peak(n)
        nn = n + 1
        kk = 2 * k
        sn[top] = nn
        sk[top] = kk + 1
        sxl[top] = xm
        sxr[top] = xr
        syl[top] = ym
        syr[top] = yr
        top += 1
        sn[top] = nn
        sk[top] = kk
        sxl[top] = xl
        sxr[top] = xm
        syl[top] = yl
        syr[top] = ym
        top += 1
    return W_SURVIVE, 1.0, 0.0, 0.0, 0, 0, -1, gx[m0], gy[m0], nodes


@njit(cache=True)
def walk_exit(seed, bx, by, x0, y0, mask, pref, gi0, gj0, res,
              c, n0, deep, max_nodes, window_cap):
    """First exit of the planar path from the interior squares.

    The path starts at (x0, y0); coordinate streams for window w are bx + w
    and by + w, matching PlanarPath(seed, base_stream=bx) when
    by == bx + PlanarPath's y-stream offset.  Windows chain through exact
    endpoint values until an exit is found or window_cap runs out.

    Returns (code, t, px, py, ci, cj, side, nodes) with t in global time.
    On W_SURVIVE the point fields carry the final position instead.
    """
    pads = np.empty(41)
    for m in range(41):
        pads[m] = _pad(2.0**-m, c)
    sn = np.empty(128, np.int64)
    sk = np.empty(128, np.int64)
    sxl = np.empty(128, np.float64)
    sxr = np.empty(128, np.float64)
    syl = np.empty(128, np.float64)
    syr = np.empty(128, np.float64)
    offx = x0
    offy = y0
    total = 0
    for w in range(window_cap):
        wu = np.uint64(w)
        code, t, px, py, ci, cj, side, ex, ey, nodes = _window_exit(
            seed, bx + wu, by + wu, offx, offy, mask, pref, gi0, gj0, res,
            pads, n0, deep, max_nodes - total, sn, sk, sxl, sxr, syl, syr)
        total += nodes
        if code == W_EXIT or code == W_BUDGET:
            return code, w + t, px, py, ci, cj, side, total
        offx = ex
        offy = ey
    return W_SURVIVE, float(window_cap), offx, offy, 0, 0, -1, total


@njit(cache=True)
def walk_exits_batch(seed, stride, y_off, x0, y0, mask, pref, gi0, gj0, res,
                     c, n0, deep, max_nodes, window_cap,
                     out_code, out_t, out_px, out_py, out_ci, out_cj,
                     out_side):
    """Run walk_exit for walkers 0..len(out_code)-1, walker w based at
    stream w * stride (y offset by y_off), filling the out arrays."""
    for w in range(out_code.shape[0]):
        base = np.uint64(w) * stride
        code, t, px, py, ci, cj, side, nodes = walk_exit(
            seed, base, base + y_off, x0, y0, mask, pref, gi0, gj0, res,
            c, n0, deep, max_nodes, window_cap)
        out_code[w] = code
        out_t[w] = t
        out_px[w] = px
        out_py[w] = py
        out_ci[w] = ci
        out_cj[w] = cj
        out_side[w] = side
