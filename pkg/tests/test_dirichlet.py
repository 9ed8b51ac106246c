import io
import json
import math

import numpy as np
import pytest

from bmkit.dirichlet import (
    BoundaryCondition,
    MonteCarloEstimate,
    SquaredDomain,
    _WalkSet,
    dump_domain,
    flood_fill_interior,
    load_domain,
    solve_at,
    solve_refining,
    square_of,
    transfer_condition,
    unit_square_domain,
    _segment_values,
)


def ring_squares(lo, hi):
    """The fence of the [lo, hi) x [lo, hi) block: its cells minus the
    open inner block."""
    return [(i, j) for i in range(lo, hi) for j in range(lo, hi)
            if i in (lo, hi - 1) or j in (lo, hi - 1)]


def center(sq, n):
    h = 2.0 ** -n
    return ((sq[0] + 0.5) * h, (sq[1] + 0.5) * h)


# -- domains -----------------------------------------------------------------


def test_square_of():
    assert square_of((0.5, 0.5), 2) == (2, 2)
    assert square_of((0.999, 0.0), 3) == (7, 0)
    assert square_of((-0.1, 0.3), 3) == (-1, 2)


def test_domain_requires_connected_fence():
    with pytest.raises(ValueError, match="edge-connected"):
        SquaredDomain.from_squares(3, [(0, 0), (2, 2)])
    with pytest.raises(ValueError, match="boundary square"):
        SquaredDomain.from_squares(3, [])


def test_domain_resolution_range():
    with pytest.raises(ValueError):
        SquaredDomain.from_squares(0, [(0, 0)])
    with pytest.raises(ValueError):
        SquaredDomain.from_squares(25, [(0, 0)])


def test_default_bbox_has_margin():
    dom = SquaredDomain.from_squares(3, ring_squares(0, 4))
    x0, y0, x1, y1 = dom.bbox
    h = 2.0 ** -3
    assert x0 == -h and y0 == -h and x1 == 5 * h and y1 == 5 * h


def test_signed_distance_disk_covers_circle():
    n = 4
    sdf = lambda x, y: math.hypot(x, y) - 1.0
    dom = SquaredDomain.from_signed_distance(n, sdf, (-1.3, -1.3, 1.3, 1.3))
    h = 2.0 ** -n
    # every marked center is near the curve, and every curve point is
    # covered by a marked square (the 1-Lipschitz certification argument)
    for sq in dom.boundary_squares:
        assert abs(sdf(*center(sq, n))) <= 1.5 * h + 1e-12
    for k in range(200):
        theta = 2 * math.pi * k / 200
        assert square_of((math.cos(theta), math.sin(theta)), n) in dom.boundary_squares


# -- flood fill --------------------------------------------------------------


def test_ring_interior_inner_2x2():
    # 4x4 block, outer ring as fence: interior is the inner 2x2, with its
    # 8 perimeter edges as boundary segments
    dom = SquaredDomain.from_squares(3, ring_squares(0, 4))
    reg = flood_fill_interior(dom, center((1, 1), 3))
    assert reg.squares == frozenset({(1, 1), (1, 2), (2, 1), (2, 2)})
    assert len(reg.boundary_segments) == 8
    assert set(reg.segment_owners) <= dom.boundary_squares


def test_single_square_interior():
    dom = SquaredDomain.from_squares(3, ring_squares(0, 3))
    reg = flood_fill_interior(dom, center((1, 1), 3))
    assert reg.squares == frozenset({(1, 1)})
    assert len(reg.boundary_segments) == 4
    # the four segments frame the square [h, 2h] x [h, 2h]
    h = 2.0 ** -3
    offs = sorted((s.fixed_axis, s.offset) for s in reg.boundary_segments)
    assert offs == [(0, h), (0, 2 * h), (1, h), (1, 2 * h)]


def test_hole_in_fence_sealed_one_step_out():
    # fence of the 4x4 block with (1,0) knocked out and a patch row sealing
    # the gap from below: the fill flows into the pocket but no further
    squares = set(ring_squares(0, 4)) - {(1, 0)}
    squares |= {(0, -1), (1, -1), (2, -1)}
    dom = SquaredDomain.from_squares(4, squares)
    reg = flood_fill_interior(dom, center((2, 2), 4))
    assert reg.squares == frozenset(
        {(1, 1), (1, 2), (2, 1), (2, 2), (1, 0)})
    assert len(reg.boundary_segments) == 10


def test_flood_fill_start_independence():
    dom = SquaredDomain.from_squares(3, ring_squares(0, 4))
    a = flood_fill_interior(dom, center((1, 1), 3))
    b = flood_fill_interior(dom, center((2, 2), 3))
    assert a.squares == b.squares
    assert a.boundary_segments == b.boundary_segments
    assert a.segment_owners == b.segment_owners


def test_start_in_fence_raises():
    dom = SquaredDomain.from_squares(3, ring_squares(0, 4))
    with pytest.raises(ValueError, match="boundary square"):
        flood_fill_interior(dom, center((0, 0), 3))


def test_unenclosed_domain_raises():
    squares = set(ring_squares(0, 4)) - {(1, 0)}   # leaky fence
    dom = SquaredDomain.from_squares(3, squares)
    with pytest.raises(ValueError, match="enclose"):
        flood_fill_interior(dom, center((1, 1), 3))


def test_unit_square_domain_interior():
    dom = unit_square_domain(3)
    reg = flood_fill_interior(dom, (0.4, 0.6))
    assert len(reg.squares) == 64
    assert len(reg.boundary_segments) == 4 * 8
    for s in reg.boundary_segments:
        assert s.offset in (0.0, 1.0)


# -- boundary conditions and transfer ---------------------------------------


def test_bc_adjacency_validation():
    dom = SquaredDomain.from_squares(3, ring_squares(0, 3))
    values = {sq: 0.0 for sq in dom.boundary_squares}
    values[(0, 0)] = 1.0   # a unit jump against its ring neighbours
    bc = BoundaryCondition(values, lambda n: 0.01)
    with pytest.raises(ValueError, match="jumps"):
        bc.validate_against(dom)


def test_bc_missing_square():
    dom = SquaredDomain.from_squares(3, ring_squares(0, 3))
    values = {sq: 0.0 for sq in list(dom.boundary_squares)[:-1]}
    bc = BoundaryCondition(values, lambda n: 1.0)
    with pytest.raises(ValueError, match="no boundary value"):
        bc.validate_against(dom)


def test_from_function_meets_own_epsilon():
    dom = unit_square_domain(4)
    bc = BoundaryCondition.from_function(dom, lambda x, y: x * y, lipschitz=1.5)
    bc.validate_against(dom)


def test_transfer_picks_owner_value():
    dom = SquaredDomain.from_squares(3, ring_squares(0, 3))
    reg = flood_fill_interior(dom, center((1, 1), 3))
    values = {sq: float(10 * sq[0] + sq[1]) for sq in dom.boundary_squares}
    psi = transfer_condition(reg, BoundaryCondition(values, lambda n: 100.0))
    for s, owner in zip(psi, reg.segment_owners):
        assert s == values[owner]


def test_transfer_missing_value_raises():
    dom = SquaredDomain.from_squares(3, ring_squares(0, 3))
    reg = flood_fill_interior(dom, center((1, 1), 3))
    bc = BoundaryCondition({(0, 1): 1.0}, lambda n: 1.0)
    with pytest.raises(ValueError, match="no boundary value"):
        transfer_condition(reg, bc)


def test_transfer_of_coordinate_tracks_midpoints():
    # data sampled from (x, y) -> x lands within eps(n) + 2^-n of each
    # segment midpoint's x-coordinate
    n = 4
    dom = unit_square_domain(n)
    bc = BoundaryCondition.from_function(dom, lambda x, y: x, lipschitz=1.0)
    reg = flood_fill_interior(dom, (0.5, 0.5))
    psi = transfer_condition(reg, bc)
    tol = bc.epsilon_of_n(n) + 2.0 ** -n
    for s, seg in zip(psi, reg.boundary_segments):
        mid_x = seg.offset if seg.fixed_axis == 0 else 0.5 * (seg.lo + seg.hi)
        assert abs(s - mid_x) <= tol


def test_corner_zone_averages_adjoining_segments():
    # hits within 2^-(n+3) of a shared corner take the average of the two
    # segments meeting there; elsewhere the segment's own value rules.
    # Single-square interior: segments come out ordered left, right,
    # bottom, top, so with psi = [0, 1, 2, 3] the left side's lower corner
    # (shared with the bottom) averages to 1.0 and its upper corner
    # (shared with the top) to 1.5.
    n = 3
    dom = SquaredDomain.from_squares(n, ring_squares(0, 3))
    reg = flood_fill_interior(dom, center((1, 1), n))
    psi = np.array([0.0, 1.0, 2.0, 3.0])
    seg = reg.boundary_segments[0]
    assert seg.fixed_axis == 0 and seg.offset == 2.0 ** -n
    zone = 2.0 ** -(n + 3)
    mid = 0.5 * (seg.lo + seg.hi)
    walks = _WalkSet(
        np.array([0, 0, 0]),
        np.array([mid, seg.lo + 0.25 * zone, seg.hi - 0.25 * zone]),
        np.zeros(3), 0, 0)
    got = _segment_values(reg, psi, walks)
    assert got.tolist() == [0.0, 0.5 * (0.0 + 2.0), 0.5 * (0.0 + 3.0)]


# -- solve_at ----------------------------------------------------------------


def unit_region(n):
    dom = unit_square_domain(n)
    return dom, flood_fill_interior(dom, (0.5, 0.5))


def test_constant_data_is_exact():
    dom, reg = unit_region(3)
    psi = np.full(len(reg.boundary_segments), 0.7)
    est = solve_at(reg, psi, (0.5, 0.5), 500, seed=11)
    assert est.mean == 0.7
    assert est.half_width == 0.0
    assert est.n_samples == 500
    assert est.lost_walkers == 0


def test_estimate_interval_and_z():
    dom, reg = unit_region(3)
    bc = BoundaryCondition.from_function(dom, lambda x, y: x, 1.0)
    psi = transfer_condition(reg, bc)
    est = solve_at(reg, psi, (0.5, 0.5), 400, seed=3)
    lo, hi = est.interval
    assert lo < est.mean < hi
    v_sd = est.half_width * math.sqrt(est.n_samples) / 2.5758293035489004
    assert 0.0 < v_sd < 1.0   # std of values on [0,1] data


def test_harmonic_oracles_unit_square():
    # harmonic polynomials are their own extensions: the estimate must
    # land within CI + eps(n) + 2^-n of the polynomial's value
    n = 5
    dom, reg = unit_region(n)
    cases = [
        (lambda x, y: x, 1.0),
        (lambda x, y: y, 1.0),
        (lambda x, y: x * y, 1.6),
        (lambda x, y: x * x - y * y, 2.3),
        (lambda x, y: x ** 3 - 3 * x * y * y, 3.5),
    ]
    for pt in [(0.5, 0.5), (0.28125, 0.71875)]:
        for k, (phi, lips) in enumerate(cases):
            bc = BoundaryCondition.from_function(dom, phi, lips)
            psi = transfer_condition(reg, bc)
            est = solve_at(reg, psi, pt, 4000, seed=600 + k)
            tol = est.half_width + bc.epsilon_of_n(n) + 2.0 ** -n
            assert abs(est.mean - phi(*pt)) <= tol, (pt, k)


def test_maximum_principle():
    dom, reg = unit_region(4)
    rng = np.random.default_rng(5)
    base = {sq: 0.0 for sq in dom.boundary_squares}
    # smooth-ish random data: a low-frequency trig sample
    for sq in base:
        cx, cy = center(sq, 4)
        base[sq] = math.sin(3 * cx) + 0.5 * math.cos(2 * cy)
    bc = BoundaryCondition(base, lambda n: 1.0)
    psi = transfer_condition(reg, bc)
    est = solve_at(reg, psi, (0.3, 0.6), 2000, seed=9)
    assert psi.min() - 1e-12 <= est.mean <= psi.max() + 1e-12


def test_linearity_under_shared_seed():
    dom, reg = unit_region(4)
    bc1 = BoundaryCondition.from_function(dom, lambda x, y: x, 1.0)
    bc2 = BoundaryCondition.from_function(dom, lambda x, y: x * y, 1.6)
    p1 = transfer_condition(reg, bc1)
    p2 = transfer_condition(reg, bc2)
    pt, nw, seed = (0.4, 0.55), 800, 1234
    a = solve_at(reg, p1, pt, nw, seed=seed)
    b = solve_at(reg, p2, pt, nw, seed=seed)
    c = solve_at(reg, 2.0 * p1 - 3.0 * p2, pt, nw, seed=seed)
    assert c.mean == pytest.approx(2.0 * a.mean - 3.0 * b.mean, abs=1e-12)


def test_walks_shared_between_boundary_functions():
    dom, reg = unit_region(3)
    bc1 = BoundaryCondition.from_function(dom, lambda x, y: x, 1.0)
    bc2 = BoundaryCondition.from_function(dom, lambda x, y: y, 1.0)
    solve_at(reg, transfer_condition(reg, bc1), (0.5, 0.5), 300, seed=2)
    assert len(reg._walks) == 1
    solve_at(reg, transfer_condition(reg, bc2), (0.5, 0.5), 300, seed=2)
    assert len(reg._walks) == 1   # same walk batch reused
    solve_at(reg, transfer_condition(reg, bc2), (0.25, 0.5), 300, seed=2)
    assert len(reg._walks) == 2


def test_solve_validation():
    dom, reg = unit_region(3)
    psi = np.zeros(len(reg.boundary_segments))
    with pytest.raises(ValueError, match="per boundary segment"):
        solve_at(reg, psi[:-1], (0.5, 0.5), 100, seed=1)
    with pytest.raises(ValueError, match="inside"):
        solve_at(reg, psi, (1.5, 0.5), 100, seed=1)
    with pytest.raises(ValueError, match="confidence"):
        solve_at(reg, psi, (0.5, 0.5), 100, seed=1, confidence=1.0)
    with pytest.raises(ValueError, match="engine"):
        solve_at(reg, psi, (0.5, 0.5), 100, seed=1, engine="gpu")
    with pytest.raises(ValueError, match="walkers"):
        solve_at(reg, psi, (0.5, 0.5), 1, seed=1)


def test_engines_agree_walker_by_walker():
    # the compiled descent and the generic segment solver see the same
    # paths; exits must agree except at corner grazes, where the generic
    # solver either refuses (budget) or picks the adjoining segment
    n = 4
    dom, reg = unit_region(n)
    bc = BoundaryCondition.from_function(dom, lambda x, y: x, 1.0)
    psi = transfer_condition(reg, bc)
    pt, nw, seed = (0.375, 0.625), 60, 2024
    ec = solve_at(reg, psi, pt, nw, seed=seed, engine="compiled")
    er = solve_at(reg, psi, pt, nw, seed=seed, engine="reference")
    kc = (pt[0], pt[1], nw, seed, 1e-4, 2.0, "compiled")
    kr = (pt[0], pt[1], nw, seed, 1e-4, 2.0, "reference")
    wc, wr = reg._walks[kc], reg._walks[kr]
    assert wc.lost == 0
    assert er.n_samples + er.lost_walkers == nw
    both = (wc.seg >= 0) & (wr.seg >= 0)
    assert both.sum() >= 0.9 * nw        # reference corner refusals are rare
    agree = wc.seg[both] == wr.seg[both]
    assert agree.mean() >= 0.9
    h = 2.0 ** -n
    for w in np.nonzero(both)[0]:
        assert abs(wc.time[w] - wr.time[w]) <= 1e-2
        if wc.seg[w] != wr.seg[w]:
            # disagreements happen only next to a segment endpoint
            a = reg.boundary_segments[wc.seg[w]]
            d = min(abs(wc.along[w] - a.lo), abs(wc.along[w] - a.hi))
            assert d <= h / 2
    # and the estimates are statistically indistinguishable
    assert abs(ec.mean - er.mean) <= 3 * (ec.half_width + er.half_width)


# -- refinement --------------------------------------------------------------


def square_family(ns, phi, lips):
    out = []
    for n in ns:
        dom = unit_square_domain(n)
        out.append((dom, BoundaryCondition.from_function(dom, phi, lips)))
    return out


def test_refining_constant_converges_at_first_level():
    fam = square_family([3, 4, 5], lambda x, y: 2.5, 0.1)
    est = solve_refining(fam, (0.5, 0.5), target_err=0.5, n_walkers=200, seed=4)
    assert est.converged
    assert len(est.trace) == 1
    assert est.trace[0].resolution == 3
    assert est.mean == 2.5


def test_refining_runs_ladder_and_flags():
    fam = square_family([3, 4], lambda x, y: x, 1.0)
    est = solve_refining(fam, (0.5, 0.5), target_err=1e-9, n_walkers=300, seed=4)
    assert est.converged is False
    assert [s.resolution for s in est.trace] == [3, 4]
    assert est.trace[0].err_budget > est.trace[1].err_budget
    ref = solve_refining(fam, (0.5, 0.5), target_err=0.5, n_walkers=300, seed=4)
    assert ref.converged and len(ref.trace) == 1


def test_refining_disk_odd_symmetry():
    # squared disks at n = 4, 5; boundary data cos(theta) sampled per
    # square; at the origin the harmonic extension vanishes
    sdf = lambda x, y: math.hypot(x, y) - 1.0
    fam = []
    for n in (4, 5):
        dom = SquaredDomain.from_signed_distance(n, sdf, (-1.4, -1.4, 1.4, 1.4))
        f = lambda x, y: math.cos(math.atan2(y, x))
        fam.append((dom, BoundaryCondition.from_function(dom, f, 2.0)))
    est = solve_refining(fam, (0.0, 0.0), target_err=0.2, n_walkers=2000, seed=31)
    budget = est.trace[-1].err_budget
    assert abs(est.mean) <= budget


def test_refining_disk_quadratic():
    # u = Re(z^2) extends itself: at (0.25, 0) the value is 0.0625
    sdf = lambda x, y: math.hypot(x, y) - 1.0
    fam = []
    for n in (4, 5):
        dom = SquaredDomain.from_signed_distance(n, sdf, (-1.4, -1.4, 1.4, 1.4))
        f = lambda x, y: x * x - y * y
        fam.append((dom, BoundaryCondition.from_function(dom, f, 2.6)))
    est = solve_refining(fam, (0.25, 0.0), target_err=0.15, n_walkers=3000, seed=77)
    assert abs(est.mean - 0.0625) <= est.trace[-1].err_budget


# -- JSON --------------------------------------------------------------------


def test_domain_roundtrip():
    dom = SquaredDomain.from_squares(4, ring_squares(0, 4))
    bc = BoundaryCondition.from_function(dom, lambda x, y: x + 2 * y, 3.0)
    buf = io.StringIO()
    dump_domain(dom, bc, buf)
    buf.seek(0)
    dom2, bc2 = load_domain(buf)
    assert dom2.resolution == dom.resolution
    assert dom2.boundary_squares == dom.boundary_squares
    for sq in dom.boundary_squares:
        assert bc2.values[sq] == pytest.approx(bc.values[sq], rel=1e-15)
    assert bc2.epsilon_of_n(4) == pytest.approx(bc.epsilon_of_n(4))
    with pytest.raises(ValueError, match="epsilon"):
        bc2.epsilon_of_n(100)


def test_dump_is_sorted_and_stable(tmp_path):
    dom = SquaredDomain.from_squares(3, ring_squares(0, 3))
    bc = BoundaryCondition.from_function(dom, lambda x, y: y, 1.0)
    p1, p2 = tmp_path / "a.json", tmp_path / "b.json"
    dump_domain(dom, bc, str(p1))
    dump_domain(dom, bc, str(p2))
    assert p1.read_bytes() == p2.read_bytes()
    doc = json.loads(p1.read_text())
    assert doc["boundary_squares"] == sorted(doc["boundary_squares"])
