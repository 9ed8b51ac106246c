import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bmkit.analytics import (
    TWO_INTERVAL_CONSTANT,
    QuadratureSpec,
    bessel_L,
    bessel_first_passage,
    bessel_i0,
    bessel_k0,
    level_first_passage,
    max_cdf,
    spitzer_limit,
    two_interval_bound,
    zero_hit_prob,
)
from bmkit.analytics import _laplace_table, _laplace_value
from bmkit.planar import PlanarPath
from bmkit.quadrature import integrate

_GAMMA = 0.5772156649015329


# ----------------------------------------------------------- oracles
#
# Independent implementations used as expected values: power series for
# I0/K0/E1, none of which share code (or method) with the quadratures
# under test.


def _i0_series(x: float) -> float:
    q = 0.25 * x * x
    term = total = 1.0
    k = 0
    while term > 1e-18 * total:
        k += 1
        term *= q / (k * k)
        total += term
    return total


def _k0_series(x: float) -> float:
    q = 0.25 * x * x
    total = -(math.log(0.5 * x) + _GAMMA) * _i0_series(x)
    term, harmonic = 1.0, 0.0
    for k in range(1, 80):
        term *= q / (k * k)
        harmonic += 1.0 / k
        total += term * harmonic
        if k > 5 and term * harmonic < 1e-18 * abs(total):
            break
    return total


def _e1_series(z: float) -> float:
    total = -_GAMMA - math.log(z)
    term = 1.0
    for k in range(1, 60):
        term *= -z / k
        total -= term / k
    return total


# ----------------------------------------------------------- zero hitting


def test_zero_hit_special_angles():
    # arctan of 1, √3, 1/√3
    assert zero_hit_prob(0.3, 0.3) == pytest.approx(0.5, rel=1e-14)
    assert zero_hit_prob(1.0, 3.0) == pytest.approx(2.0 / 3.0, rel=1e-14)
    assert zero_hit_prob(3.0, 1.0) == pytest.approx(1.0 / 3.0, rel=1e-14)


def test_zero_hit_domain():
    with pytest.raises(ValueError):
        zero_hit_prob(0.0, 0.1)
    with pytest.raises(ValueError):
        zero_hit_prob(1.0, -0.1)


@settings(max_examples=200)
@given(
    a=st.floats(1e-3, 1e3),
    eps=st.floats(1e-3, 1e3),
    bump=st.floats(1e-3, 10.0),
)
def test_zero_hit_monotone_and_bounded(a, eps, bump):
    p = zero_hit_prob(a, eps)
    assert 0.0 < p < 1.0
    assert zero_hit_prob(a, eps + bump) > p
    assert zero_hit_prob(a + bump, eps) < p


def test_zero_hit_square_root_asymptote():
    # (2/π)arctan(√(ε/a)) ~ (2/π)√(ε/a) as the window shrinks
    for k in range(2, 9):
        eps = 10.0**-k
        ratio = zero_hit_prob(1.0, eps) / (2.0 / math.pi * math.sqrt(eps))
        assert abs(ratio - 1.0) < 1e-2
    assert abs(zero_hit_prob(1.0, 1e-8) / (2.0 / math.pi * 1e-4) - 1.0) < 1e-6


# ----------------------------------------------------------- two intervals


def test_two_interval_constant_value():
    assert TWO_INTERVAL_CONSTANT == pytest.approx(4.0 / math.pi**2)
    assert two_interval_bound(1.0, 1.0, 1.0) == pytest.approx(
        0.4052847345693511, rel=1e-12
    )


def test_two_interval_scalings():
    b = two_interval_bound(0.7, 0.2, 1.3)
    # linear in the window length, inverse square root in the gap position
    assert two_interval_bound(0.7, 0.4, 1.3) == pytest.approx(2.0 * b, rel=1e-12)
    assert two_interval_bound(2.8, 0.2, 1.3) == pytest.approx(b / 2.0, rel=1e-12)
    with pytest.raises(ValueError):
        two_interval_bound(1.0, 0.0, 1.0)


# ----------------------------------------------------------- running max


def test_max_cdf_edges():
    assert max_cdf(0.0, 1.0) == 0.0
    assert max_cdf(-0.5, 1.0) == 0.0
    assert max_cdf(8.0, 1.0) == pytest.approx(1.0, abs=1e-12)
    with pytest.raises(ValueError):
        max_cdf(1.0, 0.0)


def test_max_cdf_normal_table():
    # Pr(max ≤ 1 on [0,1]) = 2Φ(1) − 1
    assert max_cdf(1.0, 1.0) == pytest.approx(0.6826894921370859, rel=1e-12)


def test_max_cdf_density_integral():
    # independent check: integrate the folded-normal density directly
    for a in (0.5, 1.0, 2.3):
        r = integrate(
            lambda u: 2.0 * math.exp(-u * u / 2.0) / math.sqrt(2.0 * math.pi),
            0.0,
            a,
        )
        assert max_cdf(a, 1.0) == pytest.approx(r.value, abs=1e-10)


def test_max_cdf_diffusive_scaling():
    for a, y in [(0.3, 0.25), (1.1, 4.0), (2.0, 0.01)]:
        assert max_cdf(a, y) == pytest.approx(
            max_cdf(a / math.sqrt(y), 1.0), rel=1e-12
        )


# ----------------------------------------------------------- Bessel I0/K0


def test_i0_at_zero_and_one():
    assert bessel_i0(0.0) == pytest.approx(1.0, abs=1e-14)
    assert bessel_i0(1.0) == pytest.approx(1.2660658777520084, abs=1e-10)
    assert bessel_i0(1.0) == pytest.approx(_i0_series(1.0), abs=1e-10)
    with pytest.raises(ValueError):
        bessel_i0(-0.1)


def test_k0_at_one():
    assert bessel_k0(1.0) == pytest.approx(0.4210244382407085, abs=1e-9)
    assert bessel_k0(1.0) == pytest.approx(_k0_series(1.0), abs=1e-9)
    with pytest.raises(ValueError):
        bessel_k0(0.0)


def test_bessel_series_sweep():
    # 64 log-spaced arguments across two decades, absolute error ≤ 1e-6
    for x in np.logspace(-1.0, 1.0, 64):
        assert abs(bessel_i0(float(x)) - _i0_series(float(x))) <= 1e-6
        assert abs(bessel_k0(float(x)) - _k0_series(float(x))) <= 1e-6


# ----------------------------------------------------------- cross ratio L


def test_L_vanishes_at_unit_ratio():
    assert bessel_L(0.7, 1.0) == 0.0


def test_L_positive():
    for x in (0.1, 1.0, 5.0):
        for ratio in (1.5, 2.0, 10.0):
            assert bessel_L(x, ratio) > 0.0


def test_L_matches_composed_series():
    num = _i0_series(2.0) * _k0_series(1.0) - _i0_series(1.0) * _k0_series(2.0)
    den = _k0_series(1.0) ** 2 + math.pi**2 * _i0_series(1.0) ** 2
    assert bessel_L(1.0, 2.0) == pytest.approx(num / den, abs=1e-10)
    assert bessel_L(1.0, 2.0) == pytest.approx(0.0509807920622, abs=1e-9)


def test_L_domain():
    with pytest.raises(ValueError):
        bessel_L(0.0, 2.0)
    with pytest.raises(ValueError):
        bessel_L(1.0, 0.5)


def test_laplace_transform_closed_form():
    # ∫₀^∞ (L(x)/x) e^{-(ratio-1)x} dx = 1 - 1/√ratio; the cached Gauss
    # table must reproduce it without ever having seen the identity
    for ratio in (4.0, 20.0, 100.0):
        table = _laplace_table(ratio, 1e-8, 16.0)
        got = _laplace_value(ratio - 1.0, table)
        assert got == pytest.approx(1.0 - ratio**-0.5, abs=1e-7)


# ----------------------------------------------------------- first passage


def test_level_passage_reflection_oracle():
    p = level_first_passage(1.0)
    assert p == pytest.approx(math.erfc(1.0 / math.sqrt(2.0)), abs=1e-9)
    assert p == pytest.approx(1.0 - max_cdf(1.0, 1.0), abs=1e-9)
    with pytest.raises(ValueError):
        level_first_passage(0.0)


def test_first_passage_domain():
    with pytest.raises(ValueError):
        bessel_first_passage(1.0, 1.0)
    with pytest.raises(ValueError):
        bessel_first_passage(1.0, -0.01)


def test_first_passage_far_start_negligible():
    assert 0.0 <= bessel_first_passage(10.0, 0.01) < 1e-20


def test_first_passage_monotone():
    p1 = bessel_first_passage(1.0, 0.1)
    p2 = bessel_first_passage(1.0, 0.05)
    p3 = bessel_first_passage(1.0, 0.01)
    assert 1.0 > p1 > p2 > p3 > 0.0
    # farther start, same target: harder to reach
    assert bessel_first_passage(1.5, 0.5) > bessel_first_passage(2.0, 0.5)


def test_scaled_first_passage_approaches_spitzer():
    limit = spitzer_limit(1.0)
    scaled = [
        math.log(1.0 / eps) * bessel_first_passage(1.0, eps)
        for eps in (1e-1, 1e-2, 1e-3)
    ]
    assert scaled[0] > scaled[1] > scaled[2] > limit
    gaps = [s - limit for s in scaled]
    assert gaps[0] > gaps[1] > gaps[2]
    assert gaps[2] < 0.15 * limit


def test_disk_hit_fraction_matches_quadrature():
    # simulation oracle: 10^4 planar paths started at (1, 0), sampled on
    # the level-14 dyadic grid; the entered-the-disk fraction must sit
    # within 3 binomial σ of the nested quadrature's answer
    eps = 0.05
    p = bessel_first_passage(1.0, eps)
    hits = 0
    for i in range(10_000):
        pp = PlanarPath(20_000 + i)
        gx = 1.0 + pp.x.window(0).grid(14)
        gy = pp.y.window(0).grid(14)
        if np.min(gx * gx + gy * gy) <= eps * eps:
            hits += 1
    frac = hits / 10_000.0
    assert abs(frac - p) <= 3.0 * math.sqrt(p * (1.0 - p) / 10_000.0)


# ----------------------------------------------------------- Spitzer limit


def test_spitzer_against_exponential_integral():
    assert spitzer_limit(1.0) == pytest.approx(0.5 * _e1_series(0.5), abs=1e-9)
    assert spitzer_limit(1.0) == pytest.approx(0.2798867973880804, abs=1e-9)
    assert spitzer_limit(math.sqrt(2.0)) == pytest.approx(
        0.5 * _e1_series(1.0), abs=1e-9
    )


def test_spitzer_decays():
    assert spitzer_limit(6.0) < 1e-9
    vals = [spitzer_limit(r) for r in (0.5, 1.0, 2.0, 4.0)]
    assert all(a > b for a, b in zip(vals, vals[1:]))
    with pytest.raises(ValueError):
        spitzer_limit(0.0)


# ----------------------------------------------------------- plumbing


def test_quadrature_spec_reexport():
    from bmkit.quadrature import QuadratureSpec as base

    assert QuadratureSpec is base


def test_tight_spec_changes_nothing_material():
    spec = QuadratureSpec(abs_tol=1e-12, rel_tol=1e-12, max_subdivisions=400)
    assert bessel_i0(2.0, spec) == pytest.approx(bessel_i0(2.0), abs=1e-10)
    assert spitzer_limit(1.0, spec) == pytest.approx(spitzer_limit(1.0), abs=1e-9)
