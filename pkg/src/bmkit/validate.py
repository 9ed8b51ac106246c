"""Statistical validation suites.

Each suite draws sampled paths (or exit walkers) from a fixed seed, computes
a test statistic against the matching closed-form law, and reports one
:class:`CheckResult` per check.  With the seed and knobs fixed, every suite
is a pure function of its arguments, so a report can be regenerated
bit-for-bit.

Thresholds are engineering conventions, not consequences of the laws being
tested: 3 sigma for binomial and moment checks, p > 1e-3 for the
Kolmogorov-Smirnov test.  A correct sampler trips them with negligible
probability; a broken one trips them almost surely.
"""

from __future__ import annotations

import inspect
import math
from dataclasses import dataclass

import numpy as np
from scipy import special, stats

from .analytics import bessel_first_passage, spitzer_limit, zero_hit_prob
from .dirichlet import _run_walks, flood_fill_interior, unit_square_domain
from .extrema import Decision, has_zero, path_max
from .path import DEFAULT_C, PathCoefficients

__all__ = [
    "CheckResult",
    "SuiteReport",
    "SUITES",
    "run_suite",
    "resolve_suite_config",
    "arctan_law_suite",
    "max_cdf_suite",
    "modulus_suite",
    "increments_suite",
    "exit_symmetry_suite",
    "spitzer_suite",
]


@dataclass(frozen=True)
class CheckResult:
    """One named check: a statistic, the threshold it was held to, and the
    verdict.  ``samples`` is the number of independent draws behind the
    statistic (1 for deterministic checks)."""

    name: str
    statistic: float
    threshold: float
    passed: bool
    samples: int
    seed: int
    detail: str = ""

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "statistic": self.statistic,
            "threshold": self.threshold,
            "passed": self.passed,
            "samples": self.samples,
            "seed": self.seed,
            "detail": self.detail,
        }


@dataclass(frozen=True)
class SuiteReport:
    suite: str
    seed: int
    checks: tuple[CheckResult, ...]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def to_dict(self) -> dict:
        return {
            "suite": self.suite,
            "seed": self.seed,
            "passed": self.passed,
            "checks": [c.to_dict() for c in self.checks],
        }

    # CSV view: header + one row per check.
    CSV_HEADER = ("suite", "name", "statistic", "threshold", "passed",
                  "samples", "seed")

    def rows(self) -> list[tuple]:
        return [
            (self.suite, c.name, c.statistic, c.threshold, int(c.passed),
             c.samples, c.seed)
            for c in self.checks
        ]


# ---------------------------------------------------------------------------
# Suites.

ARCTAN_CASES = ((0.25, 0.25), (0.5, 0.1), (0.1, 0.3))


def arctan_law_suite(seed: int = 0, n_samples: int = 4000) -> SuiteReport:
    """Fraction of paths with a certified zero in [a, a+eps] vs the
    arctangent law, one binomial check per (a, eps) case.

    Undecided searches (budget exhausted before a verdict) count as
    no-zero; their count is reported in the detail string.
    """
    checks = []
    for ci, (a, eps) in enumerate(ARCTAN_CASES):
        hits = 0
        undecided = 0
        for w in range(n_samples):
            p = PathCoefficients.sample(seed, (ci << 40) + w)
            verdict = has_zero(p, a, a + eps).decision
            if verdict is Decision.HAS_ZERO:
                hits += 1
            elif verdict is Decision.UNDECIDED:
                undecided += 1
        target = zero_hit_prob(a, eps)
        sigma = math.sqrt(target * (1.0 - target) / n_samples)
        z = abs(hits / n_samples - target) / sigma
        checks.append(CheckResult(
            name=f"zero in [{a:g},{a + eps:g}]",
            statistic=z,
            threshold=3.0,
            passed=z <= 3.0,
            samples=n_samples,
            seed=seed,
            detail=(f"observed {hits / n_samples:.4f}, law {target:.4f}, "
                    f"{undecided} undecided"),
        ))
    return SuiteReport("arctan-law", seed, tuple(checks))


def max_cdf_suite(seed: int = 0, n_samples: int = 2000) -> SuiteReport:
    """Kolmogorov-Smirnov test of running maxima against erf(a / sqrt(2)).

    Each sample is the midpoint of a width-1e-3 enclosure of the path's
    maximum over [0, 1]; the enclosure error is far below the KS test's
    resolving power at these sample counts.
    """
    vals = np.empty(n_samples)
    for w in range(n_samples):
        p = PathCoefficients.sample(seed, w)
        e = path_max(p, eps=1e-3)
        vals[w] = 0.5 * (e.lo + e.hi)

    def cdf(a):
        a = np.asarray(a, dtype=float)
        return np.where(a > 0.0, special.erf(a / math.sqrt(2.0)), 0.0)

    res = stats.kstest(vals, cdf)
    p_value = float(res.pvalue)
    check = CheckResult(
        name="KS vs running-max law",
        statistic=p_value,
        threshold=1e-3,
        passed=p_value > 1e-3,
        samples=n_samples,
        seed=seed,
        detail=f"D={float(res.statistic):.5f}",
    )
    return SuiteReport("max-cdf", seed, (check,))


def modulus_suite(seed: int = 0, n_samples: int = 200, level: int = 16,
                  c: float = DEFAULT_C) -> SuiteReport:
    """Dyadic increments against the bound c*sqrt(h*log(1/h)).

    For each path refined to ``level``, checks every increment on the
    dyadic grids h = 2^-10 .. 2^-level.  The statistic is the fraction of
    paths with at least one violation; the suite passes only when it is
    zero.  At c = 2 that holds for small h; at c = 1 the finest scales
    violate on essentially every path, so the suite fails by design.
    """
    if level < 1 or level > 24:
        raise ValueError("level must be in 1..24")
    m_lo = min(10, level)
    violators = 0
    worst = 0.0
    for w in range(n_samples):
        p = PathCoefficients.sample(seed, w)
        v = p.grid(level)
        for m in range(level, m_lo - 1, -1):  # finest first: cheap exit at c=1
            h = 2.0 ** -m
            step = 1 << (level - m)
            peak = float(np.abs(np.diff(v[::step])).max())
            ratio = peak / (c * math.sqrt(h * math.log(1.0 / h)))
            worst = max(worst, ratio)
            if ratio > 1.0:
                violators += 1
                break
    frac = violators / n_samples
    check = CheckResult(
        name=f"increments within c*sqrt(h*log(1/h)), c={c:g}",
        statistic=frac,
        threshold=0.0,
        passed=frac <= 0.0,
        samples=n_samples,
        seed=seed,
        detail=f"scales 2^-{m_lo}..2^-{level}, worst ratio {worst:.3f}",
    )
    return SuiteReport("modulus-of-continuity", seed, (check,))


def increments_suite(seed: int = 0, n_samples: int = 100,
                     level: int = 10) -> SuiteReport:
    """First and second moments of normalized grid increments.

    Increments at spacing h = 2^-level, scaled by 1/sqrt(h), pooled across
    paths: the mean should be 0 and the variance 1, each within 3 standard
    errors (the variance estimator's standard error is sqrt(2/N) for
    Gaussian data).
    """
    pools = []
    for w in range(n_samples):
        p = PathCoefficients.sample(seed, w)
        pools.append(np.diff(p.grid(level)) * 2.0 ** (level / 2.0))
    x = np.concatenate(pools)
    n = x.size
    mean = float(x.mean())
    var = float(x.var(ddof=1))
    z_mean = abs(mean) / math.sqrt(1.0 / n)
    z_var = abs(var - 1.0) / math.sqrt(2.0 / n)
    checks = (
        CheckResult(
            name="increment mean",
            statistic=z_mean,
            threshold=3.0,
            passed=z_mean <= 3.0,
            samples=n,
            seed=seed,
            detail=f"mean {mean:+.5f}",
        ),
        CheckResult(
            name="increment variance",
            statistic=z_var,
            threshold=3.0,
            passed=z_var <= 3.0,
            samples=n,
            seed=seed,
            detail=f"variance {var:.5f}",
        ),
    )
    return SuiteReport("increments-variance", seed, checks)


def exit_symmetry_suite(seed: int = 0, n_samples: int = 4000) -> SuiteReport:
    """Exit-side frequencies of walkers from the center of the unit square.

    By symmetry each side carries harmonic measure 1/4; every side gets a
    3-sigma binomial check, plus a lost-walker check at the 1e-3 level.
    """
    region = flood_fill_interior(unit_square_domain(4), (0.5, 0.5))
    walks = _run_walks(region, (0.5, 0.5), n_samples, seed,
                       eps_hit=1e-3, c=DEFAULT_C, engine="compiled")
    side_of = np.empty(len(region.boundary_segments), np.int64)
    for i, s in enumerate(region.boundary_segments):
        if s.fixed_axis == 0:
            side_of[i] = 0 if s.offset < 0.5 else 1
        else:
            side_of[i] = 2 if s.offset < 0.5 else 3
    landed = walks.seg >= 0
    n = int(landed.sum())
    counts = np.bincount(side_of[walks.seg[landed]], minlength=4)
    sigma = math.sqrt(0.25 * 0.75 / n)
    checks = []
    for label, k in zip(("left", "right", "bottom", "top"), map(int, counts)):
        z = abs(k / n - 0.25) / sigma
        checks.append(CheckResult(
            name=f"exit fraction {label}",
            statistic=z,
            threshold=3.0,
            passed=z <= 3.0,
            samples=n,
            seed=seed,
            detail=f"observed {k / n:.4f}",
        ))
    lost_frac = walks.lost / n_samples
    checks.append(CheckResult(
        name="lost walkers",
        statistic=lost_frac,
        threshold=1e-3,
        passed=lost_frac < 1e-3,
        samples=n_samples,
        seed=seed,
        detail=f"{walks.lost} of {n_samples}",
    ))
    return SuiteReport("exit-symmetry", seed, tuple(checks))


SPITZER_EPSILONS = (1e-1, 1e-2, 1e-3)


def spitzer_suite(seed: int = 0) -> SuiteReport:
    """Scaled disk-hitting probabilities against their slow-log limit.

    log(1/eps) * P(hit the eps-disk by t=1 from radius 1) must approach
    spitzer_limit(1) with the relative gap shrinking as eps falls and
    under 15% at eps = 1e-3.  Deterministic: the seed is recorded but
    plays no role.
    """
    limit = spitzer_limit(1.0)
    gaps = []
    scaled = []
    for eps in SPITZER_EPSILONS:
        v = math.log(1.0 / eps) * bessel_first_passage(1.0, eps)
        scaled.append(v)
        gaps.append(abs(v - limit) / limit)
    shrink = max(b / a for a, b in zip(gaps, gaps[1:]))
    values = ", ".join(f"{v:.4f}" for v in scaled)
    checks = (
        CheckResult(
            name="relative gap shrinks with eps",
            statistic=shrink,
            threshold=1.0,
            passed=shrink < 1.0,
            samples=len(SPITZER_EPSILONS),
            seed=seed,
            detail=f"scaled values {values}, limit {limit:.4f}",
        ),
        CheckResult(
            name="relative gap at eps=0.001",
            statistic=gaps[-1],
            threshold=0.15,
            passed=gaps[-1] < 0.15,
            samples=1,
            seed=seed,
            detail=f"gap {gaps[-1]:.4f}",
        ),
    )
    return SuiteReport("spitzer", seed, checks)


SUITES = {
    "arctan-law": arctan_law_suite,
    "max-cdf": max_cdf_suite,
    "modulus-of-continuity": modulus_suite,
    "increments-variance": increments_suite,
    "exit-symmetry": exit_symmetry_suite,
    "spitzer": spitzer_suite,
}


def resolve_suite_config(name: str, seed: int = 0, n_samples: int | None = None,
                         level: int | None = None,
                         c: float | None = None) -> dict:
    """The knobs a suite will actually run with: requested values where
    given, the suite's own defaults otherwise, and only the knobs the
    suite understands.  Unknown names raise KeyError listing the
    available suites.
    """
    try:
        fn = SUITES[name]
    except KeyError:
        raise KeyError(
            f"unknown suite {name!r}; available: {', '.join(sorted(SUITES))}"
        ) from None
    accepted = inspect.signature(fn).parameters
    resolved = {"seed": seed}
    for key, val in (("n_samples", n_samples), ("level", level), ("c", c)):
        if key in accepted:
            resolved[key] = accepted[key].default if val is None else val
    return resolved


def run_suite(name: str, seed: int = 0, n_samples: int | None = None,
              level: int | None = None, c: float | None = None) -> SuiteReport:
    """Run a suite by name, forwarding only the knobs it understands."""
    kwargs = resolve_suite_config(name, seed=seed, n_samples=n_samples,
                                  level=level, c=c)
    return SUITES[name](**kwargs)
