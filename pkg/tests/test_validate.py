import json

import pytest

from bmkit.validate import (
    SUITES,
    CheckResult,
    SuiteReport,
    resolve_suite_config,
    run_suite,
)


def test_registry_names():
    assert set(SUITES) == {
        "arctan-law",
        "max-cdf",
        "modulus-of-continuity",
        "increments-variance",
        "exit-symmetry",
        "spitzer",
    }


def test_arctan_matches_law():
    r = run_suite("arctan-law", seed=0, n_samples=1500)
    assert r.suite == "arctan-law"
    assert len(r.checks) == 3
    assert r.passed
    # the first case is the symmetric window [0.25, 0.5] with law 1/2
    assert "law 0.5000" in r.checks[0].detail
    assert all(c.samples == 1500 for c in r.checks)


def test_max_cdf_pvalue():
    r = run_suite("max-cdf", seed=0, n_samples=800)
    (check,) = r.checks
    assert check.statistic > 1e-3
    assert r.passed


def test_modulus_passes_at_default_c_fails_at_one():
    good = run_suite("modulus-of-continuity", seed=1, n_samples=40, level=14)
    assert good.passed
    assert good.checks[0].statistic == 0.0

    bad = run_suite("modulus-of-continuity", seed=1, n_samples=40, level=14,
                    c=1.0)
    assert not bad.passed
    # every single path violates the too-tight bound at the fine scales
    assert bad.checks[0].statistic == 1.0


def test_modulus_level_range():
    with pytest.raises(ValueError):
        run_suite("modulus-of-continuity", level=30)


def test_increments_moments():
    r = run_suite("increments-variance", seed=2, n_samples=50, level=8)
    assert r.passed
    assert [c.name for c in r.checks] == ["increment mean",
                                          "increment variance"]
    assert all(c.samples == 50 * 256 for c in r.checks)


def test_exit_symmetry_all_sides():
    r = run_suite("exit-symmetry", seed=3, n_samples=600)
    assert r.passed
    names = [c.name for c in r.checks]
    assert names == [
        "exit fraction left",
        "exit fraction right",
        "exit fraction bottom",
        "exit fraction top",
        "lost walkers",
    ]


def test_spitzer_deterministic_and_tight():
    r1 = run_suite("spitzer")
    r2 = run_suite("spitzer")
    assert r1 == r2
    assert r1.passed
    gap = {c.name: c for c in r1.checks}["relative gap at eps=0.001"]
    assert gap.statistic < 0.15


def test_report_regenerates_bit_identical():
    a = run_suite("arctan-law", seed=5, n_samples=200)
    b = run_suite("arctan-law", seed=5, n_samples=200)
    assert json.dumps(a.to_dict(), sort_keys=True) == \
        json.dumps(b.to_dict(), sort_keys=True)


def test_rows_match_header():
    r = run_suite("increments-variance", seed=0, n_samples=10, level=6)
    rows = r.rows()
    assert len(rows) == len(r.checks)
    assert all(len(row) == len(SuiteReport.CSV_HEADER) for row in rows)
    # passed is serialized as 0/1 for the CSV view
    assert {row[4] for row in rows} <= {0, 1}


def test_to_dict_is_json_clean():
    for name in ("increments-variance", "spitzer"):
        doc = run_suite(name, seed=0, n_samples=10, level=6).to_dict()
        json.dumps(doc)  # no numpy scalars may leak through
        assert doc["passed"] is True


def test_unknown_suite():
    with pytest.raises(KeyError, match="unknown suite"):
        run_suite("nope")
    with pytest.raises(KeyError, match="available"):
        resolve_suite_config("nope")


def test_resolve_fills_defaults():
    cfg = resolve_suite_config("modulus-of-continuity", seed=9)
    assert cfg == {"seed": 9, "n_samples": 200, "level": 16, "c": 2.0}
    cfg = resolve_suite_config("modulus-of-continuity", seed=9, c=1.0)
    assert cfg["c"] == 1.0
    # suites without a knob simply don't get it
    assert resolve_suite_config("spitzer", seed=4, level=12, c=1.0) == \
        {"seed": 4}


def test_run_suite_drops_inapplicable_knobs():
    r = run_suite("spitzer", seed=0, n_samples=77, level=12, c=1.0)
    assert r.passed


def test_check_result_fields():
    c = CheckResult(name="x", statistic=1.5, threshold=3.0, passed=True,
                    samples=10, seed=7, detail="d")
    d = c.to_dict()
    assert d["name"] == "x" and d["seed"] == 7 and d["passed"] is True
