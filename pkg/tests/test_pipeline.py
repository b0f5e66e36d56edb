import math
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gelfond.discrepancy import GuardExceeded
from gelfond.pipeline import (
    XI_DEFAULT, audit_schedule, build_schedule, density_checkpoints, density_experiment,
    error_budget, find_nu0, fit_slope, log2_floor_pow2, s0_decay_experiment, s0_sup,
    schedule_checks,
)

NU0 = 1_500_000  # frozen from find_nu0 with the default constants


def _floor(x):
    return x.numerator // x.denominator


def _primary_oracle(nu, xi=XI_DEFAULT):
    lam = 3 * _floor((2 + 2 * xi) * nu / 3)
    return {
        "lam": lam, "rho": _floor((1 - 2 * xi) * nu), "u": _floor((2 - 5 * xi) * nu), "tau": lam // 3,
        "zeta": _floor(lam * (Fraction(1, 6) - Fraction(1, 139))), "omega": 3 * lam // 139,
        "kappa": _floor(xi * nu / 100), "eta0": 4 * lam // 139,
    }


@pytest.mark.parametrize("nu", [1, 100, 15000, 10**6, 3 * 10**8, 10**9, 10**12 + 7])
def test_schedule_matches_floor_formulas(nu):
    s = build_schedule(nu)
    for k, v in _primary_oracle(nu).items():
        assert getattr(s, k) == v, k
    assert s.lam % 3 == 0 and s.mu == nu - s.rho


def test_schedule_examples():
    s = build_schedule(10**9)
    assert (s.lam, s.rho, s.u, s.tau) == (2000133333, 999866666, 1999666666, 666711111)
    assert (s.kappa, s.L, s.c, s.d) == (666, 500068, 666753735, 666754712)
    assert s.as_dict()["xi"] == "1/15000"
    with pytest.raises(ValueError):
        build_schedule(0)


def test_log2_floor_pow2():
    assert log2_floor_pow2(0) == 0.0
    assert log2_floor_pow2(10) == 10.0
    assert log2_floor_pow2(Fraction(1, 2)) == 0.0
    assert log2_floor_pow2(Fraction(7, 2)) == pytest.approx(math.log2(11))
    assert log2_floor_pow2(Fraction(200, 3)) == pytest.approx(200 / 3, rel=1e-15)
    for k in range(1, 200):
        y = Fraction(k, 7)
        assert log2_floor_pow2(y) == pytest.approx(math.log2(math.floor(2 ** float(y))), rel=1e-12)


def test_audit_examples():
    small = audit_schedule(build_schedule(100), with_nu0=False)
    assert not small.ok and small.violations
    for nu in (3 * 10**8, 10**9):
        a = audit_schedule(build_schedule(nu), with_nu0=False)
        assert a.ok and a.violations == []


def test_nu0_frozen_and_stable():
    assert find_nu0() == NU0
    assert find_nu0() == NU0
    assert not all(schedule_checks(build_schedule(NU0 - 1)).values())
    assert all(schedule_checks(build_schedule(NU0)).values())


def test_audit_passes_on_log_grid():
    for k in range(0, 61):
        nu = int(NU0 * 10 ** (k / 10))
        assert audit_schedule(build_schedule(nu), with_nu0=False).ok, nu


@settings(max_examples=200)
@given(st.integers(NU0, 5 * 10**11))
def test_audit_stable_under_doubling(nu):
    s = build_schedule(nu)
    assert all(schedule_checks(s).values())
    assert all(schedule_checks(build_schedule(2 * nu)).values())
    assert s.kappa <= s.d - s.c <= 2 * s.kappa


def test_budget_refuses_failed_audit():
    with pytest.raises(ValueError):
        error_budget(build_schedule(100))


def test_budget_shape():
    b = error_budget(build_schedule(10**9))
    names = [t.name for t in b.terms]
    assert names == ["E0", "E1", "E2", "E3", "E4-", "E4", "E5", "E6", "E7", "E8", "E9", "E10", "E11",
                     "E12", "E13", "E14"]
    assert b.by_name("E11").log2 is None and b.by_name("E11").kind == "data"
    assert {t.name for t in b.terms if t.kind == "surrogate"} == {"E2", "E14"}
    assert b.by_name("E10").log2 <= -build_schedule(10**9).kappa / 2


def test_fourth_term_grows():
    # R 2^(2 nu) / 2^lambda = 2^(17 Xi nu + 2 nu - lambda), about 2^(15 Xi nu)
    b = error_budget(build_schedule(10**9))
    assert b.by_name("E4-").log2 == pytest.approx(15 * 10**9 / 15000, rel=1e-4)
    assert set(b.nonnegative) == {"E4-", "E4"}


HONEST_FAILURES = {"E4-", "E4"}
CLOSED = ["E0", "E1", "E3", "E4-", "E4", "E5", "E6", "E7", "E8", "E9", "E10", "E12", "E13"]


@pytest.mark.parametrize("name", [
    pytest.param(n, marks=pytest.mark.xfail(strict=True, reason="the term grows like 2^(15 Xi nu)"))
    if n in HONEST_FAILURES else n for n in CLOSED + ["E2", "E14"]])
def test_budget_term_decays(name):
    # negative at 10^9 and strictly decreasing along a doubling grid
    vals = [error_budget(build_schedule(nu)).by_name(name).log2 for nu in (10**9, 2 * 10**9, 4 * 10**9)]
    assert vals[0] < 0
    assert vals[0] > vals[1] > vals[2]


def test_density_examples():
    assert density_experiment(3) == {"N": 8, "count": 5, "deviation": 0.125}
    assert density_experiment(0) == {"N": 1, "count": 1, "deviation": 0.5}
    assert density_experiment(10)["count"] == 511
    with pytest.raises(GuardExceeded):
        density_experiment(33)


def test_density_checkpoints_and_chunking():
    assert density_checkpoints(10, 1) == [1024]
    assert density_checkpoints(10, 3) == [1, 32, 1024]
    a = density_experiment(16, checkpoints=5, chunk=1000)
    b = density_experiment(16, checkpoints=5, threads=3, chunk=4096)
    assert a == b and a["count"] == 32614
    direct = {m: sum(1 for n in range(m) if bin(n**3).count("1") % 2 == 0) for m in (16, 256, 4096)}
    rows = {r["N"]: r["count"] for r in a["checkpoints"]}
    assert all(rows[m] == c for m, c in direct.items())


def test_fit_slope_exact_line():
    fit = fit_slope([1, 2, 3, 4, 5], [3, 1, -1, -3, -5])
    assert fit["slope"] == pytest.approx(-2) and fit["ci_low"] == pytest.approx(-2)
    assert fit["ci_high"] == pytest.approx(-2)


def test_s0_sup_small():
    assert s0_sup(0)["sup"] == pytest.approx(1.0)
    r = s0_sup(8)
    assert 0 < r["sup"] <= 1 and r["padding"] == pytest.approx(math.pi * 255 / (2 * r["xi_grid"]))
    with pytest.raises(GuardExceeded):
        s0_decay_experiment(range(8, 32))


def test_s0_decay_small_range():
    out = s0_decay_experiment(range(4, 15))
    sups = [r["sup"] for r in out["rows"]]
    assert out["fit"]["slope"] < 0
    assert sups[-1] < sups[0]
