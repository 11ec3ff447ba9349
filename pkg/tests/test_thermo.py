"""Pressure estimates, critical exponents and pressure roots."""

import math

import numpy as np
import pytest

import thermospec as ts

LOG2 = math.log(2.0)
# root of (1/2)^s + (1/4)^s = 1, i.e. log2 of the golden ratio
MORAN_HALF_QUARTER = 0.6942419136306174
# root of (1/2)^s zeta(2 s) = 1 for the inverse-square tail
INVSQ_ROOT = 0.9037927608987680
# level-3 periodic-word pressure of the continued-fraction family, t=1, q=4
GAUSS_V3 = -0.32430666783211276
GAUSS_V1 = -0.35533289730235196


def test_pressure_doubling_counts_words():
    est = ts.pressure(ts.doubling_system(), t=0.0, n_max=3)
    np.testing.assert_allclose(est.values, [LOG2, LOG2, LOG2], rtol=0, atol=1e-15)
    assert est.extrapolated == pytest.approx(LOG2, abs=1e-15)
    assert est.bracket[0] <= LOG2 <= est.bracket[1]
    assert not est.diverged


def test_pressure_linear_level1_factorizes():
    sys2 = ts.linear_system((0.5, 0.25))
    est = ts.pressure(sys2, t=1.0, n_max=4)
    # Z_n = Z_1^n exactly for linear level-1 data, so v_n is constant
    assert len(set(est.values)) == 1
    assert est.values[0] == pytest.approx(math.log(0.75), abs=1e-15)
    assert est.var_totals == (0.0,) * 4


def test_pressure_gauss_levels_and_bracket():
    est = ts.pressure(ts.gauss_system(), t=1.0, q=4, n_max=3)
    assert est.values[0] == pytest.approx(GAUSS_V1, abs=1e-14)
    assert est.values[2] == pytest.approx(GAUSS_V3, abs=1e-14)
    lo, hi = est.bracket
    assert lo <= est.values[2] <= hi
    assert est.extrapolated == pytest.approx(min(max(est.extrapolated, lo), hi))


def test_pressure_bracket_narrows_with_level():
    g = ts.gauss_system()
    w = []
    for n in (1, 2, 3):
        est = ts.pressure(g, t=1.0, q=8, n_max=n)
        w.append(est.bracket[1] - est.bracket[0])
    assert w[2] < w[1] < w[0]


def test_pressure_divergence_flag():
    inv = ts.powerlog_system([], c=0.5, a=2.0)
    est = ts.pressure(inv, t=0.4, q=64, n_max=2)
    assert est.diverged
    est2 = ts.pressure(inv, t=0.8, q=64, n_max=2)
    assert not est2.diverged


def test_pressure_budget_carries_partial():
    g = ts.gauss_system()
    pot = ts.table_potential(2, {(i, j): 0.1 for i in (1, 2, 3) for j in (1, 2, 3)})
    with pytest.raises(ts.BudgetExceededError) as exc:
        ts.pressure(g, pot, t=1.0, q=3, n_max=5, budget=90)
    partial = exc.value.partial
    assert partial is not None
    assert partial.levels == (1, 2, 3)  # 3 + 9 + 27 fits, level 4 does not


def test_default_budget_env(monkeypatch):
    monkeypatch.setenv("THERMOSPEC_BUDGET", "1234")
    assert ts.default_budget() == 1234
    monkeypatch.delenv("THERMOSPEC_BUDGET")
    assert ts.default_budget() == 100_000_000


def test_pressure_workers_bit_identical():
    g = ts.gauss_system()
    base = ts.pressure(g, t=1.0, q=25, n_max=3, workers=1)
    for w in (4, 8):
        est = ts.pressure(g, t=1.0, q=25, n_max=3, workers=w)
        assert est.values == base.values
        assert est.bracket == base.bracket


def test_locally_constant_bracket_flat_series():
    flat = ts.flat_example_system()
    lo, hi = ts.pressure_locally_constant_bracket(flat, None, t=0.5, coeff=0.0)
    # untilted series value log(K + C) at the critical exponent
    assert lo - 1e-12 <= math.log(1.15) <= hi + 1e-12
    assert hi - lo < 1e-6


def test_locally_constant_bracket_divergence():
    inv = ts.powerlog_system([], c=0.5, a=2.0)
    lo, hi = ts.pressure_locally_constant_bracket(inv, None, t=0.5, coeff=0.0)
    assert math.isinf(lo) and math.isinf(hi)


def test_locally_constant_tilted_monotone_in_coeff():
    flat = ts.flat_example_system()
    chi1 = ts.indicator_potential(1)
    vals = [ts.pressure_locally_constant(flat, chi1, t=0.6, coeff=c)
            for c in (-1.0, 0.0, 1.0)]
    assert vals[0] < vals[1] < vals[2]


def test_s_infinity_gauss():
    res = ts.s_infinity(ts.gauss_system())
    assert res.value == 0.5
    assert res.s_lo <= 0.5 <= res.s_hi
    assert res.agree
    assert res.method == "series-exponent"
    assert res.certificate["converges_at_value"] is False


def test_s_infinity_divergence_certificate_scale():
    inv = ts.powerlog_system([], c=0.5, a=2.0)
    res = ts.s_infinity(inv)
    assert res.value == 0.5
    # just below s_inf the partial sums need astronomically many terms
    assert res.certificate["log10_terms_to_exceed_probe_at_s_lo"] > 1e4


def test_s_infinity_finite_system():
    res = ts.s_infinity(ts.doubling_system())
    assert res.value == 0.0
    assert res.agree


def test_pressure_root_doubling():
    res = ts.pressure_root(ts.doubling_system())
    assert res.value == pytest.approx(1.0, abs=1e-10)
    assert res.method == "moran"
    assert res.interval[0] <= 1.0 <= res.interval[1]


def test_pressure_root_half_quarter():
    res = ts.pressure_root(ts.linear_system((0.5, 0.25)))
    assert res.value == pytest.approx(MORAN_HALF_QUARTER, abs=1e-12)
    assert res.residual == pytest.approx(0.0, abs=1e-12)


def test_pressure_root_series_invsq():
    inv = ts.powerlog_system([], c=0.5, a=2.0)
    res = ts.pressure_root(inv)
    assert res.method == "series"
    assert res.value == pytest.approx(INVSQ_ROOT, abs=5e-10)
    assert res.interval[0] <= INVSQ_ROOT <= res.interval[1]


def test_pressure_root_gauss_sandwich():
    res = ts.pressure_root(ts.gauss_system())
    assert res.method == "level1-sandwich"
    assert res.interval[0] <= 1.0 <= res.interval[1]
    assert abs(res.value - 1.0) < 0.05


def test_pressure_root_restricted_family():
    g = ts.gauss_system()
    want = {10: 0.6995125334688326, 100: 0.6389937248721391,
            1000: 0.6097565453709728}
    for N, frozen in want.items():
        res = ts.pressure_root(ts.restricted_system(g, N))
        assert res.value == pytest.approx(frozen, abs=1e-12)


def test_pressure_root_bad_bracket():
    with pytest.raises(ts.BracketError):
        ts.pressure_root(ts.doubling_system(), bracket=(1.5, 2.0))
    with pytest.raises(ts.BracketError):
        ts.pressure_root(ts.doubling_system(), bracket=(2.0, 1.0))


def test_truncated_pressure_increases_with_q():
    g = ts.gauss_system()
    vals = [ts.pressure(g, t=1.0, q=q, n_max=2).values[-1]
            for q in (8, 16, 32, 64)]
    assert vals == sorted(vals)
    assert all(b > a for a, b in zip(vals, vals[1:]))
