import json
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from zetalab.errors import ConfigError, DomainError, InsufficientTableError
from zetalab.kernel import uniform_heights
from zetalab.polys import (
    S_SET,
    T_SET,
    BetaSchedule,
    DirichletPolynomial,
    ScheduleOverrides,
    alpha_schedule,
    beta_schedule,
    classify_point,
    classify_points,
    classify_values,
    eval_poly,
    g_poly,
    pm_classify,
    pm_membership,
    pm_poly,
    pm_range,
    upper_bound_deficits,
    upper_bound_polys,
    upper_bound_rhs,
    smoothed_coeffs,
)
from zetalab.primes import sieve, sum_recip_sqrt

TABLE = sieve(10**6)
BIG = sieve(3 * 10**6)
SPLIT = ScheduleOverrides(threshold=0.5, base=0.08)


# ---------------------------------------------------------------- schedules


def test_default_schedule_at_loglog_three():
    T = math.exp(math.exp(3))
    s = beta_schedule(1, T)
    assert s.betas[0] == 0
    assert s.beta(1) == pytest.approx(1 / 9, rel=1e-12)
    assert s.cap_index == 1
    longer = beta_schedule(1, T, ScheduleOverrides(threshold=1 / 9 * (1 + 1e-9)))
    assert longer.beta(2) == pytest.approx(20 / 9, rel=1e-12)


def test_default_threshold_forces_single_piece():
    for T in (1e3, 1e6, 1e12):
        for k in (1, 2, 3):
            assert beta_schedule(k, T).cap_index == 1


def test_override_example():
    s = beta_schedule(1, 1e4, ScheduleOverrides(ratio=20, threshold=0.5, base=1 / 9))
    assert s.cap_index == 2


def test_tiny_thresholds_stay_in_log_space():
    s = beta_schedule(1, 1e4, ScheduleOverrides(log_threshold=-1000.0, log_base=-1100.0))
    assert s.cap_index == 1 + 1 + math.floor(100 / math.log(20))
    assert s.log_betas[-2] <= -1000.0 < s.log_betas[-1]


@pytest.mark.parametrize(
    "ov", [ScheduleOverrides(ratio=1.0), ScheduleOverrides(threshold=0.0), ScheduleOverrides(threshold=-1.0),
           ScheduleOverrides(base=0.0), ScheduleOverrides(threshold=0.5, log_threshold=-1.0)]
)
def test_bad_overrides_rejected(ov):
    with pytest.raises(ConfigError):
        beta_schedule(1, 1e4, ov)


def test_schedule_preconditions():
    with pytest.raises(DomainError):
        beta_schedule(0.5, 1e4)
    with pytest.raises(DomainError):
        beta_schedule(1, 100)


@given(
    st.floats(1, 4),
    st.floats(3, 12),
    st.floats(1.5, 50),
    st.floats(-8, -0.1),
    st.floats(-6, 0.5),
)
def test_schedule_invariants(k, log10T, ratio, log_base, log_threshold):
    s = beta_schedule(k, 10**log10T, ScheduleOverrides(ratio=ratio, log_base=log_base, log_threshold=log_threshold))
    b = s.betas
    assert b[0] == 0
    assert all(b[i + 1] > b[i] for i in range(1, len(b) - 1))
    for i in range(1, s.cap_index):
        assert b[i + 1] / b[i] == pytest.approx(ratio, rel=1e-12)
    qualifying = [i for i in range(len(b)) if s.log_betas[i] <= log_threshold]
    assert s.cap_index == 1 + max(qualifying)


def test_schedule_json_round_trip():
    s = beta_schedule(2, 1e4, SPLIT)
    again = BetaSchedule.from_dict(json.loads(s.to_json()))
    assert again == s


def test_alpha_schedule_zeroth_exponent():
    X = 1e3
    s = alpha_schedule(1, X)
    assert s.beta(0) == pytest.approx(math.log(2) / math.log(X), rel=1e-14)
    assert s.cutoff(0) == pytest.approx(2.0, rel=1e-12)
    assert s.cap_index == 1


# -------------------------------------------------------------- polynomials


def test_g_coefficients_formula_and_bounds():
    s = beta_schedule(2, 1e4, SPLIT)
    g = g_poly(2, 2, s, BIG)
    L = s.beta(2) * s.logT
    p = g.primes.astype(float)
    expected = p ** (-0.5 - 1 / L) * np.log(math.exp(L) / p) / L
    assert np.allclose(g.coeffs, expected, rtol=1e-12)
    assert np.all(g.coeffs > 0)
    assert np.all(g.coeffs <= p**-0.5)
    assert g.label == "F(2)"
    assert g.coeffs.sum() <= sum_recip_sqrt(BIG, s.cutoff(1), s.cutoff(2))


def test_coefficient_vanishes_at_boundary():
    c = smoothed_coeffs(np.array([101]), math.log(101))
    assert c[0] == pytest.approx(0, abs=1e-15)


@given(st.floats(0.05, 1.0), st.floats(0.05, 1.0))
def test_coefficients_stay_below_inverse_root(bi, bj):
    bi, bj = sorted((bi, bj))
    T = 1e4
    primes = TABLE.in_range(1, T**bi)
    c = smoothed_coeffs(primes, bj * math.log(T))
    assert np.all(c >= 0)
    assert np.all(c <= primes.astype(float) ** -0.5 + 1e-15)


def test_g_poly_requires_table():
    s = beta_schedule(2, 1e4, SPLIT)
    with pytest.raises(InsufficientTableError):
        g_poly(2, 2, s, TABLE)
    with pytest.raises(DomainError):
        g_poly(2, 1, s, BIG)


def test_eval_at_zero_is_coefficient_sum():
    s = beta_schedule(2, 1e4, SPLIT)
    g = g_poly(2, 2, s, BIG)
    assert eval_poly(g, 0.0) == pytest.approx(g.coeffs.sum(), rel=1e-12)


def test_eval_matches_naive_resummation():
    poly = DirichletPolynomial(TABLE.in_range(0, 5000), smoothed_coeffs(TABLE.in_range(0, 5000), math.log(5000)))
    rng = np.random.default_rng(3)
    ts = rng.uniform(1e3, 1e5, 100)
    fast = eval_poly(poly, ts)
    for t, v in zip(ts, fast):
        naive = math.fsum(float(c) * math.cos(t * math.log(int(p))) for p, c in zip(poly.primes, poly.coeffs))
        assert v == pytest.approx(naive, abs=1e-12)
        assert abs(v) <= poly.coeffs.sum()


def test_polynomial_json_round_trip():
    poly = pm_poly(3, TABLE)
    again = DirichletPolynomial.from_dict(json.loads(json.dumps(poly.to_dict())))
    assert again.label == "P(3)" and again.freq == 2
    assert np.array_equal(again.primes, poly.primes)
    assert np.array_equal(again.coeffs, poly.coeffs)


def test_polynomial_validation():
    with pytest.raises(ValueError):
        DirichletPolynomial(np.array([3, 2]), np.array([1.0, 1.0]))
    with pytest.raises(ValueError):
        DirichletPolynomial(np.array([2]), np.array([np.inf]))
    with pytest.raises(ValueError):
        DirichletPolynomial(np.array([2]), np.array([1.0]), freq=3)


# --------------------------------------------------------- prime squares P_m


def test_pm_poly_shapes():
    p0 = pm_poly(0, TABLE)
    assert p0.primes.tolist() == [2] and p0.coeffs.tolist() == [0.25]
    p4 = pm_poly(4, TABLE)
    assert p4.primes.tolist() == [17, 19, 23, 29, 31]
    assert np.allclose(p4.coeffs, 0.5 / p4.primes)
    assert p4.freq == 2


def test_pm_values_bounded():
    ts = np.linspace(1e4, 2e4, 500)
    for m in range(0, 8):
        poly = pm_poly(m, TABLE)
        assert np.all(np.abs(eval_poly(poly, ts)) <= poly.coeffs.sum() + 1e-15)
        assert poly.coeffs.sum() <= 0.5 * math.log(2) + 0.3


def test_pm_membership_and_classification_agree():
    T = 1e4
    top = pm_range(T)
    for t in np.linspace(T, 2 * T, 200):
        cls = pm_classify(t, T, TABLE)
        members = [m for m in range(top + 1) if pm_membership(t, m, T, TABLE)]
        if cls is None:
            assert members == []
        else:
            assert members == [cls.index]
    with pytest.raises(DomainError):
        pm_membership(T, top + 1, T, TABLE)


# ------------------------------------------------------------ upper bound


def test_upper_bound_additive_term_at_x_equal_T_squared():
    T = 1e3
    t = 1234.5
    main, squares = upper_bound_polys(T * T, T, TABLE)
    rest = upper_bound_rhs(t, T * T, T, TABLE) - eval_poly(main, t) - eval_poly(squares, t)
    assert rest == pytest.approx(0.5, abs=1e-12)
    assert squares.freq == 2


def test_upper_bound_first_sum_vanishes_at_x():
    main, _ = upper_bound_polys(101, 1e4, TABLE)
    assert main.primes[-1] == 101
    assert main.coeffs[-1] == pytest.approx(0, abs=1e-15)


def test_upper_bound_matches_naive_sum():
    T, x = 1e4, 500.0
    for t in np.random.default_rng(5).uniform(T, 2 * T, 20):
        first = 0.0
        for p in TABLE.in_range(0, x):
            p = int(p)
            first += p ** (-0.5 - 1 / math.log(x)) * math.log(x / p) / math.log(x) * math.cos(t * math.log(p))
        second = sum(0.5 / int(p) * math.cos(2 * t * math.log(int(p))) for p in TABLE.in_range(0, math.log(T)))
        assert upper_bound_rhs(t, x, T, TABLE) == pytest.approx(first + second + math.log(T) / math.log(x), abs=1e-10)


def test_upper_bound_domain():
    with pytest.raises(DomainError):
        upper_bound_rhs(100.0, 100.0, 1e4, TABLE)
    with pytest.raises(DomainError):
        upper_bound_polys(1.5, 1e4, TABLE)


def test_upper_bound_deficit_bounded_below():
    T = 1e4
    ts = uniform_heights(T, 1000, 1)
    d = upper_bound_deficits(T, T**0.3, ts, TABLE)
    assert np.min(d) >= -5


# ------------------------------------------------------------ classification


def test_empty_polynomials_give_T_set():
    # both ranges (T^0, T^beta_1] and (T^beta_1, T^beta_2] hold no primes
    s = beta_schedule(1, 1e4, ScheduleOverrides(threshold=0.02, base=0.01, ratio=1.5))
    assert s.cap_index == 3
    assert s.cutoff(s.cap_index) < 2
    assert classify_point(1.5e4, s, TABLE).label == T_SET


def test_constructed_violation_lands_in_S0():
    s = beta_schedule(1, 1e4, SPLIT)
    gvals = {(1, 1): np.array([10.0]), (1, 2): np.array([0.0]), (2, 2): np.array([0.0])}
    level, witness = classify_values(gvals, s)
    assert level.tolist() == [0]
    assert witness[0] == (1, 1, 10.0)


def test_partition_of_sampled_points():
    T = 1e4
    s = beta_schedule(2, T, ScheduleOverrides(ratio=5, threshold=0.3, base=0.08))
    ts = uniform_heights(T, 10_000, 2)
    assert s.cap_index == 2
    classes = classify_points(ts, s, TABLE)
    names = {f"S({j})" for j in range(s.cap_index)} | {"T"}
    assert len(classes) == len(ts)
    assert all(c.name in names for c in classes)
    for c in classes:
        if c.label == S_SET:
            i, l, v = c.witness
            assert i == c.index + 1
            assert abs(v) > s.threshold_at(i)
