import json
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.special import i0

from zetalab.errors import ConfigError, DomainError, InsufficientTableError
from zetalab.primes import sieve
from zetalab.random_model import (
    ModelConfig,
    a_constant,
    a_factor,
    a_tail_bound,
    bessel_i0,
    euler_sums,
    f_rmt,
    f_rmt_extrapolated,
    gaussian_mgf,
    length_objective,
    mgf_exact,
    mgf_monte_carlo,
    model_variance,
    optimal_length,
    sample_euler_sum,
    weights,
)

TABLE = sieve(10**5)


def test_config_validation():
    with pytest.raises(ConfigError):
        ModelConfig(x=1.5)
    with pytest.raises(ConfigError):
        ModelConfig(x=100, n_samples=10)
    with pytest.raises(ConfigError):
        ModelConfig(x=100, weight_scheme="other")


def test_weights():
    plain = weights(ModelConfig(x=30), TABLE)
    assert np.allclose(plain, TABLE.in_range(0, 30) ** -0.5)
    smooth = weights(ModelConfig(x=30, weight_scheme="smooth"), TABLE)
    assert np.all(smooth >= 0) and np.all(smooth <= plain)
    with pytest.raises(InsufficientTableError):
        weights(ModelConfig(x=10**6), TABLE)


def test_single_prime_range():
    cfg = ModelConfig(x=2, n_samples=1000)
    vals = euler_sums(cfg, TABLE)
    assert np.all(np.abs(vals) <= 2**-0.5 + 1e-15)


def test_draws_are_reproducible_by_index():
    cfg = ModelConfig(x=1000, n_samples=3000, seed=9)
    batch = euler_sums(cfg, TABLE)
    for i in (0, 1023, 1024, 2999):
        assert sample_euler_sum(cfg, TABLE, i) == batch[i]
    other = euler_sums(ModelConfig(x=1000, n_samples=3000, seed=10), TABLE)
    assert not np.array_equal(batch, other)


def test_mean_and_variance_of_draws():
    cfg = ModelConfig(x=1000, n_samples=100_000, seed=1)
    v = euler_sums(cfg, TABLE)
    n = len(v)
    assert abs(v.mean()) <= 4 * v.std() / math.sqrt(n)
    var = model_variance(cfg, TABLE)
    # stderr of the sample variance from the fourth moment
    se = math.sqrt(np.var(v**2) / n)
    assert abs(v.var() - var) <= 4 * se
    assert var == pytest.approx(0.5 * sum(1 / p for p in TABLE.in_range(0, 1000)), rel=1e-12)


def test_bessel_series_against_scipy_and_oracle(oracle):
    xs = np.linspace(0, 6, 61)
    assert np.allclose(bessel_i0(xs), i0(xs), rtol=1e-13)
    assert bessel_i0(math.sqrt(2)) == pytest.approx(oracle["bessel"]["i0_sqrt2"], rel=1e-13)


def test_exact_mgf_against_oracle(oracle):
    for key, ref in oracle["bessel"].items():
        if not key.startswith("plain"):
            continue
        k = float(key.split("k=")[1].split()[0])
        x = float(key.split("x=")[1])
        assert mgf_exact(ModelConfig(x=x, k=k), TABLE) == pytest.approx(ref, rel=1e-12)
    assert mgf_exact(ModelConfig(x=2, k=1), TABLE) == pytest.approx(i0(math.sqrt(2)), rel=1e-13)


def test_k_zero_is_exactly_one():
    res = mgf_monte_carlo(ModelConfig(x=1000, k=0, n_samples=1000), TABLE)
    assert res.monte_carlo == 1.0 and res.stderr == 0.0 and res.exact_product == 1.0


@pytest.mark.parametrize("k", [0.5, 1.0, 2.0])
@pytest.mark.parametrize("x", [100, 1000, 10_000])
def test_exact_mgf_two_term_lower_bound(k, x):
    c = weights(ModelConfig(x=x), TABLE)
    lower = k * k * np.sum(c**2) - k**4 * np.sum(c**4)
    assert math.log(mgf_exact(ModelConfig(x=x, k=k), TABLE)) >= lower


def test_monte_carlo_agrees_with_exact_at_small_x():
    res = mgf_monte_carlo(ModelConfig(x=100, k=1, n_samples=20_000), TABLE)
    assert abs(res.monte_carlo - res.exact_product) <= 4 * res.stderr


def test_stderr_scales_like_root_n():
    a = mgf_monte_carlo(ModelConfig(x=100, k=1, n_samples=20_000), TABLE)
    b = mgf_monte_carlo(ModelConfig(x=100, k=1, n_samples=40_000), TABLE)
    assert a.stderr / b.stderr == pytest.approx(math.sqrt(2), rel=0.1)


def test_gaussian_mgf():
    assert gaussian_mgf(0, 3) == 1
    x = 1e4
    assert gaussian_mgf(0.5 * math.log(math.log(x)), 1) == pytest.approx(math.log(x), rel=1e-14)
    with pytest.raises(DomainError):
        gaussian_mgf(-1, 1)


def test_gaussian_mgf_matches_synthetic_draws():
    rng = np.random.Generator(np.random.Philox(key=[4, 0]))
    var, k = 0.8, 1.0
    draws = np.exp(2 * k * rng.normal(0, math.sqrt(var), 200_000))
    se = draws.std() / math.sqrt(len(draws))
    assert abs(draws.mean() - gaussian_mgf(var, k)) <= 4 * se


def test_gaussian_gap_bounded_and_settling():
    for k in (0.5, 1.0, 2.0):
        gaps = []
        for x in (100, 1000, 10_000, 100_000):
            cfg = ModelConfig(x=x, k=k)
            gaps.append(math.log(mgf_exact(cfg, TABLE)) - math.log(gaussian_mgf(model_variance(cfg, TABLE), k)))
        assert all(abs(g) < 2 * k**4 for g in gaps)
        steps = np.abs(np.diff(gaps))
        assert steps[-1] <= steps[0]


def test_mgf_result_json():
    cfg = ModelConfig(x=100, k=1, n_samples=1000)
    rec = json.loads(mgf_monte_carlo(cfg, TABLE).to_json(cfg))
    assert set(rec) == {"config", "monte_carlo", "stderr", "exact_product", "gaussian", "variance"}
    assert rec["config"]["x"] == 100


# ----------------------------------------------------------- optimal length


def test_optimal_length_closed_forms():
    T = 1e6
    assert optimal_length(2, T)[0] == pytest.approx(math.log(T))
    assert optimal_length(1, T)[0] == pytest.approx(2 * math.log(T))
    with pytest.raises(DomainError):
        optimal_length(0.5, T)
    with pytest.raises(DomainError):
        optimal_length(1, 10)


@given(st.floats(1, 4), st.floats(3, 12))
def test_optimal_length_minimises_objective(k, log10T):
    T = 10**log10T
    logx, factor = optimal_length(k, T)
    grid = np.linspace(0.5 * logx, 1.5 * logx, 401)
    assert np.all(length_objective(grid, k, T) >= length_objective(logx, k, T) - 1e-12)
    assert factor == pytest.approx(math.exp(float(length_objective(logx, k, T))) / math.log(T) ** (k * k))


# ------------------------------------------------------------- constants


def test_f_rmt_closed_forms(oracle):
    ref = oracle["f_rmt_N10000"]
    assert f_rmt(1, 10_000) == pytest.approx(ref["k=1"], rel=1e-10)
    assert f_rmt(2, 10_000) == pytest.approx(ref["k=2"], rel=1e-10)
    assert f_rmt(0, 5000) == 1.0
    assert abs(f_rmt_extrapolated(2) - 1 / 12) < abs(f_rmt(2) - 1 / 12)
    with pytest.raises(DomainError):
        f_rmt(1, 10)


def test_a_factor_properties():
    for p in (2, 3, 5, 101, 9973):
        assert a_factor(1, p) == pytest.approx(1.0, abs=1e-15)
        for k in (1.5, 2.0, 3.0):
            assert 0 < a_factor(k, p) <= 1


def test_a_constant_values(oracle):
    assert a_constant(0) == 1.0
    assert a_constant(1, table=TABLE) == pytest.approx(1.0, abs=1e-6)
    a2 = a_constant(2, table=TABLE)
    assert a2 * f_rmt(2) == pytest.approx(oracle["a2_f2"], abs=1e-3)
    with pytest.raises(DomainError):
        a_constant(2, prime_limit=50)
    with pytest.raises(DomainError):
        a_constant(2, m_terms=5)


@pytest.mark.parametrize("k", [1.5, 2.0, 3.0])
def test_a_constant_tail_estimate(k):
    short = a_constant(k, prime_limit=10_000, table=TABLE)
    long = a_constant(k, prime_limit=100_000, table=TABLE)
    assert long <= short
    assert (short - long) / short <= a_tail_bound(k, 10_000)


def test_scheme_alias():
    assert ModelConfig(x=100, weight_scheme="prop1").weight_scheme == "smooth"
