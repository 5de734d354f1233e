"""Random Euler product model and the conjectural moment constants.

Re sum_p c_p U_p with U_p independent and uniform on the unit circle.  Its
moment generating function has the closed form prod_p I0(2 k c_p), which the
Monte Carlo estimator is checked against.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass

import numpy as np
from scipy.special import betaln

from .errors import ConfigError, DomainError
from .primes import PrimeTable

PLAIN = "plain"
SMOOTH = "smooth"
# older name for the smooth weights, still accepted
SCHEME_ALIASES = {"prop1": SMOOTH}
BLOCK = 1024


@dataclass(frozen=True)
class ModelConfig:
    x: float
    weight_scheme: str = PLAIN
    k: float = 1.0
    n_samples: int = 100_000
    seed: int = 0

    def __post_init__(self):
        if self.x < 2:
            raise ConfigError(f"x must be >= 2, got {self.x}")
        object.__setattr__(self, "weight_scheme", SCHEME_ALIASES.get(self.weight_scheme, self.weight_scheme))
        if self.weight_scheme not in (PLAIN, SMOOTH):
            raise ConfigError(f"unknown weight scheme {self.weight_scheme!r}")
        if self.k < 0:
            raise ConfigError(f"k must be >= 0, got {self.k}")
        if self.n_samples < 1000:
            raise ConfigError(f"n_samples must be >= 1000, got {self.n_samples}")
        if self.seed < 0:
            raise ConfigError("seed must be non-negative")


@dataclass(frozen=True)
class MgfResult:
    monte_carlo: float
    stderr: float
    exact_product: float
    gaussian: float
    variance: float

    def to_record(self, cfg: ModelConfig) -> dict:
        return {"config": asdict(cfg), **asdict(self)}

    def to_json(self, cfg: ModelConfig) -> str:
        return json.dumps(self.to_record(cfg))


def weights(cfg: ModelConfig, table: PrimeTable) -> np.ndarray:
    table.require(cfg.x)
    p = table.in_range(0, cfg.x).astype(float)
    if cfg.weight_scheme == PLAIN:
        return p**-0.5
    L = math.log(cfg.x)
    return p ** (-0.5 - 1.0 / L) * np.log(cfg.x / p) / L


def _angles(seed: int, block: int, rows: int, n_primes: int) -> np.ndarray:
    # counter-based stream keyed by (seed, block): any draw can be regenerated
    gen = np.random.Generator(np.random.Philox(key=[seed, block]))
    return gen.random((rows, n_primes)) * (2 * np.pi)


def _block_sums(cfg: ModelConfig, c: np.ndarray, block: int) -> np.ndarray:
    # always a full block so a single draw reproduces the batched value bit for bit
    return np.cos(_angles(cfg.seed, block, BLOCK, len(c))) @ c


def sample_euler_sum(cfg: ModelConfig, table: PrimeTable, draw_index: int) -> float:
    """One draw of sum_{p <= x} c_p cos(theta_p), reproducible from (seed, draw_index)."""
    if draw_index < 0:
        raise DomainError("draw_index must be non-negative")
    c = weights(cfg, table)
    block, row = divmod(draw_index, BLOCK)
    return float(_block_sums(cfg, c, block)[row])


def euler_sums(cfg: ModelConfig, table: PrimeTable) -> np.ndarray:
    """Draws 0 .. n_samples - 1, identical to repeated sample_euler_sum calls."""
    c = weights(cfg, table)
    out = []
    for block in range(-(-cfg.n_samples // BLOCK)):
        out.append(_block_sums(cfg, c, block))
    return np.concatenate(out)[: cfg.n_samples]


def model_variance(cfg: ModelConfig, table: PrimeTable) -> float:
    """(1/2) sum c_p^2, since E cos^2 = 1/2."""
    c = weights(cfg, table)
    return 0.5 * float(np.sum(c * c))


def bessel_i0(x) -> np.ndarray:
    """Modified Bessel I0 by its power series sum (x^2/4)^m / (m!)^2."""
    x = np.asarray(x, dtype=float)
    q = 0.25 * x * x
    term = np.ones_like(x)
    total = np.ones_like(x)
    m = 0
    while True:
        m += 1
        term = term * q / (m * m)
        total = total + term
        if np.all(term <= 1e-15 * total):
            return total
        if m > 500:
            raise ArithmeticError("I0 series did not converge")


def mgf_exact(cfg: ModelConfig, table: PrimeTable) -> float:
    """E exp(2k sum c_p cos theta_p) = prod_p I0(2 k c_p)."""
    if cfg.k == 0:
        return 1.0
    c = weights(cfg, table)
    return float(np.exp(np.sum(np.log(bessel_i0(2 * cfg.k * c)))))


def gaussian_mgf(variance: float, k: float) -> float:
    """E exp(2k N(0, variance)) = exp(2 k^2 variance)."""
    if variance < 0:
        raise DomainError(f"variance must be >= 0, got {variance}")
    return math.exp(2 * k * k * variance)


def mgf_monte_carlo(cfg: ModelConfig, table: PrimeTable) -> MgfResult:
    variance = model_variance(cfg, table)
    exact = mgf_exact(cfg, table)
    gauss = gaussian_mgf(variance, cfg.k)
    if cfg.k == 0:
        return MgfResult(1.0, 0.0, exact, gauss, variance)
    vals = np.exp(2 * cfg.k * euler_sums(cfg, table))
    mean = float(np.mean(vals))
    err = float(np.std(vals, ddof=1) / math.sqrt(len(vals)))
    return MgfResult(mean, err, exact, gauss, variance)


# ------------------------------------------------------------ optimal length


def length_objective(logx, k: float, T: float):
    """2k log T / log x + k^2 log log x."""
    logx = np.asarray(logx, dtype=float)
    return 2 * k * math.log(T) / logx + k * k * np.log(logx)


def optimal_length(k: float, T: float) -> tuple[float, float]:
    """Minimizing log x and exp(objective) / (log T)^(k^2) at that point."""
    if k < 1:
        raise DomainError(f"k must be >= 1, got {k}")
    if T < 1e3:
        raise DomainError(f"T must be >= 1e3, got {T}")
    logT = math.log(T)
    logx = 2 * logT / k
    factor = math.exp(float(length_objective(logx, k, T)) - k * k * math.log(logT))
    return logx, factor


# ----------------------------------------------------------------- a(k), f(k)


def a_factor(k: float, p: int, m_terms: int = 200) -> float:
    """(1 - 1/p)^(k^2) sum_m (Gamma(m+k) / (m! Gamma(k)))^2 p^-m, truncated.

    The inner sum stops after ``m_terms`` terms or once a term drops below
    1e-16 of the partial sum.
    """
    if k == 0:
        return 1.0
    y = 1.0 / p
    coeff = 1.0  # Gamma(m+k) / (m! Gamma(k))
    power = 1.0
    total = 1.0
    for m in range(1, m_terms):
        coeff *= (m - 1 + k) / m
        power *= y
        term = coeff * coeff * power
        total += term
        if term < 1e-16 * total:
            break
    return math.exp(k * k * math.log1p(-y)) * total


def a_constant(k: float, prime_limit: int = 100_000, m_terms: int = 200, table: PrimeTable | None = None) -> float:
    """Arithmetic factor a(k), product over p <= prime_limit."""
    if prime_limit < 100:
        raise DomainError(f"prime_limit must be >= 100, got {prime_limit}")
    if m_terms < 20:
        raise DomainError(f"m_terms must be >= 20, got {m_terms}")
    if k == 0:
        return 1.0
    if table is None:
        from .primes import sieve

        table = sieve(prime_limit)
    table.require(prime_limit)
    primes = table.in_range(0, prime_limit)
    return math.exp(sum(math.log(a_factor(k, int(p), m_terms)) for p in primes))


def a_tail_bound(k: float, prime_limit: int) -> float:
    """Bound on the relative change of a(k) from primes above prime_limit.

    Each omitted factor is 1 - (k(k-1)/2)^2 / p^2 + O(p^-3); the bound uses
    C sum_{n > L} n^-2 < C / L with C = k^2 max(1, (k-1)^2 / 2).
    """
    if k == 0:
        return 0.0
    C = k * k * max(1.0, 0.5 * (k - 1) ** 2)
    return 1.0 - math.exp(-C / prime_limit)


def f_rmt(k: float, N: int = 10_000) -> float:
    """N^(-k^2) prod_{j <= N} Gamma(j) Gamma(j + 2k) / Gamma(j + k)^2."""
    if N < 1000:
        raise DomainError(f"N must be >= 1000, got {N}")
    if k < 0:
        raise DomainError(f"k must be >= 0, got {k}")
    if k == 0:
        return 1.0
    j = np.arange(1, N + 1, dtype=float)
    # B(j, k) / B(j + k, k) is the same ratio without the large log-Gamma values
    terms = betaln(j, k) - betaln(j + k, k)
    return math.exp(math.fsum(terms) - k * k * math.log(N))


def f_rmt_extrapolated(k: float, N: int = 10_000) -> float:
    """Richardson step 2 f(2N) - f(N), removing the 1/N term."""
    return 2 * f_rmt(k, 2 * N) - f_rmt(k, N)
