"""Mean values of cosine products, tuple counts and the splitting bounds."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .errors import CapabilityError, DomainError
from .polys import (
    BetaSchedule,
    DirichletPolynomial,
    all_g_polys,
    classify_values,
    eval_poly,
)
from .primes import PrimeTable, sum_recip


def _is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    return all(n % q for q in range(3, math.isqrt(n) + 1, 2))


@dataclass(frozen=True)
class FactoredInteger:
    """n = prod p^alpha with distinct ascending primes."""

    factors: tuple[tuple[int, int], ...] = ()

    def __post_init__(self):
        factors = tuple((int(p), int(a)) for p, a in self.factors)
        primes = [p for p, _ in factors]
        if any(b <= a for a, b in zip(primes, primes[1:])):
            raise DomainError("primes must be distinct and ascending")
        for p, a in factors:
            if a < 1:
                raise DomainError(f"exponent of {p} must be >= 1")
            if not _is_prime(p):
                raise DomainError(f"{p} is not prime")
        object.__setattr__(self, "factors", factors)

    @classmethod
    def from_int(cls, n: int) -> "FactoredInteger":
        if n < 1:
            raise DomainError(f"need a positive integer, got {n}")
        out = []
        q = 2
        while q * q <= n:
            if n % q == 0:
                a = 0
                while n % q == 0:
                    n //= q
                    a += 1
                out.append((q, a))
            q += 1 if q == 2 else 2
        if n > 1:
            out.append((n, 1))
        return cls(tuple(out))

    @property
    def value(self) -> int:
        return math.prod(p**a for p, a in self.factors)

    @property
    def primes(self) -> list[int]:
        return [p for p, _ in self.factors]

    @property
    def exponents(self) -> list[int]:
        return [a for _, a in self.factors]

    @property
    def weight(self) -> int:
        return sum(self.exponents)

    def is_square(self) -> bool:
        return all(a % 2 == 0 for a in self.exponents)


# ----------------------------------------------------------------- f(n)


def f_value(n: FactoredInteger) -> Fraction:
    """Main-term weight of the cosine-product integral, exact.

    Zero unless every exponent is even; otherwise the product over p^a of
    a! / (2^a ((a/2)!)^2).
    """
    out = Fraction(1)
    for _, a in n.factors:
        if a % 2:
            return Fraction(0)
        out *= Fraction(math.factorial(a), 2**a * math.factorial(a // 2) ** 2)
    return out


def cos_product_main_term(n: FactoredInteger, T: float) -> float:
    if T <= 0:
        raise DomainError(f"T must be positive, got {T}")
    f = f_value(n)
    return float(T * f.numerator / f.denominator) if f else 0.0


QUAD_MAX_N = 10**6
MIN_NODES_PER_PERIOD = 8
DEFAULT_NODES_PER_PERIOD = 16


def _frequency_bound(n: FactoredInteger) -> float:
    """Upper bound on the highest frequency in the expanded cosine product."""
    return n.weight * math.log(max(n.primes)) if n.factors else 0.0


def required_nodes(n: FactoredInteger, T: float) -> int:
    """Smallest node budget accepted by cos_product_quadrature over [T, 2T]."""
    w = _frequency_bound(n)
    return MIN_NODES_PER_PERIOD * max(1, math.ceil(T * w / (2 * math.pi)))


def cos_product_quadrature(n: FactoredInteger, T: float, nodes: int | None = None) -> float:
    """Integral over [T, 2T] of prod cos(t log p)^alpha by composite Gauss-Legendre.

    Panels span one period of the fastest oscillation; ``nodes`` is the total
    node budget (default 16 per panel).
    """
    if n.value > QUAD_MAX_N:
        raise CapabilityError(f"n = {n.value} exceeds the oscillation budget {QUAD_MAX_N}")
    if T <= 0:
        raise DomainError(f"T must be positive, got {T}")
    if not n.factors:
        return float(T)
    w = _frequency_bound(n)
    panels = max(1, math.ceil(T * w / (2 * math.pi)))
    if nodes is None:
        per = DEFAULT_NODES_PER_PERIOD
    else:
        if nodes < required_nodes(n, T):
            raise CapabilityError(
                f"{nodes} nodes is too few for n = {n.value} on [{T:g}, {2 * T:g}]; "
                f"need at least {required_nodes(n, T)}"
            )
        per = nodes // panels
    x, wts = np.polynomial.legendre.leggauss(per)
    h = T / panels
    logs = [(math.log(p), a) for p, a in n.factors]
    total = 0.0
    chunk = max(1, (1 << 20) // per)
    for start in range(0, panels, chunk):
        idx = np.arange(start, min(panels, start + chunk))
        t = T + h * (idx[:, None] + 0.5 * (x[None, :] + 1.0))
        val = np.ones_like(t)
        for lp, a in logs:
            val *= np.cos(t * lp) ** a
        total += float(np.sum(val @ wts))
    return 0.5 * h * total


# ------------------------------------------------------------ tuple counts

TUPLE_BUDGET = 20


def tuple_count(alphas) -> tuple[int, int]:
    """(n! / prod a!, (2n)! / prod (2a)!) with n = sum of alphas.

    Number of ordered prime tuples with a given product, for the product
    itself and for its square.
    """
    alphas = [int(a) for a in alphas]
    if not alphas or any(a < 1 for a in alphas):
        raise DomainError("alphas must be a nonempty list of positive integers")
    n = sum(alphas)
    if n > TUPLE_BUDGET:
        raise CapabilityError(f"total weight {n} exceeds the exact-arithmetic budget {TUPLE_BUDGET}")
    first = math.factorial(n) // math.prod(math.factorial(a) for a in alphas)
    second = math.factorial(2 * n) // math.prod(math.factorial(2 * a) for a in alphas)
    return first, second


# -------------------------------------------------------- moment bounds


def product_moment_bound(k: float, sched: BetaSchedule, table: PrimeTable, T: float) -> float:
    """T exp(k^2 sum_{p <= T^beta_I} 1/p)."""
    top = sched.cutoff(sched.cap_index)
    table.require(top)
    s = sum_recip(table, 0, top) if top >= 2 else 0.0
    return T * math.exp(k * k * s)


@dataclass(frozen=True)
class LevelDecayBound:
    """Exponents (natural logs) of the three quantities in the S(j) summation step.

    ``scaled_*`` are the exponents multiplied by beta_j, which stay finite
    when beta_j underflows.
    """

    j: int
    log_prefactor: float
    log_combined: float
    log_cap: float
    scaled_combined: float
    scaled_cap: float
    hypothesis: bool

    @property
    def prefactor(self) -> float:
        return math.exp(self.log_prefactor) if self.log_prefactor < 700 else math.inf

    @property
    def combined(self) -> float:
        return math.exp(self.log_combined) if self.log_combined < 700 else math.inf

    @property
    def cap(self) -> float:
        return math.exp(self.log_cap)

    @property
    def holds(self) -> bool:
        return self.scaled_combined <= self.scaled_cap


def level_decay_bound(j: int, k: float, sched: BetaSchedule, table: PrimeTable | None = None, T: float | None = None) -> LevelDecayBound:
    """exp(-log(1/b)/(21 b)) with b = beta_(j+1), its product with exp(2k/beta_j),
    and the cap exp(-0.01 k / beta_j).

    The inequality combined <= cap is only claimed when log(1/beta_(j+1)) >= 900 k;
    ``hypothesis`` records whether that holds.
    """
    if not 1 <= j <= sched.cap_index - 1:
        raise DomainError(f"j must lie in [1, {sched.cap_index - 1}], got {j}")
    lbj = sched.log_betas[j]
    lb1 = sched.log_betas[j + 1]
    L = -lb1  # log(1 / beta_(j+1))
    # beta_(j+1) / beta_j is exact in log space, so scale everything by beta_j
    rel = math.exp(lb1 - lbj)
    scaled_pref = -L / (21 * rel)
    scaled_comb = 2 * k + scaled_pref
    scaled_cap = -0.01 * k
    inv_bj = math.exp(-lbj) if -lbj < 700 else math.inf

    def unscale(x):
        if x == 0:
            return 0.0
        return x * inv_bj

    return LevelDecayBound(
        j=j,
        log_prefactor=unscale(scaled_pref),
        log_combined=unscale(scaled_comb),
        log_cap=unscale(scaled_cap),
        scaled_combined=scaled_comb,
        scaled_cap=scaled_cap,
        hypothesis=L >= 900 * k,
    )


# ------------------------------------------------- split Monte Carlo moment

_BATCH = 2048


def uniform_heights(T: float, samples: int, seed: int) -> np.ndarray:
    out = []
    for b, start in enumerate(range(0, samples, _BATCH)):
        gen = np.random.Generator(np.random.Philox(key=[seed, b]))
        out.append(gen.random(min(_BATCH, samples - start)))
    return T + T * np.concatenate(out)


def _squares_poly(T: float, table: PrimeTable) -> DirichletPolynomial:
    primes = table.in_range(0, math.log(T))
    return DirichletPolynomial(primes, 0.5 / primes.astype(float), "bound_squares", 2)


@dataclass
class ClassReport:
    name: str
    count: int
    measure_fraction: float
    contribution: float
    stderr: float
    surrogate: float
    surrogate_stderr: float


@dataclass
class SplitMomentReport:
    k: float
    T: float
    samples: int
    seed: int
    schedule: dict
    classes: list[ClassReport] = field(default_factory=list)
    total: float = 0.0
    total_stderr: float = 0.0

    def class_map(self) -> dict[str, ClassReport]:
        return {c.name: c for c in self.classes}

    def to_dict(self) -> dict:
        return {
            "k": self.k,
            "T": self.T,
            "samples": self.samples,
            "seed": self.seed,
            "schedule": self.schedule,
            "total": self.total,
            "total_stderr": self.total_stderr,
            "classes": {
                c.name: {
                    "count": c.count,
                    "measure_fraction": c.measure_fraction,
                    "contribution": c.contribution,
                    "stderr": c.stderr,
                    "surrogate": c.surrogate,
                    "surrogate_stderr": c.surrogate_stderr,
                }
                for c in self.classes
            },
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


def _mean_and_err(values: np.ndarray, scale: float) -> tuple[float, float]:
    n = len(values)
    mean = float(np.mean(values))
    err = float(np.std(values, ddof=1) / math.sqrt(n)) if n > 1 else 0.0
    return scale * mean, scale * err


def empirical_split_moment(
    k: float, T: float, sched: BetaSchedule, samples: int, table: PrimeTable, rng_seed: int = 0
) -> SplitMomentReport:
    """Monte Carlo split of the 2k-th moment over the classes T, S(0), S(1), ...

    Heights are uniform on [T, 2T].  Per class the report gives its measure
    fraction, its share T * E[1_class |zeta|^(2k)], and the share of the
    Dirichlet-polynomial surrogate exp(2k Re(sum_{p <= T^beta_j} ... +
    sum_{p <= log T} ...)) with j = I for T and j for S(j).
    """
    from .zeta import abs_zeta_half

    if not 0 <= k <= 4:
        raise DomainError(f"k must lie in [0, 4], got {k}")
    if not 10 <= T <= 5e5:
        raise DomainError(f"T must lie in [10, 5e5], got {T}")
    if samples < 1000:
        raise DomainError(f"need at least 1000 samples, got {samples}")
    if abs(sched.logT - math.log(T)) > 1e-9 * max(1.0, abs(math.log(T))):
        raise DomainError("schedule was built for a different T")

    ts = uniform_heights(T, samples, rng_seed)
    polys = all_g_polys(sched, table)
    gvals = {key: eval_poly(p, ts) for key, p in polys.items()}
    level, _ = classify_values(gvals, sched)

    with np.errstate(divide="ignore"):
        zpow = np.exp(2 * k * np.log(abs_zeta_half(ts))) if k else np.ones_like(ts)
    squares = eval_poly(_squares_poly(T, table), ts)

    n = sched.cap_index
    report = SplitMomentReport(k, T, samples, rng_seed, sched.to_dict())
    names = ["T"] + [f"S({j})" for j in range(n)]
    levels = [-1] + list(range(n))
    for name, lv in zip(names, levels):
        mask = level == lv
        jj = n if lv < 0 else lv
        if jj == 0:
            surr = np.ones_like(ts)
        else:
            # sum_{p <= T^beta_jj} smoothed at length T^beta_jj = sum_i G_(i, jj)
            main = sum(gvals[(i, jj)] for i in range(1, jj + 1))
            surr = np.exp(2 * k * (main + squares))
        contrib, err = _mean_and_err(np.where(mask, zpow, 0.0), T)
        s_contrib, s_err = _mean_and_err(np.where(mask, surr, 0.0), T)
        report.classes.append(
            ClassReport(name, int(mask.sum()), float(mask.mean()), contrib, err, s_contrib, s_err)
        )
    report.total, report.total_stderr = _mean_and_err(zpow, T)
    return report

