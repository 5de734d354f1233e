"""Prime-supported Dirichlet polynomials and the splitting of [T, 2T].

Exponent schedules are kept in log space: the default threshold exp(-1000 k)
underflows a double, and the level decay checks need schedules that small.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import ConfigError, DomainError
from .primes import PrimeTable

MAX_PIECES = 10_000


# ----------------------------------------------------------------- schedules


@dataclass(frozen=True)
class ScheduleOverrides:
    """Replacement constants for the exponent schedule.

    ``None`` keeps the default.  Thresholds and bases may be given directly
    or as logarithms when they are below the double-precision range.
    """

    ratio: float = 20.0
    threshold: float | None = None
    base: float | None = None
    log_threshold: float | None = None
    log_base: float | None = None

    def resolve(self, default_log_threshold: float, default_log_base: float) -> tuple[float, float, float]:
        if not self.ratio > 1:
            raise ConfigError(f"schedule ratio must exceed 1, got {self.ratio}")
        if self.threshold is not None and self.log_threshold is not None:
            raise ConfigError("give threshold or log_threshold, not both")
        if self.base is not None and self.log_base is not None:
            raise ConfigError("give base or log_base, not both")
        if self.threshold is not None:
            if not self.threshold > 0:
                raise ConfigError(f"threshold must be positive, got {self.threshold}")
            lt = math.log(self.threshold)
        else:
            lt = default_log_threshold if self.log_threshold is None else self.log_threshold
        if self.base is not None:
            if not self.base > 0:
                raise ConfigError(f"base must be positive, got {self.base}")
            lb = math.log(self.base)
        else:
            lb = default_log_base if self.log_base is None else self.log_base
        return math.log(self.ratio), lt, lb


@dataclass(frozen=True)
class BetaSchedule:
    """beta_0 = 0, beta_i = ratio^(i-1) base, capped at index ``cap_index``."""

    k: float
    logT: float
    log_betas: tuple[float, ...]
    cap_index: int
    ratio: float
    log_threshold: float
    log_base: float

    @property
    def T(self) -> float:
        return math.exp(self.logT)

    @property
    def betas(self) -> list[float]:
        return [math.exp(lb) for lb in self.log_betas]

    def beta(self, i: int) -> float:
        return math.exp(self.log_betas[i])

    def cutoff(self, i: int) -> float:
        """T^beta_i, the upper end of the i-th prime range."""
        return math.exp(math.exp(self.log_betas[i]) * self.logT)

    def threshold_at(self, i: int) -> float:
        """beta_i^(-3/4)."""
        return math.exp(-0.75 * self.log_betas[i])

    def to_dict(self) -> dict:
        return {
            "kind": type(self).__name__,
            "k": self.k,
            "logT": self.logT,
            "betas": self.betas,
            "log_betas": list(self.log_betas),
            "cap_index": self.cap_index,
            "ratio": self.ratio,
            "log_threshold": self.log_threshold,
            "log_base": self.log_base,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), allow_nan=True)

    @classmethod
    def from_dict(cls, data: dict) -> "BetaSchedule":
        return cls(
            k=data["k"],
            logT=data["logT"],
            log_betas=tuple(float(x) for x in data["log_betas"]),
            cap_index=int(data["cap_index"]),
            ratio=data["ratio"],
            log_threshold=data["log_threshold"],
            log_base=data["log_base"],
        )


class AlphaSchedule(BetaSchedule):
    """Same layout as BetaSchedule, but alpha_0 = log 2 / log X."""


def _build(cls, k, logT, log_first, default_log_threshold, overrides):
    overrides = overrides or ScheduleOverrides()
    log_ratio, lt, lb = overrides.resolve(default_log_threshold, -2 * math.log(math.log(logT)))
    # max{i : beta_i <= threshold}; i = 0 always qualifies
    if lb > lt:
        i_max = 0
    else:
        i_max = 1 + math.floor((lt - lb) / log_ratio + 1e-12)
    cap = i_max + 1
    if cap > MAX_PIECES:
        raise ConfigError(f"schedule would have {cap} pieces; limit is {MAX_PIECES}")
    log_betas = [log_first] + [lb + (i - 1) * log_ratio for i in range(1, cap + 1)]
    if not log_first < lb:
        raise ConfigError("the first exponent must exceed the zeroth")
    return cls(
        k=float(k),
        logT=float(logT),
        log_betas=tuple(log_betas),
        cap_index=cap,
        ratio=float(overrides.ratio),
        log_threshold=lt,
        log_base=lb,
    )


def beta_schedule(k: float, T: float, overrides: ScheduleOverrides | None = None) -> BetaSchedule:
    """The beta-schedule for the zeta splitting.

    Defaults: ratio 20, base (log log T)^-2, threshold exp(-1000 k).  With
    these the cap index is 1 at every feasible T.
    """
    if k < 1:
        raise DomainError(f"beta_schedule needs k >= 1, got {k}")
    if T < 1e3:
        raise DomainError(f"beta_schedule needs T >= 1e3, got {T}")
    return _build(BetaSchedule, k, math.log(T), -math.inf, -1000.0 * k, overrides)


def alpha_schedule(k: float, X: float, overrides: ScheduleOverrides | None = None) -> AlphaSchedule:
    """The alpha-schedule for quadratic twists: alpha_0 = log 2 / log X."""
    if k < 0:
        raise DomainError(f"alpha_schedule needs k >= 0, got {k}")
    if X < 16:
        raise DomainError(f"alpha_schedule needs X >= 16, got {X}")
    logX = math.log(X)
    return _build(AlphaSchedule, k, logX, math.log(math.log(2) / logX), -1000.0 * (1 + k), overrides)


# --------------------------------------------------------------- polynomials


@dataclass(frozen=True)
class DirichletPolynomial:
    """sum_p coeff(p) cos(freq * t * log p)  (the real part of the polynomial)."""

    primes: np.ndarray
    coeffs: np.ndarray
    label: str = "custom"
    freq: int = 1
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        p = np.asarray(self.primes, dtype=np.int64)
        c = np.asarray(self.coeffs, dtype=float)
        if p.shape != c.shape:
            raise ValueError("primes and coeffs differ in length")
        if len(p) > 1 and np.any(np.diff(p) <= 0):
            raise ValueError("primes must be strictly increasing")
        if not np.all(np.isfinite(c)):
            raise ValueError("non-finite coefficient")
        if self.freq not in (1, 2):
            raise ValueError("frequency multiplier must be 1 or 2")
        object.__setattr__(self, "primes", p)
        object.__setattr__(self, "coeffs", c)

    def __len__(self) -> int:
        return len(self.primes)

    def to_dict(self) -> dict:
        return {
            "label": self.label,
            "freq": self.freq,
            "primes": self.primes.tolist(),
            "coeffs": self.coeffs.tolist(),
            "meta": self.meta,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "DirichletPolynomial":
        return cls(
            np.array(data["primes"], dtype=np.int64),
            np.array(data["coeffs"], dtype=float),
            data["label"],
            data["freq"],
            data.get("meta", {}),
        )


_EVAL_BUDGET = 1 << 22


def eval_poly(poly: DirichletPolynomial, t):
    """Evaluate sum coeff(p) cos(freq t log p) at scalar or array t."""
    scalar = np.ndim(t) == 0
    t = np.atleast_1d(np.asarray(t, dtype=float))
    out = np.zeros(t.shape, dtype=float)
    if len(poly):
        freqs = poly.freq * np.log(poly.primes.astype(float))
        rows = max(1, _EVAL_BUDGET // len(poly))
        flat = t.ravel()
        res = out.ravel()
        for s in range(0, len(flat), rows):
            blk = flat[s : s + rows]
            res[s : s + rows] = np.cos(np.outer(blk, freqs)) @ poly.coeffs
        out = res.reshape(t.shape)
    return float(out[0]) if scalar else out


def smoothed_coeffs(primes: np.ndarray, log_length: float) -> np.ndarray:
    """p^(-1/2 - 1/L) log(e^L / p) / L for L = log of the polynomial length."""
    u = np.log(primes.astype(float)) / log_length
    return primes.astype(float) ** -0.5 * np.exp(-u) * (1.0 - u)


def g_poly(i: int, j: int, sched: BetaSchedule, table: PrimeTable) -> DirichletPolynomial:
    """G_(i,j): primes in (T^beta_(i-1), T^beta_i], smoothed at length T^beta_j."""
    if not 1 <= i <= j <= sched.cap_index:
        raise DomainError(f"need 1 <= i <= j <= {sched.cap_index}, got i={i}, j={j}")
    hi = sched.cutoff(i)
    table.require(hi)
    primes = table.in_range(sched.cutoff(i - 1), hi)
    log_len = sched.beta(j) * sched.logT
    label = f"F({i})" if j == sched.cap_index else f"G({i},{j})"
    return DirichletPolynomial(primes, smoothed_coeffs(primes, log_len), label, 1, {"i": i, "j": j})


def f_poly(i: int, sched: BetaSchedule, table: PrimeTable) -> DirichletPolynomial:
    return g_poly(i, sched.cap_index, sched, table)


def pm_poly(m: int, table: PrimeTable) -> DirichletPolynomial:
    """P_m: sum over 2^m < p <= 2^(m+1) of (1/2) cos(2 t log p) / p."""
    if m < 0:
        raise DomainError(f"m must be >= 0, got {m}")
    table.require(2 ** (m + 1))
    primes = table.in_range(2**m, 2 ** (m + 1))
    return DirichletPolynomial(primes, 0.5 / primes.astype(float), f"P({m})", 2, {"m": m})


def pm_range(T: float) -> int:
    """Largest admissible m, floor(log log T / log 2)."""
    return math.floor(math.log(math.log(T)) / math.log(2))


def pm_membership(t: float, m: int, T: float, table: PrimeTable) -> bool:
    """Whether t lies in the set P(m) of the prime-square splitting."""
    top = pm_range(T)
    if not 0 <= m <= top:
        raise DomainError(f"m must lie in [0, {top}] at T={T:g}, got {m}")
    if abs(eval_poly(pm_poly(m, table), t)) <= 2 ** (-m / 10):
        return False
    return all(abs(eval_poly(pm_poly(n, table), t)) <= 2 ** (-n / 10) for n in range(m + 1, top + 1))


# ----------------------------------------------------------- upper bound at a point


def upper_bound_polys(x: float, T: float, table: PrimeTable) -> tuple[DirichletPolynomial, DirichletPolynomial]:
    """The two polynomials in the upper bound for log|zeta|: length x, and prime squares."""
    if not 2 <= x <= T * T:
        raise DomainError(f"need 2 <= x <= T^2, got x={x}, T={T}")
    table.require(x)
    primes = table.in_range(0, x)
    main = DirichletPolynomial(primes, smoothed_coeffs(primes, math.log(x)), "bound_main", 1)
    sq = table.in_range(0, min(math.sqrt(x), math.log(T)))
    squares = DirichletPolynomial(sq, 0.5 / sq.astype(float), "bound_squares", 2)
    return main, squares


def upper_bound_rhs(t, x: float, T: float, table: PrimeTable):
    """Right-hand side of the Dirichlet-polynomial bound for log|zeta(1/2+it)|, without O(1)."""
    tt = np.asarray(t, dtype=float)
    if np.any(tt < T) or np.any(tt > 2 * T):
        raise DomainError(f"t must lie in [T, 2T] = [{T}, {2 * T}]")
    main, squares = upper_bound_polys(x, T, table)
    return eval_poly(main, t) + eval_poly(squares, t) + math.log(T) / math.log(x)


# ------------------------------------------------------------ classification

T_SET = "T_set"
S_SET = "S"
P_BAD = "P_bad"


@dataclass(frozen=True)
class SplitClassification:
    label: str
    index: int | None = None
    witness: tuple[int, int, float] | None = None

    @property
    def name(self) -> str:
        if self.label == T_SET:
            return "T"
        if self.label == S_SET:
            return f"S({self.index})"
        return f"P({self.index})"


def all_g_polys(sched: BetaSchedule, table: PrimeTable) -> dict[tuple[int, int], DirichletPolynomial]:
    n = sched.cap_index
    return {(i, l): g_poly(i, l, sched, table) for i in range(1, n + 1) for l in range(i, n + 1)}


def classify_values(gvals: dict[tuple[int, int], np.ndarray], sched: BetaSchedule) -> tuple[np.ndarray, list]:
    """Classify sample points from precomputed Re G_(i,l) values.

    Returns an integer array (-1 for T, j for S(j)) and the witnesses.
    """
    n = sched.cap_index
    size = len(next(iter(gvals.values()))) if gvals else 0
    level = np.full(size, -1, dtype=np.int64)
    witness: list = [None] * size
    undecided = np.ones(size, dtype=bool)
    for i in range(1, n + 1):
        bound = sched.threshold_at(i)
        for l in range(i, n + 1):
            v = gvals[(i, l)]
            hit = undecided & (np.abs(v) > bound)
            for idx in np.flatnonzero(hit):
                witness[idx] = (i, l, float(v[idx]))
            level[hit] = i - 1
            undecided &= ~hit
    return level, witness


def classify_points(ts, sched: BetaSchedule, table: PrimeTable) -> list[SplitClassification]:
    ts = np.atleast_1d(np.asarray(ts, dtype=float))
    T = sched.T
    if np.any(ts < T * (1 - 1e-12)) or np.any(ts > 2 * T * (1 + 1e-12)):
        raise DomainError(f"t must lie in [T, 2T] = [{T:g}, {2 * T:g}]")
    polys = all_g_polys(sched, table)
    gvals = {key: eval_poly(p, ts) for key, p in polys.items()}
    level, witness = classify_values(gvals, sched)
    return [
        SplitClassification(T_SET) if lv < 0 else SplitClassification(S_SET, int(lv), w)
        for lv, w in zip(level, witness)
    ]


def classify_point(t: float, sched: BetaSchedule, table: PrimeTable) -> SplitClassification:
    """T_set if every |Re G_(i,l)(t)| <= beta_i^(-3/4); otherwise S(j) for the
    first level j + 1 that fails, with the violating (i, l, value)."""
    return classify_points([t], sched, table)[0]


def pm_classify(t: float, T: float, table: PrimeTable) -> SplitClassification | None:
    """The P(m) containing t, or None when every |Re P_n(t)| <= 2^(-n/10)."""
    top = pm_range(T)
    for m in range(top, -1, -1):
        v = eval_poly(pm_poly(m, table), t)
        if abs(v) > 2 ** (-m / 10):
            return SplitClassification(P_BAD, m, (m, m, float(v)))
    return None


# ------------------------------------------------------ deficit experiment


def upper_bound_deficits(T: float, x: float, ts: Sequence[float], table: PrimeTable) -> np.ndarray:
    """upper_bound_rhs(t) - log|zeta(1/2+it)| at the given heights."""
    from .zeta import abs_zeta_half

    ts = np.asarray(ts, dtype=float)
    with np.errstate(divide="ignore"):
        return upper_bound_rhs(ts, x, T, table) - np.log(abs_zeta_half(ts))
