"""Prime sieving and prime sums over half-open ranges (lo, hi]."""

from __future__ import annotations

import math
import os
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import BoundsError, DomainError, InsufficientTableError

MAX_LIMIT = 10**9
SEGMENT_THRESHOLD = 10**8
SEGMENT_SIZE = 1 << 24

CACHE_ENV = "ZETALAB_CACHE_DIR"
CACHE_MAGIC = b"ZLPT"
CACHE_VERSION = 1
_HEADER = struct.Struct("<4sIQQ")  # magic, version, limit, count


@dataclass(frozen=True)
class PrimeTable:
    limit: int
    primes: np.ndarray
    cum_recip: np.ndarray
    cum_recip_sqrt: np.ndarray

    def __post_init__(self):
        for arr in (self.primes, self.cum_recip, self.cum_recip_sqrt):
            arr.setflags(write=False)

    def __len__(self) -> int:
        return len(self.primes)

    def in_range(self, lo: float, hi: float) -> np.ndarray:
        """Primes p with lo < p <= hi."""
        i, j = self._bounds(lo, hi)
        return self.primes[i:j]

    def _bounds(self, lo: float, hi: float) -> tuple[int, int]:
        i = int(np.searchsorted(self.primes, lo, side="right"))
        j = int(np.searchsorted(self.primes, hi, side="right"))
        return i, j

    def require(self, hi: float) -> None:
        if hi > self.limit:
            raise InsufficientTableError(
                f"prime table reaches {self.limit}, need primes up to {hi:.6g}"
            )


def _small_sieve(limit: int) -> np.ndarray:
    is_prime = np.ones(limit + 1, dtype=bool)
    is_prime[:2] = False
    is_prime[4::2] = False
    for p in range(3, math.isqrt(limit) + 1, 2):
        if is_prime[p]:
            is_prime[p * p :: 2 * p] = False
    return np.flatnonzero(is_prime)


def _segmented_sieve(limit: int) -> np.ndarray:
    base = _small_sieve(math.isqrt(limit))
    chunks = [base]
    lo = int(base[-1]) + 1 if len(base) else 2
    odd_base = base[1:]
    while lo <= limit:
        hi = min(lo + SEGMENT_SIZE, limit + 1)
        seg = np.ones(hi - lo, dtype=bool)
        if lo % 2 == 0:
            seg[0::2] = False
        else:
            seg[1::2] = False
        for p in odd_base:
            p = int(p)
            if p * p >= hi:
                break
            start = max(p * p, ((lo + p - 1) // p) * p)
            if start % 2 == 0:
                start += p
            seg[start - lo :: 2 * p] = False
        chunks.append(np.flatnonzero(seg) + lo)
        lo = hi
    return np.concatenate(chunks)


def _table_from_primes(limit: int, primes: np.ndarray) -> PrimeTable:
    primes = np.asarray(primes, dtype=np.int64)
    pf = primes.astype(np.float64)
    return PrimeTable(
        limit=limit,
        primes=primes,
        cum_recip=np.cumsum(1.0 / pf),
        cum_recip_sqrt=np.cumsum(1.0 / np.sqrt(pf)),
    )


def cache_dir() -> Path:
    env = os.environ.get(CACHE_ENV)
    if env:
        return Path(env)
    base = os.environ.get("XDG_DATA_HOME") or os.path.join(Path.home(), ".local", "share")
    return Path(base) / "zetalab"


def _cache_path(limit: int, directory: Path | None) -> Path:
    return (directory or cache_dir()) / f"primes_{limit}.bin"


def write_cache(table: PrimeTable, path: Path) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    deltas = np.diff(table.primes, prepend=0)
    # largest prime gap below 1e9 is 282, so deltas fit in uint16
    tmp = path.with_suffix(".tmp")
    with open(tmp, "wb") as fh:
        fh.write(_HEADER.pack(CACHE_MAGIC, CACHE_VERSION, table.limit, len(table.primes)))
        fh.write(deltas.astype("<u2").tobytes())
    os.replace(tmp, path)


def read_cache(path: Path) -> PrimeTable:
    with open(path, "rb") as fh:
        magic, version, limit, count = _HEADER.unpack(fh.read(_HEADER.size))
        if magic != CACHE_MAGIC or version != CACHE_VERSION:
            raise ValueError(f"{path}: not a prime cache (magic={magic!r}, version={version})")
        deltas = np.frombuffer(fh.read(2 * count), dtype="<u2")
    if len(deltas) != count:
        raise ValueError(f"{path}: truncated cache")
    return _table_from_primes(limit, np.cumsum(deltas, dtype=np.int64))


def sieve(limit: int, *, use_cache: bool = False, directory: Path | None = None) -> PrimeTable:
    """All primes <= limit with prefix sums of 1/p and 1/sqrt(p).

    With ``use_cache`` the table is read from / written to a binary file
    under ``$ZETALAB_CACHE_DIR`` (or ``directory``).
    """
    if not 2 <= limit <= MAX_LIMIT:
        raise BoundsError(f"sieve limit must lie in [2, {MAX_LIMIT}], got {limit}")
    limit = int(limit)
    path = _cache_path(limit, directory) if use_cache else None
    if path is not None and path.exists():
        return read_cache(path)
    if limit > SEGMENT_THRESHOLD:
        primes = _segmented_sieve(limit)
    else:
        primes = _small_sieve(limit)
    table = _table_from_primes(limit, primes)
    if path is not None:
        write_cache(table, path)
    return table


def _prefix_diff(cum: np.ndarray, i: int, j: int) -> float:
    if j <= i:
        return 0.0
    upper = cum[j - 1]
    lower = cum[i - 1] if i > 0 else 0.0
    return float(upper - lower)


def _check_range(table: PrimeTable, lo: float, hi: float) -> None:
    if not lo < hi:
        raise DomainError(f"empty range: need lo < hi, got ({lo}, {hi}]")
    if lo < 0:
        raise DomainError(f"lo must be >= 0, got {lo}")
    table.require(hi)


def sum_recip(table: PrimeTable, lo: float, hi: float) -> float:
    """Sum of 1/p over primes lo < p <= hi."""
    _check_range(table, lo, hi)
    return _prefix_diff(table.cum_recip, *table._bounds(lo, hi))


def sum_recip_sqrt(table: PrimeTable, lo: float, hi: float) -> float:
    """Sum of 1/sqrt(p) over primes lo < p <= hi."""
    _check_range(table, lo, hi)
    return _prefix_diff(table.cum_recip_sqrt, *table._bounds(lo, hi))


def mertens_deviation(table: PrimeTable, x: float) -> float:
    """sum_{p <= x} 1/p - log log x; tends to the Meissel-Mertens constant."""
    if x < 3:
        raise DomainError(f"mertens_deviation needs x >= 3, got {x}")
    return sum_recip(table, 0, x) - math.log(math.log(x))
