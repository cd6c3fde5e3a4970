"""Prime tables and the prime-sum constants behind the resonator main terms.

All sums over primes go through :func:`math.fsum`, so they are correctly
rounded and independent of how the input was partitioned.
"""

from __future__ import annotations

import enum
import math
import os
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import CapacityError, DomainError

DEFAULT_MEM_MB = 2048
SEGMENT_THRESHOLD = 10**8
SEGMENT_SIZE = 1 << 24


def memory_budget_mb() -> int:
    """Table memory cap in MiB, read from ``RES_SCOPE_MEM_MB``."""
    raw = os.environ.get("RES_SCOPE_MEM_MB")
    if raw is None or raw.strip() == "":
        return DEFAULT_MEM_MB
    try:
        value = int(raw)
    except ValueError as exc:
        raise DomainError(f"RES_SCOPE_MEM_MB must be an integer, got {raw!r}") from exc
    if value <= 0:
        raise DomainError("RES_SCOPE_MEM_MB must be positive")
    return value


def _sieve_bytes(limit: int) -> int:
    flags = min(limit + 1, SEGMENT_SIZE) if limit > SEGMENT_THRESHOLD else limit + 1
    # primes (int64) + logs (float64)
    n_primes = 1.3 * limit / math.log(limit) if limit > 16 else 8
    return int(flags + 16 * n_primes)


def check_capacity(n_bytes: int, what: str) -> None:
    budget = memory_budget_mb()
    if n_bytes > budget * (1 << 20):
        raise CapacityError(
            f"{what} needs ~{n_bytes / (1 << 20):.1f} MiB, over the "
            f"RES_SCOPE_MEM_MB budget of {budget} MiB"
        )


@dataclass(frozen=True, eq=False)
class PrimeTable:
    """All primes up to ``limit`` with their natural logs.

    The arrays are read-only, so one table can be shared freely between
    threads and reused across calls.
    """

    limit: int
    primes: np.ndarray
    logs: np.ndarray

    def __len__(self) -> int:
        return len(self.primes)

    def upto(self, x: float) -> int:
        """Number of primes ``p <= x``."""
        return int(np.searchsorted(self.primes, math.floor(x), side="right"))


def _flat_sieve(limit: int) -> np.ndarray:
    flags = np.ones(limit + 1, dtype=bool)
    flags[:2] = False
    flags[4::2] = False
    for p in range(3, math.isqrt(limit) + 1, 2):
        if flags[p]:
            flags[p * p :: 2 * p] = False
    return np.flatnonzero(flags).astype(np.int64)


def _segmented_sieve(limit: int) -> np.ndarray:
    root = math.isqrt(limit)
    base = _flat_sieve(root)
    chunks = [base]
    lo = root + 1
    while lo <= limit:
        hi = min(lo + SEGMENT_SIZE - 1, limit)
        seg = np.ones(hi - lo + 1, dtype=bool)
        for p in base.tolist():
            if p * p > hi:
                break
            start = max(p * p, -(-lo // p) * p)
            seg[start - lo :: p] = False
        chunks.append(np.flatnonzero(seg).astype(np.int64) + lo)
        lo = hi + 1
    return np.concatenate(chunks)


@lru_cache(maxsize=8)
def sieve_primes(limit: int) -> PrimeTable:
    """Sieve of Eratosthenes up to ``limit`` inclusive.

    Limits above ``SEGMENT_THRESHOLD`` are sieved in fixed-size segments so
    the flag array never exceeds ``SEGMENT_SIZE`` bytes.
    """
    limit = int(limit)
    if limit < 0:
        raise DomainError("sieve limit must be >= 0")
    if limit < 2:
        empty_i = np.zeros(0, dtype=np.int64)
        empty_f = np.zeros(0, dtype=np.float64)
        empty_i.flags.writeable = False
        empty_f.flags.writeable = False
        return PrimeTable(limit, empty_i, empty_f)
    check_capacity(_sieve_bytes(limit), f"prime sieve up to {limit}")
    if limit > SEGMENT_THRESHOLD:
        primes = _segmented_sieve(limit)
    else:
        primes = _flat_sieve(limit)
    logs = np.log(primes.astype(np.float64))
    primes.flags.writeable = False
    logs.flags.writeable = False
    return PrimeTable(limit, primes, logs)


def primes_upto(x: float) -> PrimeTable:
    return sieve_primes(max(0, math.floor(x)))


def mertens_log_sum(X: float) -> float:
    """Sum of ``log p / p`` over primes ``p <= X``."""
    if X < 0:
        raise DomainError("X must be >= 0")
    table = primes_upto(X)
    return math.fsum((table.logs / table.primes).tolist())


def chebyshev_theta(X: float) -> float:
    """Chebyshev's theta: sum of ``log p`` over primes ``p <= X``."""
    if X < 0:
        raise DomainError("X must be >= 0")
    return math.fsum(primes_upto(X).logs.tolist())


class PrimeConstantKind(enum.Enum):
    LogOverP2Minus1 = "log p/(p^2-1)"
    LogOverPPPlus1 = "log p/(p(p+1))"
    LogOverPPMinus1 = "log p/(p(p-1))"


@dataclass(frozen=True)
class PrimeConstant:
    """Partial prime sum up to ``cutoff`` with a bound on the omitted tail.

    ``value <= true sum <= value + tail_bound``.
    """

    kind: PrimeConstantKind
    cutoff: int
    value: float
    tail_bound: float

    @property
    def bracket(self) -> tuple[float, float]:
        return (self.value, self.value + self.tail_bound)

    def contains(self, x: float) -> bool:
        lo, hi = self.bracket
        return lo <= x <= hi


def tail_bound(P: int) -> float:
    # integral of 2 ln t / t^2 over [P, inf); dominates sum_{n>P} 2 ln n / n^2
    return 2.0 * (math.log(P) + 1.0) / P


def prime_constant(kind: PrimeConstantKind, P: int) -> PrimeConstant:
    if P < 2:
        raise DomainError(f"prime cutoff must be >= 2, got {P}")
    kind = PrimeConstantKind(kind)
    table = sieve_primes(int(P))
    p = table.primes.astype(np.float64)
    if kind is PrimeConstantKind.LogOverP2Minus1:
        terms = table.logs / (p * p - 1.0)
    elif kind is PrimeConstantKind.LogOverPPPlus1:
        terms = table.logs / (p * (p + 1.0))
    else:
        terms = table.logs / (p * (p - 1.0))
    return PrimeConstant(kind, int(P), math.fsum(terms.tolist()), tail_bound(int(P)))


# Bernoulli numbers B_2 .. B_14
_BERNOULLI = (1 / 6, -1 / 30, 1 / 42, -1 / 30, 5 / 66, -691 / 2730, 7 / 6)


@lru_cache(maxsize=1)
def euler_gamma() -> float:
    """Euler's constant by Euler-Maclaurin summation of the harmonic series.

    With ``n = 20`` and seven correction terms the truncation error is far
    below double precision.
    """
    n = 20
    terms = [1.0 / k for k in range(1, n + 1)]
    terms += [-math.log(n), -1.0 / (2 * n)]
    for k, b in enumerate(_BERNOULLI, start=1):
        terms.append(b / (2 * k * n ** (2 * k)))
    return math.fsum(terms)
