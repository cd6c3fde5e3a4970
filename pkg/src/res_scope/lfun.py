"""Truncated Dirichlet sums standing in for ``-L'/L(sigma, chi_d)``.

The stand-in is ``sum_{n <= Y} Lambda(n) chi_d(n) n^-sigma``. Two routes are
provided:

* :func:`neg_log_deriv_truncated` walks the prime-power table term by term
  with the scalar Kronecker symbol. It is the reference.
* :class:`BlockEvaluator` folds all powers of a prime into two weights
  (odd and even exponents, since ``chi(p)**k`` is ``chi(p)`` or ``chi(p)**2``)
  and evaluates a whole array of discriminants per prime with a residue
  lookup. This is what the range scans use.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .characters import character_table, kronecker
from .errors import DomainError
from .primes import check_capacity, sieve_primes


@dataclass(frozen=True, eq=False)
class PrimePowerTable:
    """Prime powers ``n = p**k <= limit`` in ascending order.

    ``lam[i]`` is ``Lambda(n[i]) = log base[i]``. Powers ``n**-sigma`` are
    cached per ``sigma`` since one table serves a whole discriminant range.
    """

    limit: int
    n: np.ndarray
    base: np.ndarray
    lam: np.ndarray
    _recip: dict = field(default_factory=dict, repr=False, compare=False)

    def __len__(self) -> int:
        return len(self.n)

    def recip_pow(self, sigma: float) -> np.ndarray:
        cached = self._recip.get(sigma)
        if cached is None:
            cached = self.n.astype(np.float64) ** (-float(sigma))
            cached.flags.writeable = False
            self._recip[sigma] = cached
        return cached

    def entries(self) -> list[tuple[int, float]]:
        return list(zip(self.n.tolist(), self.lam.tolist()))


@lru_cache(maxsize=8)
def prime_power_table(Y: int) -> PrimePowerTable:
    Y = int(Y)
    if Y < 0:
        raise DomainError("Y must be >= 0")
    check_capacity(24 * (Y // 2 + 64), f"prime-power table up to {Y}")
    primes = sieve_primes(Y).primes.tolist()
    pairs = []
    for p in primes:
        q = p
        while q <= Y:
            pairs.append((q, p))
            q *= p
    pairs.sort()
    n = np.array([q for q, _ in pairs], dtype=np.int64)
    base = np.array([p for _, p in pairs], dtype=np.int64)
    lam = np.log(base.astype(np.float64))
    for arr in (n, base, lam):
        arr.flags.writeable = False
    return PrimePowerTable(Y, n, base, lam)


@dataclass(frozen=True)
class TruncationPolicy:
    """Evaluation point ``sigma``, cutoff ``Y`` and audit cutoff ``Y_audit``."""

    sigma: float
    Y: int
    Y_audit: int

    def __post_init__(self):
        if not (0.5 < self.sigma <= 1.0):
            raise DomainError(f"sigma must lie in (1/2, 1], got {self.sigma}")
        if self.Y < 1:
            raise DomainError(f"Y must be >= 1, got {self.Y}")
        if self.Y_audit < self.Y:
            raise DomainError(f"Y_audit ({self.Y_audit}) must be >= Y ({self.Y})")

    @classmethod
    def for_N(cls, N: int, sigma: float = 1.0, Y: int | None = None,
              Y_audit: int | None = None) -> "TruncationPolicy":
        """Default desk-scale cutoffs: ``Y = max(10**4, ceil(log(N)**3))``, ``Y_audit = 2Y``."""
        if Y is None:
            Y = max(10**4, math.ceil(math.log(max(N, 2)) ** 3))
        if Y_audit is None:
            Y_audit = 2 * Y
        return cls(float(sigma), int(Y), int(Y_audit))

    def as_dict(self) -> dict:
        return {"sigma": self.sigma, "Y": self.Y, "Y_audit": self.Y_audit}


def _truncated_sum(d: int, table: PrimePowerTable, sigma: float, Y: int) -> float:
    count = int(np.searchsorted(table.n, Y, side="right"))
    weights = (table.lam[:count] * table.recip_pow(sigma)[:count]).tolist()
    terms = []
    for n, w in zip(table.n[:count].tolist(), weights):
        c = kronecker(d, n)
        if c:
            terms.append(w if c > 0 else -w)
    return math.fsum(terms)


def neg_log_deriv_truncated(d: int, policy: TruncationPolicy,
                            table: PrimePowerTable | None = None) -> float:
    """``sum_{n <= Y} Lambda(n) chi_d(n) / n**sigma`` by direct enumeration."""
    if table is None:
        table = prime_power_table(policy.Y)
    elif table.limit < policy.Y:
        raise DomainError(f"table limit {table.limit} is below Y={policy.Y}")
    return _truncated_sum(d, table, policy.sigma, policy.Y)


def truncation_audit(d: int, policy: TruncationPolicy,
                     table: PrimePowerTable | None = None) -> float:
    """``|sum at Y_audit - sum at Y|``; both sums share one table."""
    if policy.Y_audit == policy.Y:
        return 0.0
    if table is None:
        table = prime_power_table(policy.Y_audit)
    elif table.limit < policy.Y_audit:
        raise DomainError(f"table limit {table.limit} is below Y_audit={policy.Y_audit}")
    hi = _truncated_sum(d, table, policy.sigma, policy.Y_audit)
    lo = _truncated_sum(d, table, policy.sigma, policy.Y)
    return abs(hi - lo)


class _Kahan:
    """Elementwise compensated accumulator over float64 arrays."""

    __slots__ = ("s", "c", "_y", "_t")

    def __init__(self, size: int):
        self.s = np.zeros(size)
        self.c = np.zeros(size)
        self._y = np.empty(size)
        self._t = np.empty(size)

    def add(self, x: np.ndarray) -> None:
        y, t = self._y, self._t
        np.subtract(x, self.c, out=y)
        np.add(self.s, y, out=t)
        np.subtract(t, self.s, out=self.c)
        self.c -= y
        self.s, self._t = t, self.s


@dataclass(frozen=True, eq=False)
class FoldedWeights:
    """Per-prime weights for the folded evaluation.

    For prime ``p`` the contribution to the sum at cutoff ``Y`` is
    ``chi(p) * odd[i] + chi(p)**2 * even[i]``; ``*_audit`` hold the same
    at ``Y_audit``.
    """

    policy: TruncationPolicy
    primes: np.ndarray
    odd: np.ndarray
    even: np.ndarray
    odd_audit: np.ndarray
    even_audit: np.ndarray


@lru_cache(maxsize=8)
def folded_weights(policy: TruncationPolicy) -> FoldedWeights:
    table = prime_power_table(policy.Y_audit)
    recip = table.recip_pow(policy.sigma)
    terms = (table.lam * recip).tolist()
    primes = sieve_primes(policy.Y_audit).primes
    index = {p: i for i, p in enumerate(primes.tolist())}
    buckets: list[list[list[float]]] = [[[], [], [], []] for _ in range(len(primes))]
    for n, p, w in zip(table.n.tolist(), table.base.tolist(), terms):
        k = round(math.log(n) / math.log(p))
        parity = k & 1
        slot = buckets[index[p]]
        # slots: 0 odd<=Y, 1 even<=Y, 2 odd<=Y_audit, 3 even<=Y_audit
        if n <= policy.Y:
            slot[1 - parity].append(w)
        slot[3 - parity].append(w)
    cols = [np.array([math.fsum(b[j]) for b in buckets]) for j in range(4)]
    return FoldedWeights(policy, primes, cols[0], cols[1], cols[2], cols[3])


class BlockEvaluator:
    """Vectorized truncated sums and audits for arrays of discriminants."""

    def __init__(self, policy: TruncationPolicy):
        self.policy = policy
        self.weights = folded_weights(policy)

    def __call__(self, ds: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Return ``(values, audits)`` for the discriminants ``ds``."""
        ds = np.asarray(ds, dtype=np.int64)
        size = len(ds)
        if size and np.abs(ds).max() < 2**31:
            ds = ds.astype(np.int32)
        value = _Kahan(size)
        delta = _Kahan(size)
        r = np.empty(size, dtype=ds.dtype)
        x = np.empty(size)
        w = self.weights
        Y = self.policy.Y
        for i, p in enumerate(w.primes.tolist()):
            table = character_table(p)
            np.remainder(ds, len(table), out=r)
            if w.even_audit[i] == 0.0:
                # p > sqrt(Y_audit): only the first power contributes
                if p <= Y:
                    np.multiply(table.take(r), w.odd[i], out=x)
                    value.add(x)
                else:
                    np.multiply(table.take(r), w.odd_audit[i], out=x)
                    delta.add(x)
                continue
            chi = table.astype(np.float64)
            chi2 = chi * chi
            value.add((chi * w.odd[i] + chi2 * w.even[i]).take(r))
            d_odd = w.odd_audit[i] - w.odd[i]
            d_even = w.even_audit[i] - w.even[i]
            if d_odd or d_even:
                delta.add((chi * d_odd + chi2 * d_even).take(r))
        return value.s, np.abs(delta.s)
