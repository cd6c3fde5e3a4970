"""Quadratic characters and fundamental discriminants.

``kronecker`` is the scalar reference. Bulk scans use :func:`character_table`
instead: for a prime ``p`` the value ``chi_d(p)`` depends only on ``d mod p``
(``d mod 8`` when ``p = 2``), so one small lookup table per prime replaces
millions of symbol evaluations.
"""

from __future__ import annotations

import math
from functools import lru_cache
from typing import Iterator

import numpy as np

from .errors import DomainError
from .primes import sieve_primes

BLOCK_WIDTH = 1 << 16

# (d/2) indexed by d mod 8
_TWO_TABLE = np.array([0, 1, 0, -1, 0, -1, 0, 1], dtype=np.int8)


def kronecker(d: int, n: int) -> int:
    """Kronecker symbol ``(d/n)`` for ``n >= 1``."""
    if d == 0:
        raise DomainError("kronecker symbol needs d != 0")
    if n < 1:
        raise DomainError("kronecker symbol needs n >= 1")
    result = 1
    twos = (n & -n).bit_length() - 1
    if twos:
        if d % 2 == 0:
            return 0
        n >>= twos
        if twos & 1 and d % 8 in (3, 5):
            result = -result
    # Jacobi symbol (d/n) for odd n > 0 only depends on d mod n
    a = d % n
    while a:
        while a % 2 == 0:
            a //= 2
            if n % 8 in (3, 5):
                result = -result
        a, n = n, a
        if a % 4 == 3 and n % 4 == 3:
            result = -result
        a %= n
    return result if n == 1 else 0


@lru_cache(maxsize=None)
def character_table(p: int) -> np.ndarray:
    """Lookup table ``t`` with ``chi_d(p) = t[d % len(t)]`` for prime ``p``."""
    if p == 2:
        return _TWO_TABLE
    table = np.full(p, -1, dtype=np.int8)
    x = np.arange(1, (p - 1) // 2 + 1, dtype=np.int64)
    table[(x * x) % p] = 1
    table[0] = 0
    table.flags.writeable = False
    return table


def _factor(n: int) -> list[tuple[int, int]]:
    out = []
    p = 2
    while p * p <= n:
        if n % p == 0:
            e = 0
            while n % p == 0:
                n //= p
                e += 1
            out.append((p, e))
        p += 1 if p == 2 else 2
    if n > 1:
        out.append((n, 1))
    return out


def kronecker_vec(ds: np.ndarray, n: int) -> np.ndarray:
    """``chi_d(n)`` for every ``d`` in ``ds`` (as int8)."""
    if n < 1:
        raise DomainError("kronecker symbol needs n >= 1")
    ds = np.asarray(ds, dtype=np.int64)
    out = np.ones(ds.shape, dtype=np.int8)
    for p, e in _factor(n):
        table = character_table(p)
        c = table[ds % len(table)]
        out *= c if e & 1 else c * c
    return out


def squarefree_part(n: int) -> tuple[int, int]:
    """Split ``n = n0 * n1**2`` with ``n0`` squarefree."""
    if n < 1:
        raise DomainError("n must be >= 1")
    n0, n1 = 1, 1
    for p, e in _factor(n):
        if e & 1:
            n0 *= p
        n1 *= p ** (e // 2)
    return n0, n1


def is_squarefree(m: int) -> bool:
    m = abs(m)
    if m == 0:
        return False
    if m % 4 == 0:
        return False
    p = 3
    while p * p <= m:
        if m % (p * p) == 0:
            return False
        p += 2
    return True


def is_fundamental(d: int) -> bool:
    """True iff ``d`` is a fundamental discriminant (``d = 1`` excluded)."""
    if d == 0 or d == 1:
        return False
    if d % 4 == 1:
        return is_squarefree(d)
    if d % 4 == 0:
        m = d // 4
        return m % 4 in (2, 3) and is_squarefree(m)
    return False


def squarefree_flags(start: int, stop: int) -> np.ndarray:
    """Boolean flags for ``m`` in ``[start, stop)``: True iff ``m`` is squarefree."""
    start = max(start, 0)
    if stop <= start:
        return np.zeros(0, dtype=bool)
    flags = np.ones(stop - start, dtype=bool)
    if start == 0:
        flags[0] = False
    for p in sieve_primes(math.isqrt(stop - 1)).primes.tolist():
        q = p * p
        first = -(-start // q) * q
        flags[first - start :: q] = False
    return flags


def fundamental_block(lo: int, hi: int) -> np.ndarray:
    """Fundamental discriminants with ``lo < |d| <= hi``, ordered by (|d|, + first)."""
    lo = max(int(lo), 0)
    hi = int(hi)
    if hi <= lo:
        return np.zeros(0, dtype=np.int64)
    a = np.arange(lo + 1, hi + 1, dtype=np.int64)
    sq_a = squarefree_flags(lo + 1, hi + 1)
    r4 = a % 4
    pos = (r4 == 1) & sq_a & (a != 1)
    neg = (r4 == 3) & sq_a

    m_lo = -(-(lo + 1) // 4)
    sq_m = squarefree_flags(m_lo, hi // 4 + 1)
    quad = np.flatnonzero(r4 == 0)
    m = a[quad] // 4
    ok_m = sq_m[m - m_lo]
    m4 = m % 4
    pos[quad] = ok_m & ((m4 == 2) | (m4 == 3))
    neg[quad] = ok_m & ((m4 == 1) | (m4 == 2))

    ds = np.stack([a, -a], axis=1).ravel()
    mask = np.stack([pos, neg], axis=1).ravel()
    return ds[mask]


def block_edges(lo: int, hi: int, width: int = BLOCK_WIDTH) -> list[tuple[int, int]]:
    """Fixed partition of ``(lo, hi]`` into half-open blocks of ``width`` in |d|."""
    edges = []
    a = lo
    while a < hi:
        b = min(a + width, hi)
        edges.append((a, b))
        a = b
    return edges


def enum_fundamental(lo: int, hi: int) -> Iterator[int]:
    """Yield fundamental discriminants with ``lo < |d| <= hi`` in (|d|, + first) order."""
    if lo < 0:
        raise DomainError("lo must be >= 0")
    for a, b in block_edges(lo, hi):
        yield from fundamental_block(a, b).tolist()


def count_fundamental(lo: int, hi: int) -> int:
    return sum(len(fundamental_block(a, b)) for a, b in block_edges(lo, hi))
