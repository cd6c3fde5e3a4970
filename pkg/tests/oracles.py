"""Independent reference implementations used only by the tests.

None of these share code with the package: factorisation comes from sympy,
quadratic residues from Euler's criterion, and smooth sums from a plain
recursive walk.
"""

from __future__ import annotations

import math

from sympy import factorint, isprime, primerange


def legendre_euler(a: int, p: int) -> int:
    """``(a/p)`` for an odd prime ``p`` via ``a^((p-1)/2) mod p``."""
    a %= p
    if a == 0:
        return 0
    return 1 if pow(a, (p - 1) // 2, p) == 1 else -1


def kronecker_oracle(d: int, n: int) -> int:
    out = 1
    for p, e in factorint(n).items():
        if p == 2:
            c = 0 if d % 2 == 0 else (1 if d % 8 in (1, 7) else -1)
        else:
            c = legendre_euler(d, p)
        out *= c**e
    return out


def squarefree_oracle(m: int) -> bool:
    return m != 0 and all(e == 1 for e in factorint(abs(m)).values())


def fundamental_oracle(d: int) -> bool:
    if d in (0, 1):
        return False
    if d % 4 == 1:
        return squarefree_oracle(d)
    if d % 4 == 0:
        return (d // 4) % 4 in (2, 3) and squarefree_oracle(d // 4)
    return False


def von_mangoldt(n: int) -> float:
    f = factorint(n)
    return math.log(next(iter(f))) if len(f) == 1 else 0.0


def truncated_sum_oracle(d: int, Y: int, sigma: float = 1.0) -> float:
    return math.fsum(von_mangoldt(n) * kronecker_oracle(d, n) / n**sigma for n in range(2, Y + 1))


def unit_coeffs(X: float) -> dict[int, float]:
    return {p: 1.0 - p / X for p in primerange(2, math.floor(X) + 1)}


def resonator_oracle(X: float, d: int) -> float:
    """``R_d`` (not its log) for the Unit family with cutoff ``X``."""
    return math.prod(1.0 / (1.0 - r * kronecker_oracle(d, p)) for p, r in unit_coeffs(X).items())


def smooth_sum_brute(X: float, d: int, M: int) -> float:
    """``sum r(n) chi_d(n)`` over X-smooth ``n <= M`` by recursion over primes."""
    coeffs = unit_coeffs(X)
    ps = list(coeffs)
    a = [coeffs[p] * kronecker_oracle(d, p) for p in ps]

    def walk(i: int, lim: int) -> float:
        if i == len(ps):
            return 1.0
        total, w = 0.0, 1.0
        while lim >= 1:
            total += w * walk(i + 1, lim)
            if a[i] == 0:
                break
            w *= a[i]
            lim //= ps[i]
        return total

    return walk(0, M)


__all__ = [
    "factorint",
    "isprime",
    "kronecker_oracle",
    "legendre_euler",
    "fundamental_oracle",
    "primerange",
    "resonator_oracle",
    "smooth_sum_brute",
    "squarefree_oracle",
    "truncated_sum_oracle",
    "von_mangoldt",
]
