"""Resonance ratio, extreme-value scan, distribution counts, character-sum audit.

Range work is split into fixed blocks of ``BLOCK_WIDTH`` in ``|d|``
independent of the worker count. Blocks are mapped in parallel and their
results concatenated in block order; every reduction then runs once, serially,
over the concatenated arrays. Reports are therefore bit-identical for any
number of workers.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .characters import (
    block_edges,
    fundamental_block,
    kronecker_vec,
    squarefree_part,
)
from .errors import DomainError, EmptyRangeError
from .lfun import BlockEvaluator, TruncationPolicy
from .resonator import (
    ResonatorSpec,
    Unit,
    log_resonator_values,
    main_term,
    threshold_J,
)

log = logging.getLogger(__name__)

ZETA2 = math.pi**2 / 6
HIST_LO, HIST_HI, HIST_WIDTH = -3.0, 3.0, 0.05
HIST_BINS = 120
CHARSUM_EPS = 0.1


@dataclass(frozen=True, eq=False)
class RangeValues:
    """Per-discriminant results for ``lo < |d| <= hi`` in enumeration order."""

    lo: int
    hi: int
    policy: TruncationPolicy
    ds: np.ndarray
    values: np.ndarray
    audits: np.ndarray

    def __len__(self) -> int:
        return len(self.ds)

    @property
    def N(self) -> int:
        return self.lo


def _eval_block(job: tuple[int, int, TruncationPolicy]):
    a, b, policy = job
    ds = fundamental_block(a, b)
    values, audits = BlockEvaluator(policy)(ds)
    return ds, values, audits


def evaluate_range(lo: int, hi: int, policy: TruncationPolicy, workers: int = 1) -> RangeValues:
    """Truncated sums and audits for every fundamental ``d`` with ``lo < |d| <= hi``."""
    if lo < 0 or hi < lo:
        raise DomainError(f"need 0 <= lo <= hi, got lo={lo}, hi={hi}")
    if workers < 1:
        raise DomainError("workers must be >= 1")
    jobs = [(a, b, policy) for a, b in block_edges(lo, hi)]
    if workers == 1 or len(jobs) <= 1:
        parts = [_eval_block(job) for job in jobs]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_eval_block, jobs))
    if not parts:
        parts = [(np.zeros(0, np.int64), np.zeros(0), np.zeros(0))]
    ds, values, audits = (np.concatenate(col) for col in zip(*parts))
    return RangeValues(int(lo), int(hi), policy, ds.astype(np.int64), values, audits)


def _require(rv: RangeValues) -> None:
    if len(rv) == 0:
        raise EmptyRangeError(f"no fundamental discriminants with {rv.lo} < |d| <= {rv.hi}")


def _values_for(lo, hi, policy, workers, values: RangeValues | None) -> RangeValues:
    if values is None:
        return evaluate_range(lo, hi, policy, workers)
    if (values.lo, values.hi, values.policy) != (lo, hi, policy):
        raise DomainError("precomputed values were built for a different range or policy")
    return values


@dataclass(frozen=True)
class RatioReport:
    lo: int
    hi: int
    N: int
    spec: dict
    policy: dict
    S1: float
    S2: float
    log_scale: float
    ratio: float
    main_term: float
    discriminant_count: int
    unweighted_mean: float
    min_value: float
    max_value: float
    max_audit: float

    @property
    def excess(self) -> float:
        return self.ratio - self.main_term

    def as_dict(self) -> dict:
        out = dict(vars(self))
        out["ratio_minus_main_term"] = self.excess
        return out


def ratio_experiment(lo: int, hi: int, spec: ResonatorSpec, policy: TruncationPolicy,
                     workers: int = 1, values: RangeValues | None = None) -> RatioReport:
    """Resonator-weighted average ``S2/S1`` of the truncated sums over the range.

    ``S1 = sum R_d^2`` and ``S2 = sum (sum_n ...) R_d^2``. Both are
    accumulated as ``exp(log_scale) * fsum(w_d [* value_d])`` with
    ``w_d = exp(2 log R_d - log_scale)`` and ``log_scale = max 2 log R_d``.
    """
    rv = _values_for(lo, hi, policy, workers, values)
    _require(rv)
    two_log_r = 2.0 * log_resonator_values(spec, rv.ds)
    shift = float(two_log_r.max())
    w = np.exp(two_log_r - shift)
    s1 = math.fsum(w.tolist())
    s2 = math.fsum((w * rv.values).tolist())
    scale = math.exp(shift)
    return RatioReport(
        lo=rv.lo, hi=rv.hi, N=rv.N,
        spec=spec.as_dict(), policy=policy.as_dict(),
        S1=s1 * scale, S2=s2 * scale, log_scale=shift,
        ratio=s2 / s1,
        main_term=main_term(spec),
        discriminant_count=len(rv),
        unweighted_mean=math.fsum(rv.values.tolist()) / len(rv),
        min_value=float(rv.values.min()),
        max_value=float(rv.values.max()),
        max_audit=float(rv.audits.max()),
    )


def scan_order(ds: np.ndarray, values: np.ndarray) -> np.ndarray:
    """Indices sorting by value descending, then ``|d|`` ascending, positive first."""
    return np.lexsort((ds < 0, np.abs(ds), -values))


def histogram(values: np.ndarray) -> dict:
    idx = np.floor((values - HIST_LO) / HIST_WIDTH).astype(np.int64)
    under = int(np.count_nonzero(idx < 0))
    over = int(np.count_nonzero(idx >= HIST_BINS))
    inside = idx[(idx >= 0) & (idx < HIST_BINS)]
    counts = np.bincount(inside, minlength=HIST_BINS)
    return {
        "lo": HIST_LO, "hi": HIST_HI, "width": HIST_WIDTH,
        "counts": counts.tolist(), "underflow": under, "overflow": over,
    }


@dataclass(frozen=True)
class ScanReport:
    lo: int
    hi: int
    N: int
    sigma: float
    Y: int
    Y_audit: int
    discriminant_count: int
    top: list
    max_d: int
    max_value: float
    max_audit: float
    mean_value: float
    histogram: dict
    rows: RangeValues = field(repr=False, compare=False)

    def as_dict(self) -> dict:
        out = {k: v for k, v in vars(self).items() if k != "rows"}
        out["top"] = [{"d": d, "value": v} for d, v in self.top]
        return out


def extreme_scan(lo: int, hi: int, policy: TruncationPolicy, k: int = 10,
                 workers: int = 1, values: RangeValues | None = None) -> ScanReport:
    """Largest truncated sums over ``lo < |d| <= hi``.

    The minimum side can be read off by negating values; it has no separate
    entry point.
    """
    if k < 1:
        raise DomainError("k must be >= 1")
    rv = _values_for(lo, hi, policy, workers, values)
    _require(rv)
    order = scan_order(rv.ds, rv.values)[:k]
    top = [(int(rv.ds[i]), float(rv.values[i])) for i in order]
    return ScanReport(
        lo=rv.lo, hi=rv.hi, N=rv.N,
        sigma=policy.sigma, Y=policy.Y, Y_audit=policy.Y_audit,
        discriminant_count=len(rv),
        top=top, max_d=top[0][0], max_value=top[0][1],
        max_audit=float(rv.audits.max()),
        mean_value=math.fsum(rv.values.tolist()) / len(rv),
        histogram=histogram(rv.values),
        rows=rv,
    )


@dataclass(frozen=True)
class DistributionReport:
    lo: int
    hi: int
    N: int
    delta: float
    constant: str
    trunc_err: float
    xs: list
    thresholds: list
    counts: list
    discriminant_count: int
    measured_exponent: list
    predicted_exponent: list
    fitted_C_prime: list

    def as_dict(self) -> dict:
        return dict(vars(self))


def distribution_counts(lo: int, hi: int, policy: TruncationPolicy, delta: float,
                        xs: list[float], workers: int = 1,
                        values: RangeValues | None = None,
                        constant: str = "paper",
                        thresholds: list[float] | None = None) -> DistributionReport:
    """Count discriminants whose truncated sum reaches ``J_tilde(N, x)``.

    ``N = lo`` (range ``(N, 2N]`` convention). The truncation error fed to
    the threshold is the largest audit value over the range. Passing
    ``thresholds`` bypasses ``threshold_J`` and counts against fixed values.
    The predicted exponent is ``1 - C' e^{-x}`` with the placeholder
    ``C' = 2B``, ``B = 1/4 - delta``; ``fitted_C_prime`` solves the same
    relation for ``C'`` from each measured exponent.
    """
    if not xs:
        raise DomainError("xs must be nonempty")
    B = Unit(delta).B
    rv = _values_for(lo, hi, policy, workers, values)
    _require(rv)
    trunc_err = float(rv.audits.max())
    if thresholds is None:
        thresholds = [threshold_J(rv.N, x, delta, trunc_err, constant)[1] for x in xs]
    elif len(thresholds) != len(xs):
        raise DomainError("thresholds and xs differ in length")
    sorted_vals = np.sort(rv.values)
    counts = [int(len(sorted_vals) - np.searchsorted(sorted_vals, t, side="left"))
              for t in thresholds]
    logN = math.log(rv.N) if rv.N > 1 else float("nan")
    measured = [math.log(c) / logN if c > 0 else None for c in counts]
    predicted = [1.0 - 2.0 * B * math.exp(-x) for x in xs]
    fitted = [(1.0 - m) * math.exp(x) if m is not None else None for m, x in zip(measured, xs)]
    return DistributionReport(
        lo=rv.lo, hi=rv.hi, N=rv.N, delta=float(delta), constant=constant,
        trunc_err=trunc_err, xs=[float(x) for x in xs],
        thresholds=[float(t) for t in thresholds], counts=counts,
        discriminant_count=len(rv),
        measured_exponent=measured, predicted_exponent=predicted,
        fitted_C_prime=fitted,
    )


@lru_cache(maxsize=4)
def fundamental_upto(N: int) -> np.ndarray:
    """All fundamental discriminants with ``|d| <= N``."""
    parts = [fundamental_block(a, b) for a, b in block_edges(0, N)]
    out = np.concatenate(parts) if parts else np.zeros(0, np.int64)
    out.flags.writeable = False
    return out


def _divisors(n: int) -> list[int]:
    small, large = [], []
    for i in range(1, math.isqrt(n) + 1):
        if n % i == 0:
            small.append(i)
            if i != n // i:
                large.append(n // i)
    return small + large[::-1]


def _prime_divisors(n: int) -> list[int]:
    return [p for p in _divisors(n)[1:] if all(p % q for q in range(2, math.isqrt(p) + 1))]


@dataclass(frozen=True)
class CharSumReport:
    n: int
    n0: int
    n1: int
    N: int
    empirical: int
    main: float
    f_n0: float
    g_n1: float
    normalized_error: float
    eps: float = CHARSUM_EPS

    @property
    def is_square(self) -> bool:
        return self.n0 == 1

    @property
    def ratio(self) -> float | None:
        return self.empirical / self.main if self.main else None

    def as_dict(self) -> dict:
        out = dict(vars(self))
        out["ratio"] = self.ratio
        return out


def charsum_verify(n: int, N: int) -> CharSumReport:
    """Brute-force ``sum chi_d(n)`` over fundamental ``|d| <= N`` against its main term."""
    if n < 1:
        raise DomainError("n must be >= 1")
    if N < 3:
        raise DomainError("N must be >= 3")
    n0, n1 = squarefree_part(n)
    ds = fundamental_upto(int(N))
    empirical = int(kronecker_vec(ds, n).sum(dtype=np.int64))
    main = 0.0
    if n0 == 1:
        main = N / ZETA2 * math.prod(p / (p + 1) for p in _prime_divisors(n))
    eps = CHARSUM_EPS
    f_n0 = math.exp(math.log(n0) ** (1.0 - eps)) if n0 > 1 else 1.0
    g_n1 = math.fsum(
        1.0 / m ** (0.5 + eps)
        for m in _divisors(n1)
        if squarefree_part(m)[1] == 1
    )
    return CharSumReport(
        n=n, n0=n0, n1=n1, N=N, empirical=empirical, main=main,
        f_n0=f_n0, g_n1=g_n1,
        normalized_error=abs(empirical - main) / N ** (0.5 + eps),
    )
