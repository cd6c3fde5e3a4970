"""Resonator families, resonator values and the main terms they predict.

Three families of completely multiplicative coefficients are supported, each
supported on primes ``p <= X``:

* ``Unit``        ``r(p) = 1 - p/X``,           ``X = B log N log log N``, ``B = 1/4 - delta``
* ``NearOne``     ``r(p) = 1 - X**(sigma_A-1)``, ``X = kappa log N log log N``,
                  ``sigma_A = 1 - A/log log N``
* ``FixedSigma``  ``r(p) = 1 - (p/X)**sigma``,  ``X = eta log N log log N``

Resonator values are kept in log space: ``log R_d = -sum log(1 - r(p) chi_d(p))``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np

from .characters import character_table, kronecker
from .errors import CapacityError, DomainError
from .primes import (
    PrimeConstant,
    PrimeConstantKind,
    euler_gamma,
    memory_budget_mb,
    prime_constant,
    primes_upto,
)

# bytes per stored prefix-index entry and per enumerated smooth number (incl. temporaries)
_INDEX_BYTES = 4
_ENTRY_BYTES = 48


@dataclass(frozen=True)
class Unit:
    delta: float

    def __post_init__(self):
        if not (0.0 < self.delta < 0.25):
            raise DomainError(f"delta must lie in (0, 1/4), got {self.delta}")

    @property
    def B(self) -> float:
        return 0.25 - self.delta


@dataclass(frozen=True)
class NearOne:
    A: float
    kappa: float

    def __post_init__(self):
        if self.A <= 0:
            raise DomainError(f"A must be positive, got {self.A}")
        if self.kappa <= 0:
            raise DomainError(f"kappa must be positive, got {self.kappa}")


@dataclass(frozen=True)
class FixedSigma:
    sigma: float
    eta: float

    def __post_init__(self):
        if not (0.5 < self.sigma < 1.0):
            raise DomainError(f"sigma must lie in (1/2, 1), got {self.sigma}")
        if self.eta <= 0:
            raise DomainError(f"eta must be positive, got {self.eta}")


Variant = Union[Unit, NearOne, FixedSigma]


@dataclass(frozen=True)
class ResonatorSpec:
    variant: Variant
    N: int | None
    X: float
    sigma_eff: float

    @property
    def family(self) -> str:
        return type(self.variant).__name__

    def as_dict(self) -> dict:
        out = {"family": self.family, "N": self.N, "X": self.X, "sigma_eff": self.sigma_eff}
        out.update(vars(self.variant))
        return out


def _loglog(N: int) -> float:
    if N is None or N < 16:
        raise DomainError(f"N must be >= 16 so that log log N > 1, got {N}")
    return math.log(math.log(N))


def build_spec(variant: Variant, N: int | None = None, X: float | None = None) -> ResonatorSpec:
    """Derive the cutoff ``X`` (unless given) and the effective sigma.

    An explicit ``X`` overrides the ``N``-based cutoff, which is how the
    large-``X`` asymptotic checks are run; ``NearOne`` still needs ``N`` for
    ``sigma_A``.
    """
    if X is None or isinstance(variant, NearOne):
        lln = _loglog(N)
    if isinstance(variant, Unit):
        scale, sigma_eff = variant.B, 1.0
    elif isinstance(variant, NearOne):
        sigma_eff = 1.0 - variant.A / lln
        if not (0.5 < sigma_eff < 1.0):
            raise DomainError(
                f"sigma_A = 1 - A/log log N = {sigma_eff:.6g} must lie in (1/2, 1); "
                f"need A < log(log(N))/2 = {lln / 2:.6g}"
            )
        scale = variant.kappa
    elif isinstance(variant, FixedSigma):
        scale, sigma_eff = variant.eta, variant.sigma
    else:
        raise TypeError(f"unknown resonator variant {variant!r}")
    if X is None:
        X = scale * math.log(N) * lln
    if X <= 0:
        raise DomainError(f"X must be positive, got {X}")
    return ResonatorSpec(variant, None if N is None else int(N), float(X), float(sigma_eff))


def coefficients(spec: ResonatorSpec, primes: np.ndarray) -> np.ndarray:
    """``r(p)`` for an array of primes (zero beyond ``X``)."""
    p = np.asarray(primes, dtype=np.float64)
    v = spec.variant
    X = spec.X
    if isinstance(v, Unit):
        r = 1.0 - p / X
    elif isinstance(v, NearOne):
        r = np.full(p.shape, 1.0 - X ** (spec.sigma_eff - 1.0))
    else:
        r = 1.0 - (p / X) ** v.sigma
    return np.where(p <= X, r, 0.0)


def resonator_coeff(spec: ResonatorSpec, p: int) -> float:
    return float(coefficients(spec, np.array([p]))[0])


def _support(spec: ResonatorSpec) -> tuple[list[int], list[float]]:
    table = primes_upto(spec.X)
    return table.primes.tolist(), coefficients(spec, table.primes).tolist()


def resonator_value(spec: ResonatorSpec, d: int) -> float:
    """``log R_d`` with ``R_d = prod_{p <= X} (1 - r(p) chi_d(p))**-1``."""
    terms = []
    for p, r in zip(*_support(spec)):
        c = kronecker(d, p)
        if c:
            terms.append(-math.log1p(-r * c))
    return math.fsum(terms)


def log_resonator_values(spec: ResonatorSpec, ds: np.ndarray) -> np.ndarray:
    """Vectorized :func:`resonator_value` over an array of discriminants."""
    ds = np.asarray(ds, dtype=np.int64)
    out = np.zeros(len(ds))
    comp = np.zeros(len(ds))
    for p, r in zip(*_support(spec)):
        table = character_table(p)
        # index by chi + 1: chi = -1, 0, +1
        by_chi = np.array([-math.log1p(r), 0.0, -math.log1p(-r)])
        x = by_chi[table[ds % len(table)] + 1]
        y = x - comp
        t = out + y
        comp = (t - out) - y
        out = t
    return out


def max_log_resonator(spec: ResonatorSpec) -> float:
    """``sum_{p <= X} -log(1 - r(p))``: ``log R_d`` when ``chi_d(p) = 1`` throughout."""
    return math.fsum(-math.log1p(-r) for _, r in zip(*_support(spec)))


_GUARD = 1e-10
PRUNE_TOL = 1e-6
_PRUNE_START = 30.0
# typical final max_cost, used only to size the split
_PRUNE_SIZING = 40.0


def _smooth_numbers(primes: list[int], cap: int | None, costs: list[float] | None = None,
                    max_cost: float = math.inf) -> tuple[np.ndarray, np.ndarray]:
    """Every ``n <= cap`` built from ``primes``: (exponent matrix, log n).

    With ``costs`` only exponent vectors of total cost ``sum e_i costs[i]``
    at most ``max_cost`` are kept. Rows are in exact ascending order of
    ``n``; candidates within a rounding guard of the cap are settled with
    integer arithmetic. ``cap=None`` means no size limit.
    """
    ln_cap = math.inf if cap is None else math.log(cap)
    costs = costs or [0.0] * len(primes)
    logs = np.zeros(1)
    spent = np.zeros(1)
    exps = np.zeros((1, len(primes)), dtype=np.int16)
    for j, (p, c) in enumerate(zip(primes, costs)):
        lp = math.log(p)
        blocks_l, blocks_c, blocks_e = [logs], [spent], [exps]
        cur_l, cur_c, cur_e = logs, spent, exps
        while True:
            keep = (cur_l + lp <= ln_cap + _GUARD) & (cur_c + c <= max_cost)
            if not keep.any():
                break
            cur_l = cur_l[keep] + lp
            cur_c = cur_c[keep] + c
            cur_e = cur_e[keep]
            cur_e = cur_e.copy()
            cur_e[:, j] += 1
            blocks_l.append(cur_l)
            blocks_c.append(cur_c)
            blocks_e.append(cur_e)
        logs = np.concatenate(blocks_l)
        spent = np.concatenate(blocks_c)
        exps = np.concatenate(blocks_e)
    if cap is not None:
        exps, logs = _apply_cap(primes, exps, logs, cap)
    order = np.argsort(logs, kind="stable")
    logs, exps = logs[order], exps[order]
    # float order can only be wrong between near-equal logs; fix those runs exactly
    close = np.flatnonzero(np.diff(logs) < _GUARD)
    if len(close):
        i = 0
        ids = close.tolist()
        while i < len(ids):
            a = ids[i]
            b = a + 1
            while i + 1 < len(ids) and ids[i + 1] == b:
                i += 1
                b += 1
            run = sorted(range(a, b + 1), key=lambda r: _value(primes, exps[r]))
            exps[a : b + 1] = exps[run]
            logs[a : b + 1] = logs[run]
            i += 1
    return exps, logs


def _apply_cap(primes, exps, logs, cap):
    ln_cap = math.log(cap)
    keep = logs <= ln_cap + _GUARD
    near = np.flatnonzero(keep & (logs > ln_cap - _GUARD))
    for i in near.tolist():
        if _value(primes, exps[i]) > cap:
            keep[i] = False
    return exps[keep], logs[keep]


def _value(primes: list[int], exps: np.ndarray) -> int:
    return math.prod(p ** int(e) for p, e in zip(primes, exps))


def _sign_keys(exps: np.ndarray) -> np.ndarray:
    """Per-row key ``odd | nonzero << m`` built from exponent bitmasks."""
    m = exps.shape[1]
    key = np.zeros(len(exps), dtype=np.int32)
    for j in range(m):
        key[(exps[:, j] & 1) == 1] |= 1 << j
        key[exps[:, j] > 0] |= 1 << (m + j)
    return key


def _sign_table(chi: list[int]) -> np.ndarray:
    """``prod chi_i**e_i`` for every key of :func:`_sign_keys`."""
    m = len(chi)
    keys = np.arange(1 << (2 * m), dtype=np.int64)
    odd, nz = keys & ((1 << m) - 1), keys >> m
    neg = sum(1 << i for i, c in enumerate(chi) if c == -1)
    zero = sum(1 << i for i, c in enumerate(chi) if c == 0)
    table = np.where(np.bitwise_count(odd & neg) & 1, -1.0, 1.0)
    table[(nz & zero) != 0] = 0.0
    return table


def _count_estimate(primes: list[int], ln_cap: float) -> float:
    k = len(primes)
    if k == 0:
        return 1.0
    return ln_cap**k / (math.factorial(k) * math.prod(math.log(p) for p in primes)) + 1.0


def _pruned_estimate(costs: list[float], max_cost: float) -> float:
    k = len(costs)
    return max_cost**k / (math.factorial(k) * math.prod(costs)) + 1.0


class SmoothSumOracle:
    """Partial sums ``sum_{n <= M_k, n X-smooth} r(n) chi_d(n)`` at ``M_k = M_base * 2**k``.

    Every smooth ``n`` factors uniquely as ``2**i * s * l`` with ``s`` built
    from the first few odd primes and ``l`` from the rest. With
    ``F(y) = sum_{l <= y} a(l)`` (a prefix sum over the sorted ``l``) and
    ``P_k(s) = F(M_k / s)``, the partial sum at ``M_k`` is
    ``sum_s a(s) Q_k(s)`` where ``Q_k = P_k + a(2) Q_{k-1}``. Each term of
    the finite sum is counted exactly once; the Euler product is never used.

    The structure depends only on the support and ``r``; per-discriminant
    work is a sign pattern, one prefix sum and one pass of the recurrence.

    ``budget`` is in bytes and defaults to the ``RES_SCOPE_MEM_MB`` budget.
    When the full list of ``l`` would take more than half of it, it is pruned to the
    ``l`` with ``|a(l)| >= exp(-max_cost)``. The mass dropped is known
    exactly, since ``sum |a(l)|`` over all ``l`` is ``prod 1/(1 - r(p))``,
    which gives the certified bound ``error_bound`` on the deviation of every
    partial sum from its exact value. ``max_cost`` is raised until that bound
    is at most ``PRUNE_TOL``. Without pruning ``error_bound`` is 0.
    ``prune`` forces the choice either way; ``None`` decides from the budget.
    """

    def __init__(self, spec: "ResonatorSpec", M_base: int, kmax: int,
                 budget: int | None = None, prune: bool | None = None):
        if M_base < 1:
            raise DomainError("M must be >= 1")
        if kmax < 0:
            raise DomainError("kmax must be >= 0")
        if budget is None:
            budget = memory_budget_mb() << 20
        self.spec = spec
        self.M_base = int(M_base)
        self.kmax = int(kmax)
        # primes with r(p) = 0 (p = X exactly) only contribute n = 1
        kept = [(p, r) for p, r in zip(*_support(spec)) if r > 0]
        primes, rs = [p for p, _ in kept], [r for _, r in kept]
        self.primes = primes
        self.r = dict(zip(primes, rs))
        odd = [p for p in primes if p != 2]
        cap = self.M_base << self.kmax
        ln_cap = math.log(cap)
        # rows k run from k_lo (M_k < 1, all partial sums zero) to kmax
        self.k_lo = -self.M_base.bit_length()
        ln_rows = [math.log(self.M_base) + k * math.log(2.0) for k in range(self.k_lo, self.kmax + 1)]
        cost_of = {p: -math.log(self.r[p]) for p in odd}
        best = None
        for j in range(len(odd) + 1):
            n_large = _count_estimate(odd[j:], ln_cap)
            if prune or (prune is None and _ENTRY_BYTES * n_large > budget // 2):
                n_large = _pruned_estimate([cost_of[p] for p in odd[j:]], _PRUNE_SIZING)
            n_small = _count_estimate(odd[:j], ln_cap)
            # row k only holds the s <= M_k
            n_index = sum(_count_estimate(odd[:j], max(t, 0.0)) for t in ln_rows)
            cost = _ENTRY_BYTES * (n_large + n_small) + _INDEX_BYTES * n_index
            if best is None or cost < best[0]:
                best = (cost, j)
        j = best[1]
        self.small, self.large = odd[:j], odd[j:]
        if best[0] > budget:
            raise CapacityError(
                f"smooth-number enumeration for X={spec.X:g} up to M=2**{cap.bit_length() - 1} "
                f"needs ~{best[0] / 2**20:.0f} MiB, over the budget of {budget / 2**20:.0f} MiB"
            )
        s_exps, s_logs = _smooth_numbers(self.small, cap)
        self.s_mag = np.exp(s_exps.astype(np.float64) @ np.log([self.r[p] for p in self.small])) \
            if self.small else np.ones(len(s_logs))
        self.error_bound = 0.0
        self.max_cost = math.inf
        if prune is False or (not prune and _ENTRY_BYTES * _count_estimate(self.large, ln_cap) <= budget // 2):
            l_exps, l_logs = _smooth_numbers(self.large, cap)
        else:
            l_exps, l_logs = self._pruned_large(cap, budget)
        n_index = int(np.searchsorted(s_logs, np.array(ln_rows) + _GUARD, side="right").sum())
        need = _ENTRY_BYTES * (len(s_logs) + len(l_logs)) + _INDEX_BYTES * n_index
        if need > budget:
            raise CapacityError(
                f"smooth-number enumeration for X={spec.X:g} up to M=2**{cap.bit_length() - 1} "
                f"needs {need / 2**20:.0f} MiB, over the budget of {budget / 2**20:.0f} MiB"
            )
        self.l_mag = np.exp(l_exps.astype(np.float64) @ np.log([self.r[p] for p in self.large])) \
            if self.large else np.ones(len(l_logs))
        self.s_key = _sign_keys(s_exps)
        self.l_key = _sign_keys(l_exps)
        self.index, self.offsets = self._prefix_index(s_exps, s_logs, l_exps, l_logs)

    def _pruned_large(self, cap: int, budget: int):
        costs = [-math.log(self.r[p]) for p in self.large]
        total = math.prod(1.0 / (1.0 - self.r[p]) for p in self.large)
        # every partial sum is sum_s a(s) sum_i a(2)^i F(.), so dropped l mass scales by these
        scale = math.fsum(self.s_mag.tolist()) / (1.0 - self.r.get(2, 0.0))
        max_cost = _PRUNE_START
        while True:
            if _ENTRY_BYTES * _pruned_estimate(costs, max_cost) > budget:
                raise CapacityError(
                    f"pruned smooth-number enumeration for X={self.spec.X:g} cannot reach "
                    f"error bound {PRUNE_TOL:g} within {budget / 2**20:.0f} MiB"
                )
            # enumerate by cost alone so entries beyond the cap are not mistaken for dropped mass
            exps, logs = _smooth_numbers(self.large, None, costs, max_cost)
            kept = math.fsum(np.exp(-(exps.astype(np.float64) @ np.array(costs))).tolist())
            bound = max(total - kept, 0.0) * scale
            if bound <= PRUNE_TOL:
                self.error_bound, self.max_cost = bound, max_cost
                return _apply_cap(self.large, exps, logs, cap)
            max_cost += 2.5

    def _prefix_index(self, s_exps, s_logs, l_exps, l_logs):
        """Ragged index: row ``k - k_lo`` holds, for each ``s <= M_base * 2**k``,
        the number of ``l`` with ``l * s <= M_base * 2**k``.

        Rows are stored back to back in one int32 array; ``offsets[row]`` is
        where each starts. Larger ``s`` have ``P_k(s) = 0`` and are left out.
        """
        rows = []
        ln_base, ln2 = math.log(self.M_base), math.log(2.0)
        for k in range(self.k_lo, self.kmax + 1):
            y = ln_base + k * ln2
            n = int(np.searchsorted(s_logs, y + _GUARD, side="right"))
            t = y - s_logs[:n]
            lo = np.searchsorted(l_logs, t - _GUARD, side="left")
            hi = np.searchsorted(l_logs, t + _GUARD, side="right")
            for col in np.flatnonzero(hi > lo).tolist():
                s = _value(self.small, s_exps[col])
                count = int(lo[col])
                for i in range(lo[col], hi[col]):
                    lhs = _value(self.large, l_exps[i]) * s
                    ok = lhs <= (self.M_base << k) if k >= 0 else (lhs << -k) <= self.M_base
                    if not ok:
                        break
                    count = i + 1
                lo[col] = count
            rows.append(lo.astype(np.int32))
        offsets = np.zeros(len(rows) + 1, dtype=np.int64)
        np.cumsum([len(r) for r in rows], out=offsets[1:])
        return np.concatenate(rows), offsets

    def partial_sums(self, d: int) -> np.ndarray:
        """Oracle values at ``M_base * 2**k`` for ``k = 0 .. kmax``."""
        return np.fromiter(self.iter_partial_sums(d), dtype=np.float64, count=self.kmax + 1)

    def iter_partial_sums(self, d: int):
        """Yield the oracle values at ``M_base * 2**k`` for ``k = 0, 1, ..., kmax``."""
        chi = {p: kronecker(d, p) for p in self.primes}
        a2 = self.r[2] * chi[2] if 2 in self.r else 0.0
        a_s = self.s_mag * _sign_table([chi[p] for p in self.small])[self.s_key]
        a_l = self.l_mag * _sign_table([chi[p] for p in self.large])[self.l_key]
        prefix = np.empty(len(a_l) + 1)
        prefix[0] = 0.0
        np.cumsum(a_l, out=prefix[1:])
        # q[s] beyond the current row length is still zero, since rows only grow
        q = np.zeros(len(a_s))
        off = self.offsets
        for row, k in enumerate(range(self.k_lo, self.kmax + 1)):
            n = int(off[row + 1] - off[row])
            head = q[:n]
            head *= a2
            head += prefix[self.index[off[row] : off[row + 1]]]
            if k >= 0:
                yield float(a_s[:n] @ head)


def smooth_sum_oracle(spec: ResonatorSpec, d: int, M: int, budget: int | None = None) -> float:
    """``sum r(n) chi_d(n)`` over ``X``-smooth ``n <= M`` by exhaustive enumeration.

    Independent of the Euler product: the finite sum is evaluated as is (see
    :class:`SmoothSumOracle`). Raises :class:`CapacityError` when the
    enumeration would exceed ``budget`` bytes.
    """
    return float(SmoothSumOracle(spec, M, 0, budget).partial_sums(d)[0])


_ORACLES: dict = {}


def _shared_oracle(spec: ResonatorSpec, M0: int, kmax: int, budget: int | None) -> SmoothSumOracle:
    """Oracle reaching at least ``kmax`` doublings, reused across discriminants."""
    key = (spec, M0, budget)
    oracle = _ORACLES.get(key)
    if oracle is None or oracle.kmax < kmax:
        _ORACLES.clear()
        oracle = _ORACLES[key] = SmoothSumOracle(spec, M0, kmax, budget)
    return oracle


def quiet_window(spec: ResonatorSpec) -> int:
    """Doublings over which the oracle must stay quiet before it counts as converged.

    The tail beyond ``M`` shrinks by about ``r(2)`` per doubling, so a single
    small move says little when ``r(2)`` is close to 1. The window is the
    decay length ``1 / (1 - max r(p))``, and at least 2.
    """
    rs = _support(spec)[1]
    rmax = max(rs, default=0.0)
    # the slack keeps 1 / (1 - 0.8) from rounding up to 6
    return max(2, math.ceil(1.0 / (1.0 - rmax) - 1e-9))


def smooth_sum_converged(spec: ResonatorSpec, d: int, tol: float = 1e-4,
                         M0: int = 1024, budget: int | None = None) -> tuple[float, int]:
    """Double ``M`` from ``M0`` until the oracle stops moving.

    Converged means ``|oracle(2M) - oracle(M)| < tol`` for
    :func:`quiet_window` consecutive doublings. Returns
    ``(oracle value, M*)``. The doubling sequence is evaluated in batches of
    64 steps from one shared :class:`SmoothSumOracle`.
    """
    window = quiet_window(spec)
    kmax = 64
    while True:
        oracle = _shared_oracle(spec, M0, kmax, budget)
        kmax = oracle.kmax
        quiet = 0
        prev = None
        for k, value in enumerate(oracle.iter_partial_sums(d)):
            if prev is not None:
                quiet = quiet + 1 if abs(value - prev) < tol else 0
                if quiet == window:
                    return value, M0 << k
            prev = value
        kmax += 64


def main_term(spec: ResonatorSpec) -> float:
    """The family's main term by direct prime summation."""
    table = primes_upto(spec.X)
    p = table.primes.astype(np.float64)
    r = coefficients(spec, table.primes)
    if isinstance(spec.variant, Unit):
        terms = table.logs / (p + 1.0) * r
    else:
        s = spec.sigma_eff
        terms = table.logs / p**s * r * (p / (p + 1.0))
    return math.fsum(terms.tolist())


def predicted_main_term(spec: ResonatorSpec) -> float:
    """Leading-order prediction the main term is compared against.

    ``Unit``: ``log X`` (the constant is reported separately);
    ``NearOne``: ``(e^A - 1)/A * log log N``;
    ``FixedSigma``: ``sigma/(1 - sigma) * X**(1 - sigma)``.
    """
    v = spec.variant
    if isinstance(v, Unit):
        return math.log(spec.X)
    if isinstance(v, NearOne):
        return math.expm1(v.A) / v.A * _loglog(spec.N)
    return v.sigma / (1.0 - v.sigma) * spec.X ** (1.0 - v.sigma)


@dataclass(frozen=True)
class ClosedFormReport:
    """Both candidate constants for the Unit-family main term.

    ``C_paper`` subtracts ``sum log p/(p^2-1)`` once, ``C_alt`` twice. Since
    the prime sum is only known to within ``[value, value + tail_bound]``,
    each constant carries a matching lower bracket.
    """

    delta: float
    P: int
    gamma: float
    C_paper: float
    C_alt: float
    log_p2_minus_1: PrimeConstant
    log_pp_plus_1: PrimeConstant
    log_pp_minus_1: PrimeConstant

    @property
    def tail_bound(self) -> float:
        return self.log_p2_minus_1.tail_bound

    @property
    def C_paper_bracket(self) -> tuple[float, float]:
        return (self.C_paper - self.tail_bound, self.C_paper)

    @property
    def C_alt_bracket(self) -> tuple[float, float]:
        return (self.C_alt - 2.0 * self.tail_bound, self.C_alt)

    def as_dict(self) -> dict:
        return {
            "delta": self.delta,
            "prime_cutoff": self.P,
            "gamma": self.gamma,
            "C_paper": self.C_paper,
            "C_alt": self.C_alt,
            "C_paper_bracket": list(self.C_paper_bracket),
            "C_alt_bracket": list(self.C_alt_bracket),
            "tail_bound": self.tail_bound,
            "sum_log_p_over_p2_minus_1": self.log_p2_minus_1.value,
            "sum_log_p_over_p_p_plus_1": self.log_pp_plus_1.value,
            "sum_log_p_over_p_p_minus_1": self.log_pp_minus_1.value,
        }


def closed_form_constants(delta: float, P: int) -> ClosedFormReport:
    if not (0.0 < delta < 0.25):
        raise DomainError(f"delta must lie in (0, 1/4), got {delta}")
    if P < 1000:
        raise DomainError(f"prime cutoff must be >= 1000, got {P}")
    gamma = euler_gamma()
    c2 = prime_constant(PrimeConstantKind.LogOverP2Minus1, P)
    base = math.log(0.25 - delta) - gamma - 1.0
    return ClosedFormReport(
        delta=float(delta),
        P=int(P),
        gamma=gamma,
        C_paper=base - c2.value,
        C_alt=base - 2.0 * c2.value,
        log_p2_minus_1=c2,
        log_pp_plus_1=prime_constant(PrimeConstantKind.LogOverPPPlus1, P),
        log_pp_minus_1=prime_constant(PrimeConstantKind.LogOverPPMinus1, P),
    )


THRESHOLD_PRIME_CUTOFF = 10**5


def threshold_J(N: int, x: float, delta: float, trunc_err: float,
                constant: str = "paper") -> tuple[float, float]:
    """Return ``(J, J_tilde)`` for the distribution count threshold.

    ``J = log log N + log log log N + C - x + trunc_err + e`` and
    ``J_tilde = J - e`` with ``e = exp(-(log log N)**(1/3)) / 2``. ``constant``
    selects ``C_paper`` or ``C_alt``.
    """
    lln = _loglog(N)
    if x < 0:
        raise DomainError(f"x must be >= 0, got {x}")
    report = closed_form_constants(delta, THRESHOLD_PRIME_CUTOFF)
    if constant == "paper":
        C = report.C_paper
    elif constant == "alt":
        C = report.C_alt
    else:
        raise DomainError(f"constant must be 'paper' or 'alt', got {constant!r}")
    e = 0.5 * math.exp(-lln ** (1.0 / 3.0))
    J = lln + math.log(lln) + C - x + trunc_err + e
    return J, J - e
