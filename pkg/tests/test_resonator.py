import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import fundamental_oracle, kronecker_oracle, primerange, resonator_oracle, smooth_sum_brute
from res_scope.characters import fundamental_block
from res_scope.errors import CapacityError, DomainError
from res_scope.primes import PrimeConstantKind, euler_gamma, prime_constant
from res_scope.resonator import (
    FixedSigma,
    NearOne,
    SmoothSumOracle,
    Unit,
    build_spec,
    closed_form_constants,
    coefficients,
    log_resonator_values,
    main_term,
    max_log_resonator,
    predicted_main_term,
    quiet_window,
    resonator_coeff,
    resonator_value,
    smooth_sum_converged,
    smooth_sum_oracle,
    threshold_J,
)

small_fundamentals = st.integers(min_value=-200, max_value=200).filter(fundamental_oracle)


def unit(X):
    return build_spec(Unit(0.01), X=X)


def test_build_spec_examples():
    s = build_spec(Unit(0.01), 10**6)
    ln = math.log(10**6)
    assert s.X == pytest.approx(0.24 * ln * math.log(ln), rel=1e-14)
    assert s.X == pytest.approx(8.7061, abs=1e-3)
    assert s.sigma_eff == 1.0
    near = build_spec(NearOne(1.0, 0.1), 10**6)
    assert near.sigma_eff == pytest.approx(1 - 1 / math.log(ln), rel=1e-15)
    assert near.sigma_eff == pytest.approx(0.61915, abs=1e-4)
    assert build_spec(FixedSigma(0.75, 2.0), 10**6).X == pytest.approx(2 * ln * math.log(ln))


def test_build_spec_errors():
    with pytest.raises(DomainError, match="1/2"):
        build_spec(NearOne(3.0, 0.1), 10**6)
    with pytest.raises(DomainError):
        build_spec(Unit(0.01), 15)
    with pytest.raises(DomainError):
        Unit(0.25)
    with pytest.raises(DomainError):
        FixedSigma(1.0, 1.0)
    # an explicit X still needs N for the near-one family
    with pytest.raises(DomainError):
        build_spec(NearOne(1.0, 0.1), X=10.0)


def test_coefficient_examples():
    assert resonator_coeff(unit(10), 2) == pytest.approx(0.8, abs=1e-15)
    assert resonator_coeff(unit(10), 11) == 0.0
    fs = build_spec(FixedSigma(0.75, 1.0), X=16)
    assert resonator_coeff(fs, 2) == pytest.approx(1 - 0.125**0.75, abs=1e-15)
    assert resonator_coeff(fs, 2) == pytest.approx(0.78978, abs=1e-5)
    assert resonator_coeff(fs, 17) == 0.0


@pytest.mark.parametrize("spec", [
    build_spec(Unit(0.01), 10**6),
    build_spec(NearOne(1.0, 0.1), 10**8),
    build_spec(FixedSigma(0.6, 3.0), 10**5),
])
def test_coefficients_in_unit_interval(spec):
    r = coefficients(spec, np.array(list(primerange(2, 2000))))
    assert np.all(r >= 0) and np.all(r < 1)


def test_resonator_value_examples():
    assert resonator_value(unit(1.5), 5) == 0.0
    assert resonator_value(unit(10), 5) == pytest.approx(-math.log(1.8 * 1.7 * 1.3), abs=1e-14)
    assert resonator_value(unit(10), 5) == pytest.approx(-1.3808, abs=1e-4)
    assert math.exp(resonator_value(unit(10), 5)) == pytest.approx(0.25138, abs=1e-5)


@settings(max_examples=60, deadline=None)
@given(small_fundamentals, st.floats(min_value=2.0, max_value=60.0))
def test_resonator_value_matches_product_oracle(d, X):
    assert math.exp(resonator_value(unit(X), d)) == pytest.approx(resonator_oracle(X, d), rel=1e-12)


def test_vectorized_matches_scalar():
    spec = build_spec(Unit(0.01), 10**6)
    ds = fundamental_block(0, 5000)
    vec = log_resonator_values(spec, ds)
    assert vec == pytest.approx([resonator_value(spec, d) for d in ds.tolist()], abs=1e-12)


@settings(max_examples=60, deadline=None)
@given(small_fundamentals, st.floats(min_value=2.0, max_value=40.0))
def test_log_resonator_upper_bound(d, X):
    spec = unit(X)
    assert resonator_value(spec, d) <= max_log_resonator(spec)


def test_upper_bound_attained_when_all_characters_are_one():
    spec = unit(10)
    # chi_d(p) = 1 for p = 2, 3, 5, 7 at d = 1 + 4*(2*3*5*7)*k with d a fundamental
    d = next(d for d in range(841, 10**6, 840) if fundamental_oracle(d)
             and all(kronecker_oracle(d, p) == 1 for p in (2, 3, 5, 7)))
    assert resonator_value(spec, d) == pytest.approx(max_log_resonator(spec), abs=1e-14)


def test_oracle_trivial_cases():
    assert smooth_sum_oracle(unit(10), 5, 1) == 1.0
    assert smooth_sum_oracle(unit(1.5), 5, 10**9) == 1.0
    with pytest.raises(DomainError):
        smooth_sum_oracle(unit(10), 5, 0)


@settings(max_examples=40, deadline=None)
@given(small_fundamentals, st.floats(min_value=2.0, max_value=25.0),
       st.integers(min_value=1, max_value=20000))
def test_oracle_matches_brute_force(d, X, M):
    assert smooth_sum_oracle(unit(X), d, M) == pytest.approx(smooth_sum_brute(X, d, M), abs=1e-11)


def test_partial_sums_follow_doublings():
    spec = unit(12)
    sums = SmoothSumOracle(spec, 7, 10).partial_sums(-7)
    assert len(sums) == 11
    for k in (0, 3, 10):
        assert sums[k] == pytest.approx(smooth_sum_brute(12, -7, 7 << k), abs=1e-12)


def test_pruned_oracle_respects_certified_bound():
    spec = unit(20)
    oracle = SmoothSumOracle(spec, 10**9, 0, prune=True)
    assert 0 < oracle.error_bound <= 1e-6
    for d in (5, -4, 8, -163):
        exact = SmoothSumOracle(spec, 10**9, 0, prune=False).partial_sums(d)[0]
        assert abs(oracle.partial_sums(d)[0] - exact) <= oracle.error_bound


def test_oracle_capacity_error():
    with pytest.raises(CapacityError):
        SmoothSumOracle(unit(30), 10**12, 400, budget=1 << 16)


def test_oracle_at_one_million_is_still_far_from_the_product():
    # at M = 10**6 the tail has not decayed yet: the finite sum differs from
    # R_5 = 0.25138... by 3.7e-3; value cross-checked against the recursive walk
    value = smooth_sum_oracle(unit(10), 5, 10**6)
    assert value == pytest.approx(smooth_sum_brute(10, 5, 10**6), abs=1e-12)
    assert value == pytest.approx(0.2550781906, abs=1e-9)
    closer = smooth_sum_oracle(unit(10), 5, 10**12)
    assert abs(closer - 0.2513826043) < abs(value - 0.2513826043)


def test_quiet_window():
    assert quiet_window(unit(1.5)) == 2
    assert quiet_window(unit(10)) == 5
    assert quiet_window(unit(30)) == 15


@pytest.mark.parametrize("X", [6, 10, 20])
def test_converged_oracle_agrees_with_product(X):
    spec = unit(X)
    for d in (5, -4, -7, 8, 13, -163, 197):
        value, M = smooth_sum_converged(spec, d)
        assert M >= 1024
        assert abs(math.exp(resonator_value(spec, d)) - value) < 1e-3


def test_main_term_examples():
    assert main_term(unit(1.5)) == 0.0
    hand = sum(math.log(p) / (p + 1) * (1 - p / 10) for p in (2, 3, 5, 7))
    assert main_term(unit(10)) == pytest.approx(hand, abs=1e-14)
    assert main_term(unit(10)) == pytest.approx(0.5842, abs=1e-4)
    fs = build_spec(FixedSigma(0.75, 1.0), X=1e4)
    assert predicted_main_term(fs) == pytest.approx(30.0)
    assert main_term(fs) == pytest.approx(30.0, rel=0.25)


def test_main_term_near_one_matches_hand_sum():
    spec = build_spec(NearOne(1.0, 0.5), 10**4)
    s = spec.sigma_eff
    r = 1 - spec.X ** (s - 1)
    hand = sum(math.log(p) / p**s * r * p / (p + 1) for p in primerange(2, math.floor(spec.X) + 1))
    assert main_term(spec) == pytest.approx(hand, rel=1e-13)


def test_size_bound_trend():
    margins = []
    for N in (10**4, 10**5, 10**6):
        spec = build_spec(Unit(0.01), N)
        values = log_resonator_values(spec, fundamental_block(N, 2 * N))
        top = 2 * values.max() / math.log(N)
        limit = 2 * spec.variant.B + 0.2
        assert top < limit
        margins.append(limit - top)
    assert margins[0] > margins[1] > margins[2]


def test_unit_main_term_minus_log_x_settles():
    diffs = [main_term(s) - math.log(s.X)
             for s in (build_spec(Unit(0.01), N) for N in (10**4, 10**6, 10**8))]
    assert abs(diffs[2] - diffs[1]) < abs(diffs[1] - diffs[0])


def test_closed_form_examples():
    rep = closed_form_constants(0.01, 10**5)
    c2 = prime_constant(PrimeConstantKind.LogOverP2Minus1, 10**5).value
    assert rep.C_paper == pytest.approx(math.log(0.24) - euler_gamma() - 1 - c2, abs=1e-14)
    assert rep.C_paper == pytest.approx(-3.5743, abs=1e-3)
    assert rep.C_alt == pytest.approx(rep.C_paper - c2, abs=1e-14)
    assert rep.C_alt == pytest.approx(-4.1443, abs=1e-3)
    lo, hi = rep.C_paper_bracket
    assert lo < hi == rep.C_paper and hi - lo == pytest.approx(rep.tail_bound)
    assert {"C_paper", "C_alt", "gamma", "tail_bound"} <= rep.as_dict().keys()


def test_closed_form_errors_and_monotonicity():
    with pytest.raises(DomainError):
        closed_form_constants(0.25, 10**5)
    with pytest.raises(DomainError):
        closed_form_constants(0.01, 999)
    deltas = [0.01, 0.1, 0.2, 0.24, 0.2499, 0.249999]
    reps = [closed_form_constants(d, 1000) for d in deltas]
    assert all(a.C_paper > b.C_paper for a, b in zip(reps, reps[1:]))
    assert all(a.C_alt > b.C_alt for a, b in zip(reps, reps[1:]))
    assert reps[-1].C_paper < -14


def test_threshold_golden():
    J, Jt = threshold_J(10**6, 0.0, 0.01, 0.0)
    lln = math.log(math.log(10**6))
    e = 0.5 * math.exp(-lln ** (1 / 3))
    assert J == pytest.approx(lln + math.log(lln) + closed_form_constants(0.01, 10**5).C_paper + e,
                              abs=1e-14)
    assert J == pytest.approx(0.1427309184862167, abs=1e-12)
    assert Jt == pytest.approx(0.01689141606447908, abs=1e-12)
    J_alt, _ = threshold_J(10**6, 0.0, 0.01, 0.0, constant="alt")
    assert J - J_alt == pytest.approx(closed_form_constants(0.01, 10**5).log_p2_minus_1.value)


@settings(max_examples=60, deadline=None)
@given(st.integers(min_value=16, max_value=10**12), st.floats(min_value=0, max_value=10),
       st.floats(min_value=0.001, max_value=5), st.floats(min_value=0, max_value=1))
def test_threshold_properties(N, x, dx, err):
    J, Jt = threshold_J(N, x, 0.01, err)
    lln = math.log(math.log(N))
    assert J - Jt == pytest.approx(0.5 * math.exp(-lln ** (1 / 3)), abs=1e-12)
    assert threshold_J(N, x + dx, 0.01, err)[0] < J


def test_threshold_errors():
    with pytest.raises(DomainError):
        threshold_J(15, 0.0, 0.01, 0.0)
    with pytest.raises(DomainError):
        threshold_J(10**6, -1.0, 0.01, 0.0)
    with pytest.raises(DomainError):
        threshold_J(10**6, 0.0, 0.01, 0.0, constant="other")
