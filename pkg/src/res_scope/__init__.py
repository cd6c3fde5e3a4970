"""Numerical experiments on extreme values of -L'/L(sigma, chi_d) by the resonance method.

Quadratic characters ``chi_d`` of fundamental discriminants ``d`` are scanned
over ranges ``N < |d| <= 2N``; a truncated Dirichlet sum stands in for
``-L'/L``, and resonators ``R_d`` tilt averages toward large values.
"""

from .characters import (
    count_fundamental,
    enum_fundamental,
    fundamental_block,
    is_fundamental,
    kronecker,
    squarefree_part,
)
from .errors import CapacityError, DomainError, EmptyRangeError, ResScopeError
from .experiments import (
    charsum_verify,
    distribution_counts,
    evaluate_range,
    extreme_scan,
    ratio_experiment,
)
from .lfun import TruncationPolicy, neg_log_deriv_truncated, truncation_audit
from .primes import (
    PrimeConstantKind,
    chebyshev_theta,
    euler_gamma,
    mertens_log_sum,
    prime_constant,
    sieve_primes,
)
from .resonator import (
    FixedSigma,
    NearOne,
    Unit,
    build_spec,
    closed_form_constants,
    main_term,
    resonator_value,
    smooth_sum_converged,
    smooth_sum_oracle,
    threshold_J,
)

__version__ = "0.1.0"
