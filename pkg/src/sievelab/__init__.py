"""sievelab: prime counting over the intervals s_k = [p_k^2, p_{k+1}^2 - 1].

Each s_k is fully determined by the first k primes, which makes the
decomposition a natural frame for exact per-interval prime counts,
Euler-product and logarithmic-integral baselines, windowed coprimality
counts via the Legendre identity, shifted-window random models, and the
error-term diagnostics built on all of these. Prime indexing is 1-based
everywhere: p_1 = 2.
"""

__version__ = "0.1.0"

from .errors import DomainError, ResourceError
from .sieve_core import (
    DEFAULT_SEGMENT,
    PrimeTable,
    SieveWindow,
    build_prime_table,
    count_primes_upto,
    nth_prime,
    sieve_window,
)
from .analytic import (
    EULER_GAMMA,
    EstimatorBundle,
    MertensEvaluation,
    delta_normalizer,
    estimator_bundle,
    expected_pi_k,
    expected_pi_upto,
    interval_length,
    li,
    li_between,
    li_k,
    mertens_delta_bound,
    mertens_product,
    mertens_products,
    naive_expected_pi,
    pnt_interval_estimate,
)
from .intervals import (
    GapSeries,
    IntervalRecord,
    IntervalSet,
    build_intervals,
    compute_interval_records,
    gap_series,
    locate_interval,
    partial_counts,
)
from .residue_legendre import (
    CoprimeCount,
    LegendreScanRow,
    MoebiusContext,
    PrimorialValue,
    Window,
    big_r,
    count_coprime_direct,
    count_coprime_legendre,
    expected_legendre,
    expected_legendre_truncated,
    first_appearance_positions,
    legendre_scan,
    legendre_term_count,
    primorial,
    rho,
    shifted_window,
    theoretical_first_positions,
    truncated_moebius_sum,
)
from .stats_lab import (
    GaussianFit,
    MaierScan,
    ScanSeries,
    bias_series,
    empirical_pdf,
    extract_delta,
    fit_gaussian,
    lag_correlation,
    maier_scan,
    moving_average,
    phi_vs_lengths,
)
from .randmodel import (
    ReferenceDistribution,
    ShiftModelSummary,
    binomial_reference,
    conjecture_check,
    poisson_reference,
    shift_model,
    sum_model_bounds,
    variance_comparison,
)
