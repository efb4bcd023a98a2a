"""Random models for per-interval prime counts.

The sample space for the count in a window of length l_k is the set of
shifted-window values S(s_k^j, p_k#), 0 <= j < p_k#, of which the true
pi_k is the j = 0 element. Exhaustive mode walks the entire period with
a sliding window (one cumulative sum over coprimality flags of one
period), keeping every moment in exact integer arithmetic; sampled mode
draws shifts with a derived per-sample seed so results are independent
of evaluation order and worker count.

Rescaling the raw (coprimality) model by e^gamma / 2 moves its mean to
the density-of-primes scale l_k / log p_{k+1}^2, where it is compared
against binomial B(l_k, 1/log p_{k+1}^2) and Poisson references.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import analytic
from .errors import DomainError
from .intervals import IntervalSet
from .sieve_core import PrimeTable
from .residue_legendre import primorial
from .stats_lab import ScanSeries

# Exhaustive evaluation threshold and default sampled draw count.
DEFAULT_BUDGET = 10 ** 9


@dataclass(frozen=True)
class ShiftModelSummary:
    """Moments of the shifted-window sample space for one interval."""

    k: int
    mode: str                 # "exhaustive" | "sampled"
    samples: int              # p_k# when exhaustive, draw count when sampled
    mean: float
    variance: float           # population (exhaustive) or unbiased (sampled)
    rescaled_mean: float      # (e^gamma / 2) * mean
    rescaled_variance: float  # (e^gamma / 2)^2 * variance
    seed: Optional[int]       # present iff sampled
    count_sum: int            # exact integer sum of window counts
    count_sq_sum: int         # exact integer sum of squared counts
    count_min: int
    count_max: int
    histogram: np.ndarray     # bincount of the observed window counts


def _window_count(lo, length: int, primes) -> int:
    """Coprime survivors in [lo, lo + length); lo may be arbitrary precision."""
    flags = np.ones(length, dtype=bool)
    for p in primes:
        p = int(p)
        flags[(-lo) % p :: p] = False
    return int(np.count_nonzero(flags))


def _summarize(k: int, mode: str, samples: int, counts_sum: int, counts_sq: int,
               cmin: int, cmax: int, hist: np.ndarray, seed: Optional[int]) -> ShiftModelSummary:
    n = samples
    mean = counts_sum / n
    if mode == "exhaustive":
        variance = (n * counts_sq - counts_sum * counts_sum) / (n * n)
    else:
        variance = (n * counts_sq - counts_sum * counts_sum) / (n * (n - 1))
    scale = math.exp(analytic.EULER_GAMMA) / 2.0
    return ShiftModelSummary(
        k=k, mode=mode, samples=n, mean=mean, variance=variance,
        rescaled_mean=scale * mean, rescaled_variance=scale * scale * variance,
        seed=seed, count_sum=counts_sum, count_sq_sum=counts_sq,
        count_min=cmin, count_max=cmax, histogram=hist,
    )


def shift_model(k: int, table: PrimeTable, budget: int = DEFAULT_BUDGET,
                seed: int = 0) -> ShiftModelSummary:
    """Moments of {S(s_k^j, p_k#)}: exhaustive when p_k# <= budget, else sampled.

    Exhaustive mode slides the window across one full period; its mean
    is l_k * phi(p_k#) / p_k# with zero numerical error beyond the final
    float division. Sampled mode draws ``budget`` shifts; each draw's
    shift is derived from (seed, k, draw index), so the result does not
    depend on evaluation order.
    """
    if k < 1:
        raise DomainError(f"k must be >= 1, got {k}")
    if budget < 2:
        raise DomainError("budget must be >= 2")
    ps = [int(p) for p in table.first(k)]
    period = primorial(k, table).value
    p, p_next = table.nth(k), table.nth(k + 1)
    lo0 = p * p
    length = p_next * p_next - lo0

    if period <= budget:
        flags = np.ones(period, dtype=np.uint8)
        for q in ps:
            flags[::q] = 0
        r0 = lo0 % period
        reps = (r0 + period + length + period - 1) // period
        ext = np.tile(flags, reps)[r0 : r0 + period + length]
        # Window sums via one prefix pass; int32 is enough (sums < period).
        prefix = np.empty(period + length + 1, dtype=np.int32)
        prefix[0] = 0
        np.cumsum(ext, dtype=np.int32, out=prefix[1:])
        del ext, flags
        counts = prefix[length : length + period] - prefix[0:period]
        del prefix
        csum = 0
        csq = 0
        for pos in range(0, period, 1 << 22):
            block = counts[pos : pos + (1 << 22)].astype(np.int64)
            csum += int(block.sum())
            csq += int(np.dot(block, block))
        hist = np.bincount(counts)
        return _summarize(k, "exhaustive", period, csum, csq,
                          int(counts.min()), int(counts.max()), hist, None)

    n = budget
    counts = np.empty(n, dtype=np.int64)
    for i in range(n):
        j = random.Random(f"{seed}:{k}:{i}").randrange(period)
        counts[i] = _window_count(lo0 + j, length, ps)
    csum = int(counts.sum())
    csq = int(np.dot(counts, counts))
    hist = np.bincount(counts)
    return _summarize(k, "sampled", n, csum, csq,
                      int(counts.min()), int(counts.max()), hist, seed)


@dataclass(frozen=True)
class ReferenceDistribution:
    """Binomial or Poisson reference for the per-interval count."""

    kind: str                 # "binomial" | "poisson"
    trials: Optional[int]     # l_k for the binomial, None for Poisson
    success_p: float          # 1 / log p_{k+1}^2
    mean: float
    variance: float

    def sigma(self, n):
        """Running binomial standard deviation sqrt(n p (1 - p)).

        Accepts a scalar or an array of partial lengths 0 <= n <= l_k;
        only meaningful for the binomial reference.
        """
        if self.kind != "binomial":
            raise DomainError("running sigma is a binomial-reference quantity")
        n_arr = np.asarray(n, dtype=np.float64)
        return np.sqrt(n_arr * self.success_p * (1.0 - self.success_p))


def binomial_reference(k: int, table: PrimeTable) -> ReferenceDistribution:
    """B(l_k, 1/log p_{k+1}^2)."""
    p_next = table.nth(k + 1)
    length = analytic.interval_length(k, table)
    sp = 1.0 / math.log(p_next * p_next)
    return ReferenceDistribution(kind="binomial", trials=length, success_p=sp,
                                 mean=length * sp, variance=length * sp * (1.0 - sp))


def poisson_reference(k: int, table: PrimeTable) -> ReferenceDistribution:
    """Pois(l_k / log p_{k+1}^2)."""
    p_next = table.nth(k + 1)
    length = analytic.interval_length(k, table)
    sp = 1.0 / math.log(p_next * p_next)
    lam = length * sp
    return ReferenceDistribution(kind="poisson", trials=None, success_p=sp,
                                 mean=lam, variance=lam)


def variance_comparison(k_range, table: PrimeTable, budget: int = DEFAULT_BUDGET,
                        seed: int = 0) -> ScanSeries:
    """Binomial stdev minus rescaled model stdev, per k; negative = violation.

    The series value is the margin by which the binomial bound holds;
    full per-k columns (model stdev, binomial stdev, Poisson variance,
    mode) ride along in metadata, along with any violating k.
    """
    ks = sorted(set(int(k) for k in k_range))
    if not ks:
        raise DomainError("empty k range")
    margins = []
    meta = {"model_stdev": [], "binom_stdev": [], "pois_var": [],
            "modes": [], "samples": [], "violations": [], "seed": seed}
    for k in ks:
        summary = shift_model(k, table, budget=budget, seed=seed)
        binom = binomial_reference(k, table)
        model_sd = math.sqrt(summary.rescaled_variance)
        binom_sd = math.sqrt(binom.variance)
        margin = binom_sd - model_sd
        margins.append((float(k), margin))
        meta["model_stdev"].append(model_sd)
        meta["binom_stdev"].append(binom_sd)
        meta["pois_var"].append(poisson_reference(k, table).variance)
        meta["modes"].append(summary.mode)
        meta["samples"].append(summary.samples)
        if margin <= 0:
            meta["violations"].append(k)
    return ScanSeries(label="variance_comparison", points=margins, metadata=meta)


def sum_model_bounds(x: int, interval_set: IntervalSet, table: PrimeTable) -> tuple[float, float]:
    """(mu, sigma_bound) for the summed count model at x.

    mu sums the per-interval densities l_j / log p_{j+1}^2 with the
    fractional last term; with Poisson per-interval variances the summed
    variance equals mu, so sigma_bound = sqrt(mu) <= sqrt(li(x)) up to
    the density-vs-integral gap.
    """
    k = interval_set.locate(x)
    mu = 0.0
    for j in range(1, k):
        rec = interval_set.record(j)
        mu += rec.length / math.log(rec.p_next ** 2)
    rec = interval_set.record(k)
    mu += (x - rec.p_k ** 2) / math.log(rec.p_next ** 2)
    return mu, math.sqrt(mu)


def conjecture_check(interval_set: IntervalSet) -> ScanSeries:
    """pi(x) - li(x) against the +/- sqrt(li(x)) band at every x = p_{k+1}^2.

    Violations (|pi - li| >= sqrt(li)) are reported in metadata, never
    raised: whether the model's bound transfers to the true counts is an
    empirical question.
    """
    recs = interval_set.records
    pi_cum = 2 + np.cumsum([r.pi_k for r in recs])
    li_cum = analytic.li(4.0) + np.cumsum([r.li_k for r in recs])
    diff = pi_cum - li_cum
    sqrt_li = np.sqrt(li_cum)
    xs = [r.p_next ** 2 for r in recs]
    violations = [recs[i].k for i in range(len(recs)) if abs(diff[i]) >= sqrt_li[i]]
    return ScanSeries(
        label="conjecture",
        points=[(float(x), float(d)) for x, d in zip(xs, diff)],
        metadata={"k": [r.k for r in recs], "sqrt_li": sqrt_li.tolist(),
                  "pi": pi_cum.tolist(), "li": li_cum.tolist(),
                  "violations": violations},
    )
