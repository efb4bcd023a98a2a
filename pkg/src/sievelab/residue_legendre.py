"""Windowed coprimality counts S(A, p_k#) and the interval Legendre identity.

The divisibility markers rho_i(n) (= p_i when p_i | n, else 1) and their
product R_k(n) are periodic with period p_k#, so a window of length l
has only p_k# distinct coprimality patterns. Counting survivors in a
window A = [lo, hi] can be done three ways, all exposed here:

* direct:    strike multiples of each p in P_k, count what is left;
* legendre:  inclusion-exclusion over squarefree divisors d of p_k#,
             sum of mu(d) * (floor(hi/d) - floor((lo-1)/d)), which is
             exact for any window (the interval form resolves the
             rounding ambiguity of the one-endpoint identity);
* truncated: the same enumeration restricted to d below a bound. Terms
             with d > hi vanish identically, so truncating the exact
             identity at p_{k+1}^2 changes nothing; what the bound does
             change is the smooth mean form l * sum_{d < B} mu(d)/d,
             whose ratio against l / log p_{k+1}^2 drops from
             2 e^{-gamma} to about 1.03. That mean form is
             expected_legendre_truncated below.

For large k the truncated mean is evaluated without enumerating the
(polynomially many, but millions of) admissible divisors: any d < B
with B <= p_{k+1}^2 has at most one prime factor above p_k, so

    sum_{d < B, P_k-smooth} mu(d)/d
        = M(B-1) + sum_{q prime, p_{k+1} <= q <= B-1} M((B-1)//q) / q

with M(y) = sum_{m <= y} mu(m)/m over all integers. The same
decomposition counts the admissible divisors via the squarefree
counting function. Depth-first enumeration with an early product
cutoff remains the reference path for small k.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Optional

import numpy as np

from . import analytic
from .errors import DomainError, ResourceError
from .sieve_core import PrimeTable, _mark_primality

# Abort inclusion-exclusion enumerations beyond this many terms.
DEFAULT_TERM_CAP = 5_000_000

# Use depth-first enumeration for truncated sums up to this many primes.
_DFS_K_LIMIT = 25


@dataclass(frozen=True)
class Window:
    """Inclusive integer window, optionally tagged as a shifted interval s_k^j."""

    lo: int
    hi: int
    shift: Optional[tuple[int, int]] = None  # (k, j) when the window is s_k^j

    def __post_init__(self):
        if self.lo < 1 or self.hi < self.lo:
            raise DomainError(f"bad window [{self.lo}, {self.hi}]")

    @property
    def length(self) -> int:
        return self.hi - self.lo + 1


@dataclass(frozen=True)
class CoprimeCount:
    window: Window
    k: int
    count: int
    method: str               # direct | legendre_full | legendre_truncated
    terms_evaluated: int      # admissible inclusion-exclusion terms (0 for direct)


@dataclass(frozen=True)
class PrimorialValue:
    k: int
    value: int  # exact p_k# as an arbitrary-precision integer


def primorial(k: int, table: PrimeTable) -> PrimorialValue:
    """p_k# = product of the first k primes, exact."""
    if k < 1:
        raise DomainError(f"k must be >= 1, got {k}")
    value = 1
    for p in table.first(k):
        value *= int(p)
    return PrimorialValue(k=k, value=value)


def shifted_window(k: int, j: int, table: PrimeTable) -> Window:
    """s_k^j = [p_k^2 + j, p_{k+1}^2 - 1 + j] with 0 <= j < p_k#."""
    if j < 0 or j >= primorial(k, table).value:
        raise DomainError(f"shift j={j} outside [0, p_{k}#)")
    p, p_next = table.nth(k), table.nth(k + 1)
    return Window(lo=p * p + j, hi=p_next * p_next - 1 + j, shift=(k, j))


def rho(i: int, n: int, table: PrimeTable) -> int:
    """p_i if p_i divides n, else 1. Periodic in n with period p_i."""
    if i < 1 or n < 1:
        raise DomainError(f"rho needs i >= 1 and n >= 1, got ({i}, {n})")
    p = table.nth(i)
    return p if n % p == 0 else 1


def big_r(k: int, n: int, table: PrimeTable) -> int:
    """Product of all p_i <= p_k dividing n; 1 iff gcd(n, p_k#) = 1.

    Periodic in n with period p_k#; computed in arbitrary precision.
    """
    if k < 1 or n < 1:
        raise DomainError(f"big_r needs k >= 1 and n >= 1, got ({k}, {n})")
    value = 1
    for p in table.first(k):
        p = int(p)
        if p > n:
            break
        if n % p == 0:
            value *= p
    return value


def count_coprime_direct(window: Window, k: int, table: PrimeTable,
                         memory_budget: int = 1 << 31) -> CoprimeCount:
    """S(A, p_k#) by striking multiples; works for arbitrarily shifted windows.

    Only offsets modulo each prime touch the flag array, so the window
    start may be an arbitrary-precision integer.
    """
    length = window.length
    if length > memory_budget:
        raise ResourceError(f"window length {length} exceeds budget {memory_budget}")
    flags = np.ones(length, dtype=bool)
    lo = window.lo
    for p in table.first(k):
        p = int(p)
        flags[(-lo) % p :: p] = False
    return CoprimeCount(window=window, k=k, count=int(np.count_nonzero(flags)),
                        method="direct", terms_evaluated=0)


def count_coprime_legendre(window: Window, k: int, table: PrimeTable,
                           truncate_below: Optional[int] = None,
                           term_cap: int = DEFAULT_TERM_CAP) -> CoprimeCount:
    """S(A, p_k#) by inclusion-exclusion over squarefree divisors of p_k#.

    count = sum over admissible d of mu(d) * (hi//d - (lo-1)//d), where
    admissible means d <= hi (larger d contribute 0) and, when
    truncate_below is set, d < truncate_below. With truncate_below unset
    the result equals the direct count exactly.
    """
    ps = [int(p) for p in table.first(k)]
    lo_m1 = window.lo - 1
    hi = window.hi
    d_max = hi if truncate_below is None else min(hi, truncate_below - 1)
    if d_max < 1:
        return CoprimeCount(window=window, k=k, count=0,
                            method="legendre_truncated", terms_evaluated=0)

    total = 0
    terms = 0

    def descend(start: int, d: int, sign: int) -> None:
        nonlocal total, terms
        terms += 1
        if terms > term_cap:
            raise ResourceError(f"legendre enumeration exceeded {term_cap} terms")
        total += sign * (hi // d - lo_m1 // d)
        for idx in range(start, k):
            nd = d * ps[idx]
            if nd > d_max:
                break
            descend(idx + 1, nd, -sign)

    descend(0, 1, 1)
    method = "legendre_full" if truncate_below is None else "legendre_truncated"
    return CoprimeCount(window=window, k=k, count=total, method=method,
                        terms_evaluated=terms)


def expected_legendre(window_length: int, k: int, table: PrimeTable) -> float:
    """Mean of S(A, p_k#) over all shifts: |A| * prod_{p in P_k} (1 - 1/p)."""
    if window_length < 0:
        raise DomainError("window_length must be >= 0")
    return window_length * analytic.mertens_product(k, table).product


# ---------------------------------------------------------------------------
# Truncated smooth expansion and divisor accounting.
# ---------------------------------------------------------------------------

def _dfs_moebius_sum(ps: list, bound: int) -> tuple[float, int]:
    """(sum of mu(d)/d, term count) over squarefree products d < bound."""
    total = 0.0
    terms = 0
    k = len(ps)

    def descend(start: int, d: int, sign: int) -> None:
        nonlocal total, terms
        terms += 1
        total += sign / d
        for idx in range(start, k):
            nd = d * ps[idx]
            if nd >= bound:
                break
            descend(idx + 1, nd, -sign)

    descend(0, 1, 1)
    return total, terms


def _mobius_array(limit: int, base_primes: Iterable[int]) -> np.ndarray:
    """mu(n) for 0 <= n <= limit (int8); needs base primes to sqrt(limit).

    The tracked smooth parts divide their index, so int32 suffices up to
    the context's 2^31 limit.
    """
    mu = np.ones(limit + 1, dtype=np.int8)
    mu[0] = 0
    smooth_part = np.ones(limit + 1, dtype=np.int32)
    for p in base_primes:
        p = int(p)
        if p * p > limit:
            break
        mu[p::p] *= -1
        smooth_part[p::p] *= p
        sq = p * p
        mu[sq::sq] = 0
        pe = sq
        while pe <= limit:
            smooth_part[pe::pe] *= p
            pe *= p
    # A cofactor above sqrt(limit) is a single extra prime factor.
    leftover = smooth_part < np.arange(limit + 1, dtype=np.int32)
    np.negative(mu, where=leftover, out=mu)
    return mu


class MoebiusContext:
    """Shared sieves for truncated sums and divisor counts at bounds <= limit+1.

    Built once per scan; supports every k whose bound p_{k+1}^2 - 1 is
    at most ``limit``.
    """

    def __init__(self, limit: int, table: PrimeTable):
        if limit < 4:
            raise DomainError("moebius context limit too small")
        if limit >= 1 << 31:
            raise ResourceError(f"moebius context limit {limit} beyond int32 sieve range")
        self.limit = limit
        root = math.isqrt(limit)
        if root > table.bound:
            raise DomainError("prime table too small for moebius context")
        base = table.primes[: table.count_upto(root)]
        # Primes up to limit, for the single-large-factor correction.
        flags = np.ones(limit + 1, dtype=bool)
        flags[:2] = False
        for p in base:
            p = int(p)
            flags[p * p :: p] = False
        self.primes = np.flatnonzero(flags).astype(np.int64)
        # Small prefix tables cover every reduced argument (B-1)//q < p_{k+1}.
        small_cap = root + 1
        mu_small = _mobius_array(small_cap, base)
        contrib = np.zeros(small_cap + 1)
        contrib[1:] = mu_small[1:].astype(np.float64) / np.arange(1, small_cap + 1)
        self._m_small = np.cumsum(contrib)             # M(t) for t <= small_cap
        self._sq_small = np.cumsum(mu_small != 0)      # squarefree count <= t
        self._mu_small = mu_small
        self._m_full_cache: dict[int, float] = {}
        self._full_mu: Optional[np.ndarray] = None

    def _ensure_full_m(self, ys: list) -> None:
        missing = sorted(y for y in set(ys) if y not in self._m_full_cache)
        if not missing:
            return
        if self._full_mu is None:
            root = math.isqrt(self.limit)
            base = self.primes[: int(np.searchsorted(self.primes, root, side="right"))]
            self._full_mu = _mobius_array(self.limit, base)
        mu = self._full_mu
        acc = 0.0
        prev = 1
        chunk = 1 << 22
        for y in missing:
            pos = prev
            while pos <= y:
                end = min(y, pos + chunk - 1)
                seg = mu[pos : end + 1].astype(np.float64)
                seg /= np.arange(pos, end + 1, dtype=np.float64)
                acc += float(np.sum(seg))
                pos = end + 1
            self._m_full_cache[y] = acc
            prev = y + 1

    def m_full(self, y: int) -> float:
        """M(y) = sum_{m <= y} mu(m)/m."""
        if y > self.limit:
            raise DomainError(f"M({y}) beyond context limit {self.limit}")
        if y not in self._m_full_cache:
            self._ensure_full_m([y])
        return self._m_full_cache[y]

    def preload(self, ys: list) -> None:
        """Batch-compute M at several points with a single pass."""
        self._ensure_full_m([y for y in ys if y <= self.limit])

    def truncated_sum(self, k: int, bound: int, table: PrimeTable) -> float:
        """sum of mu(d)/d over squarefree P_k-smooth d < bound.

        Requires bound <= p_{k+1}^2 so no admissible d carries two prime
        factors above p_k.
        """
        p_next = table.nth(k + 1)
        if bound > p_next * p_next:
            raise DomainError("decomposition needs bound <= p_{k+1}^2")
        y = bound - 1
        i0 = int(np.searchsorted(self.primes, p_next))
        i1 = int(np.searchsorted(self.primes, y, side="right"))
        qs = self.primes[i0:i1]
        ts = y // qs
        corr = float(np.sum(self._m_small[ts] / qs))
        return self.m_full(y) + corr

    def term_count(self, k: int, bound: int, table: PrimeTable) -> int:
        """Number of squarefree P_k-smooth d < bound (counting d = 1)."""
        p_next = table.nth(k + 1)
        if bound > p_next * p_next:
            raise DomainError("decomposition needs bound <= p_{k+1}^2")
        y = bound - 1
        root = math.isqrt(y)
        ds = np.arange(1, root + 1, dtype=np.int64)
        mu = self._mu_small[1 : root + 1].astype(np.int64)
        sq_total = int(np.sum(mu * (y // (ds * ds))))
        i0 = int(np.searchsorted(self.primes, p_next))
        i1 = int(np.searchsorted(self.primes, y, side="right"))
        qs = self.primes[i0:i1]
        ts = y // qs
        return sq_total - int(np.sum(self._sq_small[ts]))


def truncated_moebius_sum(k: int, table: PrimeTable, bound: Optional[int] = None,
                          context: Optional[MoebiusContext] = None) -> float:
    """sum_{d | p_k#, d squarefree, d < bound} mu(d)/d; bound defaults to p_{k+1}^2."""
    p_next = table.nth(k + 1)
    if bound is None:
        bound = p_next * p_next
    if k <= _DFS_K_LIMIT or bound <= 1 << 20:
        ps = [int(p) for p in table.first(k)]
        return _dfs_moebius_sum(ps, bound)[0]
    if context is None:
        context = MoebiusContext(bound - 1, table)
    return context.truncated_sum(k, bound, table)


def expected_legendre_truncated(window_length: int, k: int, table: PrimeTable,
                                bound: Optional[int] = None,
                                context: Optional[MoebiusContext] = None) -> float:
    """Truncated-expansion mean: |A| * sum_{d < bound} mu(d)/d.

    This is the smooth counterpart of count_coprime_legendre's truncated
    mode; dividing by |A|/log p_{k+1}^2 reproduces the drop from
    2 e^{-gamma} (full product) to roughly 1.03.
    """
    return window_length * truncated_moebius_sum(k, table, bound, context)


def legendre_term_count(k: int, table: PrimeTable, bound: Optional[int] = None,
                        term_cap: int = DEFAULT_TERM_CAP,
                        context: Optional[MoebiusContext] = None) -> int:
    """Number of squarefree products of distinct primes from P_k below bound.

    bound None means no truncation: exactly 2**k terms (exact big
    integer). Counting includes d = 1.
    """
    if k < 0:
        raise DomainError("k must be >= 0")
    if bound is None:
        return 2 ** k
    if bound <= 1:
        return 0
    p_next = table.nth(k + 1)
    if k > 40 and bound <= p_next * p_next:
        if context is None:
            context = MoebiusContext(bound - 1, table)
        return context.term_count(k, bound, table)
    ps = [int(p) for p in table.first(k)]
    count = 0

    def descend(start: int, d: int) -> None:
        nonlocal count
        count += 1
        if count > term_cap:
            raise ResourceError(f"term enumeration exceeded {term_cap}")
        for idx in range(start, k):
            nd = d * ps[idx]
            if nd >= bound:
                break
            descend(idx + 1, nd)

    descend(0, 1)
    return count


@dataclass(frozen=True)
class LegendreScanRow:
    """One row of the per-interval estimator comparison."""

    k: int
    length: int
    ratio_full: float        # (l prod(1-1/p)) / (l / log p_{k+1}^2)
    ratio_truncated: float   # truncated-expansion mean over the same base
    pi_ratio: float          # exact pi_k over the same base
    terms: int               # admissible divisors below p_{k+1}^2


def legendre_scan(k_from: int, k_to: int, table: PrimeTable,
                  interval_set=None) -> list[LegendreScanRow]:
    """Full vs truncated vs exact ratios, one row per k in [k_from, k_to].

    pi_k comes from interval_set when it covers the range, otherwise
    each interval is sieved on the spot.
    """
    if k_from < 1 or k_to < k_from:
        raise DomainError(f"bad scan range [{k_from}, {k_to}]")
    limit = table.nth(k_to + 1) ** 2 - 1
    context = MoebiusContext(limit, table) if k_to > _DFS_K_LIMIT else None
    if context is not None:
        context.preload([table.nth(k + 1) ** 2 - 1 for k in range(k_from, k_to + 1)
                         if k > _DFS_K_LIMIT])
    products = analytic.mertens_products(k_to, table)
    rows = []
    for k in range(k_from, k_to + 1):
        p, p_next = table.nth(k), table.nth(k + 1)
        length = p_next * p_next - p * p
        log_hi = math.log(p_next * p_next)
        base = length / log_hi
        tsum = truncated_moebius_sum(k, table, context=context)
        if interval_set is not None and interval_set.k_max >= k:
            pi_k = interval_set.record(k).pi_k
        else:
            pi_k = int(np.count_nonzero(
                _mark_primality(p * p, p_next * p_next - 1, table.first(k))))
        rows.append(LegendreScanRow(
            k=k,
            length=length,
            ratio_full=products[k] * log_hi,
            ratio_truncated=tsum * log_hi,
            pi_ratio=pi_k / base,
            terms=legendre_term_count(k, table, p_next * p_next, context=context),
        ))
    return rows


def first_appearance_positions(i: int, table: PrimeTable,
                               k_range: Iterable[int]) -> set:
    """Observed 1-based offsets of the first multiple of p_i within s_k.

    The first multiple of p_i at or after p_k^2 sits at offset
    ((-p_k^2) mod p_i), so position ((-p_k^2) mod p_i) + 1. Aggregated
    over every k in k_range with k > i.
    """
    if i < 1:
        raise DomainError("i must be >= 1")
    p = table.nth(i)
    out = set()
    for k in k_range:
        if k <= i:
            continue
        sq = table.nth(k) ** 2
        out.add((-sq) % p + 1)
    return out


def theoretical_first_positions(i: int, table: PrimeTable) -> set:
    """Candidate set {p_i - m + 1 : m a nonzero quadratic residue mod p_i}.

    p_k^2 mod p_i is always a nonzero square for k != i, so every
    observed first-appearance position lies in this set.
    """
    p = table.nth(i)
    residues = {(r * r) % p for r in range(1, p)}
    residues.discard(0)
    return {p - m + 1 for m in residues}
