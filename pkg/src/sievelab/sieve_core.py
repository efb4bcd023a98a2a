"""Segmented sieve of Eratosthenes: prime tables, windowed sieving, counting.

Two marking disciplines live here and must not be confused:

* coprimality marking (``sieve_window``): every multiple of every sieve
  prime inside the window is struck, so survivors are exactly the
  integers coprime to the product of the sieve primes;
* primality marking (``count_primes_upto`` and the interval scan in
  ``intervals``): multiples are struck starting at
  ``max(p*p, first multiple >= lo)``, so the sieve primes themselves
  survive and survivors are exactly the primes.

On a window ``[p_k^2, p_{k+1}^2 - 1]`` sieved by the first k primes the
two coincide, which is the property everything downstream leans on.

Prime indexing is 1-based throughout: ``p_1 = 2``, ``p_2 = 3``,
``p_3 = 5``. Off-by-one here corrupts every downstream interval, so all
index arguments are named ``k`` and documented as 1-based.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, ResourceError

# Default segment length (entries) for segmented counting; cache-resident.
DEFAULT_SEGMENT = 1 << 20

# Guard against accidentally allocating huge sieve arrays (bytes).
DEFAULT_MEMORY_BUDGET = 1 << 31


@dataclass(frozen=True)
class PrimeTable:
    """All primes up to ``bound``, immutable and shareable across workers."""

    bound: int
    primes: np.ndarray  # int64, strictly increasing, read-only

    def __len__(self) -> int:
        return len(self.primes)

    def nth(self, k: int) -> int:
        """p_k under the 1-based convention (p_1 = 2)."""
        if k < 1 or k > len(self.primes):
            raise DomainError(f"prime index {k} outside table (1..{len(self.primes)})")
        return int(self.primes[k - 1])

    def first(self, k: int) -> np.ndarray:
        """The first k primes as an array (a view, do not mutate)."""
        if k < 0 or k > len(self.primes):
            raise DomainError(f"cannot take first {k} primes from table of {len(self.primes)}")
        return self.primes[:k]

    def count_upto(self, x: int) -> int:
        """Number of table primes <= x; requires x <= bound."""
        if x > self.bound:
            raise DomainError(f"x={x} exceeds table bound {self.bound}")
        return int(np.searchsorted(self.primes, x, side="right"))


@dataclass
class SieveWindow:
    """Window ``[lo, hi]`` with survivor flags after coprimality sieving."""

    lo: int
    hi: int
    flags: np.ndarray = field(repr=False)  # bool, length hi - lo + 1

    def count(self) -> int:
        return int(np.count_nonzero(self.flags))

    def survivors(self):
        idx = np.flatnonzero(self.flags)
        if self.lo <= np.iinfo(np.int64).max - len(self.flags):
            return idx + self.lo
        return [int(i) + self.lo for i in idx]  # window start beyond int64


def build_prime_table(bound: int, memory_budget: int = DEFAULT_MEMORY_BUDGET) -> PrimeTable:
    """Enumerate all primes <= bound with a plain Eratosthenes sieve.

    Args:
        bound: inclusive upper limit, must be >= 2.
        memory_budget: cap in bytes on the sieve allocation.

    Returns:
        PrimeTable with a read-only int64 prime array.
    """
    if bound < 2:
        raise DomainError(f"prime table bound must be >= 2, got {bound}")
    if bound + 1 > memory_budget:
        raise ResourceError(f"prime table bound {bound} exceeds memory budget {memory_budget} bytes")
    flags = np.ones(bound + 1, dtype=bool)
    flags[:2] = False
    for p in range(2, math.isqrt(bound) + 1):
        if flags[p]:
            flags[p * p :: p] = False
    primes = np.flatnonzero(flags).astype(np.int64)
    primes.setflags(write=False)
    return PrimeTable(bound=bound, primes=primes)


def sieve_window(lo: int, hi: int, sieve_primes, memory_budget: int = DEFAULT_MEMORY_BUDGET) -> SieveWindow:
    """Strike every multiple of every sieve prime in ``[lo, hi]``.

    Survivors are exactly the n with gcd(n, prod(sieve_primes)) = 1. The
    window start may be any integer >= 2, including arbitrary-precision
    shifts: only offsets modulo each prime are materialised.

    Args:
        lo, hi: inclusive window, 2 <= lo <= hi.
        sieve_primes: non-empty ascending sequence of primes.
        memory_budget: cap in bytes on the flag allocation.
    """
    if lo < 2 or hi < lo:
        raise DomainError(f"bad window [{lo}, {hi}]")
    length = hi - lo + 1
    if length > memory_budget:
        raise ResourceError(f"window length {length} exceeds memory budget {memory_budget} bytes")
    if len(sieve_primes) == 0:
        raise DomainError("sieve_primes must be non-empty")
    flags = np.ones(length, dtype=bool)
    for p in sieve_primes:
        p = int(p)
        start = (-lo) % p  # offset of the first multiple of p at or after lo
        flags[start::p] = False
    return SieveWindow(lo=lo, hi=hi, flags=flags)


def _mark_primality(lo: int, hi: int, base_primes: np.ndarray) -> np.ndarray:
    """Primality flags for [lo, hi]: multiples struck from max(p*p, lo)."""
    flags = np.ones(hi - lo + 1, dtype=bool)
    if lo <= 1:
        flags[: min(2 - lo, hi - lo + 1)] = False
    for p in base_primes:
        p = int(p)
        if p * p > hi:
            break
        start = max(p * p, ((lo + p - 1) // p) * p)
        if start > hi:
            continue
        flags[start - lo :: p] = False
    return flags


def count_primes_upto(x: int, table: PrimeTable, segment_size: int = DEFAULT_SEGMENT) -> int:
    """Exact pi(x) by segmented sieving with base primes from the table.

    Requires x <= table.bound**2 so that the base primes cover sqrt(x).
    Segments are independent; the count is identical for any segmentation.
    """
    if x < 2:
        raise DomainError(f"pi(x) needs x >= 2, got {x}")
    if x <= table.bound:
        return table.count_upto(x)
    if x > table.bound * table.bound:
        raise DomainError(f"x={x} exceeds table capacity bound^2 = {table.bound**2}")
    if segment_size < 2:
        raise DomainError("segment_size must be >= 2")
    root = math.isqrt(x)
    base = table.primes[: int(np.searchsorted(table.primes, root, side="right"))]
    total = 0
    lo = 2
    while lo <= x:
        hi = min(lo + segment_size - 1, x)
        total += int(np.count_nonzero(_mark_primality(lo, hi, base)))
        lo = hi + 1
    return total


def nth_prime(k: int, table: PrimeTable) -> int:
    """p_k, 1-based (p_1 = 2, p_3 = 5)."""
    return table.nth(k)
