import math
import random
from fractions import Fraction

import pytest

from sievelab import (
    DomainError,
    MoebiusContext,
    ResourceError,
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

from _oracles import (
    count_squarefree_products,
    fraction_truncated_moebius,
    subset_legendre_count,
    totient_of_primorial,
)


def test_rho_values(table_small):
    assert rho(3, 25, table_small) == 5
    assert rho(1, 7, table_small) == 1
    assert rho(2, 36, table_small) == 3


def test_rho_periodicity(table_small):
    rng = random.Random(5)
    for _ in range(50):
        i = rng.randint(1, 10)
        n = rng.randint(1, 10_000)
        m = rng.randint(1, 50)
        p = table_small.nth(i)
        assert rho(i, n + m * p, table_small) == rho(i, n, table_small)


def test_big_r_values(table_small):
    assert big_r(3, 30, table_small) == 30
    assert big_r(3, 29, table_small) == 1
    assert big_r(3, 36, table_small) == 6


def test_big_r_coprimality_and_period(table_small):
    rng = random.Random(6)
    for _ in range(50):
        k = rng.randint(1, 6)
        n = rng.randint(1, 5_000)
        period = primorial(k, table_small).value
        r = big_r(k, n, table_small)
        assert (r == 1) == (math.gcd(n, period) == 1)
        assert big_r(k, n + period, table_small) == r


def test_primorials(table_small):
    assert primorial(1, table_small).value == 2
    assert primorial(2, table_small).value == 6
    assert primorial(3, table_small).value == 30
    assert primorial(15, table_small).value == 614889782588491410


def test_count_coprime_direct(table_small):
    assert count_coprime_direct(Window(25, 48), 3, table_small).count == 6
    assert count_coprime_direct(Window(1, 30), 3, table_small).count == 8
    base = count_coprime_direct(shifted_window(3, 0, table_small), 3, table_small)
    shifted = count_coprime_direct(shifted_window(3, 0 + 30 - 30, table_small), 3, table_small)
    assert base.count == shifted.count == 6
    assert base.method == "direct" and base.terms_evaluated == 0


def test_count_coprime_direct_huge_shift(table_small):
    # Shift by a multiple of the period far beyond 64-bit range.
    k = 6
    period = primorial(k, table_small).value
    w0 = shifted_window(k, 17, table_small)
    big_lo = w0.lo + period * (10 ** 30)
    w_big = Window(big_lo, big_lo + w0.length - 1)
    assert (count_coprime_direct(w_big, k, table_small).count
            == count_coprime_direct(w0, k, table_small).count)


def test_shifted_window_validation(table_small):
    with pytest.raises(DomainError):
        shifted_window(3, 30, table_small)
    with pytest.raises(DomainError):
        shifted_window(3, -1, table_small)


def test_legendre_matches_direct_and_oracle(table_small):
    cc = count_coprime_legendre(Window(25, 48), 3, table_small)
    assert cc.count == 6
    assert cc.terms_evaluated == 8  # all divisors of 30 are <= 48
    assert cc.method == "legendre_full"
    assert count_coprime_legendre(Window(1, 30), 3, table_small).count == 8
    rng = random.Random(99)
    for _ in range(100):
        k = rng.randint(1, 10)
        lo = rng.randint(2, 100_000)
        hi = lo + rng.randint(0, 5_000)
        w = Window(lo, hi)
        got = count_coprime_legendre(w, k, table_small).count
        ps = [int(p) for p in table_small.first(k)]
        assert got == subset_legendre_count(lo, hi, ps)
        assert got == count_coprime_direct(w, k, table_small).count


def test_truncation_at_next_square_is_noop(table_small):
    # Dropped terms all exceed hi, so the exact floor form is unchanged.
    w = shifted_window(8, 0, table_small)
    bound = table_small.nth(9) ** 2
    full = count_coprime_legendre(w, 8, table_small)
    trunc = count_coprime_legendre(w, 8, table_small, truncate_below=bound)
    assert trunc.count == full.count
    assert trunc.method == "legendre_truncated"
    assert trunc.terms_evaluated <= full.terms_evaluated


def test_legendre_term_cap(table_small):
    with pytest.raises(ResourceError):
        count_coprime_legendre(Window(2, 10 ** 9), 25, table_small, term_cap=1000)


def test_expected_legendre(table_small):
    assert expected_legendre(24, 3, table_small) == pytest.approx(6.4, rel=1e-14)
    assert expected_legendre(30, 3, table_small) == pytest.approx(8.0, rel=1e-14)
    assert expected_legendre(1, 1, table_small) == 0.5


def test_truncated_moebius_sum_against_fractions(table_small):
    for k in (1, 3, 5, 8, 12):
        bound = table_small.nth(k + 1) ** 2
        ps = [int(p) for p in table_small.first(k)]
        ref = float(fraction_truncated_moebius(ps, bound))
        assert truncated_moebius_sum(k, table_small, bound) == pytest.approx(ref, rel=1e-13)


def test_truncated_sum_fast_path_matches_dfs(table):
    # k = 30 exceeds the DFS threshold: decomposition vs exact rationals.
    k = 30
    bound = table.nth(k + 1) ** 2
    ps = [int(p) for p in table.first(k)]
    ref = float(fraction_truncated_moebius(ps, bound))
    ctx = MoebiusContext(bound - 1, table)
    assert ctx.truncated_sum(k, bound, table) == pytest.approx(ref, rel=1e-11)
    assert expected_legendre_truncated(100, k, table, context=ctx) == pytest.approx(
        100 * ref, rel=1e-11)


def test_legendre_term_count(table_small, table):
    assert legendre_term_count(3, table_small, None) == 8
    assert legendre_term_count(3, table_small, 49) == 8
    for k in (10, 20):
        bound = table_small.nth(k + 1) ** 2
        ps = [int(p) for p in table_small.first(k)]
        assert legendre_term_count(k, table_small, bound) == count_squarefree_products(ps, bound)
    # Sieve-decomposition path against the enumeration oracle.
    k = 45
    bound = table.nth(k + 1) ** 2
    ps = [int(p) for p in table.first(k)]
    assert legendre_term_count(k, table, bound) == count_squarefree_products(ps, bound)


def test_term_count_guard(table_small):
    with pytest.raises(ResourceError):
        legendre_term_count(24, table_small, 10 ** 9, term_cap=10_000)


def test_shift_periodicity(table_small):
    rng = random.Random(11)
    for k in range(1, 7):
        period = primorial(k, table_small).value
        for _ in range(3):
            j = rng.randrange(period)
            w = shifted_window(k, j, table_small)
            moved = Window(w.lo + period, w.hi + period)
            assert (count_coprime_direct(w, k, table_small).count
                    == count_coprime_direct(moved, k, table_small).count)


def test_full_period_mean_is_exact(table_small):
    # Totient averaging in exact integers for k <= 5.
    for k in range(1, 6):
        period = primorial(k, table_small).value
        length = table_small.nth(k + 1) ** 2 - table_small.nth(k) ** 2
        total = sum(count_coprime_direct(shifted_window(k, j, table_small), k, table_small).count
                    for j in range(period))
        phi = totient_of_primorial(int(p) for p in table_small.first(k))
        assert total == length * phi
        assert Fraction(total, period) == Fraction(length) * Fraction(phi, period)


def test_first_appearance_positions(table):
    ks = range(1, 40)
    assert first_appearance_positions(3, table, ks) == {2, 5}
    assert first_appearance_positions(4, table, ks) == {4, 6, 7}
    assert first_appearance_positions(5, table, ks) == {3, 7, 8, 9, 11}
    assert first_appearance_positions(6, table, ks) == {2, 4, 5, 10, 11, 13}


def test_first_appearance_within_theoretical(table):
    for i in range(1, 13):
        observed = first_appearance_positions(i, table, range(1, 80))
        assert observed <= theoretical_first_positions(i, table)


def test_legendre_scan_columns(table, set200):
    rows = legendre_scan(1, 30, table, interval_set=set200)
    by_k = {r.k: r for r in rows}
    assert by_k[3].pi_ratio == pytest.approx(6 / (24 / math.log(49)), rel=1e-13)
    for k in (5, 12, 25):
        r = by_k[k]
        bound = table.nth(k + 1) ** 2
        ps = [int(p) for p in table.first(k)]
        assert r.terms == count_squarefree_products(ps, bound)
        ref = float(fraction_truncated_moebius(ps, bound))
        assert r.ratio_truncated == pytest.approx(ref * math.log(bound), rel=1e-12)
        assert r.ratio_full > r.ratio_truncated > 0
