import math
from fractions import Fraction

import pytest
from gmpy2 import mpq as Q
from hypothesis import given
from hypothesis import strategies as st

from plconf.exactnum import (
    InvalidBase,
    NAdic,
    NotCoprime,
    ParseError,
    coprime_part,
    format_nadic,
    format_rational,
    in_nadic_ring,
    is_nadic,
    log_n,
    mult_order,
    nadic_between,
    nadic_residue,
    parse_nadic,
    parse_rational,
)

bases = st.integers(2, 12)


def brute_order(n, m):
    return next(o for o in range(1, m + 1) if pow(n, o, m) == 1 % m)


def brute_is_nadic(x: Fraction, n: int) -> bool:
    # x is n-adic iff some power of n clears the denominator
    return any((n**e) % x.denominator == 0 for e in range(64))


def test_frozen_values():
    assert is_nadic(Q(5, 36), 6) == NAdic(6, 5, 2)
    assert mult_order(2, 3) == 2
    assert mult_order(3, 8) == 2
    assert coprime_part(12, 2) == (3, 2)
    assert coprime_part(45, 3) == (5, 2)


def test_nadic_rejects_foreign_denominator():
    assert is_nadic(Q(1, 3), 2) is None
    assert not in_nadic_ring(Q(1, 10), 4)
    assert in_nadic_ring(Q(7, 8), 4)


def test_bad_base():
    with pytest.raises(InvalidBase):
        NAdic(1, 1, 0)
    with pytest.raises(NotCoprime):
        mult_order(4, 6)


@given(bases, st.integers(1, 400))
def test_mult_order_matches_iteration(n, m):
    if m == 1 or math.gcd(n, m) != 1:
        return
    assert mult_order(n, m) == brute_order(n, m)


@given(st.integers(1, 10**6), bases)
def test_coprime_part_splits(q, n):
    rest, ell = coprime_part(q, n)
    assert q % rest == 0 and math.gcd(rest, n) == 1
    d = q // rest
    assert (n**ell) % d == 0
    assert ell == 0 or (n ** (ell - 1)) % d != 0


@given(st.fractions(), bases)
def test_is_nadic_agrees_with_brute_force(x, n):
    got = is_nadic(Q(x.numerator, x.denominator), n)
    assert (got is not None) == brute_is_nadic(x, n)
    if got is not None:
        assert Fraction(got.m, n**got.e) == x
        assert got.e == 0 or got.m % n != 0


@given(st.integers(-(10**9), 10**9), st.integers(0, 12), bases)
def test_nadic_text_round_trip(m, e, n):
    x = Q(m, n**e)
    assert parse_rational(format_nadic(x, n)) == x
    assert parse_nadic(format_nadic(x, n)).value == x


@given(st.fractions())
def test_rational_text_round_trip(x):
    q = Q(x.numerator, x.denominator)
    assert parse_rational(format_rational(q)) == q


@pytest.mark.parametrize("bad", ["", "1/0", "a/b", "1/2^x", "1//2"])
def test_parse_errors(bad):
    with pytest.raises(ParseError):
        parse_rational(bad)


@given(st.integers(-30, 30), bases)
def test_log_n_inverts_powers(k, n):
    assert log_n(Q(n) ** k, n) == k


def test_log_n_rejects_non_powers():
    with pytest.raises(ValueError):
        log_n(Q(3), 2)


@given(st.fractions(), st.fractions(min_value=Fraction(1, 10**6), max_value=10), bases)
def test_nadic_between_is_inside_and_nadic(lo, width, n):
    lo = Q(lo.numerator, lo.denominator)
    hi = lo + Q(width.numerator, width.denominator)
    x = nadic_between(lo, hi, n)
    assert lo < x < hi and in_nadic_ring(x, n)


def test_nadic_between_prefers_small_denominators():
    assert nadic_between(Q(1, 3), Q(2, 3), 2) == Q(1, 2)
    assert nadic_between(Q(0), Q(1, 5), 2) == Q(1, 8)


@given(st.integers(-500, 500), st.integers(0, 5))
def test_residue_is_numerator_class(m, e):
    n = 5
    x = Q(m, n**e)
    assert nadic_residue(x, n) == is_nadic(x, n).m % (n - 1)
