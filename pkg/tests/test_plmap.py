from fractions import Fraction as Fr

import pytest
from gmpy2 import mpq as Q
from hypothesis import given
from hypothesis import strategies as st

from oracle import brute_fixed_points, ev, ev_inv, frac, log_exact, probe_points, slope_at_zero
from plconf.exactnum import in_nadic_ring
from plconf.plmap import (
    InvalidPLMap,
    PLError,
    PLMap,
    UndefinedCharacter,
    alpha,
    alpha_conjugate,
    chi0,
    chi1,
    compact_support,
    compose,
    default_a,
    epsilon,
    evaluate,
    fix_classification,
    fixed_set,
    identity,
    interpolate,
    invert,
    make_bump,
    orbit_point,
    power,
    preimage,
    random_commutator,
    random_element,
    rational_slope_fix_element,
    slope_right,
    standard_generators,
    support,
    transplant,
)

seeds = st.integers(0, 10**6)
small_n = st.sampled_from([2, 3])


def elements(n=small_n):
    return st.builds(lambda s, c, n: random_element(s, c, n), seeds, st.integers(1, 4), n)


def same_map(f, fn, *factors):
    return all(ev(f, x) == fn(x) for x in probe_points(f, *factors))


# frozen examples


def test_bump_values():
    b = make_bump(2)
    assert [(frac(x), frac(y)) for x, y in zip(b.xs, b.ys)] == [
        (0, 0), (Fr(1, 4), Fr(1, 2)), (Fr(1, 2), Fr(3, 4)), (1, 1)]
    assert evaluate(compose(b, b), Q(1, 16)) == Q(1, 4)
    assert evaluate(b, Q(1, 8)) == Q(1, 4)
    assert (chi0(b), chi1(b)) == (1, -1)
    assert support(b) == [(0, 1)]


def test_transplanted_bump():
    g = transplant(make_bump(2), (Q(0), Q(1, 2)))
    assert chi0(g) == 1 and support(g) == [(0, Q(1, 2))]


def test_generators_n2():
    gens = standard_generators(2)
    assert gens.supports == ((0, Q(1, 2)), (Q(3, 4), 1))
    fs = fixed_set(gens[0])
    assert fs.points == (0,) and fs.intervals == ((Q(1, 2), 1),)


@pytest.mark.parametrize("n", [2, 3, 4, 5])
def test_generator_invariants(n):
    gens = standard_generators(n)
    assert len(gens) == n
    windows = gens.supports
    for (l0, r0), (l1, r1) in zip(windows, windows[1:]):
        assert r0 < l1
    for i, g in enumerate(gens.maps):
        assert [tuple(map(frac, w)) for w in support(g)] == [tuple(map(frac, windows[i]))]
        for h in gens.maps:
            assert compose(g, h) == compose(h, g)
    assert chi0(gens[0]) == 1 and chi1(gens[0]) == 0
    assert chi0(gens[-1]) == 0 and chi1(gens[-1]) == 1
    for g in gens.maps[1:-1]:
        assert (chi0(g), chi1(g)) == (0, 0)


def test_orbit_point_and_sequence():
    a = default_a(2)
    assert orbit_point(Q(1, 4), 1, a) == Q(3, 8) == evaluate(a, Q(1, 4))
    seq = [orbit_point(Q(1, 4), k, a) for k in range(-6, 12)]
    assert all(x < y < Q(1, 2) for x, y in zip(seq, seq[1:]))


def test_fix_classification_values():
    assert str(fix_classification(Q(1, 3), 2)) == "RationalNonNAry(o=2)"
    assert str(fix_classification(Q(5, 12), 2)) == "RationalNonNAry(o=2)"


def test_rational_slope_element_piece():
    g = rational_slope_fix_element(Q(1, 3), (Q(1, 4), Q(1, 2)), 2)
    third = Fr(1, 3)
    assert ev(g, third) == third
    assert slope_right(g, Q(1, 3)) == 4
    # the piece through 1/3 is y = 4x - 1
    x = third + Fr(1, 1000)
    assert ev(g, x) == 4 * x - 1
    assert all(ev(g, Fr(k, 64)) == Fr(k, 64) for k in list(range(0, 16)) + list(range(32, 65)))


def test_invalid_maps_rejected():
    with pytest.raises(InvalidPLMap):
        PLMap(2, [0, Q(1, 3), 1], [0, Q(1, 3), 1])
    with pytest.raises(InvalidPLMap):
        PLMap(2, [0, Q(1, 2), 1], [0, Q(3, 4), 1])
    with pytest.raises(InvalidPLMap):
        PLMap(2, [0, 1], [0, Q(1, 2)])
    with pytest.raises(PLError):
        transplant(make_bump(2), (Q(0), Q(3, 4)))


def test_alpha_is_involution():
    for n in (2, 3):
        assert compose(alpha(n), alpha(n)) == identity(n)
        assert epsilon(alpha(n)) == -1


def test_character_undefined_on_reversal():
    with pytest.raises(UndefinedCharacter):
        chi0(alpha(2))


# properties


@given(elements(), elements())
def test_compose_matches_pointwise(f, g):
    if f.n != g.n:
        return
    fg = compose(f, g)
    # g's breaks pulled back through f are where the product may bend
    pulled = [ev_inv(f, frac(y)) for y in g.xs]
    assert same_map(fg, lambda x: ev(g, ev(f, x)), f, g)
    assert all(ev(fg, x) == ev(g, ev(f, x)) for x in pulled)
    assert chi0(fg) == chi0(f) + chi0(g) and chi1(fg) == chi1(f) + chi1(g)


@given(elements(st.just(2)), elements(st.just(2)), elements(st.just(2)))
def test_associativity(f, g, h):
    assert compose(compose(f, g), h) == compose(f, compose(g, h))


@given(elements())
def test_inverse_and_identity(f):
    e = identity(f.n)
    assert compose(f, invert(f)) == e == compose(invert(f), f)
    assert compose(f, e) == f == compose(e, f)
    assert all(ev(invert(f), y) == ev_inv(f, y) for y in probe_points(f))


@given(elements())
def test_characters_are_log_slopes(f):
    assert chi0(f) == log_exact(slope_at_zero(f), f.n)


@given(elements())
def test_breakpoints_and_slopes_are_nadic(f):
    for x, y in zip(f.xs, f.ys):
        assert in_nadic_ring(x, f.n) and in_nadic_ring(y, f.n)
    assert f == PLMap(f.n, f.xs, f.ys)


@given(elements(), st.integers(-3, 3))
def test_power_adds_characters(f, k):
    assert chi0(power(f, k)) == k * chi0(f)


@given(elements())
def test_alpha_swaps_characters(f):
    g = alpha_conjugate(f)
    assert chi0(g) == chi1(f) and chi1(g) == chi0(f)
    assert epsilon(compose(f, alpha(f.n))) == -1


@given(seeds)
def test_commutators_have_compact_support(s):
    g = random_commutator(s, 2, 2)
    assert compact_support(g)
    assert chi0(g) == 0 == chi1(g)


@given(st.builds(lambda s: random_element(s, 2, 2), seeds))
def test_fixed_set_against_grid(f):
    fs = fixed_set(f)
    grid = brute_fixed_points(f, 512)
    for x in grid:
        assert fs.contains(Q(x.numerator, x.denominator))
    for p in fs.points:
        assert ev(f, frac(p)) == frac(p)
    for lo, hi in fs.intervals:
        assert ev(f, frac(lo)) == frac(lo) and ev(f, (frac(lo) + frac(hi)) / 2) == (frac(lo) + frac(hi)) / 2


@given(st.integers(1, 60), st.integers(61, 200), st.integers(0, 5))
def test_interpolate_hits_targets(i, j, s):
    lo, hi = Q(i, 256), Q(j, 256)
    tgt = Q(i + s, 256), Q(j + s // 2 + 3, 256)
    g = interpolate(2, [(lo, tgt[0]), (hi, tgt[1])])
    assert evaluate(g, lo) == tgt[0] and evaluate(g, hi) == tgt[1]


@given(st.integers(1, 63))
def test_preimage_inverts(k):
    a = default_a(2)
    y = Q(k, 128)
    assert evaluate(a, preimage(a, y)) == y
