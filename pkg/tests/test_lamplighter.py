import itertools
from decimal import Decimal, getcontext

import pytest
from gmpy2 import mpq as Q
from hypothesis import given
from hypothesis import strategies as st

from plconf import confining as C
from plconf import lamplighter as L
from plconf.families import IndexSet
from plconf.plmap import PLError, compose, default_a, rational_slope_fix_element, slope_right

Z, FA = L.IntLamp(), L.FreeAbelianLamp()
B = C.Budget(samples=120, k_max=32, seed=0)

lamp_dicts = st.dictionaries(st.integers(-6, 6), st.integers(-5, 5), max_size=5)
int_elts = st.builds(lambda d, s: L.lamp_elt(Z, d, s), lamp_dicts, st.integers(-3, 3))


def ref_mul(u, v):
    """Reference product on (function, shift) pairs stored as plain dicts."""
    f, s = dict(u.lamps), u.shift
    g, t = dict(v.lamps), v.shift
    out = {}
    for i in set(f) | {j + s for j in g}:
        out[i] = f.get(i, 0) + g.get(i - s, 0)
    return {i: c for i, c in out.items() if c}, s + t


def machado_ref(m, c, i):
    getcontext().prec = 80
    x = Decimal(abs(m * c)) * Decimal(2).sqrt()
    dist = min(x % 1, 1 - x % 1)
    return dist < Decimal(2) ** i


# group structure


@given(int_elts, int_elts)
def test_product_matches_reference(u, v):
    w = L.lamp_mul(u, v)
    assert (dict(w.lamps), w.shift) == ref_mul(u, v)


@given(int_elts, int_elts, int_elts)
def test_associative(u, v, w):
    assert L.lamp_mul(L.lamp_mul(u, v), w) == L.lamp_mul(u, L.lamp_mul(v, w))


@given(int_elts)
def test_inverse(u):
    e = L.lamp_identity(Z)
    assert L.lamp_mul(u, L.lamp_inv(u)) == e == L.lamp_mul(L.lamp_inv(u), u)


@given(int_elts, st.integers(-4, 4))
def test_shift_is_conjugation_by_z(u, k):
    z = L.lamp_elt(Z, {}, k)
    assert L.lamp_shift(u, k) == L.lamp_mul(L.lamp_mul(z, u), L.lamp_inv(z))


def test_free_abelian_lamps():
    x = L.fa_vector({1: 2, 3: -1})
    assert FA.multiply(x, FA.invert(x)) == ()
    assert L.fa_project(x, 2) == ((3, -1),)
    assert FA.word_length(x) == 3
    with pytest.raises(L.LampError):
        L.fa_vector({0: 1})


# families


@pytest.mark.parametrize("F,k", [
    (L.Balls(Z), 1),
    (L.Machado(1), 1),
    (L.Machado(3), 1),
    (L.SubgroupFamily(Z, L.Multiples(2)), 0),
    (L.SubgroupFamily(FA, L.Span(IndexSet.finite({1, 2}))), 0),
], ids=lambda x: L.format_lamp_family(x) if not isinstance(x, int) else str(x))
def test_stated_product_exponents(F, k):
    rep = L.lamp_axiom_check(F, B)
    assert rep.passed and rep.prod_k == k and rep.prod_exact


def test_nonsplit_stay_counterexample():
    # a member whose shift is not a member: known gap in the stay axiom
    F = L.NonSplit()
    e4 = L.fa_basis(4)
    u = L.lamp_elt(FA, {-1: e4, -2: e4, -3: e4, -4: e4})
    assert L.lamp_member(u, F)
    shifted = L.lamp_shift(u, 1)
    assert shifted.coord(-4) == () != L.fa_project(shifted.coord(-1), 4)
    assert not L.lamp_member(shifted, F)
    assert not L.lamp_axiom_check(F, B).stay_ok


def test_nonsplit_rejects_lonely_negative_lamp():
    assert not L.lamp_member(L.delta(FA, -2, L.fa_basis(1)), L.NonSplit())
    assert L.lamp_member(L.delta(FA, -1, L.fa_basis(1)), L.NonSplit())


def test_right_heavy_and_split():
    assert not L.is_right_heavy(L.Balls(Z))
    assert L.is_right_heavy(L.Machado(1))
    assert L.is_split(L.SubgroupFamily(FA, L.Span(IndexSet.finite({1}))))


def test_machado_split_representative():
    M = L.Machado(1)
    rep = L.lamp_split_representative(M)
    assert L.lamp_compare(M, rep, B).is_dominates and L.lamp_compare(rep, M, B).is_dominates
    assert L.split_proof_exponent(M) == 1


@given(st.integers(-2000, 2000), st.integers(1, 5), st.integers(-8, 2))
def test_machado_sets_against_decimal(m, c, i):
    assert L.machado_in_A(m, c, i) == (m == 0 or i >= 0 or machado_ref(m, c, i))


def test_machado_escape_needs_coordinate_below_minus_one():
    # |m sqrt2| mod 1 is always within 1/2 of an integer, so A_{-1} is everything
    assert all(L.machado_in_A(m, 1, -1) for m in range(1, 3000))
    u = L.delta(Z, -3, 7)
    j = L.machado_member_escape(u, 1)
    assert j is not None and not L.machado_in_A(j * 7, 1, -3)
    assert L.machado_member_escape(L.delta(Z, -1, 5), 1) is None


def test_subgroup_lattice_reversal():
    subsets = [IndexSet.finite(c) for r in range(4) for c in itertools.combinations((1, 2, 3), r)]
    for X, Y in itertools.product(subsets, subsets):
        F1, F2 = L.SubgroupFamily(FA, L.Span(X)), L.SubgroupFamily(FA, L.Span(Y))
        v = L.lamp_compare(F1, F2, B)
        assert v.is_dominates == (set(Y.items) <= set(X.items))
        if v.is_refuted:
            assert L.lamp_replay_refutation(v, F1, F2)


@pytest.mark.parametrize("d1,d2", [(1, 2), (2, 4), (3, 2), (0, 5), (6, 3)])
def test_multiples_order(d1, d2):
    F1, F2 = L.SubgroupFamily(Z, L.Multiples(d1)), L.SubgroupFamily(Z, L.Multiples(d2))
    inside = d2 == 0 or (d1 != 0 and d2 % d1 == 0)
    v = L.lamp_compare(F1, F2, B)
    assert v.is_dominates == inside
    if not inside:
        assert L.lamp_replay_refutation(v, F1, F2)


def test_balls_do_not_hold_right_heavy_families():
    v = L.lamp_compare(L.Balls(Z), L.Machado(1), B)
    assert v.is_refuted and L.lamp_replay_refutation(v, L.Balls(Z), L.Machado(1))


def test_shift_conjugate_compare():
    F = L.Machado(1)
    assert L.lamp_compare(F, L.ShiftConjugate(F, 2), B).is_dominates
    assert L.lamp_compare(L.ShiftConjugate(F, 2), F, B).is_dominates


def test_nonsplit_certificate():
    steps = L.nonsplit_certificate(16)
    assert len(steps) == 17 and all(s.ok for s in steps)


@pytest.mark.parametrize("text,group", [
    ("full", "int"), ("balls", "int"), ("machado:3", "int"), ("qh(mult:4)", "int"),
    ("qh(span:{1,3})", "freeabelian"), ("qh(span:~{2})", "freeabelian"), ("nonsplit", "freeabelian"),
    ("split(machado:1)", "int"), ("shift(balls,-2)", "int"), ("meet(qh(whole),balls)", "int"),
])
def test_lamp_grammar_round_trip(text, group):
    G = L.lamp_group(group)
    F = L.parse_lamp_family(text, G)
    assert L.format_lamp_family(F) == text
    assert L.parse_lamp_family(L.format_lamp_family(F), G) == F


@pytest.mark.parametrize("text,group", [("nonsplit", "int"), ("machado:1", "freeabelian"), ("qh(odd)", "int"), ("lamp", "int")])
def test_lamp_grammar_errors(text, group):
    with pytest.raises(L.LampError):
        L.parse_lamp_family(text, L.lamp_group(group))


# slope map


def test_xi_of_constructed_element():
    t = Q(1, 3)
    g = rational_slope_fix_element(t, (Q(1, 4), Q(1, 2)), 2)
    assert slope_right(g, t) == 4
    assert L.xi_t(g, t) == {0: 1}


@given(st.dictionaries(st.integers(-6, 0), st.integers(-3, 3), max_size=4))
def test_section_round_trip(v):
    v = {k: c for k, c in v.items() if c}
    assert L.xi_t(L.xi_section(v, Q(1, 3)), Q(1, 3)) == v


@given(st.dictionaries(st.integers(-5, 0), st.integers(-2, 2), max_size=3),
       st.dictionaries(st.integers(-5, 0), st.integers(-2, 2), max_size=3))
def test_xi_homomorphism_and_shift(v, w):
    t = Q(1, 3)
    g, h = L.xi_section(v, t), L.xi_section(w, t)
    total = {k: v.get(k, 0) + w.get(k, 0) for k in set(v) | set(w)}
    assert L.xi_t(compose(g, h), t) == {k: c for k, c in total.items() if c}
    xg = L.xi_t(g, t)
    assert L.xi_t(C.conj_a(g, 1), t) == L.xi_shift(xg)


def test_xi_rejects_nary_points():
    with pytest.raises(PLError):
        L.xi_t(default_a(2), Q(1, 4))
