from fractions import Fraction as Fr

import pytest
from gmpy2 import mpq as Q
from hypothesis import given
from hypothesis import strategies as st

from oracle import ev, ev_inv, frac, points
from plconf import confining as C
from plconf.exactnum import ParseError, nadic_between
from plconf.families import (
    FamilyError,
    IndexSet,
    conj_a,
    format_family,
    member,
    parse_family,
    same_orbit,
)
from plconf.plmap import (
    default_a,
    evaluate,
    fixed_set,
    orbit_point,
    preimage,
    random_commutator,
    standard_generators,
    support,
)

R2 = Fr(1, 2)
inner_t = st.integers(1, 63).map(lambda k: Q(k, 128))
odd_t = st.sampled_from([Q(1, 3), Q(1, 5), Q(2, 7), Q(3, 10), Q(5, 12), Q(1, 6)])
any_t = st.one_of(inner_t, odd_t)
B = C.Budget(samples=60, k_max=32, seed=0)


def fixes_up_to(g, t: Fr) -> bool:
    """Reference check that g is the identity on [0, t]."""
    pts = [x for x, _ in points(g) if x <= t] + [t]
    mids = [(u + v) / 2 for u, v in zip(pts, pts[1:])]
    return all(ev(g, x) == x for x in pts + mids)


def orbit_down(t: Fr, k: int) -> Fr:
    a = default_a(2)
    for _ in range(k):
        t = ev_inv(a, t)
    return t


def fixes_orbit(g, t: Fr) -> bool:
    first_break = points(g)[1][0]
    k = 0
    while True:
        s = orbit_down(t, k)
        if s < first_break:
            return True
        if ev(g, s) != s:
            return False
        k += 1


# membership against the reference checks


@given(any_t, st.integers(0, 10**5))
def test_rigidstab_membership(t, seed):
    g = random_commutator(seed, 2, 2)
    assert member(g, C.RigidStab(2, t)) == fixes_up_to(g, frac(t))


@given(any_t, st.integers(0, 10**5))
def test_orbitfix_membership(t, seed):
    g = random_commutator(seed, 2, 2)
    assert member(g, C.OrbitFixator(2, t)) == fixes_orbit(g, frac(t))


@given(any_t, st.integers(0, 10**5), st.integers(-3, 3))
def test_conjugation_moves_supports(t, seed, k):
    g = random_commutator(seed, 2, 2)
    h = conj_a(g, k)
    a = default_a(2)
    moved = [(orbit_point(lo, k, a), orbit_point(hi, k, a)) for lo, hi in support(g)]
    # supports inside (0, r) move with a^k; the rest is untouched
    assert all(support(h)[i] == moved[i] for i in range(len(moved)) if moved[i][1] <= Q(1, 2))


@pytest.mark.parametrize("F", [
    C.RigidStab(2, Q(1, 4)),
    C.OrbitFixator(2, Q(1, 3)),
    C.NbhdOrbitFixator(2, Q(1, 4)),
    C.LamplikeProduct(2, Q(1, 4), Q(3, 16), IndexSet.finite({1, 3})),
], ids=format_family)
def test_samples_are_members(F):
    for g in C.sample_members(F, 30, seed=3):
        assert member(g, F)
        if isinstance(F, C.RigidStab):
            assert fixes_up_to(g, frac(F.t))
        if isinstance(F, C.OrbitFixator):
            assert fixes_orbit(g, frac(F.t))


# comparisons


def test_rigidstab_pair_thresholds():
    F1, F2 = C.RigidStab(2, Q(1, 4)), C.RigidStab(2, Q(3, 8))
    fwd, back = C.compare(F1, F2, B), C.compare(F2, F1, B)
    assert (fwd.kind, fwd.k) == ("dominates", 0)
    # 1/4 . a = 3/8 is the first orbit point at or above 3/8
    assert evaluate(default_a(2), Q(1, 4)) == Q(3, 8)
    assert (back.kind, back.k) == ("dominates", 1)


@given(any_t, any_t)
def test_rigidstabs_all_equivalent(t, s):
    F, G = C.RigidStab(2, t), C.RigidStab(2, s)
    v = C.compare(F, G, B)
    assert v.is_dominates
    # the least k puts s.a^k at or above t
    a = default_a(2)
    assert orbit_point(s, v.k, a) >= t
    assert v.k == 0 or orbit_point(s, v.k - 1, a) < t


def test_orbitfix_cross_orbit_refuted():
    F1, F2 = C.OrbitFixator(2, Q(1, 4)), C.OrbitFixator(2, Q(1, 3))
    assert same_orbit(2, Q(1, 4), Q(1, 3)) is None
    v = C.compare(F1, F2, B)
    assert v.is_refuted and C.replay_refutation(v, F1, F2)


def test_orbitfix_same_orbit_dominates():
    t = Q(1, 4)
    s = evaluate(default_a(2), t)
    assert C.compare(C.OrbitFixator(2, t), C.OrbitFixator(2, s), B).is_dominates
    assert C.compare(C.OrbitFixator(2, s), C.OrbitFixator(2, t), B).is_dominates


@given(any_t, any_t)
def test_join_is_larger_threshold(t, s):
    J = C.join(C.RigidStab(2, t), C.RigidStab(2, s))
    M = C.RigidStab(2, max(t, s))
    assert C.compare(J, M, B).is_dominates and C.compare(M, J, B).is_dominates


@pytest.mark.parametrize("X,Y,expect", [
    ({1, 3}, {1, 3, 5}, True),
    ({1, 3, 5}, {1, 3}, True),
    ({1}, None, False),  # finite vs cofinite
])
def test_lamplike_order(X, Y, expect):
    t, x = Q(1, 4), Q(3, 16)
    FX = C.LamplikeProduct(2, t, x, IndexSet.finite(X))
    FY = C.LamplikeProduct(2, t, x, IndexSet.finite(Y) if Y is not None else IndexSet.cofinite_set(set()))
    v = C.compare(FX, FY, B)
    assert v.is_dominates == expect
    if v.is_refuted:
        assert C.replay_refutation(v, FX, FY)


# fixed points and the largest element


def test_orbitfix_fixed_points_are_preimages():
    r = C.global_fixed_points(C.OrbitFixator(2, Q(1, 4)), -3)
    expected = [orbit_down(Fr(1, 4), k) for k in range(4)]
    assert [frac(p) for p in r.points] == expected == [Fr(1, 4), Fr(1, 8), Fr(1, 16), Fr(1, 32)]
    assert r.certified


def test_rigidstab_fixed_interval():
    r = C.global_fixed_points(C.RigidStab(2, Q(1, 4)), -3)
    assert r.intervals == [(0, Q(1, 4))] and r.complete


def test_nonlamplike_moving_witness():
    F = C.NonLamplike(2, {3})
    tau = C.tau_for(2, F.tau1)
    for t in [Q(1, 3), Q(1, 5), Q(3, 8), Q(1, 7)]:
        g = C.moving_member(F, t)
        assert g is not None and member(g, F) and evaluate(g, t) != t
        lo, hi = support(g)[0][0], support(g)[-1][1]
        assert sum(1 for j in range(1, 200) if lo < tau(j) < hi) <= 1


def test_largest_for_orbit_fixator_is_immediate():
    # RigidStab(t) already fixes every t.a^j with j <= 0
    r = C.largest_element_witness(C.OrbitFixator(2, Q(1, 4)), B)
    assert r.k == 0 and r.sampled_ok


def test_largest_for_nonlamplike_clears_tau1():
    F = C.NonLamplike(2, {3})
    r = C.largest_element_witness(F, B)
    assert orbit_point(r.t, r.k, default_a(2)) >= F.tau1 and r.sampled_ok


def test_split_representative_needs_fixed_point():
    F = C.OrbitFixator(2, Q(1, 4))
    rep = C.split_representative(F, Q(1, 4))
    assert C.compare(F, rep, B).is_dominates and C.compare(rep, F, B).is_dominates
    assert C.split_proof_exponent(F, Q(1, 4), B) % 2 == 0
    with pytest.raises(FamilyError):
        C.split_representative(F, Q(1, 3))


# factorizations


def test_two_nonzero_factorization():
    n = 2
    for seed in range(4):
        f = random_commutator(seed, 2, n)
        fz = C.emptiness_factorization(f, C.TwoNonzero(0, 1))
        assert fz.replay() == f and len(fz) in (1, 3)
        lj, rj = standard_generators(n).supports[1]
        for g, tag in fz.factors:
            if tag == "Fix(I_1)":
                assert fixed_set(g).contains_interval(lj, rj)


def test_negative_chi_factorization():
    q = C.push_element(2, Q(1, 4), Q(3, 4), [(Q(3, 8), Q(5, 8))])
    for seed in range(1, 6):
        f = random_commutator(seed, 2, 2)
        if f.is_identity():
            continue
        fz = C.emptiness_factorization(f, C.NegativeChi(q, Q(3, 8)))
        assert len(fz) == 3 and fz.replay() == f


def test_middle_factorization_n3():
    n = 3
    gens = standard_generators(n)
    lo, hi = gens.supports[1]
    r0, l2 = gens.supports[0][1], gens.supports[2][0]
    q_l = C.commutator_search(n, r0, hi, lambda g: evaluate(g, lo) < lo, around=lo)
    x_l = nadic_between(lo, min(hi, preimage(q_l, lo)), n)
    q_r = C.commutator_search(n, lo, l2, lambda g: evaluate(g, hi) > hi, around=hi)
    x_r = nadic_between(max(lo, preimage(q_r, hi)), hi, n)
    sc = C.Middle(1, q_l, x_l, q_r, x_r)
    for win in [(Q(1, 9), Q(4, 9)), (Q(13, 27), Q(14, 27)), (Q(0), Q(1))]:
        f = random_commutator(1, 2, n, window=win)
        assert C.emptiness_factorization(f, sc).replay() == f


def test_bad_scenario_rejected():
    f = random_commutator(0, 2, 2)
    with pytest.raises(C.ScenarioError):
        C.emptiness_factorization(f, C.NegativeChi(f, Q(3, 4)))


# prime powers


def test_prime_power_embedding_values():
    assert C.prime_power_embedding({1}, 20) == {2, 4, 8, 16}


@given(st.sets(st.integers(1, 6)), st.sets(st.integers(1, 6)))
def test_prime_power_difference_stabilizes(X, Y):
    sizes = [len(C.prime_power_embedding(X, N) - C.prime_power_embedding(Y, N)) for N in (10**3, 10**5)]
    if X <= Y:
        assert sizes == [0, 0]
    else:
        assert sizes[1] > sizes[0]


# grammar

literals = st.deferred(lambda: st.one_of(
    st.just("full"),
    st.builds("{}:{}".format, st.sampled_from(["rigidstab", "openrigidstab", "orbitfix", "nbhdorbitfix"]),
              st.sampled_from(["1/4", "1/3", "3/8", "5/16"])),
    st.builds("lamplike:1/4,3/16,{}".format, st.sampled_from(["{1,3}", "~{2}", "{}", "~{}"])),
    st.builds("nonlamplike:{{{}}}".format, st.sampled_from(["3", "3,5", "3,5,9"])),
    st.builds("conj({},{})".format, literals, st.integers(-3, 3)),
    st.builds("meet({},{})".format, literals, literals),
))


@given(literals)
def test_family_round_trip(text):
    F = parse_family(text, 2)
    assert parse_family(format_family(F), 2) == F


@given(st.text(alphabet="abcdefgijklmnoprstux:,(){}~/^-@0123456789 ", max_size=30))
def test_family_parser_fuzz(text):
    try:
        F = parse_family(text, 2)
    except (ParseError, FamilyError, ValueError, ZeroDivisionError):
        return
    assert parse_family(format_family(F), 2) == F


@pytest.mark.parametrize("bad", ["", "rigidstab", "rigidstab:3/4", "meet(full)", "full,", "nonlamplike:~{3}"])
def test_family_parse_errors(bad):
    with pytest.raises((ParseError, FamilyError)):
        parse_family(bad, 2)
