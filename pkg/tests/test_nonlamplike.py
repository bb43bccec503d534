import pytest
from gmpy2 import mpq as Q
from hypothesis import given
from hypothesis import strategies as st

from oracle import ev, ev_inv, frac
from plconf import confining as C
from plconf import nonlamplike as NL
from plconf.exactnum import in_nadic_ring
from plconf.families import member
from plconf.plmap import default_a, random_commutator


def closure_oracle(S, N):
    """Apply the three moves until nothing new appears below N."""
    out = set(s for s in S if s <= N)
    changed = True
    while changed:
        changed = False
        for s in list(out):
            for c in (2 * s, 32 * s - 1, 32 * s + 1):
                if c <= N and c not in out:
                    out.add(c)
                    changed = True
    return out


def odd_sweep(xs, p_max):
    # integer forms of |x - 2^p y| <= 2^(p-3): 8|x - 2^p y| <= 2^p, or 8|2^-p x - y| <= 1 for p < 0
    bad = []
    for x in xs:
        for y in xs:
            for p in range(-p_max, p_max + 1):
                if p == 0 and x == y:
                    continue
                if p >= 0:
                    if 8 * abs(x - (y << p)) <= (1 << p):
                        bad.append((x, y, p))
                elif 8 * abs((x << -p) - y) <= 1:
                    bad.append((x, y, p))
    return bad


def test_stilde_frozen():
    assert NL.stilde({1}, 40) == {1, 2, 4, 8, 16, 31, 32, 33}
    assert NL.stilde({1}, 40) == closure_oracle({1}, 40)


@given(st.sets(st.integers(0, 40).map(lambda k: 2 * k + 1), min_size=1, max_size=3), st.integers(1, 5000))
def test_stilde_matches_oracle(S, N):
    assert NL.stilde(S, N) == closure_oracle(S, N)


@given(st.sets(st.integers(0, 40).map(lambda k: 2 * k + 1), min_size=1, max_size=3))
def test_closure_membership_and_ranges(S):
    full = closure_oracle(S, 4000)
    cl = NL.Closure(S)
    assert {j for j in range(1, 4001) if j in cl} == full
    assert cl.in_range(100, 900) == sorted(j for j in full if 100 <= j <= 900)


def test_stilde_estimate_small_n_brute_force():
    # every element lies within 2^(p-4) of some 2^p * 3
    els = closure_oracle({3}, 20000)
    for j in els:
        assert any(16 * abs(j - (3 << p)) < (1 << p) for p in range(j.bit_length() + 1))
    assert NL.stilde_estimate_violations({3}, 20000) == []


def test_good_odd_set_values():
    assert NL.good_odd_set(1).elements == [3]
    xs = NL.good_odd_set(6).elements
    assert xs[0] == 3 and all(x % 2 for x in xs) and xs == sorted(xs)
    assert odd_sweep(xs, 40) == [] == NL.odd_set_violations(xs, 40)


def test_odd_sweep_detects_bad_pairs():
    # |49 - 2^4 * 3| = 1 <= 2^(4-3)
    assert (49, 3, 4) in NL.odd_set_violations([3, 49], 10)
    assert (49, 3, 4) in odd_sweep([3, 49], 10)


def test_tau_sequence():
    tau = NL.TauSequence(2)
    a = default_a(2)
    assert tau(1) == Q(1, 4) and tau(0) == Q(1, 2)
    vals = [tau(j) for j in range(0, 65)]
    assert all(x > y > 0 for x, y in zip(vals, vals[1:]))
    for j in range(1, 33):
        assert frac(tau(2 * j)) == ev_inv(a, frac(tau(j)))
        assert in_nadic_ring(tau(j), 2)


def test_tau_index_lookup():
    tau = NL.TauSequence(2)
    for j in (1, 2, 7, 40, 129):
        assert tau.index_at_or_below(tau(j)) == j
        assert tau.index_at_or_below((tau(j) + tau(j + 1)) / 2) == j + 1


@pytest.fixture(scope="module")
def q3():
    return C.NonLamplike(2, {3})


def test_small_support_is_member(q3):
    tau = NL.TauSequence(2)
    # windows (tau_{s+1}, tau_{s-1}) hold one tau point
    for s in (3, 6, 12, 96):
        g = C.mover(tau(s), tau(s + 1), tau(s - 1), 2)
        assert member(g, q3)


def test_window_violation_reported():
    tau = NL.TauSequence(2)
    s = 6
    g = C.push_element(2, tau(s + 2), tau(s - 1), [(tau(s), (tau(s + 2) + tau(s + 1)) / 2)])
    check = NL.qs_check(g, NL.Closure({3}), tau)
    assert not check.member and check.violating_index == s


@given(st.integers(1, 10**5))
def test_qs_member_matches_window_rule(seed):
    tau = NL.TauSequence(2)
    cl = NL.Closure({3})
    g = random_commutator(seed, 2, 2, window=(Q(1, 64), Q(1, 2)))
    expected = True
    for s in range(1, 400):
        if s not in cl or tau(s) >= Q(1, 2):
            continue
        x = frac(tau(s))
        lo, hi = frac(tau(s + 1)), frac(tau(s - 1))
        if not (lo < ev(g, x) < hi and lo < ev_inv(g, x) < hi):
            expected = False
    assert NL.qs_member(g, {3}, tau) == expected


def test_qs_compare_directions():
    xs = NL.good_odd_set(2).elements
    assert NL.qs_compare({3}, set(xs)).is_dominates
    v = NL.qs_compare({3}, {xs[1]})
    assert v.is_refuted
    assert C.replay_refutation(v, C.NonLamplike(2, {3}), C.NonLamplike(2, {xs[1]}))


def test_qs_compare_rejects_bad_sets():
    with pytest.raises(ValueError):
        NL.qs_compare({3}, {49})
