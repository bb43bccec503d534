import pytest
from gmpy2 import mpq as Q
from hypothesis import given
from hypothesis import strategies as st

from plconf import treesim as T
from plconf.families import a_power
from plconf.plmap import (
    PLError,
    chi0,
    compose,
    default_a,
    identity,
    invert,
    make_bump,
    random_element,
    transplant,
)

t = Q(1, 4)
elements = st.builds(lambda s: random_element(s, 3, 2), st.integers(0, 10**6))


@pytest.fixture(scope="module")
def ball():
    return T.tree_ball(t, 3)


def test_base_membership():
    assert T.in_base(transplant(make_bump(2), (Q(3, 8), Q(1, 2))), t)
    assert not T.in_base(default_a(2), t)
    with pytest.raises(PLError):
        T.HNNData(2, Q(3, 4))


def test_stable_letter_distance():
    r = T.tree_distance(default_a(2), t)
    assert (r.distance, r.p, r.q) == (1, 0, 1)
    assert T.tree_distance(identity(2), t).distance == 0


@pytest.mark.parametrize("m", range(-4, 6))
def test_powers_of_a_walk_the_axis(m):
    assert T.tree_distance(a_power(2, m), t).distance == abs(m)


def test_ball_is_a_tree(ball):
    assert ball.is_tree
    assert ball.vertex_count() == len(ball.edges) + 1


def test_normal_form_matches_graph_distance(ball):
    assert T.check_against_ball(ball) == []
    a_code = T.coset_code(default_a(2), t)
    assert ball.dist[a_code] == 1


@given(elements, elements)
def test_distance_is_a_metric(g, h):
    # d(g v0, h v0) = d(v0, g^-1 h v0)
    d_gh = T.tree_distance(compose(h, invert(g)), t).distance
    d_hg = T.tree_distance(compose(g, invert(h)), t).distance
    assert d_gh == d_hg >= 0
    assert T.tree_distance(g, t).distance == T.tree_distance(invert(g), t).distance


@given(elements)
def test_coset_code_ignores_base(g):
    k = transplant(make_bump(2), (Q(3, 8), Q(1, 2)))
    assert T.coset_code(compose(g, k), t) == T.coset_code(g, t)


def test_translation_length_of_a():
    assert T.translation_length(default_a(2), t) == 1
    assert T.isometry_type(default_a(2), t) == "Loxodromic"


@given(elements)
def test_loxodromic_iff_chi0(g):
    assert (T.isometry_type(g, t) == "Loxodromic") == (chi0(g) != 0)


@given(elements)
def test_busemann_recovers_chi0(g):
    r = T.busemann_estimate(g, t, m=12)
    assert r.stabilized and r.value == chi0(g)
    assert r.m0 is not None and r.m0 <= 12


def test_busemann_of_a():
    r = T.busemann_estimate(default_a(2), t)
    assert r.value == 1 and r.ray_sign in (1, -1)


def test_depth_cap():
    with pytest.raises(T.TreeError):
        T.tree_ball(t, 9)
