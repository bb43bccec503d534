"""The Bass-Serre tree of F_n as an ascending HNN extension with base K = Fix[0, t].

Vertices are left cosets gK.  Since K^a is inside K, each vertex gK has a single
parent gaK, and the parent rays of any two vertices merge.  Distances therefore
come from the least p >= 0 with a^-q g a^p in K, where q = p + chi_0(g).
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional

from gmpy2 import mpq as Q

from .families import a_power
from .plmap import (
    PLError,
    PLMap,
    chi0,
    compose,
    default_a,
    evaluate,
    fixed_set,
    identity,
    invert,
    make_bump,
    power,
    product,
    standard_generators,
    transplant,
)


class TreeError(RuntimeError):
    pass


@dataclass(frozen=True)
class HNNData:
    """Base K = elements fixing [0, t]; stable letter a = a_0."""

    n: int
    t: Q

    def __post_init__(self):
        object.__setattr__(self, "t", Q(self.t))
        r = Q(1, self.n)  # a_0 is supported on (0, 1/n)
        if not 0 < self.t < r:
            raise PLError(f"t must lie in (0, {r})")

    @property
    def a(self) -> PLMap:
        return default_a(self.n)


def in_base(g: PLMap, t) -> bool:
    return fixed_set(g).contains_interval(0, Q(t))


@dataclass(frozen=True)
class TreeMetricReport:
    distance: int
    p: int
    q: int
    oracle_checked: bool = False

    def as_dict(self) -> dict:
        return {"distance": self.distance, "p": self.p, "q": self.q, "oracle_checked": self.oracle_checked}


def tree_distance(g: PLMap, t, cap: int = 10_000) -> TreeMetricReport:
    """d(v0, g v0) from the least p with a^-q g a^p in K."""
    n, t = g.n, Q(t)
    HNNData(n, t)
    c = chi0(g)
    p = max(0, -c)
    # the set of valid p is closed upwards, so walk up from the smallest candidate
    while p <= cap:
        q = p + c
        if in_base(product(a_power(n, -q), g, a_power(n, p)), t):
            return TreeMetricReport(p + q, p, q)
        p += 1
    raise TreeError(f"no normal form with p <= {cap}; the input is not a genuine element")


def coset_code(g: PLMap, t) -> tuple:
    """A canonical key for gK: the restriction of g^-1 to [0, t]."""
    t = Q(t)
    h = invert(g)
    pts = [(x, y) for x, y in zip(h.xs, h.ys) if x < t]
    return tuple(pts) + ((t, evaluate(h, t)),)


@dataclass
class TreeBall:
    t: Q
    depth: int
    reps: dict  # code -> representative element
    dist: dict  # code -> BFS depth
    edges: set  # frozenset({code, code})
    extra_edges: int  # edges met between already-seen vertices other than the BFS tree

    @property
    def is_tree(self) -> bool:
        return self.extra_edges == 0 and len(self.edges) == len(self.reps) - 1

    def vertex_count(self) -> int:
        return len(self.reps)


def _coset_moves(n: int, t: Q) -> list[PLMap]:
    """A few elements of K used to branch at each vertex."""
    a = default_a(n)
    ta = evaluate(a, t)
    from .confining import nadic_window_around

    mid = (t + ta) / 2
    u, v = nadic_window_around(mid, t, ta, n)
    bump = transplant(make_bump(n), (u, v))
    moves = [bump]
    gens = standard_generators(n)
    if n > 2:
        moves.append(gens[1])
    return moves


def tree_ball(t, depth: int, n: int = 2, cap: int = 6) -> TreeBall:
    """Breadth-first ball around v0 = K using parent edges gK - gaK and child edges g k a^-1 K."""
    if depth > cap:
        raise TreeError(f"depth {depth} exceeds the cap {cap}")
    t = Q(t)
    HNNData(n, t)
    a = default_a(n)
    a_inv = invert(a)
    moves = [identity(n)] + [m for k in _coset_moves(n, t) for m in (k, invert(k))]
    root = identity(n)
    root_code = coset_code(root, t)
    reps = {root_code: root}
    dist = {root_code: 0}
    parent_of = {root_code: None}
    edges: set = set()
    extra = 0
    queue = deque([root_code])
    while queue:
        code = queue.popleft()
        if dist[code] >= depth:
            continue
        g = reps[code]
        nbrs = [compose(g, a)] + [product(g, k, a_inv) for k in moves]
        seen_here = set()
        for h in nbrs:
            c = coset_code(h, t)
            if c == code or c in seen_here:
                continue
            seen_here.add(c)
            e = frozenset((code, c))
            if c not in reps:
                reps[c] = h
                dist[c] = dist[code] + 1
                parent_of[c] = code
                queue.append(c)
                edges.add(e)
            elif e not in edges:
                extra += 1
                edges.add(e)
    return TreeBall(t, depth, reps, dist, edges, extra)


def check_against_ball(ball: TreeBall) -> list[tuple]:
    """Vertices where the normal-form distance disagrees with the BFS depth."""
    bad = []
    for code, g in ball.reps.items():
        d = tree_distance(g, ball.t).distance
        if d != ball.dist[code]:
            bad.append((g, d, ball.dist[code]))
    return bad


# isometry type ----------------------------------------------------------------------------


def translation_length(g: PLMap, t, M: int = 6) -> int:
    """max(0, d(v0, g^2 v0) - d(v0, g v0)), checked against d(v0, g^m v0) for m <= M."""
    if M < 2:
        raise ValueError("M must be at least 2")
    d1 = tree_distance(g, t).distance
    d2 = tree_distance(power(g, 2), t).distance
    ell = max(0, d2 - d1)
    gm = identity(g.n)
    drift = []
    for m in range(1, M + 1):
        gm = compose(gm, g)
        drift.append(tree_distance(gm, t).distance - m * ell)
    if max(drift) - min(drift) > 2 * d1 + 2:
        raise TreeError(f"distances along powers do not grow linearly: {drift}")
    return ell


def isometry_type(g: PLMap, t) -> str:
    return "Loxodromic" if translation_length(g, t) > 0 else "Elliptic"


# Busemann estimate -----------------------------------------------------------------------


@dataclass(frozen=True)
class BusemannReport:
    values: tuple
    value: Optional[int]
    m0: Optional[int]
    ray_sign: int

    @property
    def stabilized(self) -> bool:
        return self.value is not None

    def as_dict(self) -> dict:
        return {"values": list(self.values), "value": self.value, "m0": self.m0, "ray_sign": self.ray_sign}


def _estimates(g: PLMap, t, m: int, sign: int) -> list[int]:
    n = g.n
    out = []
    for j in range(1, m + 1):
        x = a_power(n, sign * j)  # x_j = a^(+-j) K, at distance j from v0
        d_far = tree_distance(compose(invert(g), x), t).distance  # d(g v0, x_j)
        out.append(tree_distance(x, t).distance - d_far)
    return out


def _stable_tail(values: list[int], tail: int) -> tuple[Optional[int], Optional[int]]:
    if len(values) < tail:
        return None, None
    last = values[-1]
    if any(v != last for v in values[-tail:]):
        return None, None
    m0 = len(values)
    while m0 > 1 and values[m0 - 2] == last:
        m0 -= 1
    return last, m0


@lru_cache(maxsize=None)
def ray_direction(n: int, t) -> int:
    """Sign s such that the estimate along a^(s j) K tends to +1 for g = a."""
    for sign in (1, -1):
        value, _ = _stable_tail(_estimates(default_a(n), Q(t), 6, sign), 3)
        if value == 1:
            return sign
    raise TreeError("calibration found no ray where a has estimate +1")


def busemann_estimate(g: PLMap, t, m: int = 12, tail: int = 4) -> BusemannReport:
    """d(v0, x_j) - d(g v0, x_j) for j = 1..m along the calibrated ray."""
    if m < 1:
        raise ValueError("m must be positive")
    sign = ray_direction(g.n, Q(t))
    values = _estimates(g, t, m, sign)
    value, m0 = _stable_tail(values, min(tail, m))
    return BusemannReport(tuple(values), value, m0, sign)


__all__ = [name for name in dir() if not name.startswith("_")]
