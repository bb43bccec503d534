"""Confining subsets of F_n' with respect to chi_0: axioms, comparisons, witnesses.

Conventions: elements act on the right, ``g^h = h^-1 g h``, and the stable letter
is a = a_0 from ``standard_generators(n)``.  ``compare(F1, F2)`` answers whether
some conjugate ``F2^(a^k)`` sits inside ``F1`` and reports the least such k.
"""
from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

from gmpy2 import mpq as Q

from .exactnum import in_nadic_ring, nadic_between
from .families import (  # noqa: F401  (re-exported API)
    Conjugate,
    FamilyError,
    Full,
    Intersection,
    IndexSet,
    LamplikeProduct,
    NbhdOrbitFixator,
    NonLamplike,
    OpenRigidStab,
    Orbit,
    OrbitFixator,
    RigidStab,
    SplitClosure,
    a_power,
    anchor,
    closure_for,
    conj_a,
    format_family,
    is_subgroup,
    member,
    parse_family,
    rigid_threshold,
    same_orbit,
    tau_for,
)
from .plmap import (
    PLError,
    PLMap,
    commutator,
    compact_support,
    compose,
    default_a,
    evaluate,
    fixed_set,
    identity,
    interpolate,
    invert,
    make_bump,
    nadic_inner_window,
    orbit_point,
    preimage,
    product,
    random_commutator,
    standard_generators,
    support,
    transplant,
)


class BudgetExhausted(RuntimeError):
    pass


class ScenarioError(ValueError):
    pass


@dataclass(frozen=True)
class Budget:
    samples: int = 200
    k_max: int = 32
    seed: int = 0

    def as_dict(self) -> dict:
        return {"samples": self.samples, "k_max": self.k_max, "seed": self.seed}


@dataclass(frozen=True)
class CharVector:
    """Values of a character on a_0, ..., a_{n-1}."""

    values: tuple

    @staticmethod
    def chi0(n: int) -> "CharVector":
        return CharVector(tuple([1] + [0] * (n - 1)))

    @staticmethod
    def chi1(n: int) -> "CharVector":
        return CharVector(tuple([0] * (n - 1) + [1]))

    @property
    def n(self) -> int:
        return len(self.values)

    def nonzero(self) -> list[int]:
        return [i for i, v in enumerate(self.values) if v != 0]


# verdicts ---------------------------------------------------------------------


@dataclass
class Verdict:
    kind: str  # "dominates" | "refuted" | "inconclusive"
    k: Optional[int] = None
    witness: Optional[PLMap] = None
    k_max: Optional[int] = None
    exact: bool = False
    note: str = ""

    @staticmethod
    def dominates(k: int, exact: bool, note: str = "") -> "Verdict":
        return Verdict("dominates", k=k, exact=exact, note=note)

    @staticmethod
    def refuted(g: PLMap, k_max: int, note: str = "") -> "Verdict":
        return Verdict("refuted", witness=g, k_max=k_max, exact=True, note=note)

    @staticmethod
    def inconclusive(budget: Budget, note: str = "") -> "Verdict":
        return Verdict("inconclusive", k_max=budget.k_max, note=note)

    @property
    def is_dominates(self) -> bool:
        return self.kind == "dominates"

    @property
    def is_refuted(self) -> bool:
        return self.kind == "refuted"

    def __str__(self) -> str:
        if self.kind == "dominates":
            return f"Dominates({self.k})"
        if self.kind == "refuted":
            return f"Refuted(k_max={self.k_max})"
        return "Inconclusive"


def replay_refutation(v: Verdict, F1, F2) -> bool:
    """Check that the witness lies in F2^(a^k) for every k <= k_max but not in F1."""
    g = v.witness
    if g is None or member(g, F1):
        return False
    return all(member(conj_a(g, -k), F2) for k in range(v.k_max + 1))


# small constructions ------------------------------------------------------------


def nadic_window_around(point, lo, hi, n: int) -> tuple[Q, Q]:
    """An n-adic window [u, u + n^-j] with u < point < u + n^-j strictly inside (lo, hi)."""
    point, lo, hi = Q(point), Q(lo), Q(hi)
    if not lo < point < hi:
        raise PLError(f"{point} is not inside ({lo}, {hi})")
    w = Q(1)
    while True:
        u = (point // w) * w
        if u == point:
            u = point - w / n
        if lo < u and u + w < hi and u < point < u + w:
            return u, u + w
        w /= n


def commutator_search(n: int, lo, hi, accept: Callable[[PLMap], bool], depth: int = 3, around=None) -> PLMap:
    """First commutator of two bumps on n-adic windows in [lo, hi] passing ``accept``.

    With ``around`` the search starts from a window containing that point.
    """
    lo, hi = Q(lo), Q(hi)
    base = make_bump(n)
    if around is None:
        u0, v0 = nadic_inner_window(lo, hi, n)
    else:
        u0, v0 = nadic_window_around(around, lo, hi, n)
    for d1 in range(depth + 1):
        w1 = (v0 - u0) / Q(n) ** d1
        wins1 = [(u0 + i * w1, u0 + (i + 1) * w1) for i in range(n**d1)]
        for d2 in range(d1, depth + 2):
            w2 = (v0 - u0) / Q(n) ** d2
            wins2 = [(u0 + i * w2, u0 + (i + 1) * w2) for i in range(n**d2)]
            for W1 in wins1:
                b1 = transplant(base, W1)
                for W2 in wins2:
                    if W2 == W1 or W2[1] <= W1[0] or W2[0] >= W1[1]:
                        continue
                    b2 = transplant(base, W2)
                    for x in (b1, invert(b1)):
                        for y in (b2, invert(b2)):
                            g = commutator(x, y)
                            if not g.is_identity() and accept(g):
                                return g
    raise BudgetExhausted(f"no commutator in ({lo}, {hi}) passed the test")


def _power_window(base, need, room, n: int) -> Optional[Q]:
    """Least n^-j >= need (strictly > when equal is useless) that is <= room."""
    w = Q(1)
    while w / n > need:
        w /= n
    return w if need < w <= room else None


def transport(n: int, lo, hi, point, target, _depth: int = 0) -> PLMap:
    """Element of F_n' supported in (lo, hi) carrying ``point`` past ``target``.

    For n = 2 this is one interpolation.  Otherwise it is the commutator
    [b^m, h]: b is a bump on a window W holding point and target, b^-m drags the
    point past the target, and h (a power of a bump on a window U containing W)
    moves W off the new position so that b^m conjugated by h leaves it alone.
    """
    lo, hi, point, target = Q(lo), Q(hi), Q(point), Q(target)
    if not (lo < target < hi and lo < point < hi) or target == point:
        raise PLError("point and target must be distinct and inside (lo, hi)")
    down = target < point
    if n == 2:
        aim = nadic_between(lo, target, n) if down else nadic_between(target, hi, n)
        return push_element(n, lo, hi, [(point, aim)])
    if not down:
        # mirror x -> 1 - x, solve, mirror back
        from .plmap import alpha_conjugate

        g = transport(n, 1 - hi, 1 - lo, 1 - point, 1 - target)
        return alpha_conjugate(g)
    left = w = u0 = big = None
    for s in range(1, 16):
        # W = [left, left + w] starts just below the target; U = [u0, u0 + big] holds W
        left = nadic_between(target - (target - lo) / 2**s, target, n)
        w = _power_window(left, point - left, hi - left, n)
        if w is None:
            continue
        cand = w * n
        while cand <= hi - lo and big is None:
            a, b = max(lo, left + w - cand), min(left, hi - cand)
            if a < b or (a == b and in_nadic_ring(a, n)):
                u0 = a if a == b else nadic_between(a, b, n)
                if lo < u0 < left:
                    big = cand
            cand *= n
        if big is not None:
            break
    if big is None:
        if _depth >= 12:
            raise BudgetExhausted("no pair of nested windows fits inside (lo, hi)")
        # go halfway first
        mid = (point + target) / 2
        g1 = transport(n, lo, hi, point, mid, _depth + 1)
        g2 = transport(n, lo, hi, evaluate(g1, point), target, _depth + 1)
        return compose(g1, g2)
    W = (left, left + w)
    bump_w = transplant(make_bump(n), W)
    bump_u = transplant(make_bump(n), (u0, u0 + big))
    b, y = identity(n), point
    while not y < target:
        b = compose(b, bump_w)
        y = preimage(bump_w, y)
    h, edge = identity(n), left
    while edge < y:
        h = compose(h, bump_u)
        edge = evaluate(bump_u, edge)
    g = commutator(b, h)
    if not evaluate(g, point) < target:
        raise BudgetExhausted("commutator did not carry the point far enough")
    return g


def mover(point, lo, hi, n: int) -> PLMap:
    """An element of F_n' supported in (lo, hi) that moves ``point``.

    For n = 2 a transplanted bump suffices: it is compactly supported with
    trivial characters, hence lies in F_2'.  Otherwise a commutator is searched.
    """
    u, v = nadic_window_around(point, lo, hi, n)
    if n == 2:
        return transplant(make_bump(2), (u, v))
    p = Q(point)
    return commutator_search(n, lo, hi, lambda g: evaluate(g, p) != p, around=p)


def push_element(n: int, lo, hi, pairs) -> PLMap:
    """Element of F_2' fixing [0, lo] and [hi, 1] through the given n-adic pairs."""
    if n != 2:
        raise PLError("direct interpolation certifies F_n' membership only for n = 2")
    pts = [(Q(lo), Q(lo))] + [(Q(x), Q(y)) for x, y in pairs] + [(Q(hi), Q(hi))]
    return interpolate(n, pts)


# sampling -------------------------------------------------------------------------


def _window_commutator(rng: random.Random, n: int, lo, hi, shrink: bool = True) -> Optional[PLMap]:
    lo, hi = Q(lo), Q(hi)
    if hi <= lo:
        return None
    if shrink:
        pad = (hi - lo) / 8
        lo, hi = lo + pad, hi - pad
    window = nadic_inner_window(lo, hi, n)
    return random_commutator(rng, rng.randint(1, 2), n, window=window, depth=2)


def _gaps(F, rng: random.Random) -> list[tuple[Q, Q]]:
    """Intervals where elements supported inside tend to be members."""
    n = F.n
    one = Q(1)
    if isinstance(F, Full):
        return [(Q(0), one)]
    if isinstance(F, (RigidStab, OpenRigidStab)):
        return [(F.t, one)]
    if isinstance(F, (OrbitFixator, NbhdOrbitFixator)):
        orb = Orbit.of(n, F.t)
        return [(F.t, one)] + [(orb.at(k - 1), orb.at(k)) for k in range(0, -5, -1)]
    if isinstance(F, LamplikeProduct):
        orb, xorb = Orbit.of(n, F.t), Orbit.of(n, F.x)
        out = [(F.t, one)]
        for k in range(0, -4, -1):
            out.append((orb.at(k - 1), xorb.at(k)))
            for i in range(-k + 1, -k + 5):
                if i in F.X:
                    out.append((Orbit.of(n, F.cut(i - 1)).at(k), Orbit.of(n, F.cut(i)).at(k)))
        return out
    if isinstance(F, NonLamplike):
        tau = tau_for(n, F.tau1)
        out = [(tau.r, one)]
        for _ in range(6):
            j = rng.randint(1, 120)
            out.append((tau(j + 1), tau(j - 1)))
            out.append((tau(j + 1), tau(j)))
        return out
    return []


def _special(F, rng: random.Random) -> Optional[PLMap]:
    """Targeted candidates that exercise the defining conditions of F."""
    n = F.n
    if isinstance(F, NonLamplike):
        tau = tau_for(n, F.tau1)
        cl = closure_for(F.S, F.power)
        pool = cl.in_range(1, 200) or [1]
        j = rng.choice(pool) if rng.random() < 0.7 else rng.randint(1, 200)
        lo, hi = tau(j + 1), tau(j - 1)
        if n != 2:
            return mover(tau(j), lo, hi, n)
        frac = Q(rng.randint(1, 63), 64)
        target = lo + (hi - lo) * frac
        target = nadic_between(target - (hi - lo) / 256, target + (hi - lo) / 256, n)
        if target == tau(j):
            return None
        return push_element(n, lo, hi, [(tau(j), target)])
    if isinstance(F, OrbitFixator) and n == 2:
        orb = Orbit.of(n, F.t)
        k = -rng.randint(0, 4)
        return _nbhd_breaker(orb.at(k), orb.at(k + 1) if k < 0 else Q(1, n), n)
    return None


def _threshold_window(F) -> tuple[Q, Q]:
    theta, _ = rigid_threshold(F)
    return theta, Q(1)


def _adversarial_pairs(F: NonLamplike, limit: int = 400) -> list[tuple[PLMap, PLMap]]:
    """Pairs (g, h) of members whose product drags a constrained tau point far down.

    g pushes tau_m just above tau_{m+1}; h then drags that point to just above
    tau_c, where c is the next constrained index after m.
    """
    n = F.n
    if n != 2:
        return []
    tau = tau_for(n, F.tau1)
    closure = closure_for(F.S, F.power)
    constrained = closure.in_range(1, limit)
    out = []
    for m, c in zip(constrained, constrained[1:]):
        if m < 2:
            continue
        t_m, t_next, t_prev = tau(m), tau(m + 1), tau(m - 1)
        y = t_next + (t_m - t_next) / 64
        g = push_element(n, t_next, t_prev, [(t_m, y)])
        z = tau(c) + (tau(c - 1) - tau(c)) / 64
        h = push_element(n, tau(c), t_m, [(y, z)])
        out.append((g, h))
    return out


def sample_members(F, count: int, seed: int = 0) -> list[PLMap]:
    """Seeded members of F, each verified by ``member``."""
    rng = random.Random(f"members:{format_family(F)}:{seed}")
    return _sample(F, count, rng)


def _sample(F, count: int, rng: random.Random) -> list[PLMap]:
    n = F.n
    if isinstance(F, Conjugate):
        return [conj_a(g, F.k) for g in _sample(F.F, count, rng)]
    if isinstance(F, SplitClosure):
        base = _sample(F.F, count, rng)
        tops = _sample(RigidStab(n, F.t), count, rng) if F.t < Q(1, n) else [identity(n)] * count
        out = []
        for f, h in zip(base, tops):
            g = compose(f, h)
            if member(g, F):
                out.append(g)
        return out
    out: list[PLMap] = [identity(n)]
    gaps = _gaps(F, rng)
    if isinstance(F, Intersection):
        gaps = _gaps(F.F1, rng) + _gaps(F.F2, rng)
    theta_lo, theta_hi = _threshold_window(F)
    attempts = 0
    while len(out) < count and attempts < 20 * count:
        attempts += 1
        pieces = []
        for _ in range(rng.randint(1, 3)):
            if gaps and rng.random() < 0.8:
                lo, hi = rng.choice(gaps)
            else:
                lo, hi = theta_lo, theta_hi
            piece = _window_commutator(rng, n, lo, hi, shrink=rng.random() < 0.7)
            if piece is not None:
                pieces.append(piece)
        if not pieces:
            continue
        if rng.random() < 0.3:
            extra = _special(F, rng)
            if extra is not None:
                pieces.append(extra)
        g = product(*pieces)
        if member(g, F):
            out.append(g)
    return out


# axioms -----------------------------------------------------------------------------


_STAY_RULES = {
    Full: "F_n' is normalized by a",
    RigidStab: "the fixed interval [0, t] is carried to [0, t.a], which contains it",
    OpenRigidStab: "the fixed neighbourhood of [0, t] is carried to one of [0, t.a]",
    OrbitFixator: "the orbit points t_k, k <= 0, go to t_{k+1}; those with k + 1 <= 0 cover the orbit",
    NbhdOrbitFixator: "as for the orbit fixator, with neighbourhoods",
    LamplikeProduct: "a block at level k with index i > |k| moves to level k + 1 where i > |k + 1|",
    NonLamplike: "windows at tau_{2s} are carried to windows at tau_s and 2s lies in the closure",
}


@dataclass
class AxiomReport:
    family: str
    budget: Budget
    stay_ok: bool
    stay_counterexample: Optional[PLMap]
    stay_rule: str
    getin: list[tuple[PLMap, Optional[int]]]
    prod_k: Optional[int]
    prod_exact: bool
    prod_failures: dict = field(default_factory=dict)
    samples_used: int = 0
    inconclusive: bool = False

    @property
    def getin_ok(self) -> bool:
        return all(k is not None for _, k in self.getin)

    @property
    def passed(self) -> bool:
        return self.stay_ok and self.getin_ok and self.prod_k is not None

    def z0(self, n: int) -> tuple:
        """The product-axiom exponent as a vector over a_0, ..., a_{n-1}."""
        return (self.prod_k,) + (0,) * (n - 1)


def _least_getin(g: PLMap, F, k_max: int) -> Optional[int]:
    for k in range(k_max + 1):
        if member(conj_a(g, k), F):
            return k
    return None


def axiom_check(F, budget: Budget = Budget()) -> AxiomReport:
    n = F.n
    members = sample_members(F, budget.samples, budget.seed)
    rule = ""
    for kind, text in _STAY_RULES.items():
        if isinstance(F, kind):
            rule = text
    stay_bad = None
    for g in members:
        if not member(conj_a(g, 1), F):
            stay_bad = g
            break

    rng = random.Random(f"getin:{budget.seed}")
    getin = []
    for _ in range(max(1, budget.samples // 10)):
        # windows near 0 give elements that need many conjugations
        window = (Q(0), Q(1) / Q(n) ** rng.randint(0, 6))
        g = random_commutator(rng, rng.randint(1, 3), n, window=window)
        getin.append((g, _least_getin(g, F, budget.k_max)))

    failures: dict = {}
    if is_subgroup(F):
        prod_k, exact = 0, True
    else:
        pairs = list(zip(members[::2], members[1::2]))
        if isinstance(F, NonLamplike):
            pairs += _adversarial_pairs(F)
        prod_k, exact = None, False
        products = [(g, h, compose(g, h)) for g, h in pairs]
        for k in range(budget.k_max + 1):
            bad = next(((g, h) for g, h, gh in products if not member(conj_a(gh, k), F)), None)
            if bad is None:
                prod_k = k
                break
            failures[k] = bad
    return AxiomReport(
        family=format_family(F),
        budget=budget,
        stay_ok=stay_bad is None,
        stay_counterexample=stay_bad,
        stay_rule=rule,
        getin=getin,
        prod_k=prod_k,
        prod_exact=exact,
        prod_failures=failures,
        samples_used=len(members),
        inconclusive=prod_k is None or any(k is None for _, k in getin),
    )


# comparison ---------------------------------------------------------------------------


def _least_orbit_step(n: int, s, theta, strict: bool, k_max: int) -> Optional[int]:
    """Least k >= 0 with s.a^k >= theta (> when strict)."""
    a = default_a(n)
    x = Q(s)
    for k in range(k_max + 1):
        if x > theta or (x == theta and not strict):
            return k
        x = evaluate(a, x)
    return None


_RIGID_LIKE = (RigidStab, OpenRigidStab)
_ORBIT_LIKE = (OrbitFixator, NbhdOrbitFixator)


def _rigid_containment(F1, F2, budget: Budget) -> Verdict:
    """F2 is RigidStab(s) or OpenRigidStab(s): compare through the threshold of F1."""
    theta, strict = rigid_threshold(F1)
    s = F2.t
    # the open version is a union of RigidStab(u), u > s, so s = theta already suffices
    strict = strict and isinstance(F2, RigidStab)
    k = _least_orbit_step(F1.n, s, theta, strict, budget.k_max)
    if k is None:
        return Verdict.inconclusive(budget, "threshold not reached within k_max")
    return Verdict.dominates(k, exact=True, note="threshold rule")


def _orbit_gap(orb: Orbit, point, top_index: int, r) -> tuple[Q, Q]:
    """Consecutive orbit points (or the last one and r) around ``point``."""
    if point > orb.at(top_index):
        return orb.at(top_index), r
    j = top_index
    while orb.at(j - 1) >= point:
        j -= 1
    return orb.at(j - 1), orb.at(j)


def _nbhd_breaker(p, upper, n: int) -> Optional[PLMap]:
    """Element of F_2' supported in (p, upper] or around p that fixes p but no neighbourhood of it."""
    if n != 2:
        return None
    if in_nadic_ring(p, n):
        v = nadic_between(p, upper, n)
        w = nadic_between(p, v, n)
        return push_element(n, p, v, [(w, nadic_between(w, v, n))])
    from .plmap import rational_slope_fix_element

    u = nadic_between(p - (upper - p), p, n)
    v = nadic_between(p, upper, n)
    return rational_slope_fix_element(p, (u, v), n)


def _orbit_witness(n: int, s, k_max: int, point, break_nbhd: bool) -> Optional[PLMap]:
    """Element fixing neighbourhoods of s.a^i for i <= k_max, except that with
    ``break_nbhd`` the orbit point ``point`` is fixed without a neighbourhood;
    otherwise ``point`` (off the orbit) is moved."""
    orb = Orbit.of(n, s)
    r = Q(1, n)
    if not break_nbhd:
        lo, hi = _orbit_gap(orb, point, k_max, r)
        return mover(point, lo, hi, n)
    j = _index_of(orb, point)
    upper = orb.at(j + 1) if j < k_max else r
    return _nbhd_breaker(point, upper, n)


def _index_of(orb: Orbit, point) -> int:
    j = 0
    while orb.at(j) > point:
        j -= 1
    while orb.at(j) < point:
        j += 1
    return j


def _orbit_compare(F1, F2, budget: Budget) -> Verdict:
    n = F1.n
    m = same_orbit(n, F1.t, F2.t)  # F1.t = F2.t . a^m
    nbhd1 = isinstance(F1, NbhdOrbitFixator)
    nbhd2 = isinstance(F2, NbhdOrbitFixator)
    if m is not None and (nbhd2 or not nbhd1):
        k = max(0, m)
        return Verdict.dominates(k, exact=True, note="same orbit")
    break_nbhd = m is not None and m <= budget.k_max
    try:
        g = _orbit_witness(n, F2.t, budget.k_max, F1.t, break_nbhd)
    except (PLError, BudgetExhausted) as exc:
        return Verdict.inconclusive(budget, f"witness construction failed: {exc}")
    if g is None:
        return Verdict.inconclusive(budget, "no witness construction for this base")
    v = Verdict.refuted(g, budget.k_max, "orbit rule")
    if not replay_refutation(v, F1, F2):
        return Verdict.inconclusive(budget, "orbit witness failed to replay")
    return v


def _lamplike_compare(F1: LamplikeProduct, F2: LamplikeProduct, budget: Budget) -> Verdict:
    diff = F2.X.difference_max(F1.X)
    if diff is not None:
        return Verdict.dominates(diff, exact=True, note="index sets differ in finitely many places")
    i = F2.X.element_beyond(F1.X, budget.k_max)
    n = F1.n
    lo, hi = F1.cut(i - 1), F1.cut(i)
    g = mover((lo + hi) / 2, lo, hi, n)
    v = Verdict.refuted(g, budget.k_max, f"block {i} is allowed on the right but not on the left")
    if not replay_refutation(v, F1, F2):
        return Verdict.inconclusive(budget, "lamplike witness failed to replay")
    return v


def _same_lamp_params(F1, F2) -> bool:
    return (F1.t, F1.x) == (F2.t, F2.x)


def compare(F1, F2, budget: Budget = Budget()) -> Verdict:
    """Least k with F2^(a^k) inside F1 (Dominates), a replayable refutation, or Inconclusive."""
    if F1.n != F2.n:
        raise FamilyError("families over different bases")
    if F1 == F2 or isinstance(F1, Full):
        return Verdict.dominates(0, exact=True, note="trivial")
    if isinstance(F2, Conjugate):
        inner = compare(F1, F2.F, Budget(budget.samples, budget.k_max + max(F2.k, 0), budget.seed))
        if inner.is_dominates:
            return Verdict.dominates(max(0, inner.k - F2.k), inner.exact, "conjugate on the right")
        if inner.is_refuted:
            v = Verdict.refuted(inner.witness, budget.k_max, inner.note)
            return v if replay_refutation(v, F1, F2) else Verdict.inconclusive(budget, "replay failed")
        return inner
    if isinstance(F1, Conjugate):
        inner = compare(F1.F, F2, Budget(budget.samples, budget.k_max - min(F1.k, 0), budget.seed))
        if inner.is_dominates:
            k = max(0, inner.k + F1.k)
            if k > budget.k_max:
                return Verdict.inconclusive(budget, f"needs k = {k}")
            return Verdict.dominates(k, inner.exact, "conjugate on the left")
        if inner.is_refuted:
            v = Verdict.refuted(conj_a(inner.witness, F1.k), budget.k_max, inner.note)
            return v if replay_refutation(v, F1, F2) else Verdict.inconclusive(budget, "replay failed")
        return inner
    if isinstance(F1, Intersection):
        v1, v2 = compare(F1.F1, F2, budget), compare(F1.F2, F2, budget)
        for v in (v1, v2):
            if v.is_refuted:
                return v if replay_refutation(v, F1, F2) else Verdict.inconclusive(budget, "replay failed")
        if v1.is_dominates and v2.is_dominates:
            return Verdict.dominates(max(v1.k, v2.k), v1.exact and v2.exact, "intersection on the left")
        return Verdict.inconclusive(budget, "one side inconclusive")
    if isinstance(F2, _RIGID_LIKE):
        return _rigid_containment(F1, F2, budget)
    if isinstance(F2, Full):
        return _sampled_compare(F1, F2, budget)
    if isinstance(F1, _ORBIT_LIKE) and isinstance(F2, _ORBIT_LIKE):
        return _orbit_compare(F1, F2, budget)
    if isinstance(F1, LamplikeProduct) and isinstance(F2, LamplikeProduct) and _same_lamp_params(F1, F2):
        return _lamplike_compare(F1, F2, budget)
    if isinstance(F1, NonLamplike) and isinstance(F2, NonLamplike) and (F1.tau1, F1.power) == (F2.tau1, F2.power):
        from .nonlamplike import qs_compare

        return qs_compare(F1.S, F2.S, budget, n=F1.n, tau1=F1.tau1, power=F1.power)
    if isinstance(F1, SplitClosure) and F1.F == F2:
        return Verdict.dominates(0, exact=True, note="a family sits inside its split closure")
    if isinstance(F2, SplitClosure) and F2.F == F1 and is_subgroup(F1):
        theta, strict = rigid_threshold(F1)
        k = _least_orbit_step(F1.n, F2.t, theta, strict, budget.k_max)
        if k is not None:
            return Verdict.dominates(k, exact=True, note="split closure of a subgroup")
    return _sampled_compare(F1, F2, budget)


def _sampled_compare(F1, F2, budget: Budget) -> Verdict:
    members = sample_members(F2, budget.samples, budget.seed)
    conj_cache = members
    for k in range(budget.k_max + 1):
        if all(member(g, F1) for g in conj_cache):
            return Verdict.dominates(k, exact=False, note="sampled")
        conj_cache = [conj_a(g, 1) for g in conj_cache]
    for g in members:
        w = conj_a(g, budget.k_max)
        v = Verdict.refuted(w, budget.k_max, "sampled")
        if replay_refutation(v, F1, F2):
            return v
    return Verdict.inconclusive(budget, "sampling found no uniform k and no uniform witness")


def join(F1, F2):
    """Representative of the join of two classes."""
    return Intersection(F1, F2)


# fixed points, split closures, largest elements ---------------------------------------


@dataclass
class FixedPointReport:
    points: list
    intervals: list
    certified: bool
    complete: bool
    witnesses: dict = field(default_factory=dict)
    note: str = ""

    def contains(self, t) -> bool:
        t = Q(t)
        return t in self.points or any(lo <= t <= hi for lo, hi in self.intervals)


def global_fixed_points(F, k_min: int = -3, query: Sequence = ()) -> FixedPointReport:
    """Points of (0, r) fixed by every member, over the orbit window k_min..0.

    ``certified`` means each listed point is provably fixed; ``complete`` means
    nothing else in (0, r) is.  Query points not in the list get a moving member.
    """
    report = _fixed_points(F, k_min)
    for t in query:
        t = Q(t)
        if report.contains(t):
            continue
        g = moving_member(F, t)
        if g is not None:
            report.witnesses[t] = g
    return report


def _fixed_points(F, k_min: int) -> FixedPointReport:
    n = F.n
    if isinstance(F, Full):
        return FixedPointReport([], [], True, True, note="F_n' has no global fixed point in (0, 1)")
    if isinstance(F, NonLamplike):
        return FixedPointReport([], [], True, True, note="every point of (0, r) is moved by a member")
    if isinstance(F, RigidStab):
        return FixedPointReport([], [(Q(0), F.t)], True, True)
    if isinstance(F, OpenRigidStab):
        return FixedPointReport([], [(Q(0), F.t)], True, True, note="plus an unspecified neighbourhood of t")
    if isinstance(F, _ORBIT_LIKE):
        orb = Orbit.of(n, F.t)
        return FixedPointReport([orb.at(k) for k in range(0, k_min - 1, -1)], [], True, True)
    if isinstance(F, LamplikeProduct):
        orb, xorb = Orbit.of(n, F.t), Orbit.of(n, F.x)
        points, intervals = [], []
        i_top = max([-k_min, *F.X.items]) + 1
        for k in range(0, k_min - 1, -1):
            points += [orb.at(k), xorb.at(k)]
            for i in range(1, i_top + 1):
                lo, hi = Orbit.of(n, F.cut(i - 1)).at(k), Orbit.of(n, F.cut(i)).at(k)
                if i not in F.X or i <= -k:
                    intervals.append((lo, hi))
                else:
                    points.append(hi)
        return FixedPointReport(sorted(set(points)), sorted(intervals), True, False,
                                note=f"blocks listed up to index {i_top}")
    if isinstance(F, Conjugate):
        inner = _fixed_points(F.F, k_min - max(F.k, 0))
        a = default_a(n)
        move = lambda x: x if x == 0 else orbit_point(x, F.k, a)  # noqa: E731
        return FixedPointReport(sorted(move(p) for p in inner.points),
                                [(move(lo), move(hi)) for lo, hi in inner.intervals],
                                inner.certified, inner.complete, note=inner.note)
    if isinstance(F, Intersection):
        r1, r2 = _fixed_points(F.F1, k_min), _fixed_points(F.F2, k_min)
        return FixedPointReport(sorted(set(r1.points + r2.points)), sorted(r1.intervals + r2.intervals),
                                r1.certified and r2.certified, False,
                                note="union of the parts: a lower bound only")
    if isinstance(F, SplitClosure):
        inner = _fixed_points(F.F, k_min)
        pts = sorted({p for p in inner.points if p <= F.t} | {F.t})
        ivs = [(lo, min(hi, F.t)) for lo, hi in inner.intervals if lo <= F.t]
        return FixedPointReport(pts, ivs, inner.certified, inner.complete)
    raise FamilyError(f"unknown family {F!r}")


def moving_member(F, t) -> Optional[PLMap]:
    """A member of F moving t, or None when none was found."""
    n = F.n
    t = Q(t)
    if isinstance(F, NonLamplike):
        tau = tau_for(n, F.tau1)
        j = tau.index_at_or_below(t) if t < tau.r else 0
        if j and tau(j) == t:
            lo, hi = tau(j + 1), tau(j - 1)
        elif j:
            lo, hi = tau(j), tau(j - 1)
        else:
            return None
        g = mover(t, lo, hi, n)
        return g if member(g, F) else None
    theta, strict = rigid_threshold(F)
    if t > theta:
        g = mover(t, (theta + t) / 2, 1, n)
        return g if member(g, F) else None
    rng = random.Random(f"move:{t}")
    for g in _sample(F, 200, rng):
        if evaluate(g, t) != t:
            return g
    return None


def split_representative(F, t, k_min: int = -3):
    t = Q(t)
    report = global_fixed_points(F, k_min)
    if not (report.certified and report.contains(t)):
        raise FamilyError(f"{t} is not a certified global fixed point of {format_family(F)}")
    return SplitClosure(F, t)


def split_proof_exponent(F, t, budget: Budget = Budget()) -> int:
    """2k with k making (Q Q)^(a^k) inside Q and t.a^k above the rigid threshold."""
    rep = axiom_check(F, budget) if not is_subgroup(F) else None
    kp = 0 if rep is None else rep.prod_k
    theta, _ = rigid_threshold(F)
    kt = _least_orbit_step(F.n, t, theta, True, budget.k_max)
    if kp is None or kt is None:
        raise BudgetExhausted("exponent not found within k_max")
    return 2 * max(kp, kt)


@dataclass
class LargestReport:
    k: int
    t: Q
    threshold: Q
    strict: bool
    sampled_ok: bool


def largest_element_witness(F, budget: Budget = Budget(), t=None) -> LargestReport:
    """Least k with RigidStab(t.a^k) inside F; t defaults to the family's own base point."""
    t = anchor(F) if t is None else Q(t)
    theta, strict = rigid_threshold(F)
    k = _least_orbit_step(F.n, t, theta, strict, budget.k_max)
    if k is None:
        raise BudgetExhausted(f"t.a^k stays below {theta} for k <= {budget.k_max}")
    s = orbit_point(t, k, default_a(F.n))
    probe = sample_members(RigidStab(F.n, s), min(budget.samples, 50), budget.seed)
    return LargestReport(k, t, theta, strict, all(member(g, F) for g in probe))


# explicit factorizations ------------------------------------------------------------


@dataclass(frozen=True)
class TwoNonzero:
    i: int
    j: int
    f_prime: Optional[PLMap] = None


@dataclass(frozen=True)
class Middle:
    i: int
    q_l: PLMap
    x_l: Q
    q_r: PLMap
    x_r: Q
    f_prime: Optional[PLMap] = None


@dataclass(frozen=True)
class NegativeChi:
    q: PLMap
    x: Q


@dataclass
class Factorization:
    factors: list[tuple[PLMap, str]]

    def replay(self) -> PLMap:
        return product(*(g for g, _ in self.factors))

    def __len__(self) -> int:
        return len(self.factors)


def _support_bounds(f: PLMap) -> tuple[Q, Q]:
    if not compact_support(f):
        raise ScenarioError("f must be compactly supported")
    comps = support(f)
    if not comps:
        return Q(1, 2), Q(1, 2)
    return comps[0][0], comps[-1][1]


def _fixes(g: PLMap, lo, hi) -> bool:
    return fixed_set(g).contains_interval(lo, hi)


def emptiness_factorization(f: PLMap, scenario) -> Factorization:
    """Write f as a short product of elements from fixators and their conjugates."""
    n = f.n
    gens = standard_generators(n)
    eps, delta = _support_bounds(f)
    if f.is_identity():
        return Factorization([(f, "identity")])

    if isinstance(scenario, TwoNonzero):
        i, j = sorted((scenario.i, scenario.j))
        li, ri = gens.supports[i]
        lj, rj = gens.supports[j]
        if eps > ri:
            return Factorization([(f, f"Fix(I_{i})")])
        fp = scenario.f_prime
        if fp is None:
            try:
                fp = transport(n, 0, lj, eps, ri)
            except BudgetExhausted:
                raise ScenarioError("no f' found: supply one in the scenario") from None
        if not _fixes(fp, lj, rj):
            raise ScenarioError(f"f' must fix I_{j}")
        if not evaluate(fp, eps) > ri:
            raise ScenarioError(f"f' must push {eps} above r_{i}")
        h = conj(f, fp)
        return Factorization([(fp, f"Fix(I_{j})"), (h, f"Fix(I_{i})"), (invert(fp), f"Fix(I_{j})")])

    if isinstance(scenario, Middle):
        i = scenario.i
        if not 0 < i < n - 1:
            raise ScenarioError("the middle case needs 0 < i < n - 1")
        a = gens[i]
        lo, hi = gens.supports[i]
        q_l, q_r = scenario.q_l, scenario.q_r
        x_l, x_r = Q(scenario.x_l), Q(scenario.x_r)
        if not (lo < x_l < hi and evaluate(q_l, x_l) < lo):
            raise ScenarioError("q_l must carry x_l in I below its left end")
        if not (lo < x_r < hi and evaluate(q_r, x_r) > hi):
            raise ScenarioError("q_r must carry x_r in I above its right end")
        fix_tag = f"Fix(I_{i})"
        if delta <= lo:
            return Factorization([(f, fix_tag)])
        if delta < hi:
            k = _steps_below(a, delta, x_l)
            c = compose(a_i_power(a, -k), q_l)
            h = conj(f, c)
            if not _fixes(h, lo, hi):
                raise ScenarioError("conjugated element does not fix I")
            ak = a_i_power(a, k)
            return Factorization([
                (conj(q_l, ak), f"Q^(a_{i}^{k})"),
                (conj(h, ak), f"{fix_tag}^(a_{i}^{k})"),
                (conj(invert(q_l), ak), f"Q^(a_{i}^{k})"),
            ])
        target = evaluate(q_r, x_r)
        fp = scenario.f_prime
        if fp is None:
            if delta < target:
                fp = identity(n)
            else:
                try:
                    fp = transport(n, hi, 1, delta, target)
                except BudgetExhausted:
                    raise ScenarioError("no f' found: supply one in the scenario") from None
        if not _fixes(fp, lo, hi) or not evaluate(fp, delta) < target:
            raise ScenarioError("f' must fix I and bring delta below x_r.q_r")
        d2 = preimage(q_r, evaluate(fp, delta))
        k = _steps_below(a, d2, x_l)
        c = product(fp, invert(q_r), a_i_power(a, -k), q_l)
        h = conj(f, c)
        if not _fixes(h, lo, hi):
            raise ScenarioError("conjugated element does not fix I")
        ak = a_i_power(a, k)
        return Factorization([
            (fp, fix_tag),
            (invert(q_r), "Q"),
            (conj(q_l, ak), f"Q^(a_{i}^{k})"),
            (conj(h, ak), f"{fix_tag}^(a_{i}^{k})"),
            (conj(invert(q_l), ak), f"Q^(a_{i}^{k})"),
            (q_r, "Q"),
            (invert(fp), fix_tag),
        ])

    if isinstance(scenario, NegativeChi):
        a = gens[0]
        r0 = gens.supports[0][1]
        q, x = scenario.q, Q(scenario.x)
        if not (0 < x < r0 and evaluate(q, x) > r0):
            raise ScenarioError("q must carry x in (0, r_0) above r_0")
        k = 0
        while not eps > (orbit_point(x, -k, a)):
            k += 1
        # eps.a^k > x
        ak = a_i_power(a, k)
        h = conj(f, compose(ak, q))
        if not _fixes(h, 0, r0):
            raise ScenarioError("conjugated element does not fix [0, r_0]")
        am = a_i_power(a, -k)
        return Factorization([
            (conj(q, am), f"Q^(a_0^-{k})"),
            (conj(h, am), f"F_n'[r_0,1)^(a_0^-{k})"),
            (conj(invert(q), am), f"Q^(a_0^-{k})"),
        ])
    raise ScenarioError(f"unknown scenario {scenario!r}")


def conj(g: PLMap, h: PLMap) -> PLMap:
    return product(invert(h), g, h)


def a_i_power(a: PLMap, k: int) -> PLMap:
    from .plmap import power

    return power(a, k)


def _steps_below(a: PLMap, d, x) -> int:
    """Least k >= 0 with d.a^-k < x, for a pushing its support upward."""
    k = 0
    while not d < x:
        d = preimage(a, d)
        k += 1
        if k > 10_000:
            raise ScenarioError("the point does not descend below x")
    return k


# prime powers -------------------------------------------------------------------------


def _primes():
    found: list[int] = []
    c = 2
    while True:
        if all(c % p for p in itertools.takewhile(lambda p: p * p <= c, found)):
            found.append(c)
            yield c
        c += 1


def prime_power_embedding(X, N_max: int) -> set[int]:
    """All p_i^k <= N_max with i in X, where p_1 = 2, p_2 = 3, ..."""
    X = set(X)
    out: set[int] = set()
    if not X:
        return out
    last = max(X)
    for idx, p in enumerate(_primes(), start=1):
        if p > N_max or idx > last:
            break
        if idx in X:
            q = p
            while q <= N_max:
                out.add(q)
                q *= p
    return out
