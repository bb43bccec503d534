"""Lamplighter groups Gamma wr Z, their sigma-confining subsets, and the slope map xi^t.

An element is a pair (lamps, shift) with lamps a finitely supported map Z -> Gamma.
The shift sigma moves coordinate i to i + 1.  Families live inside L(Gamma), the
shift-zero part.  ``lamp_compare(F1, F2)`` reports the least k >= 0 with
sigma^k(F2) contained in F1, mirroring ``confining.compare``.
"""
from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from typing import Any, Optional

from gmpy2 import mpq as Q

from .confining import Budget, Verdict, conj_a, nadic_window_around
from .exactnum import log_n
from .families import IndexSet
from .plmap import (
    PLError,
    PLMap,
    compose,
    default_a,
    evaluate,
    fix_classification,
    fixed_set,
    fixed_up_to,
    identity,
    invert,
    power,
    preimage,
    random_commutator,
    rational_slope_fix_element,
    slope_right,
)


class LampError(ValueError):
    pass


# lamp groups ---------------------------------------------------------------------


class LampGroup:
    """Interface for the lamp group Gamma.  Elements must be hashable values."""

    name = "abstract"

    def identity(self) -> Any:
        raise NotImplementedError

    def multiply(self, x, y):
        raise NotImplementedError

    def invert(self, x):
        raise NotImplementedError

    def word_length(self, x) -> Optional[int]:
        return None

    def sample(self, rng: random.Random):
        raise NotImplementedError

    def sample_ball(self, rng: random.Random, radius: int):
        raise LampError(f"{self.name} has no word metric")

    def to_json(self, x):
        raise NotImplementedError

    def from_json(self, payload):
        raise NotImplementedError

    def is_identity(self, x) -> bool:
        return x == self.identity()


@dataclass(frozen=True)
class IntLamp(LampGroup):
    """Gamma = Z with generator 1; word length |m|."""

    name = "int"

    def identity(self):
        return 0

    def multiply(self, x, y):
        return x + y

    def invert(self, x):
        return -x

    def word_length(self, x):
        return abs(x)

    def sample(self, rng):
        return rng.randint(-9, 9)

    def sample_ball(self, rng, radius):
        if rng.random() < 0.3:
            return rng.choice((-radius, radius))
        return rng.randint(-radius, radius)

    def to_json(self, x):
        return int(x)

    def from_json(self, payload):
        if not isinstance(payload, int):
            raise LampError(f"int lamp expects an integer, got {payload!r}")
        return payload


def fa_vector(coeffs: dict) -> tuple:
    """Normalized free-abelian element: sorted (index, coefficient) pairs, zeros dropped."""
    for i in coeffs:
        if i < 1:
            raise LampError(f"free-abelian indices start at 1, got {i}")
    return tuple(sorted((i, c) for i, c in coeffs.items() if c != 0))


def fa_project(x: tuple, lo: int) -> tuple:
    """The retraction killing every index below ``lo``."""
    return tuple((i, c) for i, c in x if i >= lo)


def fa_basis(i: int, c: int = 1) -> tuple:
    return fa_vector({i: c})


@dataclass(frozen=True)
class FreeAbelianLamp(LampGroup):
    """Gamma = direct sum of copies H_1, H_2, ... of Z; word length sum |c_i|."""

    name = "freeabelian"

    def identity(self):
        return ()

    def multiply(self, x, y):
        acc = dict(x)
        for i, c in y:
            acc[i] = acc.get(i, 0) + c
        return fa_vector(acc)

    def invert(self, x):
        return tuple((i, -c) for i, c in x)

    def word_length(self, x):
        return sum(abs(c) for _, c in x)

    def sample(self, rng):
        return fa_vector({rng.randint(1, 6): rng.randint(-3, 3) for _ in range(rng.randint(0, 3))})

    def sample_ball(self, rng, radius):
        left = radius if rng.random() < 0.3 else rng.randint(0, radius)
        acc: dict = {}
        while left > 0:
            step = rng.randint(1, left)
            i = rng.randint(1, 4)
            acc[i] = acc.get(i, 0) + rng.choice((-1, 1)) * step
            left -= step
        x = fa_vector(acc)
        return x

    def to_json(self, x):
        return {str(i): c for i, c in x}

    def from_json(self, payload):
        if not isinstance(payload, dict):
            raise LampError(f"free-abelian lamp expects an object, got {payload!r}")
        try:
            return fa_vector({int(k): int(v) for k, v in payload.items()})
        except (TypeError, ValueError) as err:
            raise LampError(f"bad free-abelian lamp {payload!r}: {err}") from None


@dataclass(frozen=True)
class FnWindowLamp(LampGroup):
    """Elements of F_n supported in one n-adic window, a desk-scale compactly supported lamp."""

    n: int = 2
    lo: Any = Q(1, 4)
    hi: Any = Q(3, 4)
    name = "fnwindow"

    def identity(self):
        return identity(self.n)

    def _check(self, g: PLMap) -> PLMap:
        if g.n != self.n or not fixed_set(g).contains_interval(0, self.lo) or not fixed_set(g).contains_interval(self.hi, 1):
            raise LampError(f"lamp is not supported in [{self.lo}, {self.hi}]")
        return g

    def multiply(self, x, y):
        return compose(x, y)

    def invert(self, x):
        return invert(x)

    def sample(self, rng):
        return random_commutator(rng, rng.randint(1, 2), self.n, window=(Q(self.lo), Q(self.hi)))

    def to_json(self, x):
        from .serial import element_to_json

        return element_to_json(x)

    def from_json(self, payload):
        from .serial import element_from_json

        return self._check(element_from_json(payload))


# elements ----------------------------------------------------------------------------


@dataclass(frozen=True)
class LampElt:
    group: LampGroup
    lamps: tuple = ()  # sorted (index, lamp) pairs with non-identity lamps
    shift: int = 0

    def coord(self, i: int):
        for j, x in self.lamps:
            if j == i:
                return x
        return self.group.identity()

    def indices(self) -> list[int]:
        return [j for j, _ in self.lamps]

    def __str__(self) -> str:
        body = ", ".join(f"{i}: {x}" for i, x in self.lamps)
        return f"({{{body}}}, z^{self.shift})"


def lamp_elt(group: LampGroup, lamps: Optional[dict] = None, shift: int = 0) -> LampElt:
    lamps = lamps or {}
    items = tuple(sorted((int(i), x) for i, x in lamps.items() if not group.is_identity(x)))
    return LampElt(group, items, int(shift))


def delta(group: LampGroup, i: int, x) -> LampElt:
    """The element with the single lamp x at coordinate i."""
    return lamp_elt(group, {i: x})


def lamp_identity(group: LampGroup) -> LampElt:
    return LampElt(group)


def _same_group(u: LampElt, v: LampElt) -> None:
    if u.group != v.group:
        raise LampError(f"lamp groups differ: {u.group.name} and {v.group.name}")


def lamp_shift(u: LampElt, k: int) -> LampElt:
    """sigma^k applied to the lamps (conjugation by z^k), shift field kept."""
    return LampElt(u.group, tuple((i + k, x) for i, x in u.lamps), u.shift)


def lamp_mul(u: LampElt, v: LampElt) -> LampElt:
    """(f, s)(f', s') = (f . sigma^s(f'), s + s')."""
    _same_group(u, v)
    G = u.group
    acc = dict(u.lamps)
    for i, x in v.lamps:
        j = i + u.shift
        acc[j] = G.multiply(acc[j], x) if j in acc else x
    return lamp_elt(G, acc, u.shift + v.shift)


def lamp_inv(u: LampElt) -> LampElt:
    G = u.group
    return lamp_elt(G, {i - u.shift: G.invert(x) for i, x in u.lamps}, -u.shift)


def project_below(u: LampElt, c: int) -> LampElt:
    """Keep only the coordinates i < c."""
    return LampElt(u.group, tuple((i, x) for i, x in u.lamps if i < c), u.shift)


def project_from(u: LampElt, c: int) -> LampElt:
    return LampElt(u.group, tuple((i, x) for i, x in u.lamps if i >= c), u.shift)


def random_lamp(group: LampGroup, rng: random.Random, lo: int = -5, hi: int = 5) -> LampElt:
    return lamp_elt(group, {i: group.sample(rng) for i in range(lo, hi + 1) if rng.random() < 0.4})


# subgroups of Gamma ----------------------------------------------------------------------


@dataclass(frozen=True)
class Whole:
    def contains(self, x) -> bool:
        return True


@dataclass(frozen=True)
class Trivial:
    group: LampGroup

    def contains(self, x) -> bool:
        return self.group.is_identity(x)


@dataclass(frozen=True)
class Multiples:
    """d Z inside Z."""

    d: int

    def contains(self, x) -> bool:
        return x % self.d == 0 if self.d else x == 0


@dataclass(frozen=True)
class Span:
    """H_X: the free-abelian coordinates listed in X."""

    X: IndexSet

    def contains(self, x) -> bool:
        return all(i in self.X for i, _ in x)


def subgroup_le(H1, H2) -> bool:
    """Exact inclusion H1 <= H2 for the supported subgroup kinds."""
    if isinstance(H2, Whole) or isinstance(H1, Trivial):
        return True
    if isinstance(H1, Whole):
        return _is_everything(H2)
    if isinstance(H2, Trivial):
        return isinstance(H1, (Multiples, Span)) and _is_zero(H1)
    if isinstance(H1, Multiples) and isinstance(H2, Multiples):
        if H1.d == 0:
            return True
        return H2.d != 0 and H1.d % H2.d == 0
    if isinstance(H1, Span) and isinstance(H2, Span):
        return H1.X.difference_max(H2.X) == 0  # indices start at 1, so 0 means empty
    raise LampError(f"cannot compare subgroups {H1} and {H2}")


def _is_everything(H) -> bool:
    if isinstance(H, Multiples):
        return H.d == 1
    return isinstance(H, Span) and H.X.cofinite and not H.X.items


def _is_zero(H) -> bool:
    if isinstance(H, Multiples):
        return H.d == 0
    return not H.X.cofinite and not H.X.items


def subgroup_witness(H1, H2, group: LampGroup):
    """An element of H1 outside H2, or None when H1 <= H2."""
    if subgroup_le(H1, H2):
        return None
    if isinstance(H1, Multiples) or (isinstance(H1, Whole) and isinstance(group, IntLamp)):
        d = H1.d if isinstance(H1, Multiples) else 1
        return d
    if isinstance(H1, Span) or (isinstance(H1, Whole) and isinstance(group, FreeAbelianLamp)):
        X = H1.X if isinstance(H1, Span) else IndexSet((), cofinite=True)
        Y = H2.X if isinstance(H2, Span) else IndexSet((), cofinite=False)
        i = X.element_beyond(Y, 0)
        return fa_basis(i)
    for _ in range(200):
        x = group.sample(random.Random(0))
        if not H2.contains(x):
            return x
    raise LampError("no witness found")


def _sample_in(H, group: LampGroup, rng: random.Random):
    if isinstance(H, Whole):
        return group.sample(rng)
    if isinstance(H, Trivial):
        return group.identity()
    if isinstance(H, Multiples):
        return H.d * rng.randint(-4, 4)
    if isinstance(H, Span):
        picks = [i for i in range(1, 9) if i in H.X]
        return fa_vector({rng.choice(picks): rng.randint(-3, 3)}) if picks else ()
    raise LampError(f"cannot sample {H}")


# families -----------------------------------------------------------------------------


@dataclass(frozen=True)
class FullL:
    group: LampGroup


@dataclass(frozen=True)
class SubgroupFamily:
    """Q_H: lamps in H at negative coordinates, anything at the others."""

    group: LampGroup
    H: Any


@dataclass(frozen=True)
class Balls:
    """Coordinate i >= 0 in the ball of radius 2^i, negative coordinates trivial."""

    group: LampGroup


@dataclass(frozen=True)
class Machado:
    """Over Gamma = Z: coordinate i < 0 in A_i = {m : |m c sqrt2| mod 1 < 2^i}."""

    c: int = 1
    group: LampGroup = field(default_factory=IntLamp)

    def __post_init__(self):
        if self.c < 1:
            raise LampError("the multiplier c must be a positive integer")


@dataclass(frozen=True)
class NonSplit:
    """Over the free-abelian lamp: coordinate -n equals coordinate -1 with H_1..H_{n-1} killed."""

    group: LampGroup = field(default_factory=FreeAbelianLamp)


@dataclass(frozen=True)
class SplitClosureL:
    F: Any

    @property
    def group(self):
        return self.F.group


@dataclass(frozen=True)
class ShiftConjugate:
    """sigma^k(F)."""

    F: Any
    k: int

    @property
    def group(self):
        return self.F.group


@dataclass(frozen=True)
class IntersectionL:
    F1: Any
    F2: Any

    @property
    def group(self):
        return self.F1.group


# Machado membership by integer comparisons ----------------------------------------


def machado_in_A(m: int, c: int, i: int) -> bool:
    """Whether the distance from m c sqrt2 to Z is below 2^i."""
    if i >= 0 or m == 0:
        return True
    e = -i
    x2 = 2 * (m * c) ** 2
    fl = math.isqrt(x2)  # m c sqrt2 is irrational, so fl < x < fl + 1
    scale2 = 4**e * x2
    return scale2 < (2**e * fl + 1) ** 2 or scale2 > (2**e * (fl + 1) - 1) ** 2


def machado_escape(m: int, c: int, i: int, cap: int = 1 << 20) -> int:
    """Least j >= 1 with j m outside A_i."""
    if m == 0:
        raise LampError("the identity never escapes")
    for j in range(1, cap + 1):
        if not machado_in_A(j * m, c, i):
            return j
    raise LampError(f"no escaping multiple of {m} below {cap}")


def machado_member_escape(u: "LampElt", c: int) -> Optional[int]:
    """Least j >= 1 with u^j outside the Machado family, or None if no power leaves it.

    A_{-1} is all of Z, so lamps at coordinate -1 never force an escape.
    """
    js = [machado_escape(x, c, i) for i, x in u.lamps if i <= -2]
    return min(js) if js else None


# membership ---------------------------------------------------------------------------


def _require_group(u: LampElt, F) -> None:
    if u.group != F.group:
        raise LampError(f"lamp groups differ: {u.group.name} and {F.group.name}")


def lamp_member(u: LampElt, F) -> bool:
    _require_group(u, F)
    if u.shift != 0:
        raise LampError("families live in L(Gamma): the shift must be 0")
    return _member(u, F)


def _member(u: LampElt, F) -> bool:
    G = u.group
    if isinstance(F, FullL):
        return True
    if isinstance(F, SubgroupFamily):
        return all(F.H.contains(x) for i, x in u.lamps if i < 0)
    if isinstance(F, Balls):
        return all(i >= 0 and G.word_length(x) <= 2**i for i, x in u.lamps)
    if isinstance(F, Machado):
        return all(machado_in_A(x, F.c, i) for i, x in u.lamps)
    if isinstance(F, NonSplit):
        return _nonsplit_below(u, 0)
    if isinstance(F, ShiftConjugate):
        return _member(lamp_shift(u, -F.k), F.F)
    if isinstance(F, IntersectionL):
        return _member(u, F.F1) and _member(u, F.F2)
    if isinstance(F, SplitClosureL):
        return _agrees_below(u, F.F, 0)
    raise LampError(f"unknown family {F!r}")


def _nonsplit_below(u: LampElt, c: int) -> bool:
    """Some member agrees with u at every coordinate below c (c <= 0)."""
    neg = {-i: x for i, x in u.lamps if i < c}
    if not neg:
        return True
    if c >= 0:
        top, first = u.coord(-1), 2
    else:
        first = 1 - c  # the coordinates -n with n >= first are prescribed
        top = u.coord(-first)
        if fa_project(top, first) != top:
            return False
        first += 1
    last = max(list(neg) + [i for i, _ in top] + [first])
    return all(u.coord(-n) == fa_project(top, n) for n in range(first, last + 1))


_PRODUCT_FAMILIES = (FullL, SubgroupFamily, Balls, Machado)


def _agrees_below(u: LampElt, F, c: int) -> bool:
    """Whether some member of F agrees with u on every coordinate below c.

    Exact for every constructor except an intersection of two non-product
    families, where the conjunction of the two answers is used.
    """
    if isinstance(F, _PRODUCT_FAMILIES):
        return _member(project_below(u, c), F)
    if isinstance(F, NonSplit):
        return _nonsplit_below(u, min(c, 0))
    if isinstance(F, ShiftConjugate):
        return _agrees_below(lamp_shift(u, -F.k), F.F, c - F.k)
    if isinstance(F, SplitClosureL):
        return _agrees_below(u, F.F, min(c, 0))
    if isinstance(F, IntersectionL):
        return _agrees_below(u, F.F1, c) and _agrees_below(u, F.F2, c)
    raise LampError(f"unknown family {F!r}")


def _contains_from(F, c: int) -> bool:
    """Whether F contains every element supported on coordinates >= c."""
    if isinstance(F, FullL):
        return True
    if isinstance(F, SubgroupFamily):
        return c >= 0 or isinstance(F.H, Whole)
    if isinstance(F, Balls):
        return False
    if isinstance(F, (Machado, NonSplit)):
        return c >= 0
    if isinstance(F, ShiftConjugate):
        return _contains_from(F.F, c - F.k)
    if isinstance(F, IntersectionL):
        return _contains_from(F.F1, c) and _contains_from(F.F2, c)
    if isinstance(F, SplitClosureL):
        return c >= 0 or _contains_from(F.F, c)
    raise LampError(f"unknown family {F!r}")


def lamp_is_subgroup(F) -> bool:
    if isinstance(F, (FullL, SubgroupFamily, NonSplit)):
        return True
    if isinstance(F, ShiftConjugate):
        return lamp_is_subgroup(F.F)
    if isinstance(F, IntersectionL):
        return lamp_is_subgroup(F.F1) and lamp_is_subgroup(F.F2)
    if isinstance(F, SplitClosureL):
        # a right-heavy subgroup already absorbs the nonnegative part
        return lamp_is_subgroup(F.F) and _contains_from(F.F, 0)
    return False


def proved_prod_exponent(F) -> Optional[int]:
    """The product-axiom exponent that follows from the construction, if known."""
    if lamp_is_subgroup(F):
        return 0
    if isinstance(F, (Balls, Machado)):
        return 1  # nested sets with X_i X_i inside X_{i+1}
    if isinstance(F, (ShiftConjugate, SplitClosureL)):
        return proved_prod_exponent(F.F)
    if isinstance(F, IntersectionL):
        k1, k2 = proved_prod_exponent(F.F1), proved_prod_exponent(F.F2)
        return None if k1 is None or k2 is None else max(k1, k2)
    return None


# sampling -------------------------------------------------------------------------------


def sample_lamp_members(F, count: int, seed: int = 0) -> list[LampElt]:
    rng = random.Random(f"lamp:{seed}")
    out = [lamp_identity(F.group)]
    tries = 0
    while len(out) < count and tries < 50 * count:
        tries += 1
        u = _sample(F, rng)
        if u is not None and _member(u, F):
            out.append(u)
    return out


def _sample(F, rng: random.Random) -> Optional[LampElt]:
    G = F.group
    if isinstance(F, FullL):
        return random_lamp(G, rng)
    if isinstance(F, SubgroupFamily):
        neg = {i: _sample_in(F.H, G, rng) for i in range(-5, 0) if rng.random() < 0.5}
        pos = {i: G.sample(rng) for i in range(0, 5) if rng.random() < 0.4}
        return lamp_elt(G, {**neg, **pos})
    if isinstance(F, Balls):
        return lamp_elt(G, {i: G.sample_ball(rng, 2**i) for i in range(0, 5) if rng.random() < 0.5})
    if isinstance(F, Machado):
        neg = {}
        for i in range(-6, 0):
            if rng.random() < 0.5:
                for _ in range(200):
                    m = rng.randint(-400, 400)
                    if machado_in_A(m, F.c, i):
                        neg[i] = m
                        break
        pos = {i: G.sample(rng) for i in range(0, 4) if rng.random() < 0.4}
        return lamp_elt(G, {**neg, **pos})
    if isinstance(F, NonSplit):
        top = G.sample(rng)
        last = max([i for i, _ in top] + [1])
        neg = {-n: fa_project(top, n) for n in range(2, last + 1)}
        neg[-1] = top
        pos = {i: G.sample(rng) for i in range(0, 4) if rng.random() < 0.4}
        return lamp_elt(G, {**neg, **pos})
    if isinstance(F, ShiftConjugate):
        u = _sample(F.F, rng)
        return None if u is None else lamp_shift(u, F.k)
    if isinstance(F, IntersectionL):
        return _sample(F.F1 if rng.random() < 0.5 else F.F2, rng)
    if isinstance(F, SplitClosureL):
        u = _sample(F.F, rng)
        h = lamp_elt(G, {i: G.sample(rng) for i in range(0, 4) if rng.random() < 0.5})
        return None if u is None else lamp_mul(u, h)
    raise LampError(f"unknown family {F!r}")


def _adversarial_pairs(F) -> list[tuple[LampElt, LampElt]]:
    """Pairs on the boundary of the product axiom at exponent 0."""
    G = F.group
    if isinstance(F, Balls) and G.word_length(G.sample_ball(random.Random(0), 1)) is not None:
        rng = random.Random(1)
        pairs = []
        for i in range(4):
            for _ in range(100):
                x = G.sample_ball(rng, 2**i)
                if G.word_length(x) == 2**i and G.word_length(G.multiply(x, x)) > 2**i:
                    u = delta(G, i, x)
                    pairs.append((u, u))
                    break
        return pairs
    if isinstance(F, Machado):
        pairs = []
        for i in range(-5, 0):
            for m in range(1, 5000):
                if machado_in_A(m, F.c, i) and not machado_in_A(2 * m, F.c, i):
                    u = delta(G, i, m)
                    pairs.append((u, u))
                    break
        return pairs
    if isinstance(F, (ShiftConjugate, SplitClosureL)):
        k = F.k if isinstance(F, ShiftConjugate) else 0
        return [(lamp_shift(u, k), lamp_shift(v, k)) for u, v in _adversarial_pairs(F.F)]
    if isinstance(F, IntersectionL):
        return [p for p in _adversarial_pairs(F.F1) + _adversarial_pairs(F.F2) if all(_member(w, F) for w in p)]
    return []


# axioms -----------------------------------------------------------------------------------


@dataclass
class LampAxiomReport:
    family: str
    budget: Budget
    stay_ok: bool
    stay_counterexample: Optional[LampElt]
    getin: list
    prod_k: Optional[int]
    prod_proved: Optional[int]
    prod_failures: dict = field(default_factory=dict)
    samples_used: int = 0

    @property
    def getin_ok(self) -> bool:
        return all(k is not None for _, k in self.getin)

    @property
    def prod_exact(self) -> bool:
        return self.prod_k is not None and self.prod_k == self.prod_proved

    @property
    def passed(self) -> bool:
        return self.stay_ok and self.getin_ok and self.prod_k is not None


def lamp_axiom_check(F, budget: Budget = Budget()) -> LampAxiomReport:
    members = sample_lamp_members(F, budget.samples, budget.seed)
    stay_bad = next((u for u in members if not _member(lamp_shift(u, 1), F)), None)

    rng = random.Random(f"lamp-getin:{budget.seed}")
    getin = []
    for _ in range(max(1, budget.samples // 10)):
        g = random_lamp(F.group, rng, -6, 3)
        k = next((k for k in range(budget.k_max + 1) if _member(lamp_shift(g, k), F)), None)
        getin.append((g, k))

    failures: dict = {}
    proved = proved_prod_exponent(F)
    if lamp_is_subgroup(F):
        prod_k = 0
    else:
        pairs = list(zip(members[::2], members[1::2])) + _adversarial_pairs(F)
        products = [(u, v, lamp_mul(u, v)) for u, v in pairs]
        prod_k = None
        for k in range(budget.k_max + 1):
            bad = next(((u, v) for u, v, w in products if not _member(lamp_shift(w, k), F)), None)
            if bad is None:
                prod_k = k
                break
            failures[k] = bad
    return LampAxiomReport(
        family=format_lamp_family(F),
        budget=budget,
        stay_ok=stay_bad is None,
        stay_counterexample=stay_bad,
        getin=getin,
        prod_k=prod_k,
        prod_proved=proved,
        prod_failures=failures,
        samples_used=len(members),
    )


# right-heavy and split ---------------------------------------------------------------------


def is_right_heavy(F, budget: Budget = Budget(samples=50)) -> bool:
    """Whether F contains L_{>=0}; decided by the constructors, confirmed on samples."""
    exact = _contains_from(F, 0)
    if exact:
        rng = random.Random(f"rh:{budget.seed}")
        for _ in range(budget.samples):
            h = random_lamp(F.group, rng, 0, 5)
            if not _member(h, F):
                raise LampError(f"right-heaviness rule contradicted by {h}")
    return exact


def is_split(F, budget: Budget = Budget(samples=100)) -> bool:
    """Q = Q . L_{>=0}, tested on sampled members and nonnegative factors."""
    if not is_right_heavy(F, budget):
        return False
    rng = random.Random(f"split:{budget.seed}")
    for u in sample_lamp_members(F, budget.samples, budget.seed):
        h = random_lamp(F.group, rng, 0, 5)
        if not _member(lamp_mul(u, h), F):
            return False
    return True


def lamp_split_representative(F) -> SplitClosureL:
    return SplitClosureL(F)


# comparison -------------------------------------------------------------------------------


def lamp_replay_refutation(v: Verdict, F1, F2) -> bool:
    """The witness lies in sigma^k(F2) for every k <= k_max but not in F1."""
    w = v.witness
    if w is None or _member(w, F1):
        return False
    return all(_member(lamp_shift(w, -k), F2) for k in range(v.k_max + 1))


def _non_member(F, k_max: int) -> Optional[LampElt]:
    """Some element outside F, found among single-lamp elements."""
    G = F.group
    rng = random.Random(7)
    for i in range(-k_max - 2, 3):
        for _ in range(20):
            u = delta(G, i, G.sample(rng))
            if not _member(u, F):
                return u
    return None


def lamp_compare(F1, F2, budget: Budget = Budget()) -> Verdict:
    _same = F1.group == F2.group
    if not _same:
        raise LampError("families over different lamp groups")
    K = budget.k_max
    if F1 == F2 or isinstance(F1, FullL):
        return Verdict.dominates(0, exact=True, note="trivial")
    if isinstance(F2, FullL):
        w = _non_member(F1, K)
        return Verdict.refuted(w, K, note="nothing proper holds a shift of L") if w else Verdict.inconclusive(budget)
    if isinstance(F1, SubgroupFamily) and isinstance(F2, SubgroupFamily):
        x = subgroup_witness(F2.H, F1.H, F1.group)
        if x is None:
            return Verdict.dominates(0, exact=True, note="H2 <= H1")
        return Verdict.refuted(delta(F1.group, -1, x), K, note="lamp of H2 outside H1")
    if isinstance(F2, ShiftConjugate) and F2.k >= 0:
        v = lamp_compare(F1, F2.F, budget)
        if v.is_dominates:
            return Verdict.dominates(max(0, v.k - F2.k), v.exact, v.note)
        if v.is_refuted and v.k_max >= F2.k:
            return Verdict.refuted(v.witness, v.k_max - F2.k, v.note)
        return Verdict.inconclusive(budget, v.note)
    if isinstance(F1, ShiftConjugate) and F1.k <= 0:
        v = lamp_compare(F1.F, F2, budget)
        if v.is_dominates:
            return Verdict.dominates(max(0, v.k + F1.k), v.exact, v.note)
        if v.is_refuted and v.k_max + F1.k >= 0:
            return Verdict.refuted(lamp_shift(v.witness, F1.k), v.k_max + F1.k, v.note)
        return Verdict.inconclusive(budget, v.note)
    if isinstance(F1, SplitClosureL) and F1.F == F2:
        return Verdict.dominates(0, exact=True, note="F lies in its split closure")
    if isinstance(F2, SplitClosureL) and F2.F == F1 and lamp_is_subgroup(F1) and _contains_from(F1, 0):
        return Verdict.dominates(0, exact=True, note="a right-heavy subgroup is its own split closure")
    if isinstance(F2, SplitClosureL) and F2.F == F1 and isinstance(F1, Machado):
        return Verdict.dominates(0, exact=True, note="a product over coordinates is already split")
    v = _unbounded_refutation(F1, F2, K)
    return v if v is not None else _sampled_compare(F1, F2, budget)


def _big_lamp(G: LampGroup, radius: int):
    """A lamp of word length above ``radius``."""
    if isinstance(G, IntLamp):
        return radius + 1
    if isinstance(G, FreeAbelianLamp):
        return fa_basis(1, radius + 1)
    return None


def _unbounded_refutation(F1, F2, K: int) -> Optional[Verdict]:
    """F2 holds every lamp far right while F1 bounds lamps at every coordinate."""
    if _contains_from(F1, 10**6) or not _contains_from(F2, 0):
        return None
    x = _big_lamp(F1.group, 2**K)
    if x is None:
        return None
    w = delta(F1.group, K, x)
    if _member(w, F1):
        return None
    return Verdict.refuted(w, K, note="F2 holds L_{>=0}; F1 bounds lamp lengths")


def _sampled_compare(F1, F2, budget: Budget) -> Verdict:
    members = sample_lamp_members(F2, budget.samples, budget.seed)
    members += [u for p in _adversarial_pairs(F2) for u in p]
    K = budget.k_max
    for k in range(K + 1):
        if all(_member(lamp_shift(u, k), F1) for u in members):
            return Verdict.dominates(k, exact=False, note="sampled")
    bad = next(u for u in members if not _member(lamp_shift(u, K), F1))
    return Verdict.refuted(lamp_shift(bad, K), K, note="sampled member shifted past k_max")


def split_proof_exponent(F) -> Optional[int]:
    """Exponent k with sigma^k(F . L_{>=0}) inside F from the product axiom."""
    if not _contains_from(F, 0):
        return None
    return proved_prod_exponent(F)


# non-split certificate ------------------------------------------------------------------------


@dataclass(frozen=True)
class NonSplitStep:
    p: int
    source: LampElt  # member of Q carrying e_{p+1} at coordinate -(p+1)
    lifted: LampElt  # the single lamp that every direct-sum R containing Q must hold
    witness: LampElt  # sigma^p(lifted), outside Q
    source_in_Q: bool
    witness_in_Q: bool

    @property
    def ok(self) -> bool:
        return self.source_in_Q and not self.witness_in_Q and lamp_shift(self.lifted, self.p) == self.witness


def nonsplit_certificate(p_max: int = 16) -> list[NonSplitStep]:
    """For every p <= p_max, sigma^p of a direct sum containing Q escapes Q."""
    F = NonSplit()
    G = F.group
    steps = []
    for p in range(p_max + 1):
        x = fa_basis(max(p + 1, 2))  # e_1 alone lies in Q, so p = 0 uses e_2
        source = lamp_elt(G, {-n: fa_project(x, n) for n in range(1, max(p + 1, 2) + 1)})
        lifted = delta(G, -(p + 1), x)
        witness = lamp_shift(lifted, p)
        steps.append(NonSplitStep(p, source, lifted, witness, _member(source, F), _member(witness, F)))
    return steps


# formatting ----------------------------------------------------------------------------------


def format_lamp_family(F) -> str:
    if isinstance(F, FullL):
        return "full"
    if isinstance(F, SubgroupFamily):
        H = F.H
        if isinstance(H, Whole):
            h = "whole"
        elif isinstance(H, Trivial):
            h = "trivial"
        elif isinstance(H, Multiples):
            h = f"mult:{H.d}"
        else:
            h = f"span:{H.X}"
        return f"qh({h})"
    if isinstance(F, Balls):
        return "balls"
    if isinstance(F, Machado):
        return f"machado:{F.c}"
    if isinstance(F, NonSplit):
        return "nonsplit"
    if isinstance(F, SplitClosureL):
        return f"split({format_lamp_family(F.F)})"
    if isinstance(F, ShiftConjugate):
        return f"shift({format_lamp_family(F.F)},{F.k})"
    if isinstance(F, IntersectionL):
        return f"meet({format_lamp_family(F.F1)},{format_lamp_family(F.F2)})"
    raise LampError(f"unknown family {F!r}")


_LAMP_GROUPS = {"int": IntLamp(), "freeabelian": FreeAbelianLamp()}


def lamp_group(name: str) -> LampGroup:
    try:
        return _LAMP_GROUPS[name]
    except KeyError:
        raise LampError(f"unknown lamp group {name!r}; expected one of {sorted(_LAMP_GROUPS)}") from None


def parse_lamp_family(text: str, group: LampGroup):
    """Inverse of ``format_lamp_family`` for a given lamp group."""
    text = text.strip()

    def split_args(body: str) -> list[str]:
        depth, start, parts = 0, 0, []
        for i, ch in enumerate(body):
            if ch in "({":
                depth += 1
            elif ch in ")}":
                depth -= 1
            elif ch == "," and depth == 0:
                parts.append(body[start:i])
                start = i + 1
        parts.append(body[start:])
        return [p.strip() for p in parts]

    def call(name: str) -> Optional[list[str]]:
        if text.startswith(name + "(") and text.endswith(")"):
            return split_args(text[len(name) + 1 : -1])
        return None

    if text == "full":
        return FullL(group)
    if text == "balls":
        return Balls(group)
    if text == "nonsplit":
        if not isinstance(group, FreeAbelianLamp):
            raise LampError("nonsplit needs the free-abelian lamp group")
        return NonSplit(group)
    if text.startswith("machado:"):
        if not isinstance(group, IntLamp):
            raise LampError("machado needs the integer lamp group")
        return Machado(int(text.split(":", 1)[1]), group)
    if (args := call("qh")) is not None:
        (h,) = args
        if h == "whole":
            H: Any = Whole()
        elif h == "trivial":
            H = Trivial(group)
        elif h.startswith("mult:"):
            H = Multiples(int(h[5:]))
        elif h.startswith("span:"):
            from .families import _Parser

            items, cof = _Parser(h[5:], 2).intset()
            H = Span(IndexSet(items, cof))
        else:
            raise LampError(f"unknown subgroup {h!r}")
        return SubgroupFamily(group, H)
    if (args := call("split")) is not None:
        return SplitClosureL(parse_lamp_family(args[0], group))
    if (args := call("shift")) is not None:
        return ShiftConjugate(parse_lamp_family(args[0], group), int(args[1]))
    if (args := call("meet")) is not None:
        return IntersectionL(parse_lamp_family(args[0], group), parse_lamp_family(args[1], group))
    raise LampError(f"cannot parse lamp family {text!r}")


# the slope map xi^t --------------------------------------------------------------------------


def _orbit_down(n: int, t, k: int) -> Q:
    a = default_a(n)
    x = Q(t)
    for _ in range(-k):
        x = preimage(a, x)
    return x


def xi_t(g: PLMap, t, k_min: Optional[int] = None) -> dict[int, int]:
    """Slopes of g at t_k = t.a^k for k <= 0, in units of n^o; zero coordinates dropped.

    Coordinates below ``k_min`` are not inspected; by default the scan stops
    once t_k is inside the neighbourhood of 0 that g fixes.
    """
    n = g.n
    t = Q(t)
    fc = fix_classification(t, n)
    if fc.kind == "nary":
        raise PLError(f"{t} is n-ary; the slope map needs a non-n-ary rational point")
    o = fc.order
    floor = fixed_up_to(g)
    if floor == 0:
        raise PLError("g moves points arbitrarily close to 0")
    out = {}
    a = default_a(n)
    x, k = t, 0
    while x > floor and (k_min is None or k >= k_min):
        if evaluate(g, x) != x:
            raise PLError(f"g does not fix t_{k} = {x}")
        e = log_n(slope_right(g, x), n)
        if e % o:
            raise PLError(f"slope n^{e} at t_{k} is not a power of n^{o}")
        if e:
            out[k] = e // o
        x, k = preimage(a, x), k - 1
    return out


def xi_shift(v: dict[int, int], k: int = 1) -> dict[int, int]:
    """sigma^k on a vector over k <= 0, truncating coordinates pushed above 0."""
    return {i + k: c for i, c in v.items() if i + k <= 0}


def section_base(t, n: int = 2) -> PLMap:
    """g_0: slope n^o at t, supported in a window whose a-translates are pairwise disjoint."""
    t = Q(t)
    a = default_a(n)
    lo = (preimage(a, t) + t) / 2
    u, v = nadic_window_around(t, lo, evaluate(a, lo), n)
    return rational_slope_fix_element(t, (u, v), n)


def xi_section(v: dict[int, int], t, n: int = 2) -> PLMap:
    """Product of (g_0^(a^k))^(v_k): a homomorphic section of xi_t."""
    if any(k > 0 for k in v):
        raise PLError("section vectors live on coordinates k <= 0")
    g0 = section_base(t, n)
    out = identity(n)
    for k, c in sorted(v.items()):
        if c:
            out = compose(out, power(conj_a(g0, k), c))
    return out


__all__ = [name for name in dir() if not name.startswith("_")]
