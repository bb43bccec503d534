"""Symbolic descriptions of confining subsets of F_n' and their membership tests.

The stable letter is always a = a_0 from ``standard_generators(n)``, a one-bump
map on (0, r) with r = 1/n that pushes points of (0, r) towards r.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import TYPE_CHECKING, Optional, Union

from gmpy2 import mpq as Q

from .exactnum import in_nadic_ring
from .plmap import (
    PLMap,
    compose,
    default_a,
    evaluate,
    fixed_set,
    fixed_up_to,
    invert,
    orbit_point,
    power,
    preimage,
    support,
)

if TYPE_CHECKING:
    from .nonlamplike import TauSequence


class FamilyError(ValueError):
    pass


# stable letter helpers ------------------------------------------------------


_APOW: dict[tuple[int, int], PLMap] = {}


def a_power(n: int, k: int) -> PLMap:
    key = (n, k)
    if key not in _APOW:
        if k == 0:
            _APOW[key] = power(default_a(n), 0)
        elif k > 0:
            _APOW[key] = compose(a_power(n, k - 1), default_a(n))
        else:
            _APOW[key] = invert(a_power(n, -k))
    return _APOW[key]


def conj_a(g: PLMap, k: int) -> PLMap:
    """``g^(a^k) = a^-k g a^k``; moves supp(g) to supp(g).a^k."""
    if k == 0 or g.is_identity():
        return g
    return compose(compose(a_power(g.n, -k), g), a_power(g.n, k))


class Orbit:
    """Lazily extended backward orbit t_0 = t, t_-1, t_-2, ... under a."""

    _cache: dict = {}

    def __init__(self, n: int, t):
        self.n, self.t = n, Q(t)
        self.points = [self.t]

    @classmethod
    def of(cls, n: int, t) -> "Orbit":
        key = (n, Q(t))
        if key not in cls._cache:
            cls._cache[key] = cls(n, t)
        return cls._cache[key]

    def down(self, j: int) -> Q:
        """t_{-j} for j >= 0."""
        a = default_a(self.n)
        while len(self.points) <= j:
            self.points.append(preimage(a, self.points[-1]))
        return self.points[j]

    def at(self, k: int) -> Q:
        return self.down(-k) if k <= 0 else orbit_point(self.t, k, default_a(self.n))

    def above(self, eps):
        """Yield (k, t_k) for k = 0, -1, ... while t_k >= eps."""
        j = 0
        while True:
            p = self.down(j)
            if p < eps:
                return
            yield -j, p
            j += 1


def orbit_normal_form(n: int, t) -> tuple[Q, int]:
    """(representative, steps) with t = rep . a^steps and rep in [c, c.a), c = 1/n^2."""
    a = default_a(n)
    c = Q(1, n * n)
    ca = evaluate(a, c)
    x, steps = Q(t), 0
    while x < c:
        x = evaluate(a, x)
        steps -= 1
    while x >= ca:
        x = preimage(a, x)
        steps += 1
    return x, steps


def same_orbit(n: int, t, s) -> Optional[int]:
    """m with t = s . a^m, or None."""
    rt, kt = orbit_normal_form(n, t)
    rs, ks = orbit_normal_form(n, s)
    if rt != rs:
        return None
    return kt - ks


# index sets with a finite description ----------------------------------------


@dataclass(frozen=True)
class IndexSet:
    """A finite or cofinite subset of N = {1, 2, ...}."""

    items: frozenset
    cofinite: bool = False

    @staticmethod
    def finite(items) -> "IndexSet":
        return IndexSet(frozenset(items), False)

    @staticmethod
    def cofinite_set(excluded) -> "IndexSet":
        return IndexSet(frozenset(excluded), True)

    def __contains__(self, i: int) -> bool:
        return (i not in self.items) if self.cofinite else (i in self.items)

    def difference_is_finite(self, other: "IndexSet") -> bool:
        return not (self.cofinite and not other.cofinite)

    def difference_max(self, other: "IndexSet") -> Optional[int]:
        """max(self minus other) when finite, 0 if empty."""
        if not self.difference_is_finite(other):
            return None
        if self.cofinite:  # both cofinite: other.items minus self.items
            diff = other.items - self.items
        else:
            diff = {i for i in self.items if i not in other}
        return max(diff, default=0)

    def element_beyond(self, other: "IndexSet", bound: int) -> Optional[int]:
        """Some i > bound in self but not in other, if there is one."""
        limit = max([bound, *self.items, *other.items]) + 1
        for i in range(bound + 1, limit + 1):
            if i in self and i not in other:
                return i
        return None

    def __str__(self) -> str:
        body = ",".join(str(i) for i in sorted(self.items))
        return f"~{{{body}}}" if self.cofinite else f"{{{body}}}"


# family constructors ---------------------------------------------------------------


def _in_range(n: int, *params) -> None:
    r = Q(1, n)
    for p in params:
        if not 0 < Q(p) < r:
            raise FamilyError(f"parameter {p} is outside (0, {r})")


@dataclass(frozen=True)
class Full:
    n: int = 2


@dataclass(frozen=True)
class RigidStab:
    """Elements fixing [0, t] pointwise."""

    n: int
    t: Q

    def __post_init__(self):
        object.__setattr__(self, "t", Q(self.t))
        _in_range(self.n, self.t)


@dataclass(frozen=True)
class OpenRigidStab:
    """Elements fixing [0, t] and a neighbourhood of t."""

    n: int
    t: Q

    def __post_init__(self):
        object.__setattr__(self, "t", Q(self.t))
        _in_range(self.n, self.t)


@dataclass(frozen=True)
class OrbitFixator:
    """Elements fixing t_k = t.a^k for every k <= 0."""

    n: int
    t: Q

    def __post_init__(self):
        object.__setattr__(self, "t", Q(self.t))
        _in_range(self.n, self.t)


@dataclass(frozen=True)
class NbhdOrbitFixator:
    """Elements fixing a neighbourhood of every t_k, k <= 0."""

    n: int
    t: Q

    def __post_init__(self):
        object.__setattr__(self, "t", Q(self.t))
        _in_range(self.n, self.t)


@dataclass(frozen=True)
class LamplikeProduct:
    """Q_X: fixes a neighbourhood of each t_k and acts on (x_k, t_k) through the
    blocks (p_{i-1}, p_i).a^k with i in X and i > |k|.

    Cut points are p_0 = x and p_i = t - (t - x) / 2^i.
    """

    n: int
    t: Q
    x: Q
    X: IndexSet

    def __post_init__(self):
        object.__setattr__(self, "t", Q(self.t))
        object.__setattr__(self, "x", Q(self.x))
        _in_range(self.n, self.t, self.x)
        lower = preimage(default_a(self.n), self.t)
        if not lower < self.x < self.t:
            raise FamilyError(f"x must lie strictly between t.a^-1 = {lower} and t = {self.t}")

    def cut(self, i: int) -> Q:
        return self.t - (self.t - self.x) / Q(2) ** i


@dataclass(frozen=True)
class NonLamplike:
    """Q_S built from a tau sequence and the closure S~."""

    n: int
    S: frozenset
    tau1: Optional[Q] = None
    power: int = 32

    def __post_init__(self):
        object.__setattr__(self, "S", frozenset(self.S))
        tau1 = Q(1, self.n * self.n) if self.tau1 is None else Q(self.tau1)
        object.__setattr__(self, "tau1", tau1)
        _in_range(self.n, tau1)
        if not in_nadic_ring(tau1, self.n):
            raise FamilyError("tau_1 must be n-adic")


@dataclass(frozen=True)
class Conjugate:
    """F^(a^k)."""

    F: "Family"
    k: int

    @property
    def n(self) -> int:
        return self.F.n


@dataclass(frozen=True)
class Intersection:
    F1: "Family"
    F2: "Family"

    @property
    def n(self) -> int:
        return self.F1.n


@dataclass(frozen=True)
class SplitClosure:
    """F . F_n'[t, 1) for a global fixed point t of F."""

    F: "Family"
    t: Q

    def __post_init__(self):
        object.__setattr__(self, "t", Q(self.t))

    @property
    def n(self) -> int:
        return self.F.n


Family = Union[
    Full, RigidStab, OpenRigidStab, OrbitFixator, NbhdOrbitFixator,
    LamplikeProduct, NonLamplike, Conjugate, Intersection, SplitClosure,
]

SUBGROUP_KINDS = (Full, RigidStab, OpenRigidStab, OrbitFixator, NbhdOrbitFixator, LamplikeProduct)


def is_subgroup(F) -> bool:
    if isinstance(F, SUBGROUP_KINDS):
        return True
    if isinstance(F, (Conjugate, SplitClosure)):
        return is_subgroup(F.F)
    if isinstance(F, Intersection):
        return is_subgroup(F.F1) and is_subgroup(F.F2)
    return False


# tau sequences shared per parameter set ------------------------------------------


@lru_cache(maxsize=None)
def tau_for(n: int, tau1) -> "TauSequence":
    from .nonlamplike import TauSequence

    return TauSequence(n, tau1)


@lru_cache(maxsize=None)
def closure_for(S: frozenset, power: int):
    from .nonlamplike import Closure

    return Closure(S, power)


# membership -------------------------------------------------------------------


def member(g: PLMap, F) -> bool:
    """Exact dynamical membership of g (assumed in F_n') in the family F."""
    if g.n != F.n:
        raise FamilyError(f"element base {g.n} does not match family base {F.n}")
    return _member_below(g, F, None)


def _member_below(g: PLMap, F, u) -> bool:
    """Membership restricted to the conditions living in [0, u] (u = None: all)."""
    if g.is_identity():
        return True
    if isinstance(F, Full):
        return True
    if isinstance(F, RigidStab):
        top = F.t if u is None else min(F.t, u)
        return fixed_set(g).contains_interval(0, top)
    if isinstance(F, OpenRigidStab):
        if u is not None and u <= F.t:
            return fixed_set(g).contains_interval(0, u)
        return fixed_up_to(g) > F.t
    if isinstance(F, OrbitFixator):
        eps = fixed_up_to(g)
        for _, p in Orbit.of(F.n, F.t).above(eps):
            if u is not None and p > u:
                continue
            if evaluate(g, p) != p:
                return False
        return True
    if isinstance(F, NbhdOrbitFixator):
        eps = fixed_up_to(g)
        fs = fixed_set(g)
        for _, p in Orbit.of(F.n, F.t).above(eps):
            if u is not None and p > u:
                continue
            if u is not None and p == u:
                ok = any(lo < p <= hi for lo, hi in fs.intervals)
            else:
                ok = fs.interior_contains(p)
            if not ok:
                return False
        return True
    if isinstance(F, LamplikeProduct):
        return _lamplike_member(g, F, u)
    if isinstance(F, NonLamplike):
        if u is not None:
            raise FamilyError("split closures of Q_S are not supported: Q_S has no global fixed point")
        from .nonlamplike import qs_check

        return qs_check(g, closure_for(F.S, F.power), tau_for(F.n, F.tau1)).member
    if isinstance(F, Conjugate):
        v = None if u is None else orbit_point(u, -F.k, default_a(F.n))
        return _member_below(conj_a(g, -F.k), F.F, v)
    if isinstance(F, Intersection):
        return _member_below(g, F.F1, u) and _member_below(g, F.F2, u)
    if isinstance(F, SplitClosure):
        top = F.t if u is None else min(F.t, u)
        if evaluate(g, F.t) != F.t:
            return False
        return _member_below(g, F.F, top)
    raise FamilyError(f"unknown family {F!r}")


def _lamplike_member(g: PLMap, F: LamplikeProduct, u) -> bool:
    eps = fixed_up_to(g)
    fs = fixed_set(g)
    comps = support(g)
    orbit = Orbit.of(F.n, F.t)
    xorbit = Orbit.of(F.n, F.x)
    for k, tk in orbit.above(eps):
        xk = xorbit.at(k)
        if u is not None and xk >= u:
            continue
        if u is None or tk < u:
            if not fs.interior_contains(tk):
                return False
        elif tk == u and not any(lo < tk <= hi for lo, hi in fs.intervals):
            return False
        for c, d in comps:
            if d <= xk or c >= tk:
                continue
            if u is not None and c >= u:
                continue
            if c < xk or (u is not None and d > u):
                return False
            i = 1
            while Orbit.of(F.n, F.cut(i)).at(k) < d:
                i += 1
            if Orbit.of(F.n, F.cut(i - 1)).at(k) > c:
                return False
            if i not in F.X or i <= -k:
                return False
    return True


# symbolic thresholds ------------------------------------------------------------


def rigid_threshold(F) -> tuple[Q, bool]:
    """(theta, strict): RigidStab(u) is inside F iff u >= theta (u > theta when strict)."""
    if isinstance(F, Full):
        return Q(0), False
    if isinstance(F, (RigidStab, OrbitFixator)):
        return F.t, False
    if isinstance(F, (OpenRigidStab, NbhdOrbitFixator, LamplikeProduct)):
        return F.t, True
    if isinstance(F, NonLamplike):
        if not F.S:
            return Q(0), False
        return tau_for(F.n, F.tau1)(min(F.S)), False
    if isinstance(F, Conjugate):
        theta, strict = rigid_threshold(F.F)
        if theta == 0:
            return theta, strict
        return orbit_point(theta, F.k, default_a(F.n)), strict
    if isinstance(F, Intersection):
        t1, s1 = rigid_threshold(F.F1)
        t2, s2 = rigid_threshold(F.F2)
        if t1 == t2:
            return t1, s1 or s2
        return (t1, s1) if t1 > t2 else (t2, s2)
    if isinstance(F, SplitClosure):
        return F.t, False
    raise FamilyError(f"unknown family {F!r}")


def anchor(F) -> Q:
    """The base point used by largest-element queries."""
    if isinstance(F, (RigidStab, OpenRigidStab, OrbitFixator, NbhdOrbitFixator, LamplikeProduct, SplitClosure)):
        return F.t
    if isinstance(F, NonLamplike):
        return F.tau1
    if isinstance(F, Full):
        return Q(1, F.n * F.n)
    if isinstance(F, Conjugate):
        return orbit_point(anchor(F.F), F.k, default_a(F.n))
    if isinstance(F, Intersection):
        return anchor(F.F1)
    raise FamilyError(f"unknown family {F!r}")


# literal grammar ---------------------------------------------------------------
#
#   full | rigidstab:T | openrigidstab:T | orbitfix:T | nbhdorbitfix:T
#   lamplike:T,X,{1,2} | lamplike:T,X,~{3}     (~ marks a cofinite set)
#   nonlamplike:{3,5} | nonlamplike:{3,5}@TAU1
#   conj(F,K) | meet(F,F) | split(F,T)

_SIMPLE = {
    "rigidstab": RigidStab,
    "openrigidstab": OpenRigidStab,
    "orbitfix": OrbitFixator,
    "nbhdorbitfix": NbhdOrbitFixator,
}
_SIMPLE_NAMES = {v: k for k, v in _SIMPLE.items()}


class _Parser:
    def __init__(self, text: str, n: int):
        self.s = text.replace(" ", "")
        self.i = 0
        self.n = n

    def error(self, msg: str):
        from .exactnum import ParseError

        raise ParseError(f"{msg} at position {self.i} in {self.s!r}")

    def peek(self, tok: str) -> bool:
        return self.s.startswith(tok, self.i)

    def expect(self, tok: str) -> None:
        if not self.peek(tok):
            self.error(f"expected {tok!r}")
        self.i += len(tok)

    def word(self) -> str:
        j = self.i
        while j < len(self.s) and self.s[j].isalpha():
            j += 1
        if j == self.i:
            self.error("expected a constructor name")
        w, self.i = self.s[self.i:j], j
        return w

    def number(self) -> Q:
        from .exactnum import parse_rational

        j = self.i
        while j < len(self.s) and (self.s[j].isdigit() or self.s[j] in "-/^"):
            j += 1
        if j == self.i:
            self.error("expected a number")
        text, self.i = self.s[self.i:j], j
        return Q(parse_rational(text))

    def integer(self) -> int:
        v = self.number()
        if v.denominator != 1:
            self.error("expected an integer")
        return int(v)

    def intset(self) -> tuple[frozenset, bool]:
        cof = False
        if self.peek("~"):
            cof = True
            self.i += 1
        self.expect("{")
        items = []
        while not self.peek("}"):
            items.append(self.integer())
            if self.peek(","):
                self.i += 1
        self.expect("}")
        return frozenset(items), cof

    def family(self):
        name = self.word()
        n = self.n
        if name == "full":
            return Full(n)
        if name in _SIMPLE:
            self.expect(":")
            return _SIMPLE[name](n, self.number())
        if name == "lamplike":
            self.expect(":")
            t = self.number()
            self.expect(",")
            x = self.number()
            self.expect(",")
            items, cof = self.intset()
            return LamplikeProduct(n, t, x, IndexSet(items, cof))
        if name == "nonlamplike":
            self.expect(":")
            items, cof = self.intset()
            if cof:
                self.error("S must be finite")
            tau1 = None
            if self.peek("@"):
                self.i += 1
                tau1 = self.number()
            return NonLamplike(n, items, tau1)
        if name in ("conj", "meet", "split"):
            self.expect("(")
            inner = self.family()
            self.expect(",")
            if name == "conj":
                out = Conjugate(inner, self.integer())
            elif name == "meet":
                out = Intersection(inner, self.family())
            else:
                out = SplitClosure(inner, self.number())
            self.expect(")")
            return out
        self.error(f"unknown constructor {name!r}")


def parse_family(text: str, n: int = 2):
    p = _Parser(text, n)
    F = p.family()
    if p.i != len(p.s):
        p.error("trailing input")
    return F


def format_family(F) -> str:
    from .exactnum import format_rational

    r = format_rational
    if isinstance(F, Full):
        return "full"
    if type(F) in _SIMPLE_NAMES:
        return f"{_SIMPLE_NAMES[type(F)]}:{r(F.t)}"
    if isinstance(F, LamplikeProduct):
        return f"lamplike:{r(F.t)},{r(F.x)},{F.X}"
    if isinstance(F, NonLamplike):
        body = ",".join(str(s) for s in sorted(F.S))
        return f"nonlamplike:{{{body}}}@{r(F.tau1)}"
    if isinstance(F, Conjugate):
        return f"conj({format_family(F.F)},{F.k})"
    if isinstance(F, Intersection):
        return f"meet({format_family(F.F1)},{format_family(F.F2)})"
    if isinstance(F, SplitClosure):
        return f"split({format_family(F.F)},{r(F.t)})"
    raise FamilyError(f"unknown family {F!r}")
