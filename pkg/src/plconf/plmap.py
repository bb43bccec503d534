"""Piecewise-linear homeomorphisms of [0, 1] with slopes in n^Z and breakpoints in Z[1/n].

Maps act on the right: ``x.g`` is ``evaluate(g, x)`` and ``compose(g, h)`` is
``x -> (x.g).h``. Conjugation is ``g^h = h^-1 g h``.
"""
from __future__ import annotations

import bisect
import math
import random
from dataclasses import dataclass
from fractions import Fraction

from gmpy2 import mpq as Q
from typing import Iterable, Optional, Sequence

from .exactnum import (
    BaseMismatch,
    NAdic,
    check_base,
    coprime_part,
    in_nadic_ring,
    is_nadic,
    log_n,
    mult_order,
    nadic_between,
    nadic_residue,
)

ZERO = Q(0)
ONE = Q(1)


class PLError(ValueError):
    pass


class InvalidPLMap(PLError):
    pass


class UndefinedCharacter(PLError):
    pass


class NoInterpolation(PLError):
    """No n-adic PL map joins the requested intervals (residue obstruction mod n - 1)."""


class ClosingSearchExhausted(PLError):
    """The closing search in ``rational_slope_fix_element`` found no admissible window."""


class PLMap:
    """An element of F_n (orientation +1) or of F_n^± (orientation -1)."""

    __slots__ = ("n", "xs", "ys", "orientation", "_slopes", "_hash")

    def __init__(self, n: int, xs: Sequence, ys: Sequence, orientation: int = 1, *, trusted: bool = False):
        self.n = n
        self.xs = tuple(Q(x) for x in xs)
        self.ys = tuple(Q(y) for y in ys)
        self.orientation = orientation
        self._slopes = None
        self._hash = None
        if not trusted:
            self._validate()
            canon = _merge(self.xs, self.ys)
            self.xs, self.ys = canon

    def _validate(self) -> None:
        check_base(self.n)
        xs, ys = self.xs, self.ys
        if self.orientation not in (1, -1):
            raise InvalidPLMap("orientation must be +1 or -1")
        if len(xs) != len(ys) or len(xs) < 2:
            raise InvalidPLMap("need at least two breakpoints with matching coordinates")
        if xs[0] != 0 or xs[-1] != 1:
            raise InvalidPLMap("breakpoint 0 must have x = 0 and the last x = 1")
        ends = (ZERO, ONE) if self.orientation == 1 else (ONE, ZERO)
        if (ys[0], ys[-1]) != ends:
            raise InvalidPLMap(f"endpoints must map to {ends[0]} and {ends[1]}")
        for i, (x, y) in enumerate(zip(xs, ys)):
            if not (in_nadic_ring(x, self.n) and in_nadic_ring(y, self.n)):
                raise InvalidPLMap(f"breakpoint {i} ({x}, {y}) is not in Z[1/{self.n}]")
        for i in range(len(xs) - 1):
            dx = xs[i + 1] - xs[i]
            dy = ys[i + 1] - ys[i]
            if dx <= 0:
                raise InvalidPLMap(f"breakpoint {i + 1}: x not strictly increasing")
            if dy * self.orientation <= 0:
                raise InvalidPLMap(f"breakpoint {i + 1}: y not strictly monotone")
            try:
                log_n(abs(dy / dx), self.n)
            except ValueError:
                raise InvalidPLMap(f"segment {i}: slope {dy / dx} is not ±{self.n}^k") from None

    # basic protocol -----------------------------------------------------

    @property
    def slopes(self) -> tuple[Fraction, ...]:
        if self._slopes is None:
            xs, ys = self.xs, self.ys
            self._slopes = tuple((ys[i + 1] - ys[i]) / (xs[i + 1] - xs[i]) for i in range(len(xs) - 1))
        return self._slopes

    @property
    def breakpoints(self) -> list[tuple[NAdic, NAdic]]:
        return [(is_nadic(x, self.n), is_nadic(y, self.n)) for x, y in zip(self.xs, self.ys)]

    def __eq__(self, other) -> bool:
        if not isinstance(other, PLMap):
            return NotImplemented
        return (self.n, self.orientation, self.xs, self.ys) == (other.n, other.orientation, other.xs, other.ys)

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((self.n, self.orientation, self.xs, self.ys))
        return self._hash

    def __repr__(self) -> str:
        pts = ", ".join(f"({x}, {y})" for x, y in zip(self.xs, self.ys))
        sign = "" if self.orientation == 1 else ", orientation=-1"
        return f"PLMap(n={self.n}{sign}: {pts})"

    def __call__(self, x) -> Fraction:
        return evaluate(self, x)

    def __mul__(self, other: "PLMap") -> "PLMap":
        return compose(self, other)

    def __invert__(self) -> "PLMap":
        return invert(self)

    def is_identity(self) -> bool:
        return len(self.xs) == 2 and self.orientation == 1


def _merge(xs: Sequence[Fraction], ys: Sequence[Fraction]) -> tuple[tuple, tuple]:
    """Drop breakpoints where the slope does not change."""
    if len(xs) <= 2:
        return tuple(xs), tuple(ys)
    out_x, out_y = [xs[0]], [ys[0]]
    prev_slope = (ys[1] - ys[0]) / (xs[1] - xs[0])
    for i in range(1, len(xs) - 1):
        slope = (ys[i + 1] - ys[i]) / (xs[i + 1] - xs[i])
        if slope != prev_slope:
            out_x.append(xs[i])
            out_y.append(ys[i])
        prev_slope = slope
    out_x.append(xs[-1])
    out_y.append(ys[-1])
    return tuple(out_x), tuple(out_y)


def _make(n: int, xs, ys, orientation: int = 1) -> PLMap:
    mx, my = _merge(xs, ys)
    return PLMap(n, mx, my, orientation, trusted=True)


def canonical_form(g: PLMap) -> PLMap:
    return _make(g.n, g.xs, g.ys, g.orientation)


def identity(n: int) -> PLMap:
    check_base(n)
    return PLMap(n, (ZERO, ONE), (ZERO, ONE), trusted=True)


def alpha(n: int) -> PLMap:
    """The reflection x -> 1 - x."""
    check_base(n)
    return PLMap(n, (ZERO, ONE), (ONE, ZERO), -1, trusted=True)


# evaluation ---------------------------------------------------------------


def _segment(g: PLMap, x: Fraction) -> int:
    i = bisect.bisect_right(g.xs, x) - 1
    return min(max(i, 0), len(g.xs) - 2)


def evaluate(g: PLMap, x) -> Fraction:
    x = Q(x)
    if x < 0 or x > 1:
        raise PLError(f"{x} is outside [0, 1]")
    i = _segment(g, x)
    if x == g.xs[i]:
        return g.ys[i]
    return g.ys[i] + (x - g.xs[i]) * g.slopes[i]


def slope_right(g: PLMap, x) -> Fraction:
    """Slope of the piece starting at x (the right derivative)."""
    x = Q(x)
    if x >= 1:
        raise PLError("no right slope at 1")
    return g.slopes[_segment(g, x)]


def slope_left(g: PLMap, x) -> Fraction:
    x = Q(x)
    if x <= 0:
        raise PLError("no left slope at 0")
    i = bisect.bisect_left(g.xs, x) - 1
    return g.slopes[i]


def _inverse_eval(g: PLMap, y: Fraction) -> Fraction:
    ys = g.ys if g.orientation == 1 else g.ys[::-1]
    xs = g.xs if g.orientation == 1 else g.xs[::-1]
    i = bisect.bisect_right(ys, y) - 1
    i = min(max(i, 0), len(ys) - 2)
    if y == ys[i]:
        return xs[i]
    return xs[i] + (y - ys[i]) * (xs[i + 1] - xs[i]) / (ys[i + 1] - ys[i])


# group law ----------------------------------------------------------------


def _same_base(g: PLMap, h: PLMap) -> None:
    if g.n != h.n:
        raise BaseMismatch(f"base {g.n} vs base {h.n}")


def compose(g: PLMap, h: PLMap) -> PLMap:
    """The right-action product ``gh``: first g, then h."""
    _same_base(g, h)
    if g.is_identity():
        return h
    if h.is_identity():
        return g
    pts = set(g.xs)
    pts.update(_inverse_eval(g, y) for y in h.xs[1:-1])
    xs = sorted(pts)
    ys = [evaluate(h, evaluate(g, x)) for x in xs]
    return _make(g.n, xs, ys, g.orientation * h.orientation)


def invert(g: PLMap) -> PLMap:
    if g.orientation == 1:
        return PLMap(g.n, g.ys, g.xs, 1, trusted=True)
    return PLMap(g.n, g.ys[::-1], g.xs[::-1], -1, trusted=True)


def product(*gs: PLMap) -> PLMap:
    out = gs[0]
    for g in gs[1:]:
        out = compose(out, g)
    return out


def conjugate(g: PLMap, h: PLMap) -> PLMap:
    """``g^h = h^-1 g h``; its support is the image of supp(g) under h."""
    return compose(compose(invert(h), g), h)


def commutator(g: PLMap, h: PLMap) -> PLMap:
    """``[g, h] = g^-1 h^-1 g h``."""
    return product(invert(g), invert(h), g, h)


def power(g: PLMap, k: int) -> PLMap:
    base = g if k >= 0 else invert(g)
    k = abs(k)
    out = identity(g.n)
    while k:
        if k & 1:
            out = compose(out, base)
        base = compose(base, base)
        k >>= 1
    return out


# characters ---------------------------------------------------------------


def _require_oriented(g: PLMap) -> None:
    if g.orientation != 1:
        raise UndefinedCharacter("characters are defined only for orientation-preserving maps")


def chi0(g: PLMap) -> int:
    _require_oriented(g)
    return log_n(g.slopes[0], g.n)


def chi1(g: PLMap) -> int:
    _require_oriented(g)
    return log_n(g.slopes[-1], g.n)


def epsilon(g: PLMap) -> int:
    return g.orientation


def alpha_conjugate(g: PLMap) -> PLMap:
    """``g^alpha`` with alpha the reflection x -> 1 - x, i.e. x -> 1 - g(1 - x)."""
    xs = [1 - x for x in reversed(g.xs)]
    ys = [1 - y for y in reversed(g.ys)]
    return PLMap(g.n, xs, ys, g.orientation, trusted=True)


# fixed points and supports --------------------------------------------------


@dataclass(frozen=True)
class FixedSet:
    points: tuple[Fraction, ...]
    intervals: tuple[tuple[Fraction, Fraction], ...]

    def contains(self, x) -> bool:
        x = Q(x)
        if x in self.points:
            return True
        return any(a <= x <= b for a, b in self.intervals)

    def contains_interval(self, a, b) -> bool:
        a, b = Q(a), Q(b)
        if a == b:
            return self.contains(a)
        return any(lo <= a and b <= hi for lo, hi in self.intervals)

    def interior_contains(self, x) -> bool:
        x = Q(x)
        for lo, hi in self.intervals:
            if lo < x < hi or (x == 0 and lo == 0 < hi) or (x == 1 and hi == 1 > lo):
                return True
        return False

    def components(self) -> list[tuple[Fraction, Fraction]]:
        comps = [(p, p) for p in self.points] + list(self.intervals)
        return sorted(comps)


def fixed_set(g: PLMap) -> FixedSet:
    """Exact fixed set, solving x = s x + c piece by piece."""
    intervals: list[list[Fraction]] = []
    points: list[Fraction] = []
    xs, ys, slopes = g.xs, g.ys, g.slopes
    for i, s in enumerate(slopes):
        a, b = xs[i], xs[i + 1]
        if s == 1:
            if ys[i] == a:
                if intervals and intervals[-1][1] == a:
                    intervals[-1][1] = b
                else:
                    intervals.append([a, b])
            continue
        c = ys[i] - s * a
        x = c / (1 - s)
        if a <= x <= b:
            points.append(x)
    covered = [p for p in points if not any(lo <= p <= hi for lo, hi in intervals)]
    return FixedSet(tuple(sorted(set(covered))), tuple((lo, hi) for lo, hi in intervals))


def support(g: PLMap) -> list[tuple[Fraction, Fraction]]:
    """Open intervals whose union is the support of g."""
    comps = fixed_set(g).components()
    out = []
    for (_, hi), (lo, _) in zip(comps, comps[1:]):
        if hi < lo:
            out.append((hi, lo))
    return out


def fixed_up_to(g: PLMap) -> Fraction:
    """Largest e with g the identity on [0, e] (0 when only the point 0 is fixed nearby)."""
    if g.slopes[0] != 1 or g.orientation != 1:
        return ZERO
    return g.xs[1]


def fixes_interval(g: PLMap, a, b) -> bool:
    return fixed_set(g).contains_interval(a, b)


def fixes_neighbourhood(g: PLMap, x) -> bool:
    return fixed_set(g).interior_contains(x)


def compact_support(g: PLMap) -> bool:
    return g.orientation == 1 and g.slopes[0] == 1 and g.slopes[-1] == 1


# bumps, transplants, generators --------------------------------------------


def make_bump(n: int) -> PLMap:
    check_base(n)
    n2 = Q(1, n * n)
    xs = (ZERO, n2, 1 - Q(1, n), ONE)
    ys = (ZERO, Q(1, n), 1 - n2, ONE)
    return PLMap(n, xs, ys)


def _window_check(n: int, lo, hi) -> tuple[Fraction, Fraction]:
    lo, hi = Q(lo), Q(hi)
    if not (in_nadic_ring(lo, n) and in_nadic_ring(hi, n)):
        raise PLError(f"window ({lo}, {hi}) has an endpoint outside Z[1/{n}]")
    if not 0 <= lo < hi <= 1:
        raise PLError(f"window ({lo}, {hi}) is not a subinterval of [0, 1]")
    try:
        log_n(hi - lo, n)
    except ValueError:
        raise PLError(f"window length {hi - lo} is not a power of {n}") from None
    return lo, hi


def transplant(g: PLMap, window) -> PLMap:
    """Conjugate g by the affine map [0, 1] -> [l, r]; the result is the identity outside [l, r]."""
    lo, hi = _window_check(g.n, *window)
    if g.orientation != 1:
        raise PLError("transplant needs an orientation-preserving map")
    width = hi - lo
    xs = [lo + width * x for x in g.xs]
    ys = [lo + width * y for y in g.ys]
    if lo > 0:
        xs.insert(0, ZERO)
        ys.insert(0, ZERO)
    if hi < 1:
        xs.append(ONE)
        ys.append(ONE)
    return _make(g.n, xs, ys)


@dataclass(frozen=True)
class GeneratorTuple:
    n: int
    maps: tuple[PLMap, ...]
    supports: tuple[tuple[Fraction, Fraction], ...]

    def __getitem__(self, i: int) -> PLMap:
        return self.maps[i]

    def __len__(self) -> int:
        return len(self.maps)


def standard_generators(n: int) -> GeneratorTuple:
    check_base(n)
    bump = make_bump(n)
    n2 = Q(1, n * n)
    windows = [(ZERO, Q(1, n))]
    # a 1/n^2 gap before each middle window keeps all windows strictly separated
    windows += [((n + 2 * i - 1) * n2, (n + 2 * i) * n2) for i in range(1, n - 1)]
    windows.append((1 - n2, ONE))
    maps = [transplant(bump, w) for w in windows[:-1]]
    maps.append(transplant(invert(bump), windows[-1]))
    return GeneratorTuple(n, tuple(maps), tuple(windows))


_GEN_CACHE: dict[int, GeneratorTuple] = {}


def default_a(n: int) -> PLMap:
    """The stable letter a_0: a one-bump map on (0, 1/n) with slope n at 0."""
    if n not in _GEN_CACHE:
        _GEN_CACHE[n] = standard_generators(n)
    return _GEN_CACHE[n][0]


def orbit_point(t, k: int, a: PLMap) -> Fraction:
    """``t.a^k``; inverse images for negative k."""
    x = Q(t)
    if k >= 0:
        for _ in range(k):
            x = evaluate(a, x)
    else:
        for _ in range(-k):
            x = _inverse_eval(a, x)
    return x


def preimage(g: PLMap, y) -> Fraction:
    return _inverse_eval(g, Q(y))


# interpolation --------------------------------------------------------------


def _blocks(length: Fraction, n: int) -> list[int]:
    """Split an n-adic length into blocks n^j, listed by exponent j, largest first."""
    nd = is_nadic(length, n)
    out: list[int] = []
    m, j = nd.m, -nd.e
    while m:
        m, digit = divmod(m, n)
        out.extend([j] * digit)
        j += 1
    return sorted(out, reverse=True)


def _balance(a: list[int], b: list[int], n: int) -> None:
    # split the largest blocks of the shorter list until both counts agree
    while len(a) != len(b):
        short = a if len(a) < len(b) else b
        j = short.pop(0)
        short[:0] = [j - 1] * n
        short.sort(reverse=True)


def interval_map_points(a, b, c, d, n: int) -> list[tuple[Fraction, Fraction]]:
    """Breakpoints of an increasing n-adic PL map [a, b] -> [c, d] with slopes in n^Z."""
    a, b, c, d = (Q(v) for v in (a, b, c, d))
    if not (a < b and c < d):
        raise PLError("degenerate interval")
    if n > 2 and (nadic_residue(b - a, n) != nadic_residue(d - c, n)):
        raise NoInterpolation(f"lengths {b - a} and {d - c} differ modulo {n - 1}Z[1/{n}]")
    left, right = _blocks(b - a, n), _blocks(d - c, n)
    _balance(left, right, n)
    pts = [(a, c)]
    x, y = a, c
    for jl, jr in zip(left, right):
        x += Q(n) ** jl
        y += Q(n) ** jr
        pts.append((x, y))
    return pts


def interpolate(n: int, pairs: Iterable[tuple]) -> PLMap:
    """An element of F_n through the given increasing n-adic pairs; (0,0), (1,1) are added."""
    pts = sorted({(Q(x), Q(y)) for x, y in pairs} | {(ZERO, ZERO), (ONE, ONE)})
    for (x0, y0), (x1, y1) in zip(pts, pts[1:]):
        if not (x0 < x1 and y0 < y1):
            raise PLError("interpolation points are not strictly increasing")
    xs, ys = [ZERO], [ZERO]
    for (x0, y0), (x1, y1) in zip(pts, pts[1:]):
        if (y1 - y0) == (x1 - x0):
            seg = [(x0, y0), (x1, y1)]
        else:
            seg = interval_map_points(x0, x1, y0, y1, n)
        for x, y in seg[1:]:
            xs.append(x)
            ys.append(y)
    return _make(n, xs, ys)


# fixed-point classification ---------------------------------------------------


@dataclass(frozen=True)
class FixClass:
    kind: str  # "nary" or "rational"
    order: Optional[int] = None

    def __str__(self) -> str:
        return "NAry" if self.kind == "nary" else f"RationalNonNAry(o={self.order})"


def fix_classification(t, n: int) -> FixClass:
    t = Q(t)
    if not 0 < t < 1:
        raise PLError(f"{t} is not in (0, 1)")
    if in_nadic_ring(t, n):
        return FixClass("nary")
    qp, _ = coprime_part(t.denominator, n)
    return FixClass("rational", mult_order(n, qp))


def rational_slope_fix_element(t, window, n: int, budget: int = 64) -> PLMap:
    """An element fixing t with slope n^o there, supported inside the n-adic window.

    Near t the map is x -> n^o x - y with y = (n^o - 1) t, which lies in Z[1/n].
    The ends are closed up to the identity by n-adic interpolation.
    """
    t = Q(t)
    fc = fix_classification(t, n)
    if fc.kind == "nary":
        raise PLError(f"{t} is n-ary: the slope at t can be changed freely")
    u, v = (Q(w) for w in window)
    if not (in_nadic_ring(u, n) and in_nadic_ring(v, n)):
        raise PLError("window endpoints must be n-adic")
    if not 0 < u < t < v < 1:
        raise PLError("need 0 < u < t < v < 1")
    o = fc.order
    scale = Q(n) ** o
    shift = (scale - 1) * t
    line = lambda x: scale * x - shift  # noqa: E731
    lo_gap = (t - u) / scale
    hi_gap = (v - t) / scale
    residue = None
    if n > 2:
        if nadic_residue(shift, n) != 0:
            raise ClosingSearchExhausted(
                f"no closing exists at t={t}: the offset {shift} is nonzero modulo {n - 1}Z[1/{n}]"
            )
    tried = 0
    lo, hi = t - lo_gap, t + hi_gap
    while tried < budget:
        c1 = nadic_between(lo, t, n, residue)
        c2 = nadic_between(t, hi, n, residue)
        tried += 1
        try:
            return interpolate(n, [(u, u), (c1, line(c1)), (c2, line(c2)), (v, v)])
        except NoInterpolation:
            lo, hi = c1, c2
    raise ClosingSearchExhausted(f"no closing found within {budget} windows")


# random sampling --------------------------------------------------------------


def nadic_inner_window(lo, hi, n: int) -> tuple[Fraction, Fraction]:
    """The largest n-adic window [l, l + n^-j] inside [lo, hi], leftmost on ties."""
    lo, hi = Q(lo), Q(hi)
    width = Q(1)
    while True:
        start = math.ceil(lo / width) * width
        if start + width <= hi:
            return start, start + width
        width /= n


def random_bump(rng: random.Random, n: int, window=(ZERO, ONE), depth: int = 3) -> PLMap:
    """A transplanted bump (or its inverse) on a random n-adic subinterval of the window."""
    lo, hi = nadic_inner_window(*window, n)
    width = (hi - lo) / Q(n) ** rng.randint(1, depth)
    slots = int((hi - lo) / width)
    start = lo + width * rng.randrange(slots)
    b = transplant(make_bump(n), (start, start + width))
    return b if rng.random() < 0.5 else invert(b)


def random_word(rng: random.Random, n: int, length: int, window=(ZERO, ONE), depth: int = 3) -> PLMap:
    out = identity(n)
    for _ in range(length):
        out = compose(out, random_bump(rng, n, window, depth))
    return out


def random_commutator(seed, complexity: int, n: int = 2, window=(ZERO, ONE), depth: int = 3) -> PLMap:
    """``[g, h]`` for seeded random words g, h of the given length in transplanted bumps."""
    rng = seed if isinstance(seed, random.Random) else random.Random(seed)
    if complexity <= 0:
        return identity(n)
    g = random_word(rng, n, complexity, window, depth)
    h = random_word(rng, n, complexity, window, depth)
    return commutator(g, h)


def random_element(seed, complexity: int, n: int = 2) -> PLMap:
    """A seeded random element of F_n, usually with nonzero characters."""
    rng = seed if isinstance(seed, random.Random) else random.Random(seed)
    gens = list(standard_generators(n).maps) + [make_bump(n)]
    out = identity(n)
    for _ in range(complexity):
        pick = rng.random()
        if pick < 0.5:
            g = rng.choice(gens)
            g = g if rng.random() < 0.5 else invert(g)
        else:
            g = random_bump(rng, n)
        out = compose(out, g)
    return out
