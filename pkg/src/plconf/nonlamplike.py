"""The contracting tau sequence, the closure S -> S~, good odd sets, and the subsets Q_S.

All tau values are n-adic: odd-indexed entries are chosen in Z[1/n] and the
even-indexed ones are preimages under the stable letter, which keeps Z[1/n].
"""
from __future__ import annotations

import threading
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Optional

from gmpy2 import mpq as Q

from .exactnum import in_nadic_ring, nadic_between
from .plmap import PLMap, default_a, evaluate, preimage, support


class TauSequence:
    """tau_1 > tau_2 > ... > 0 with tau_j . a^-i = tau_{2^i j}.

    Odd entries tau_{2k+1} are the least-denominator n-adic in (tau_{2k+2}, tau_{2k}),
    ties broken by least numerator. ``tau(0)`` is r = 1/n by convention, so that the
    window of index 1 is (tau_2, r).
    """

    def __init__(self, n: int = 2, tau1=None, a: Optional[PLMap] = None):
        self.n = n
        self.a = a if a is not None else default_a(n)
        self.r = Q(1, n)
        tau1 = Q(1, n * n) if tau1 is None else Q(tau1)
        if not (0 < tau1 < self.r and in_nadic_ring(tau1, n)):
            raise ValueError(f"tau_1 = {tau1} must be n-adic in (0, {self.r})")
        self.tau1 = tau1
        self._memo = {0: self.r, 1: tau1}
        self._lock = threading.Lock()

    def key(self) -> tuple:
        return (self.n, self.tau1)

    def __call__(self, j: int) -> Q:
        if j < 0:
            raise ValueError("tau is indexed by j >= 0")
        memo = self._memo
        if j in memo:
            return memo[j]
        with self._lock:
            return self._compute(j)

    def _compute(self, j: int) -> Q:
        memo = self._memo
        if j in memo:
            return memo[j]
        if j % 2 == 0:
            value = preimage(self.a, self._compute(j // 2))
        else:
            k = j // 2
            value = nadic_between(self._compute(2 * k + 2), self._compute(2 * k), self.n)
        memo[j] = value
        return value

    def index_at_or_below(self, c) -> int:
        """Least j >= 1 with tau_j <= c (c > 0)."""
        c = Q(c)
        if c <= 0:
            raise ValueError("c must be positive")
        if self(1) <= c:
            return 1
        hi = 2
        while self(hi) > c:
            hi *= 2
        lo = hi // 2  # tau(lo) > c >= tau(hi)
        while hi - lo > 1:
            mid = (lo + hi) // 2
            if self(mid) <= c:
                hi = mid
            else:
                lo = mid
        return hi

    def indices_inside(self, c, d) -> tuple[int, int]:
        """Index range [lo, hi] of the tau_j lying in the open interval (c, d)."""
        lo = 1 if d > self.tau1 else self.index_at_or_below(d)
        if lo >= 1 and self(lo) >= d:
            lo += 1
        hi = self.index_at_or_below(c) - 1 if c > 0 else None
        return lo, hi


# S-tilde ---------------------------------------------------------------------


def _check_closure_power(c: int) -> None:
    if c < 32 or c & (c - 1):
        raise ValueError("closure constant must be a power of two >= 32")


def stilde(S: Iterable[int], N: int, power: int = 32) -> set[int]:
    """Closure of S under s -> 2s and s -> power*s +- 1, intersected with [1, N]."""
    _check_closure_power(power)
    seen = {s for s in S if 1 <= s <= N}
    frontier = list(seen)
    while frontier:
        nxt = []
        for s in frontier:
            for child in (2 * s, power * s - 1, power * s + 1):
                if child <= N and child not in seen:
                    seen.add(child)
                    nxt.append(child)
        frontier = nxt
    return seen


class Closure:
    """Membership and range queries for S~ without enumerating it."""

    def __init__(self, S: Iterable[int], power: int = 32):
        _check_closure_power(power)
        self.S = frozenset(S)
        for s in self.S:
            if s < 1 or s % 2 == 0:
                raise ValueError(f"S must consist of positive odd integers, got {s}")
        self.power = power
        self._min = min(self.S) if self.S else None

    def __contains__(self, j: int) -> bool:
        c = self.power
        while j >= 1:
            if j in self.S:
                return True
            if j % 2 == 0:
                j //= 2
            elif j % c == 1:
                j = (j - 1) // c
            elif j % c == c - 1:
                j = (j + 1) // c
            else:
                return False
        return False

    def _may_meet(self, lo: int, hi: int) -> bool:
        # every element of S~ is 2^p s + e with |e| < 2^(p-4), which rules out most ranges
        return _near_dyadic_multiple(self.S, lo, hi)

    def in_range(self, lo: int, hi: int) -> list[int]:
        """Sorted elements of S~ in [lo, hi]."""
        if self._min is None:
            return []
        return sorted(self._range(max(lo, 1), hi))

    def _range(self, lo: int, hi: int) -> set[int]:
        if hi < lo or hi < self._min:
            return set()
        if hi - lo <= 64:
            return {j for j in range(lo, hi + 1) if j in self}
        if not self._may_meet(lo, hi):
            return set()
        c = self.power
        out = {s for s in self.S if lo <= s <= hi}
        out.update(2 * s for s in self._range(-(-lo // 2), hi // 2))
        out.update(c * s + 1 for s in self._range(-(-(lo - 1) // c), (hi - 1) // c))
        out.update(c * s - 1 for s in self._range(-(-(lo + 1) // c), (hi + 1) // c))
        return out


def _near_dyadic_multiple(S, lo: int, hi: int) -> bool:
    """Whether [lo, hi] meets some (2^p s - 2^(p-4), 2^p s + 2^(p-4)), s in S."""
    for s in S:
        p = 0
        while (s << p) - ((1 << p) >> 4) <= hi + 1:
            centre, radius = s << p, (1 << p) >> 4
            # integers j with 16|j - centre| < 2^p
            left = centre - radius + (0 if (1 << p) % 16 else 1) if p >= 4 else centre
            right = 2 * centre - left
            if left <= hi and right >= lo:
                return True
            p += 1
    return False


def stilde_estimate_violations(S: Iterable[int], N: int, power: int = 32) -> list[int]:
    """Elements of S~ up to N with no expression 2^p s + e, s in S, |e| < 2^(p-4)."""
    S = sorted(set(S))
    bad = []
    for j in sorted(stilde(S, N, power)):
        ok = False
        for p in range(j.bit_length() + 1):
            for s in S:
                # |j - 2^p s| < 2^(p-4)  <=>  16 |j - 2^p s| < 2^p
                if 16 * abs(j - (s << p)) < (1 << p):
                    ok = True
                    break
            if ok:
                break
        if not ok:
            bad.append(j)
    return bad


# good odd sets -------------------------------------------------------------------


@dataclass
class OddSet:
    elements: list[int]
    log: list[tuple[int, str]] = field(default_factory=list)

    def __iter__(self):
        return iter(self.elements)

    def __len__(self) -> int:
        return len(self.elements)

    def __getitem__(self, i):
        return self.elements[i]


def _blocked_by(x: int, y: int) -> Optional[int]:
    # least p > 0 with |x - 2^p y| <= 2^(p-3), i.e. 8|x - 2^p y| <= 2^p
    p = 1
    while (y << p) - (1 << p) // 8 <= x + 1:
        if 8 * abs(x - (y << p)) <= (1 << p):
            return p
        p += 1
    return None


def good_odd_set(count: int, cap: int = 1 << 24) -> OddSet:
    """Greedy odd numbers 3 = x_1 < x_2 < ... with |x_j - 2^p x_i| > 2^(p-3) for p > 0."""
    if count < 1:
        raise ValueError("count must be >= 1")
    out = OddSet([3])
    while len(out.elements) < count:
        k = len(out.elements)
        x = max(out.elements[-1], 1 << (k + 1)) + 1
        while True:
            if x > cap:
                raise RuntimeError(f"search passed the safety cap {cap}")
            if x % 2 == 0:
                out.log.append((x, "even"))
                x += 1
                continue
            reason = None
            for y in out.elements:
                p = _blocked_by(x, y)
                if p is not None:
                    reason = f"|{x} - 2^{p}*{y}| <= 2^{p - 3}"
                    break
            if reason is None:
                out.elements.append(x)
                break
            out.log.append((x, reason))
            x += 1
    return out


def odd_set_violations(elements: Iterable[int], p_max: int = 40) -> list[tuple[int, int, int]]:
    """Triples (x, y, p) with |x - 2^p y| <= 2^(p-3) and (p, x) != (0, y), for |p| <= p_max."""
    xs = list(elements)
    bad = []
    for x in xs:
        for y in xs:
            for p in range(-p_max, p_max + 1):
                if p == 0 and x == y:
                    continue
                lhs = abs(Fraction(x) - Fraction(2) ** p * y)
                if lhs <= Fraction(2) ** (p - 3):
                    bad.append((x, y, p))
    return bad


# membership in Q_S ------------------------------------------------------------------


@dataclass(frozen=True)
class QSCheck:
    member: bool
    violating_index: Optional[int]
    bound: int  # largest tau index inspected


def qs_check(g: PLMap, closure: Closure, tau: TauSequence) -> QSCheck:
    """Window test tau_s.g, tau_s.g^-1 in (tau_{s+1}, tau_{s-1}) for s in S~.

    Only tau_s inside supp(g) can move, and supp(g) stays away from 0, so the
    check ranges over finitely many indices.
    """
    if g.n != tau.n:
        raise ValueError("base of g does not match the tau sequence")
    bound = 0
    for c, d in support(g):
        if c >= tau.r:
            continue
        if c == 0:
            raise ValueError("g does not fix a neighbourhood of 0")
        lo, hi = tau.indices_inside(c, d)
        if hi is None or hi < lo:
            continue
        bound = max(bound, hi)
        for s in closure.in_range(lo, hi):
            point = tau(s)
            below, above = tau(s + 1), tau(s - 1)
            image = evaluate(g, point)
            back = preimage(g, point)
            if not (below < image < above and below < back < above):
                return QSCheck(False, s, bound)
    return QSCheck(True, None, bound)


def qs_member(g: PLMap, S, tau: TauSequence, power: int = 32) -> bool:
    closure = S if isinstance(S, Closure) else Closure(S, power)
    return qs_check(g, closure, tau).member


# comparing Q_S with Q_R ------------------------------------------------------------


def qs_compare(S, R, budget=None, n: int = 2, tau1=None, power: int = 32, p_max: int = 40):
    """Least k with Q_R^(a^k) inside Q_S, which exists exactly when S is a subset of R.

    When S has an element t outside R, the witness pushes tau_m below tau_{m+1}
    for m = 2^l t; for large l its conjugates by a^-k avoid every constrained
    index of R~ and so lie in Q_R.
    """
    from .confining import Budget, Verdict, conj_a, push_element

    budget = budget or Budget()
    S, R = frozenset(S), frozenset(R)
    bad = odd_set_violations(sorted(S | R), p_max)
    if bad:
        raise ValueError(f"S and R are not drawn from a good odd set: {bad[0]}")
    if S <= R:
        return Verdict.dominates(0, exact=True, note="S is a subset of R, so Q_R lies in Q_S")
    if n != 2:
        return Verdict.inconclusive(budget, "witness construction is certified for n = 2 only")
    tau = TauSequence(n, tau1)
    cS, cR = Closure(S, power), Closure(R, power)
    t = min(S - R)
    for ell in range(1, 64):
        m = t << ell
        lo, hi = tau(m + 2), tau(m - 1)
        y = nadic_between(lo, tau(m + 1), n)
        g = push_element(n, lo, hi, [(tau(m), y)])
        if qs_check(g, cS, tau).member:
            continue
        if all(qs_check(conj_a(g, -k), cR, tau).member for k in range(budget.k_max + 1)):
            return Verdict.refuted(g, budget.k_max, f"moves tau_{m} out of its window, m = 2^{ell} * {t}")
    return Verdict.inconclusive(budget, "no witness up to l = 63")
