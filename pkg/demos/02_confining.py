"""Confining subsets of F_n': axioms, comparisons and the largest element.

Run: python3 demos/02_confining.py
"""
from gmpy2 import mpq as Q

from plconf import confining as C
from plconf.exactnum import format_rational as fr
from plconf.families import IndexSet, format_family

budget = C.Budget(samples=80, k_max=32, seed=1)

families = [
    C.RigidStab(2, Q(1, 4)),
    C.OrbitFixator(2, Q(1, 3)),
    C.LamplikeProduct(2, Q(1, 4), Q(3, 16), IndexSet.finite({1, 3})),
    C.NonLamplike(2, {3}),
]
print("axiom checks")
for F in families:
    r = C.axiom_check(F, budget)
    print(f"  {format_family(F):38s} stay={r.stay_ok} getin={r.getin_ok} product exponent={r.prod_k}")

print("\ncomparisons (does some a-conjugate of the right family sit inside the left one?)")
pairs = [
    (C.RigidStab(2, Q(1, 4)), C.RigidStab(2, Q(3, 8))),
    (C.RigidStab(2, Q(3, 8)), C.RigidStab(2, Q(1, 4))),
    (C.OrbitFixator(2, Q(1, 4)), C.OrbitFixator(2, Q(1, 3))),
    (C.NonLamplike(2, {3}), C.NonLamplike(2, {3, 5})),
]
for F1, F2 in pairs:
    v = C.compare(F1, F2, budget)
    line = f"  {format_family(F1)} vs {format_family(F2)}: {v}"
    if v.is_refuted:
        line += f"  (witness replays: {C.replay_refutation(v, F1, F2)})"
    print(line)

print("\nthe largest class: least k with F_n'[t.a^k, 1) inside F")
for F in families:
    r = C.largest_element_witness(F, budget)
    print(f"  {format_family(F):38s} k={r.k} threshold={fr(r.threshold)}")

print("\nglobal fixed points of orbitfix:1/4 on the orbit window -3..0:")
r = C.global_fixed_points(C.OrbitFixator(2, Q(1, 4)), -3)
print("  ", [fr(p) for p in r.points])
