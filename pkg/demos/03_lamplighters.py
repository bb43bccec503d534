"""Confining subsets of lamplighters, and where two of them break.

Run: python3 demos/03_lamplighters.py
"""
from gmpy2 import mpq as Q

from plconf import confining as C
from plconf import lamplighter as L

Z, FA = L.IntLamp(), L.FreeAbelianLamp()
budget = C.Budget(samples=150, k_max=32, seed=0)

for F in (L.Balls(Z), L.Machado(1), L.SubgroupFamily(Z, L.Multiples(3)), L.NonSplit()):
    r = L.lamp_axiom_check(F, budget)
    print(f"{L.format_lamp_family(F):14s} stay={r.stay_ok} product exponent={r.prod_k} right-heavy={L.is_right_heavy(F)}")

# shifting this member right breaks the defining relation at coordinate -4
e4 = L.fa_basis(4)
u = L.lamp_elt(FA, {-1: e4, -2: e4, -3: e4, -4: e4})
print("\nnonsplit member", u, "-> shifted", L.lamp_shift(u, 1),
      "still a member?", L.lamp_member(L.lamp_shift(u, 1), L.NonSplit()))

print("\nMachado powers leave the family, except at coordinate -1 where A_-1 is all of Z")
for i, m in ((-3, 7), (-2, 1), (-1, 5)):
    u = L.delta(Z, i, m)
    print(f"  lamp {m} at {i}: escapes after power {L.machado_member_escape(u, 1)}")

print("\nsubgroup families reverse inclusion:")
for d1, d2 in ((1, 2), (2, 1)):
    v = L.lamp_compare(L.SubgroupFamily(Z, L.Multiples(d1)), L.SubgroupFamily(Z, L.Multiples(d2)), budget)
    print(f"  Q_{d1}Z vs Q_{d2}Z: {v}")

print("\nslopes at the orbit of 1/3 give a map to Z wr Z:")
t = Q(1, 3)
g = L.xi_section({0: 2, -3: -1}, t)
print("  section of {0: 2, -3: -1} has slope vector", L.xi_t(g, t))
print("  conjugating by a shifts it:", L.xi_t(C.conj_a(g, 1), t))
