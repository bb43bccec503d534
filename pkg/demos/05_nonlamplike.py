"""Non-lamplike confining subsets built from sparse odd numbers.

Run: python3 demos/05_nonlamplike.py
"""
import itertools

from gmpy2 import mpq as Q

from plconf import confining as C
from plconf import nonlamplike as NL
from plconf.exactnum import format_rational as fr

print("closure of {1} up to 40:", sorted(NL.stilde({1}, 40)))
print("closure of {3} up to 10^6 has", len(NL.stilde({3}, 10**6)), "elements;",
      "estimate violations:", len(NL.stilde_estimate_violations({3}, 10**6)))

odd = NL.good_odd_set(4)
print("greedy odd set:", odd.elements, "rejected candidates:", len(odd.log))

tau = NL.TauSequence(2)
print("tau_1..tau_6:", [fr(tau(j)) for j in range(1, 7)])

F = C.NonLamplike(2, {3})
for t in (Q(1, 3), Q(1, 5)):
    g = C.moving_member(F, t)
    print(f"Q_{{3}} has a member moving {fr(t)}: {g is not None}")

print("\norder on Q_S for S inside", odd.elements)
subsets = [set(c) for r in range(1, 3) for c in itertools.combinations(odd.elements, r)]
for S, R in itertools.islice(itertools.permutations(subsets, 2), 6):
    print(f"  Q_{sorted(S)} vs Q_{sorted(R)}: {NL.qs_compare(S, R)}")
