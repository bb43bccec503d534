"""Elements of F_n: generators, products, characters and fixed points.

Run: python3 demos/01_elements.py
"""
from gmpy2 import mpq as Q

from plconf.exactnum import format_rational as fr
from plconf.plmap import (
    chi0,
    chi1,
    compose,
    evaluate,
    fix_classification,
    fixed_set,
    random_commutator,
    rational_slope_fix_element,
    slope_right,
    standard_generators,
    support,
)

for n in (2, 3):
    gens = standard_generators(n)
    print(f"F_{n}: {len(gens)} generators on windows",
          ", ".join(f"({fr(lo)}, {fr(hi)})" for lo, hi in gens.supports))

a0, a1 = standard_generators(2).maps
print("\na_0 sends 1/8 to", fr(evaluate(a0, Q(1, 8))), "and 1/4 to", fr(evaluate(a0, Q(1, 4))))
g = compose(a0, a1)
print("chi_0, chi_1 of a_0 a_1:", chi0(g), chi1(g))

c = random_commutator(5, 2, 2)
print("a commutator has both characters zero:", chi0(c), chi1(c), "support", [(fr(x), fr(y)) for x, y in support(c)])

fs = fixed_set(a0)
print("\nfixed set of a_0: points", [fr(p) for p in fs.points], "intervals", [(fr(x), fr(y)) for x, y in fs.intervals])

# a non-dyadic rational fixed point forces slopes that are powers of 2^o
t = Q(1, 3)
print(f"\nat t = 1/3: {fix_classification(t, 2)}")
h = rational_slope_fix_element(t, (Q(1, 4), Q(1, 2)), 2)
print("an element fixing 1/3 with slope", fr(slope_right(h, t)), "there; check h(1/3) =", fr(evaluate(h, t)))
