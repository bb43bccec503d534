"""The Bass-Serre tree of F_2 seen from the base Fix[0, 1/4].

Run: python3 demos/04_tree.py
"""
from gmpy2 import mpq as Q

from plconf import treesim as T
from plconf.families import a_power
from plconf.plmap import chi0, random_element

t = Q(1, 4)
ball = T.tree_ball(t, 4)
print(f"ball of radius 4: {ball.vertex_count()} vertices, acyclic={ball.is_tree}, "
      f"normal-form mismatches={len(T.check_against_ball(ball))}")

for m in (1, 2, -3):
    r = T.tree_distance(a_power(2, m), t)
    print(f"a^{m}: distance {r.distance} with (p, q) = ({r.p}, {r.q})")

for seed in range(4):
    g = random_element(seed, 3, 2)
    b = T.busemann_estimate(g, t)
    print(f"sample {seed}: chi_0={chi0(g):+d} type={T.isometry_type(g, t):11s} "
          f"busemann={b.value} (stable from m={b.m0})")
