"""The directional gap computed directly and through the lattice A_Q U_B agree."""

import numpy as np

from kgap.bounds import random_B
from kgap.gaps import GapQuery, HalfSphere, Orthant, FullSphere, gap_direct, gap_via_lattice

g = np.random.default_rng(5)
B = random_B(2, 1, 5)
for name, S in [("full", FullSphere()), ("orthant +-", Orthant((1, -1))), ("half (1,2)", HalfSphere((1.0, 2.0)))]:
    for p in (1.0, 2.0, np.inf):
        q = GapQuery(B, 300.0, p, S)
        v = g.random(2)
        a, b = gap_direct(q, v), gap_via_lattice(q, v)
        print(f"{name:<11} p={p:<4} direct={a:.12f}  lattice={b:.12f}  diff={abs(a - b):.1e}")
