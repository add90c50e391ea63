"""Largest and smallest gaps of a random one-dimensional Kronecker set, scaled by Q."""

import math

from kgap.gaps import FullSphere
from kgap.bounds import GrowthFunction, check_theorem_a, check_theorem_c, log_spaced, random_B, sweep

f = GrowthFunction("power", 1.0)
B = random_B(1, 1, 7)
rows = sweep(B, log_spaced(1e2, 1e6, 9), math.inf, h=1e-5, f=f)
print(f"B = {B.entries.ravel()[0]:.10f}")
print(f"{'Q':>10} {'Q*sup_K':>10} {'Q*sup_T':>10} {'f(logQ)':>10} {'Q*inf_K':>10}")
for r in rows:
    print(f"{r.Q:>10.0f} {r.Q * r.sup_K:>10.4f} {r.Q * r.sup_torus_upper:>10.4f} "
          f"{f(math.log(r.Q)):>10.2f} {r.Q * r.inf_K:>10.4f}")
print("upper envelope holds on the tail:", check_theorem_a(rows, 1, math.inf, True).tail)
print("Q*inf_K stays bounded:", check_theorem_c(rows, FullSphere()).notes["bounded"])

# a rational B repeats itself, so Q*sup_K grows linearly and the envelope fails
rows = sweep([[0.5]], [4.0, 16.0, 64.0], h=1e-3, f=f)
print("rational B = 1/2:", [round(r.Q * r.sup_K, 3) for r in rows])
