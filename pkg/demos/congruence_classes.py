"""Solvability of the congruence system in every residue class, against the covering test."""

from kgap.dioph import PhiConst, all_classes_solvable, CongruenceInstance, proposition8_crosscheck
from kgap.bounds import random_B

B = random_B(1, 1, 3)
for phi in (PhiConst(0.5), PhiConst(0.0005)):
    rep = proposition8_crosscheck(B, 500.5, phi, [1, 2, 4, 8, 16], full_scan=True)
    c = rep.covering
    print(f"phi={phi.to_string():<12} covers={c.covers} radius={c.radius:.5f} bracket={c.bracket}")
    for row in rep.rows:
        print(f"  N={row.N} classes={row.classes_checked} all solvable={row.solvable} failing={row.failing_class}")
    print("  status:", rep.status)

ok, witnesses = all_classes_solvable(CongruenceInstance(B, 2, 500.5, PhiConst(0.5)))
for w in witnesses:
    print("class", w.class_rep, "->", w.solution)
