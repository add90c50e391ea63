"""Gaps between the first Q multiples of alpha mod 1 take at most three values."""

import math

from kgap.bounds import three_gap_suite

alphas = [(math.sqrt(5) - 1) / 2, math.sqrt(2) - 1, math.pi - 3, 1 / 7]
for row in three_gap_suite(alphas, [10, 100, 1000, 10000]):
    gaps = ", ".join(f"{g:.6f}" for g in row.gap_values)
    print(f"alpha={row.alpha:.6f}  Q={row.Q:>7.0f}  {row.distinct_gaps} gaps: {gaps}  sum={row.sum:.12f}")
