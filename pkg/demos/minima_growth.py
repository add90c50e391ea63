"""Successive minima of A_R U_B as R grows, with their envelopes."""

import numpy as np

from kgap.bounds import km_probe, log_spaced, random_B

for m, n in [(1, 1), (1, 2), (2, 1)]:
    print(f"m={m} n={n}")
    for r in km_probe(random_B(m, n, 11), log_spaced(10, 1e5, 5)):
        lam = np.array2string(r.lambdas, precision=4)
        print(f"  R={r.R:>9.0f}  minima={lam}  product={r.product:.3f}")
