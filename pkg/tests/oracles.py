"""Brute-force reference implementations used only by the tests.

Nothing here calls into the library's reduction or enumeration code.
"""

import itertools
import math

import numpy as np


def coefficient_bounds(M, radius):
    """Integer coefficient ranges covering every lattice vector of norm <= radius."""
    Minv = np.linalg.inv(M)
    return np.floor(np.linalg.norm(Minv, axis=1) * radius + 1e-9).astype(int)


def brute_lattice_vectors(M, radius):
    """All nonzero ``M c`` with ``|M c| <= radius``, as (coeffs, vectors)."""
    M = np.asarray(M, float)
    C = coefficient_bounds(M, radius)
    axes = [np.arange(-c, c + 1) for c in C]
    coeffs = np.stack(np.meshgrid(*axes, indexing="ij"), -1).reshape(-1, len(C))
    V = coeffs @ M.T
    norms = np.linalg.norm(V, axis=1)
    keep = (norms <= radius * (1 + 1e-12)) & np.any(coeffs != 0, axis=1)
    return coeffs[keep], V[keep], norms[keep]


def brute_minima(M):
    """Successive minima by exhaustive search below the longest basis column."""
    M = np.asarray(M, float)
    d = M.shape[0]
    radius = float(np.linalg.norm(M, axis=0).max())
    _, V, norms = brute_lattice_vectors(M, radius)
    order = np.argsort(norms, kind="stable")
    chosen, values = [], []
    for i in order:
        trial = chosen + [V[i]]
        if np.linalg.matrix_rank(np.array(trial), tol=1e-9 * radius) == len(trial):
            chosen = trial
            values.append(norms[i])
            if len(chosen) == d:
                break
    return np.array(values)


def brute_box_points(M, lo, hi, half_open):
    """Lattice points in a box via the coefficient parallelepiped."""
    M = np.asarray(M, float)
    lo, hi = np.asarray(lo, float), np.asarray(hi, float)
    corners = np.array(list(itertools.product(*zip(lo, hi))))
    C = corners @ np.linalg.inv(M).T
    axes = [np.arange(math.floor(a) - 1, math.ceil(b) + 2) for a, b in zip(C.min(0), C.max(0))]
    coeffs = np.stack(np.meshgrid(*axes, indexing="ij"), -1).reshape(-1, M.shape[0])
    X = coeffs @ M.T
    lower_ok = np.where(half_open, X > lo + 1e-12, X >= lo - 1e-12)
    ok = np.all(lower_ok & (X <= hi + 1e-12), axis=1)
    return X[ok]


def _lp(y, p):
    y = np.abs(np.asarray(y, float))
    return float(y.max()) if math.isinf(p) else float((y**p).sum() ** (1.0 / p))


def brute_gap(B, Q, v, p, in_cone, window=3):
    """Plain loops over every k and every integer shift in ``[-window, window]^m``."""
    B = np.asarray(B, float)
    m, n = B.shape
    K = int(math.floor(Q ** (1.0 / n) + 1e-9))
    best = math.inf
    for k in itertools.product(range(1, K + 1), repeat=n):
        pt = B @ np.array(k, float)
        pt = pt - np.floor(pt)
        for w in itertools.product(range(-window - 1, window + 2), repeat=m):
            y = pt + np.array(w, float) - np.asarray(v, float)
            if in_cone(y):
                best = min(best, _lp(y, p))
    return best


def brute_congruence_solvable(B, N, Q, phi_value, rep):
    """Direct scan of the class-restricted system with plain Python integers."""
    B = np.asarray(B, float)
    m, n = B.shape
    nb = N / 2.0 * Q ** (1.0 / n)
    span = int(math.ceil(nb))
    rhs = N**m * phi_value
    for nv in itertools.product(range(-span, span + 1), repeat=n):
        if any(abs(x) >= nb for x in nv) or any((x - r) % N for x, r in zip(nv, rep[m:])):
            continue
        x = B @ np.array(nv, float)
        ok = True
        for i in range(m):
            lo = math.floor(x[i]) - N
            cands = [t for t in range(lo, lo + 2 * N + 2) if (t - rep[i]) % N == 0]
            if min(abs(x[i] - t) for t in cands) ** m >= rhs:
                ok = False
                break
        if ok:
            return True
    return False
