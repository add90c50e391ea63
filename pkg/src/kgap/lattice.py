"""Geometry-of-numbers kernel.

Lattices are stored as square matrices whose *columns* generate the lattice.
Everything here is double precision; the routines are meant for small
dimensions (the exact enumeration paths refuse ``d > MAX_ENUM_DIM``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import BudgetError, CapabilityError, InfeasibleError, RankDeficiencyError

MAX_ENUM_DIM = 8
BOX_BUDGET = 1e7
NODE_BUDGET = 5e7
SINGULAR_RTOL = 1e-12
BOUNDARY_ATOL = 1e-12
LLL_DELTA = 0.75
_LLL_MAX_ITER = 200_000


def c1(d: int) -> float:
    """Slab-spacing constant, ``2**(-(d-1)/2)``.

    For a ``delta = 3/4`` LLL-reduced basis, ``|b*_i| >= 2**(-(i-1)/2) lambda_i``,
    so this value is a valid lower-bound constant for every ``i <= d``.
    """
    return 2.0 ** (-(d - 1) / 2.0)


def c2(d: int, n: int) -> float:
    """Side constant for the empty cube, ``(1 - 1/(2n)) d**(-1/2) c1(d)``."""
    return (1.0 - 1.0 / (2.0 * n)) / math.sqrt(d) * c1(d)


@dataclass(frozen=True, eq=False)
class LatticeBasis:
    """Full-rank lattice given by the columns of a ``d x d`` real matrix."""

    matrix: np.ndarray

    def __post_init__(self):
        mat = np.array(self.matrix, dtype=float)
        if mat.ndim != 2 or mat.shape[0] != mat.shape[1] or mat.shape[0] == 0:
            raise ValueError(f"basis must be a non-empty square matrix, got shape {mat.shape}")
        if not np.all(np.isfinite(mat)):
            raise ValueError("basis has non-finite entries")
        colnorms = np.linalg.norm(mat, axis=0)
        det = float(np.linalg.det(mat))
        if not np.all(colnorms > 0) or abs(det) < SINGULAR_RTOL * float(np.prod(colnorms)):
            raise RankDeficiencyError(
                f"basis is (numerically) singular: |det|={abs(det):.3g}, "
                f"column-norm product={float(np.prod(colnorms)):.3g}"
            )
        mat.setflags(write=False)
        object.__setattr__(self, "matrix", mat)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def columns(self) -> list[np.ndarray]:
        return [self.matrix[:, i] for i in range(self.dim)]

    @property
    def det(self) -> float:
        return float(np.linalg.det(self.matrix))

    @property
    def covolume(self) -> float:
        return abs(self.det)

    def __repr__(self):
        return f"LatticeBasis(dim={self.dim}, det={self.det:.6g})"


def as_basis(basis) -> LatticeBasis:
    if isinstance(basis, LatticeBasis):
        return basis
    return LatticeBasis(np.asarray(basis, dtype=float))


@dataclass(frozen=True)
class GramSchmidtData:
    """``ortho[:, i]`` is b*_i; ``mu[i, j]`` is the coefficient of b*_j in b_i."""

    ortho: np.ndarray
    mu: np.ndarray

    @property
    def norms(self) -> np.ndarray:
        return np.linalg.norm(self.ortho, axis=0)


def gram_schmidt(basis) -> GramSchmidtData:
    """Classical Gram-Schmidt orthogonalisation of the basis columns."""
    B = as_basis(basis).matrix
    d = B.shape[1]
    ortho = np.zeros_like(B)
    mu = np.eye(d)
    sq = np.zeros(d)
    for i in range(d):
        v = B[:, i].copy()
        for j in range(i):
            mu[i, j] = B[:, i] @ ortho[:, j] / sq[j]
            v -= mu[i, j] * ortho[:, j]
        # second pass keeps orthogonality at 1e-9 for badly scaled input
        for j in range(i):
            corr = v @ ortho[:, j] / sq[j]
            mu[i, j] += corr
            v -= corr * ortho[:, j]
        ortho[:, i] = v
        sq[i] = v @ v
    return GramSchmidtData(ortho=ortho, mu=mu)


def _qr_r(B: np.ndarray) -> np.ndarray:
    return np.linalg.qr(B, mode="r")


def _lll(B: np.ndarray, delta: float) -> tuple[np.ndarray, np.ndarray]:
    """Return ``(reduced, U)`` with ``reduced = B @ U`` and ``U`` unimodular."""
    B = np.array(B, dtype=float)
    d = B.shape[1]
    U = np.eye(d, dtype=np.int64)
    if d == 1:
        return B, U
    R = _qr_r(B)
    k = 1
    it = 0
    while k < d:
        it += 1
        if it > _LLL_MAX_ITER:
            raise InfeasibleError("LLL did not converge")
        # size reduction of column k; repeated because huge quotients lose digits
        for _ in range(8):
            changed = False
            for j in range(k - 1, -1, -1):
                q = round(R[j, k] / R[j, j])
                if q:
                    changed = True
                    B[:, k] -= q * B[:, j]
                    U[:, k] -= q * U[:, j]
                    R[: j + 1, k] -= q * R[: j + 1, j]
            if not changed:
                break
            R = _qr_r(B)
            if all(abs(R[j, k] / R[j, j]) <= 0.5 + 1e-9 for j in range(k)):
                break
        lhs = R[k, k] ** 2 + R[k - 1, k] ** 2
        if lhs >= delta * R[k - 1, k - 1] ** 2:
            k += 1
        else:
            B[:, [k - 1, k]] = B[:, [k, k - 1]]
            U[:, [k - 1, k]] = U[:, [k, k - 1]]
            R = _qr_r(B)
            k = max(k - 1, 1)
    return B, U


def lll_reduce(basis, delta: float = LLL_DELTA, return_transform: bool = False):
    """LLL-reduce a lattice basis.

    Parameters
    ----------
    basis : LatticeBasis or array_like
        Columns generate the lattice.
    delta : float
        Lovasz parameter in ``(1/4, 1)``.
    return_transform : bool
        Also return the integer matrix ``U`` with ``reduced = basis @ U``.
    """
    if not 0.25 < delta < 1.0:
        raise ValueError(f"delta must lie in (1/4, 1), got {delta}")
    L = as_basis(basis)
    _, U = _lll(L.matrix, delta)
    reduced = LatticeBasis(L.matrix @ U)
    if return_transform:
        return reduced, U
    return reduced


def reduce_full_rank(matrix, delta: float = LLL_DELTA) -> LatticeBasis:
    """LLL-reduce a matrix already known to be non-singular.

    Meant for badly scaled bases such as ``A_Q U_B`` (determinant one by
    construction) that the column-norm singularity test would reject; the
    test is applied to the reduced output instead.
    """
    M = np.array(matrix, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1] or not np.all(np.isfinite(M)):
        raise ValueError("expected a finite square matrix")
    red, _ = _lll(M, delta)
    return LatticeBasis(red)


def _enumerate_ball(B: np.ndarray, radius: float, center: np.ndarray | None = None,
                    node_budget: float = NODE_BUDGET) -> np.ndarray:
    """Integer coefficient vectors ``c`` with ``|B c - center|_2 <= radius``.

    Breadth-first Fincke-Pohst: the candidate set is expanded one coordinate
    at a time (last coordinate first) using the triangular factor of ``B``.
    A small slack is added so boundary points are never lost; callers filter.
    """
    d = B.shape[1]
    Qo, R = np.linalg.qr(B)
    u = np.zeros(d) if center is None else Qo.T @ np.asarray(center, dtype=float)
    r2 = (radius * (1 + 1e-9) + 1e-12) ** 2
    coeffs = np.zeros((1, 0), dtype=np.int64)
    partial = np.zeros(1)
    nodes = 0
    for i in range(d - 1, -1, -1):
        tail = R[i, i + 1:] @ coeffs.T if coeffs.shape[1] else np.zeros(len(partial))
        ctr = (u[i] - tail) / R[i, i]
        rem = np.maximum(r2 - partial, 0.0)
        hw = np.sqrt(rem) / abs(R[i, i])
        lo = np.ceil(ctr - hw - 1e-9).astype(np.int64)
        hi = np.floor(ctr + hw + 1e-9).astype(np.int64)
        cnt = np.maximum(hi - lo + 1, 0)
        total = int(cnt.sum())
        nodes += total
        if nodes > node_budget:
            raise BudgetError(f"enumeration exceeded {node_budget:.0f} nodes")
        if total == 0:
            return np.zeros((0, d), dtype=np.int64)
        parent = np.repeat(np.arange(len(cnt)), cnt)
        offs = np.arange(total) - np.repeat(np.cumsum(cnt) - cnt, cnt)
        ci = lo[parent] + offs
        newpart = partial[parent] + (R[i, i] * (ci - ctr[parent])) ** 2
        keep = newpart <= r2
        coeffs = np.column_stack([ci[keep], coeffs[parent[keep]]])
        partial = newpart[keep]
    return coeffs


def enumerate_ball(basis, radius: float, center=None) -> np.ndarray:
    """Coefficients (w.r.t. ``basis``) of all lattice points within ``radius`` of ``center``.

    The returned rows may include a few points just outside the ball (slack
    for rounding); filter on the actual norms if that matters.
    """
    L = as_basis(basis)
    if L.dim > MAX_ENUM_DIM:
        raise CapabilityError(f"enumeration supports d <= {MAX_ENUM_DIM}, got {L.dim}")
    red, U = _lll(L.matrix, LLL_DELTA)
    c = _enumerate_ball(red, radius, center)
    return c @ U.T


class SuccessiveMinima(NamedTuple):
    values: np.ndarray
    witnesses: np.ndarray  # columns
    coefficients: np.ndarray  # integer columns w.r.t. the input basis


def _canonical_sign(C: np.ndarray) -> np.ndarray:
    """Mask of rows whose first non-zero entry is positive."""
    nz = C != 0
    first = np.argmax(nz, axis=1)
    lead = C[np.arange(len(C)), first]
    return nz.any(axis=1) & (lead > 0)


def successive_minima(basis) -> SuccessiveMinima:
    """Exact successive minima by enumeration below the longest reduced vector.

    Witnesses are taken greedily in order of (norm, coefficient vector); ties
    in norm (to 1e-9 relative) are broken by descending lexicographic order of
    the sign-normalised coefficient vector, so ``Z^d`` yields ``e_1, ..., e_d``.
    """
    L = as_basis(basis)
    d = L.dim
    if d > MAX_ENUM_DIM:
        raise CapabilityError(f"successive_minima supports d <= {MAX_ENUM_DIM}, got {d}")
    red, U = _lll(L.matrix, LLL_DELTA)
    # lambda_d never exceeds the longest vector of any basis
    radius = float(np.linalg.norm(red, axis=0).max())
    Cr = _enumerate_ball(red, radius)
    C = Cr @ U.T
    sign = _canonical_sign(C)
    C, Cr = C[sign], Cr[sign]
    # vectors from the reduced basis: the input may be badly scaled
    V = Cr @ red.T
    norms = np.linalg.norm(V, axis=1)
    keep = norms <= radius * (1 + 1e-9)
    C, V, norms = C[keep], V[keep], norms[keep]

    order = np.argsort(norms, kind="stable")
    C, V, norms = C[order], V[order], norms[order]
    group = np.concatenate([[0], np.cumsum(np.diff(norms) > 1e-9 * radius)])
    keys = [-C[:, j] for j in range(d - 1, -1, -1)] + [group]
    order = np.lexsort(keys)
    C, V, norms = C[order], V[order], norms[order]

    chosen: list[int] = []
    Qc = np.zeros((d, 0))
    for idx in range(len(V)):
        v = V[idx]
        r = v - Qc @ (Qc.T @ v)
        if np.linalg.norm(r) > 1e-9 * norms[idx]:
            chosen.append(idx)
            Qc = np.column_stack([Qc, r / np.linalg.norm(r)])
            if len(chosen) == d:
                break
    if len(chosen) < d:
        raise InfeasibleError("enumeration did not produce d independent vectors")
    vals = np.maximum.accumulate(norms[chosen])
    return SuccessiveMinima(values=vals, witnesses=V[chosen].T.copy(),
                            coefficients=C[chosen].T.copy())


def lattice_points_in_box(basis, lo, hi, half_open_mask=None, *,
                          budget: float = BOX_BUDGET, atol: float = BOUNDARY_ATOL,
                          return_coefficients: bool = False):
    """All lattice points ``x`` in the box ``lo <= x <= hi``.

    Where ``half_open_mask[i]`` is true the i-th side is ``lo_i < x_i <= hi_i``.
    Points are returned as rows, sorted by their coefficient vectors.

    The box is mapped onto ``[-1, 1]^d`` and the circumscribed ball is
    enumerated in the rescaled (and re-reduced) lattice.
    """
    L = as_basis(basis)
    d = L.dim
    if d > MAX_ENUM_DIM:
        raise CapabilityError(f"box enumeration supports d <= {MAX_ENUM_DIM}, got {d}")
    lo = np.asarray(lo, dtype=float).reshape(d)
    hi = np.asarray(hi, dtype=float).reshape(d)
    mask = np.zeros(d, bool) if half_open_mask is None else np.asarray(half_open_mask, bool).reshape(d)
    if not np.all(lo < hi):
        raise ValueError("box requires lo < hi componentwise")
    ratio = float(np.prod(hi - lo)) / L.covolume
    if ratio > budget:
        raise BudgetError(f"box volume / covolume = {ratio:.3g} exceeds budget {budget:.3g}")
    half = (hi - lo) / 2.0 + atol
    ctr = (hi + lo) / 2.0
    scaled = L.matrix / half[:, None]
    red, U = _lll(scaled, LLL_DELTA)
    C = _enumerate_ball(red, math.sqrt(d), ctr / half) @ U.T
    X = C @ L.matrix.T
    lower_ok = np.where(mask, X > lo + atol, X >= lo - atol)
    inside = lower_ok.all(axis=1) & (X <= hi + atol).all(axis=1)
    C, X = C[inside], X[inside]
    order = np.lexsort(C.T[::-1]) if len(C) else np.zeros(0, int)
    if return_coefficients:
        return X[order], C[order]
    return X[order]


def babai_nearest_plane(basis, target) -> np.ndarray:
    """Integer coefficients of Babai's nearest-plane point for ``target``.

    The residual ``target - B c`` lies in the box spanned by
    ``[-1/2, 1/2] b*_i``, using the basis in the order given.
    """
    B = as_basis(basis).matrix
    Qo, R = np.linalg.qr(B)
    u = Qo.T @ np.asarray(target, dtype=float)
    d = B.shape[1]
    c = np.zeros(d, dtype=np.int64)
    for i in range(d - 1, -1, -1):
        c[i] = round((u[i] - R[i, i + 1:] @ c[i + 1:]) / R[i, i])
    return c


class CoveringRectangle(NamedTuple):
    """Rectangle ``rotation @ diag(side_lengths) @ [-1/2, 1/2]^d``.

    Its translates by the witness sublattice tile space.
    """

    rotation: np.ndarray
    side_lengths: np.ndarray
    minima: SuccessiveMinima

    @property
    def diameter(self) -> float:
        return float(np.linalg.norm(self.side_lengths))

    @property
    def sublattice(self) -> LatticeBasis:
        return LatticeBasis(self.minima.witnesses)

    def contains(self, points, atol: float = 1e-12) -> np.ndarray:
        P = np.atleast_2d(points)
        local = P @ self.rotation
        return np.all(np.abs(local) <= self.side_lengths / 2 + atol, axis=1)


def covering_rectangle(basis) -> CoveringRectangle:
    """Tile of the minima sublattice from the KAN factorisation of its witnesses."""
    sm = successive_minima(basis)
    Qo, R = np.linalg.qr(sm.witnesses)
    signs = np.where(np.diag(R) < 0, -1.0, 1.0)
    rotation = Qo * signs
    sides = np.abs(np.diag(R))
    return CoveringRectangle(rotation=rotation, side_lengths=sides, minima=sm)


def point_in_translated_box(rect: CoveringRectangle, sublattice, target,
                            diameter: float | None = None) -> bool:
    """Whether the closed ball of ``diameter`` about ``target`` meets ``sublattice``.

    ``diameter`` defaults to ``sqrt(d) * lambda_d``. Babai's nearest-plane point
    is tried first; local enumeration settles the remaining cases.
    """
    L = as_basis(sublattice)
    t = np.asarray(target, dtype=float)
    if diameter is None:
        diameter = math.sqrt(L.dim) * float(rect.minima.values[-1])
    radius = diameter / 2.0
    c = babai_nearest_plane(L, t)
    if np.linalg.norm(L.matrix @ c - t) <= radius + 1e-12:
        return True
    C = enumerate_ball(L, radius, t)
    if len(C) == 0:
        return False
    dist = np.linalg.norm(C @ L.matrix.T - t, axis=1)
    return bool(np.any(dist <= radius + 1e-12))


@dataclass(frozen=True)
class SlabDecomposition:
    """Lattice sits on translates of ``span(subspace_basis)``, ``spacing`` apart."""

    subspace_basis: np.ndarray  # d x (m-1)
    spacing: float
    reduced_basis: LatticeBasis
    lambda_m: float
    c1: float

    def distance_to_subspace(self, points) -> np.ndarray:
        P = np.atleast_2d(np.asarray(points, dtype=float))
        if self.subspace_basis.shape[1] == 0:
            return np.linalg.norm(P, axis=1)
        Qs, _ = np.linalg.qr(self.subspace_basis)
        return np.linalg.norm(P - (P @ Qs) @ Qs.T, axis=1)


def slab_decomposition(basis, m: int, c1_value: float | None = None) -> SlabDecomposition:
    L = as_basis(basis)
    d = L.dim
    if not 1 <= m <= d:
        raise ValueError(f"m must lie in [1, {d}], got {m}")
    red = lll_reduce(L)
    gs_norms = np.abs(np.diag(_qr_r(red.matrix)))
    spacing = float(gs_norms[m - 1:].min())
    lam_m = float(successive_minima(L).values[m - 1])
    const = c1(d) if c1_value is None else c1_value
    if spacing < const * lam_m * (1 - 1e-9):
        raise InfeasibleError(
            f"slab spacing {spacing:.6g} below c1*lambda_m = {const * lam_m:.6g}"
        )
    return SlabDecomposition(
        subspace_basis=red.matrix[:, : m - 1].copy(),
        spacing=spacing,
        reduced_basis=red,
        lambda_m=lam_m,
        c1=const,
    )


def empty_box_offset(basis, n: int, m: int, c1_value: float | None = None,
                     max_candidates: int = 4096) -> tuple[np.ndarray, float]:
    """Find ``y`` so that ``[0, side]^d + (0_n, y)`` holds no lattice point.

    ``side = c2(d, n) * lambda_m``. Offsets are scanned along each y-axis in
    steps of ``side / 2`` out to ``sqrt(d) * lambda_d`` (beyond which any
    ball of that diameter is known to meet the lattice); among the empty
    candidates the one whose centre is farthest from the lattice wins.
    """
    L = as_basis(basis)
    d = L.dim
    if n < 1 or m < 1 or n + m != d:
        raise ValueError(f"need n, m >= 1 with n + m = d = {d}")
    const = c1(d) if c1_value is None else c1_value
    sm = successive_minima(L)
    side = (1.0 - 1.0 / (2.0 * n)) / math.sqrt(d) * const * float(sm.values[m - 1])
    reach = math.sqrt(d) * float(sm.values[-1])
    steps = min(int(math.ceil(reach / (side / 2.0))) + 1, max_candidates)
    half_diag = side * math.sqrt(d) / 2.0
    probe = half_diag + reach / 2.0
    for axis in range(m):
        best = None
        for j in range(steps):
            y = np.zeros(m)
            y[axis] = j * side / 2.0
            lo = np.concatenate([np.zeros(n), y])
            centre = lo + side / 2.0
            C = enumerate_ball(L, probe, centre)
            X = C @ L.matrix.T
            in_box = np.all((X >= lo - BOUNDARY_ATOL) & (X <= lo + side + BOUNDARY_ATOL), axis=1)
            if in_box.any():
                continue
            clearance = float(np.linalg.norm(X - centre, axis=1).min()) if len(X) else math.inf
            if best is None or clearance > best[0] + 1e-12:
                best = (clearance, y)
        if best is not None:
            y = best[1]
            lo = np.concatenate([np.zeros(n), y])
            if len(lattice_points_in_box(L, lo, lo + side)) == 0:
                return y, side
    raise InfeasibleError(
        f"no empty cube of side {side:.6g} found after scanning {steps} offsets per axis"
    )
