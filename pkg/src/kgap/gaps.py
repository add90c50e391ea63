"""Directional gaps in Kronecker point sets ``K(B;Q)``.

Two independent evaluation routes are provided:

* :func:`gap_direct` scans every generator ``k`` and integer shift, and
* :func:`gap_via_lattice` evaluates the same quantity as a lattice problem for
  ``A_Q U_B Z^d`` using box enumeration.

:class:`GapEvaluator` is a third, batched route (sorted circle for ``m = 1``,
periodic k-d tree otherwise) used for the statistics over many ``v``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.spatial import cKDTree

from .errors import BudgetError, GapComputationError
from .lattice import LatticeBasis, lattice_points_in_box

K_BUDGET = 10**7
GRID_BUDGET = 10**7
WINDOW_CAP = 2**12
CONE_ATOL = 1e-12
_EPS = np.finfo(float).eps


# --------------------------------------------------------------------------
# direction sets


class DirectionSpec:
    """Open subset ``S`` of the unit sphere in ``R^m``; membership is for ``cone(S)``."""

    def contains(self, Y, atol: float = CONE_ATOL) -> np.ndarray:
        raise NotImplementedError

    def symmetric_closure_covers(self, m: int) -> bool:
        raise NotImplementedError

    def to_string(self) -> str:
        raise NotImplementedError

    @property
    def dim(self) -> int | None:
        """Ambient dimension fixed by the spec, or ``None`` if any ``m`` works."""
        for name in ("signs", "normal", "center"):
            if hasattr(self, name):
                return len(getattr(self, name))
        return None


def _rows(Y) -> np.ndarray:
    Y = np.asarray(Y, dtype=float)
    return Y.reshape(1, -1) if Y.ndim == 1 else Y


def _nonzero(Y: np.ndarray, atol: float) -> np.ndarray:
    return np.abs(Y).max(axis=1) > atol


@dataclass(frozen=True)
class FullSphere(DirectionSpec):
    def contains(self, Y, atol=CONE_ATOL):
        return _nonzero(_rows(Y), atol)

    def symmetric_closure_covers(self, m):
        return True

    def to_string(self):
        return "full"


@dataclass(frozen=True)
class Orthant(DirectionSpec):
    signs: tuple[int, ...]

    def __post_init__(self):
        s = tuple(int(x) for x in self.signs)
        if not s or any(x not in (1, -1) for x in s):
            raise ValueError(f"orthant signs must be +1/-1, got {self.signs}")
        object.__setattr__(self, "signs", s)

    def contains(self, Y, atol=CONE_ATOL):
        Y = _rows(Y)
        return np.all(Y * np.asarray(self.signs) > atol, axis=1)

    def symmetric_closure_covers(self, m):
        return len(self.signs) == 1

    def to_string(self):
        return "orthant:" + "".join("+" if s > 0 else "-" for s in self.signs)


@dataclass(frozen=True)
class HalfSphere(DirectionSpec):
    normal: tuple[float, ...]

    def __post_init__(self):
        v = np.asarray(self.normal, dtype=float)
        nv = np.linalg.norm(v)
        if v.ndim != 1 or not v.size or nv == 0:
            raise ValueError("half-sphere normal must be a non-zero vector")
        object.__setattr__(self, "normal", tuple(float(x) for x in v / nv))

    def contains(self, Y, atol=CONE_ATOL):
        return _rows(Y) @ np.asarray(self.normal) > atol

    def symmetric_closure_covers(self, m):
        return True

    def to_string(self):
        return "half:" + ",".join(repr(x) for x in self.normal)


@dataclass(frozen=True)
class AngularCone(DirectionSpec):
    center: tuple[float, ...]
    half_angle: float

    def __post_init__(self):
        c = np.asarray(self.center, dtype=float)
        nc = np.linalg.norm(c)
        if c.ndim != 1 or not c.size or nc == 0:
            raise ValueError("cone centre must be a non-zero vector")
        if not 0 < self.half_angle < math.pi:
            raise ValueError("half_angle must lie in (0, pi)")
        object.__setattr__(self, "center", tuple(float(x) for x in c / nc))
        object.__setattr__(self, "half_angle", float(self.half_angle))

    def contains(self, Y, atol=CONE_ATOL):
        Y = _rows(Y)
        lhs = Y @ np.asarray(self.center) - math.cos(self.half_angle) * np.linalg.norm(Y, axis=1)
        return _nonzero(Y, atol) & (lhs > atol)

    def symmetric_closure_covers(self, m):
        # on the circle S^0 a cone is a single point whose antipode completes it
        return m == 1 or self.half_angle >= math.pi / 2

    def to_string(self):
        return "cone:" + ",".join(repr(x) for x in self.center) + f":{self.half_angle!r}"


def parse_direction(text: str) -> DirectionSpec:
    """Parse ``full``, ``orthant:+-``, ``half:1,0`` or ``cone:1,0:0.5``."""
    kind, _, rest = text.strip().partition(":")
    kind = kind.lower()
    if kind == "full" and not rest:
        return FullSphere()
    if kind == "orthant" and rest and set(rest) <= {"+", "-"}:
        return Orthant(tuple(1 if ch == "+" else -1 for ch in rest))
    if kind == "half" and rest:
        return HalfSphere(tuple(float(x) for x in rest.split(",")))
    if kind == "cone":
        centre, _, angle = rest.partition(":")
        if centre and angle:
            return AngularCone(tuple(float(x) for x in centre.split(",")), float(angle))
    raise ValueError(f"cannot parse direction spec {text!r}")


# --------------------------------------------------------------------------
# data


@dataclass(frozen=True, eq=False)
class LinearFormMatrix:
    """The ``m x n`` matrix ``B`` whose columns are the generators."""

    entries: np.ndarray

    def __post_init__(self):
        E = np.array(self.entries, dtype=float)
        if E.ndim == 0:
            E = E.reshape(1, 1)
        if E.ndim != 2 or 0 in E.shape:
            raise ValueError(f"B must be a non-empty 2-d array, got shape {E.shape}")
        if not np.all(np.isfinite(E)):
            raise ValueError("B has non-finite entries")
        E.setflags(write=False)
        object.__setattr__(self, "entries", E)

    @property
    def m(self) -> int:
        return self.entries.shape[0]

    @property
    def n(self) -> int:
        return self.entries.shape[1]

    @property
    def d(self) -> int:
        return self.m + self.n

    def __eq__(self, other):
        return isinstance(other, LinearFormMatrix) and np.array_equal(self.entries, other.entries)

    def __hash__(self):
        return hash(self.entries.tobytes())


def as_form(B) -> LinearFormMatrix:
    return B if isinstance(B, LinearFormMatrix) else LinearFormMatrix(B)


@dataclass(frozen=True)
class GapQuery:
    B: LinearFormMatrix
    Q: float
    p: float = math.inf
    S: DirectionSpec = FullSphere()

    def __post_init__(self):
        object.__setattr__(self, "B", as_form(self.B))
        p = float(self.p)
        if not (p >= 1.0):
            raise ValueError(f"p must lie in [1, inf], got {self.p}")
        if not self.Q > 0:
            raise ValueError(f"Q must be positive, got {self.Q}")
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "Q", float(self.Q))


class GapStats(NamedTuple):
    sup_over_K: float
    inf_over_K: float
    sup_over_torus_lower: float
    sup_over_torus_upper: float
    grid_resolution: float


class KSet(NamedTuple):
    points: np.ndarray  # (N, m) in [0, 1)
    ks: np.ndarray  # (N, n) generators


# --------------------------------------------------------------------------
# helpers


def lp_norm(Y, p: float) -> np.ndarray:
    return np.linalg.norm(_rows(Y), ord=p, axis=1)


def k_max(Q: float, n: int) -> int:
    """Number of integers in ``(0, Q^(1/n)]``; near-integers snap upward."""
    r = float(Q) ** (1.0 / n)
    nearest = round(r)
    if abs(r - nearest) <= 1e-12 * max(1.0, r):
        return int(nearest)
    return int(math.floor(r))


def gap_tolerance(q: GapQuery) -> float:
    """Slack used to treat a difference vector as zero (and for cone strictness).

    The floor is 1e-12; for large generators it grows with the rounding noise
    of ``B k`` so the two evaluation routes make the same decisions.
    """
    scale = 1.0 + float(np.abs(q.B.entries).sum(axis=1).max()) * k_max(q.Q, q.B.n)
    return max(CONE_ATOL, 64.0 * _EPS * scale)


def directional_inf(T, p: float, S: DirectionSpec, atol: float = CONE_ATOL) -> float:
    """Smallest ``L^p`` norm among members of ``T`` lying in ``cone(S)``; ``inf`` if none."""
    T = _rows(T)
    if T.size == 0:
        return math.inf
    mask = S.contains(T, atol)
    if not mask.any():
        return math.inf
    return float(lp_norm(T[mask], p).min())


def enumerate_K(B, Q: float) -> KSet:
    """Points ``B k mod 1`` for ``k`` in ``{1..floor(Q^(1/n))}^n``, duplicates kept."""
    B = as_form(B)
    kmax = k_max(Q, B.n)
    if kmax < 1:
        raise ValueError(f"K(B;Q) is empty for Q={Q}, n={B.n}")
    if kmax**B.n > K_BUDGET:
        raise BudgetError(f"|K| = {kmax}^{B.n} exceeds budget {K_BUDGET}")
    axes = [np.arange(1, kmax + 1, dtype=np.int64)] * B.n
    ks = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, B.n)
    raw = ks @ B.entries.T
    return KSet(points=raw - np.floor(raw), ks=ks)


def _shift_grid(W: int, m: int) -> np.ndarray:
    r = np.arange(-W, W + 1)
    return np.stack(np.meshgrid(*[r] * m, indexing="ij"), axis=-1).reshape(-1, m).astype(float)


def gap_direct(q: GapQuery, v) -> float:
    """Gap at ``v`` by scanning every ``k`` and integer shift.

    Shifts are taken from ``{-W..W}^m`` with ``W`` doubling from 1; a minimum
    no larger than ``W`` is final because every shift outside the window
    gives a vector of sup-norm at least ``W``.
    """
    B = q.B
    v = np.asarray(v, dtype=float).reshape(B.m)
    K = enumerate_K(B, q.Q)
    t = K.ks @ B.entries.T - v
    z = t - np.floor(t)
    atol = gap_tolerance(q)
    W = 1
    while W <= WINDOW_CAP:
        shifts = _shift_grid(W, B.m)
        chunk = max(1, 4_000_000 // len(shifts))
        best = math.inf
        for s in range(0, len(z), chunk):
            Y = (z[s:s + chunk, None, :] + shifts[None, :, :]).reshape(-1, B.m)
            best = min(best, directional_inf(Y, q.p, q.S, atol))
        if best <= W:
            return best
        W *= 2
    raise GapComputationError(f"no cone member within shift window {WINDOW_CAP}")


def build_UB(B) -> np.ndarray:
    """``[[I_n, 0], [B, I_m]]``."""
    B = as_form(B)
    U = np.eye(B.d)
    U[B.n:, : B.n] = B.entries
    return U


def build_AQ(Q: float, m: int, n: int) -> np.ndarray:
    """``diag(Q^(-1/n) I_n, Q^(1/m) I_m)``."""
    return np.diag(np.concatenate([np.full(n, Q ** (-1.0 / n)), np.full(m, Q ** (1.0 / m))]))


def phi(M, w, p: float, S: DirectionSpec, atol: float | None = None) -> float:
    """Least directional distance from ``w`` to ``y`` over ``(x, y)`` in ``M Z^d``, ``x`` in ``(0,1]^n``.

    Returns ``inf`` when no lattice point has ``x`` in ``(0,1]^n`` (checked for
    block lower-triangular ``M``).
    """
    M = np.asarray(M, dtype=float)
    w = np.atleast_1d(np.asarray(w, dtype=float))
    d, m = M.shape[0], w.size
    n = d - m
    if n < 1:
        raise ValueError("w must have fewer coordinates than M has rows")
    L = LatticeBasis(M)
    if atol is None:
        atol = max(CONE_ATOL, 64.0 * _EPS * max(1.0, float(np.abs(w).max()), float(np.abs(M).max())))
    mask = np.concatenate([np.ones(n, bool), np.zeros(m, bool)])
    W = 1.0
    seen_any = False
    while W <= WINDOW_CAP:
        lo = np.concatenate([np.zeros(n), w - W])
        hi = np.concatenate([np.ones(n), w + W])
        X = lattice_points_in_box(L, lo, hi, mask)
        seen_any = seen_any or len(X) > 0
        best = directional_inf(X[:, n:] - w, p, S, atol)
        if best <= W:
            return best
        if not seen_any and np.all(M[:n, n:] == 0):
            xs = lattice_points_in_box(LatticeBasis(M[:n, :n]), np.zeros(n), np.ones(n),
                                       np.ones(n, bool))
            if len(xs) == 0:
                return math.inf
        W *= 2
    raise GapComputationError(f"no cone member within window {WINDOW_CAP}")


def gap_via_lattice(q: GapQuery, v) -> float:
    """Gap at ``v`` as ``Q^(-1/m) phi(A_Q U_B, Q^(1/m) v)``."""
    B = q.B
    v = np.asarray(v, dtype=float).reshape(B.m)
    v = v - np.floor(v)  # the shift lies in the lattice, so this is exact in theory
    scale = q.Q ** (1.0 / B.m)
    M = build_AQ(q.Q, B.m, B.n) @ build_UB(B)
    val = phi(M, scale * v, q.p, q.S, atol=scale * gap_tolerance(q))
    return val / scale


# --------------------------------------------------------------------------
# batched evaluation


class GapEvaluator:
    """Vectorised gap evaluation for many ``v`` against one ``K(B;Q)``."""

    def __init__(self, q: GapQuery):
        self.q = q
        self.kset = enumerate_K(q.B, q.Q)
        self.atol = gap_tolerance(q)
        m = q.B.m
        pts = self.kset.points
        if m == 1:
            s = np.sort(pts[:, 0])
            self._ext = np.concatenate([s - 1.0, s, s + 1.0])
            self._right = bool(q.S.contains(np.array([[1.0]]))[0])
            self._left = bool(q.S.contains(np.array([[-1.0]]))[0])
        else:
            uniq = np.unique(pts, axis=0)
            shifts = _shift_grid(1, m)
            self._P = (uniq[:, None, :] + shifts[None, :, :]).reshape(-1, m)
            self._tree = cKDTree(self._P)
            self._r0 = min(1.0, len(uniq) ** (-1.0 / m))

    def __call__(self, V) -> np.ndarray:
        V = _rows(V)
        V = V - np.floor(V)
        if self.q.B.m == 1:
            return self._circle(V[:, 0])
        return self._tree_query(V)

    def _circle(self, v: np.ndarray) -> np.ndarray:
        ext, tol = self._ext, self.atol
        out = np.full(v.shape, np.inf)
        if self._right:
            i = np.searchsorted(ext, v + tol, side="right")
            out = np.minimum(out, ext[i] - v)
        if self._left:
            i = np.searchsorted(ext, v - tol, side="left") - 1
            out = np.minimum(out, v - ext[i])
        return out

    def _tree_query(self, V: np.ndarray) -> np.ndarray:
        out = np.empty(len(V))
        for s in range(0, len(V), 20_000):
            out[s:s + 20_000] = self._tree_chunk(V[s:s + 20_000])
        return out

    def _tree_chunk(self, V: np.ndarray) -> np.ndarray:
        q = self.q
        best = np.full(len(V), np.inf)
        todo = np.arange(len(V))
        if isinstance(q.S, FullSphere):
            kq = min(4, len(self._P))
            _, idx = self._tree.query(V, k=kq, p=q.p)
            Y = self._P[idx] - V[:, None, :]
            nrm = np.linalg.norm(Y, ord=q.p, axis=2)
            nrm[np.abs(Y).max(axis=2) <= self.atol] = np.inf
            vals = nrm.min(axis=1)
            # the kq-th neighbour bounds everything not returned
            done = np.isfinite(vals)
            best[done] = vals[done]
            todo = todo[~done]
        r = self._r0
        while len(todo):
            hits = self._tree.query_ball_point(V[todo], r, p=q.p, return_sorted=False)
            lengths = np.fromiter((len(h) for h in hits), dtype=np.int64, count=len(hits))
            vals = np.full(len(todo), np.inf)
            if lengths.sum():
                flat = np.concatenate([np.asarray(h, dtype=np.int64) for h in hits if len(h)])
                owner = np.repeat(np.arange(len(todo)), lengths)
                Y = self._P[flat] - V[todo][owner]
                ok = q.S.contains(Y, self.atol)
                np.minimum.at(vals, owner[ok], lp_norm(Y[ok], q.p))
            done = vals <= r
            best[todo[done]] = vals[done]
            todo = todo[~done]
            if r >= 1.0:
                break
            r = min(1.0, 2.0 * r)
        for i in todo:
            best[i] = gap_direct(q, V[i])
        return best


def torus_grid(h: float, m: int) -> tuple[np.ndarray, float]:
    """Uniform grid of spacing ``1/ceil(1/h)`` on ``[0,1)^m``."""
    G = int(math.ceil(1.0 / h - 1e-9))
    if G**m > GRID_BUDGET:
        raise BudgetError(f"grid of {G}^{m} points exceeds budget {GRID_BUDGET}")
    axis = np.arange(G) / G
    grid = np.stack(np.meshgrid(*[axis] * m, indexing="ij"), axis=-1).reshape(-1, m)
    return grid, 1.0 / G


def gap_stats(q: GapQuery, h: float, evaluator: GapEvaluator | None = None) -> GapStats:
    """Sup/inf of the gap over ``K(B;Q)`` and a bracket for its sup over the torus.

    The torus bracket takes the sup over ``K`` into account: the gap at a point
    of ``K`` excludes the point itself, so the function is only 1-Lipschitz
    away from ``K``. For restricted ``S`` no upper bound is certified.
    """
    m = q.B.m
    grid, h_used = torus_grid(h, m)
    ev = evaluator or GapEvaluator(q)
    gK = ev(ev.kset.points)
    sup_K, inf_K = float(gK.max()), float(gK.min())
    gmax = -math.inf
    for s in range(0, len(grid), 1_000_000):
        gmax = max(gmax, float(ev(grid[s:s + 1_000_000]).max()))
    lower = max(sup_K, gmax)
    if isinstance(q.S, FullSphere):
        upper = max(sup_K, gmax + h_used / 2.0 * m ** (1.0 / q.p))
    else:
        upper = math.inf
    return GapStats(sup_K, inf_K, lower, upper, h_used)


def distinct_gap_values(values, atol: float = 1e-9) -> np.ndarray:
    """Cluster sorted values whose consecutive differences are at most ``atol``."""
    s = np.sort(np.asarray(values, dtype=float))
    if s.size == 0:
        return s
    starts = np.concatenate([[True], np.diff(s) > atol])
    return s[starts]
