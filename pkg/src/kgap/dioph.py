"""Uniform Diophantine approximation restricted to congruence classes.

For an ``m x n`` matrix ``B``, an integer ``N`` and a decreasing ``phi`` the
system

    ||B n - m||_inf^m < N^m phi(Q)    and    ||n||_inf^n < (N/2)^n Q

is solved by exhaustive scan inside a prescribed class of ``Z^d / N Z^d``.
Class representatives are ordered ``(m-part, n-part)`` throughout.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import NamedTuple

import numpy as np

from .bounds import GrowthFunction
from .errors import BudgetError
from .gaps import FullSphere, GapQuery, LinearFormMatrix, as_form, gap_stats

SCAN_BUDGET = 10**7
CLASS_BUDGET = 10**5
STRICT_SLACK = 1e-12


@dataclass(frozen=True)
class PhiConst:
    c: float

    def __call__(self, Q: float, m: int = 1) -> float:
        return float(self.c)

    def to_string(self) -> str:
        return f"const:{self.c!r}"


@dataclass(frozen=True)
class PhiPower:
    """``c * Q**-1 * f(log Q)`` (``inverse=False``) or ``c * Q**-1 * f(log Q)**(-1/m)``."""

    c: float
    f: GrowthFunction
    inverse: bool = False

    def __call__(self, Q: float, m: int = 1) -> float:
        g = self.f(math.log(Q))
        if self.inverse:
            g = g ** (-1.0 / m)
        return self.c * g / Q

    def to_string(self) -> str:
        kind = "qfinv" if self.inverse else "qf"
        return f"{kind}:{self.c!r}:{self.f.to_string()}"


def parse_phi(text: str):
    """``const:C``, ``qf:C:family:eps`` or ``qfinv:C:family:eps``."""
    parts = text.strip().split(":")
    if parts[0] == "const" and len(parts) == 2:
        return PhiConst(float(parts[1]))
    if parts[0] in ("qf", "qfinv") and len(parts) == 4:
        f = GrowthFunction(parts[2].lower(), float(parts[3]))
        return PhiPower(float(parts[1]), f, inverse=parts[0] == "qfinv")
    raise ValueError(f"cannot parse phi spec {text!r}")


@dataclass(frozen=True)
class CongruenceInstance:
    B: LinearFormMatrix
    N: int
    Q: float
    phi: PhiConst | PhiPower

    def __post_init__(self):
        object.__setattr__(self, "B", as_form(self.B))
        if int(self.N) != self.N or self.N < 1:
            raise ValueError(f"N must be a positive integer, got {self.N}")
        object.__setattr__(self, "N", int(self.N))
        if not self.Q > 0:
            raise ValueError("Q must be positive")
        m = self.B.m
        samples = np.geomspace(self.Q / 2.0, self.Q * 2.0, 5)
        vals = [self.phi(s, m) for s in samples]
        if not all(v > 0 for v in vals):
            raise ValueError("phi must be positive")
        if any(b > a * (1 + 1e-12) for a, b in zip(vals, vals[1:])):
            raise ValueError(f"phi is not decreasing near Q={self.Q}")

    @property
    def phi_value(self) -> float:
        return self.phi(self.Q, self.B.m)

    @property
    def n_bound(self) -> float:
        """Strict bound on ``|n_i|``."""
        return self.N / 2.0 * self.Q ** (1.0 / self.B.n)

    def with_N(self, N: int) -> "CongruenceInstance":
        return CongruenceInstance(self.B, N, self.Q, self.phi)


class ClassWitness(NamedTuple):
    class_rep: tuple[int, ...]
    solution: tuple[tuple[int, ...], tuple[int, ...]] | None

    @property
    def solvable(self) -> bool:
        return self.solution is not None


def _residue_values(r: int, N: int, bound: float) -> np.ndarray:
    """Integers ``t = r (mod N)`` with ``|t| < bound``, ordered by ``|t|`` then positive first."""
    lim = bound - STRICT_SLACK * max(1.0, bound)
    lo = math.ceil((-lim - r) / N)
    hi = math.floor((lim - r) / N)
    t = r + N * np.arange(lo, hi + 1, dtype=np.int64)
    t = t[np.abs(t) < lim]
    return t[np.lexsort((t < 0, np.abs(t)))]


def _scan_order(cands: list[np.ndarray]) -> np.ndarray:
    """All vectors from per-coordinate candidates, by sup-norm then coordinate keys."""
    grids = np.meshgrid(*cands, indexing="ij")
    V = np.stack([g.ravel() for g in grids], axis=1)
    keys = []
    for j in range(V.shape[1] - 1, -1, -1):
        keys += [V[:, j] < 0, np.abs(V[:, j])]
    keys.append(np.abs(V).max(axis=1))
    return V[np.lexsort(keys)]


def _nearest_in_class(x: np.ndarray, r: np.ndarray, N: int) -> np.ndarray:
    """Closest integer ``= r (mod N)`` to each entry of ``x``; ties to smaller ``|t|``, then positive."""
    base = r + N * np.floor((x - r) / N)
    up = base + N
    d0, d1 = np.abs(x - base), np.abs(up - x)
    pick_up = (d1 < d0) | ((d1 == d0) & ((np.abs(up) < np.abs(base)) | ((np.abs(up) == np.abs(base)) & (up > 0))))
    return np.where(pick_up, up, base).astype(np.int64)


class _Scanner:
    """Per n-residue cache of the ordered n-vectors and their images ``B n``."""

    def __init__(self, inst: CongruenceInstance):
        self.inst = inst
        self._cache: dict[tuple[int, ...], tuple[np.ndarray, np.ndarray]] = {}
        m = inst.B.m
        rhs = inst.N ** m * inst.phi_value
        self.rhs = rhs - STRICT_SLACK * max(1.0, rhs)

    def n_vectors(self, r_n: tuple[int, ...]):
        if r_n not in self._cache:
            inst = self.inst
            cands = [_residue_values(r, inst.N, inst.n_bound) for r in r_n]
            total = math.prod(len(c) for c in cands)
            if total > SCAN_BUDGET:
                raise BudgetError(f"{total} candidate n-vectors exceed budget {SCAN_BUDGET}")
            if total == 0:
                V = np.zeros((0, len(r_n)), dtype=np.int64)
            else:
                V = _scan_order(cands)
            self._cache[r_n] = (V, V @ inst.B.entries.T)
        return self._cache[r_n]

    def solve(self, rep: tuple[int, ...]) -> ClassWitness:
        inst = self.inst
        m = inst.B.m
        r_m, r_n = np.array(rep[:m]), tuple(rep[m:])
        V, X = self.n_vectors(r_n)
        if len(V) == 0:
            return ClassWitness(tuple(rep), None)
        M = _nearest_in_class(X, r_m, inst.N)
        err = np.abs(X - M).max(axis=1) ** m
        hit = np.flatnonzero(err < self.rhs)
        if len(hit) == 0:
            return ClassWitness(tuple(rep), None)
        i = hit[0]
        return ClassWitness(tuple(rep), (tuple(int(x) for x in M[i]), tuple(int(x) for x in V[i])))


def _check_rep(inst: CongruenceInstance, class_rep) -> tuple[int, ...]:
    rep = tuple(int(x) for x in class_rep)
    if len(rep) != inst.B.d or any(not 0 <= x < inst.N for x in rep):
        raise ValueError(f"class representative must be {inst.B.d} integers in [0, {inst.N})")
    return rep


def solve_in_class(inst: CongruenceInstance, class_rep) -> ClassWitness:
    """First solution of the system in the class ``class_rep`` (or ``None``).

    ``n`` is scanned by increasing sup-norm, then coordinatewise by ``|n_i|``
    with positive before negative; ``m`` is the nearest admissible integer
    to ``B n`` in each coordinate.
    """
    return _Scanner(inst).solve(_check_rep(inst, class_rep))


def class_representatives(N: int, d: int):
    return itertools.product(range(N), repeat=d)


def all_classes_solvable(inst: CongruenceInstance, stop_at_first_failure: bool = False):
    """Solve every class modulo ``N`` in lexicographic order of representatives."""
    d = inst.B.d
    if inst.N**d > CLASS_BUDGET:
        raise BudgetError(f"{inst.N}^{d} classes exceed budget {CLASS_BUDGET}")
    scanner = _Scanner(inst)
    out = []
    ok = True
    for rep in class_representatives(inst.N, d):
        w = scanner.solve(rep)
        out.append(w)
        if not w.solvable:
            ok = False
            if stop_at_first_failure:
                break
    return ok, out


def verify_witness(inst: CongruenceInstance, witness: ClassWitness) -> bool:
    """Re-check a witness with exact rational arithmetic on the stored floats."""
    if witness.solution is None:
        return False
    mvec, nvec = witness.solution
    B = inst.B.entries
    m, n = inst.B.m, inst.B.n
    rep = witness.class_rep
    if any((mvec[i] - rep[i]) % inst.N for i in range(m)):
        return False
    if any((nvec[j] - rep[m + j]) % inst.N for j in range(n)):
        return False
    resid = max(abs(sum(Fraction(B[i, j]) * nvec[j] for j in range(n)) - mvec[i]) for i in range(m))
    rhs = inst.N**m * inst.phi_value
    if not float(resid) ** m < rhs:
        return False
    return all(abs(x) ** n < (inst.N / 2.0) ** n * inst.Q for x in nvec)


class CoveringResult(NamedTuple):
    covers: bool | None  # None: the bracket straddles phi^(1/m)
    radius: float
    bracket: tuple[float, float]

    @property
    def margin(self) -> float:
        lo, hi = self.bracket
        if self.covers is True:
            return self.radius - hi
        if self.covers is False:
            return lo - self.radius
        return 0.0


def default_grid(Q: float, m: int) -> float:
    return min(1e-3, 0.05 * Q ** (-1.0 / m))


def covering_condition(B, Q: float, phi, h: float | None = None) -> CoveringResult:
    """Compare ``phi(Q)^(1/m)`` with the torus-sup bracket (``p = inf``, full sphere)."""
    B = as_form(B)
    m = B.m
    h = default_grid(Q, m) if h is None else h
    st = gap_stats(GapQuery(B, Q, math.inf, FullSphere()), h)
    r = phi(Q, m) ** (1.0 / m)
    lo, hi = st.sup_over_torus_lower, st.sup_over_torus_upper
    if r >= hi:
        status = True
    elif r < lo:
        status = False
    else:
        status = None
    return CoveringResult(status, r, (lo, hi))


@dataclass
class Prop8Row:
    N: int
    solvable: bool
    classes_checked: int
    failing_class: tuple[int, ...] | None
    contradiction: bool
    witnesses: list[ClassWitness] = field(default_factory=list, repr=False)


@dataclass
class Prop8Report:
    B: LinearFormMatrix
    Q: float
    phi: PhiConst | PhiPower
    covering: CoveringResult
    rows: list[Prop8Row] = field(default_factory=list)
    status: str = ""
    smallest_failing_N: int | None = None
    largest_N_tested: int | None = None

    @property
    def contradictions(self) -> list[Prop8Row]:
        return [r for r in self.rows if r.contradiction]

    def instance(self, N: int) -> CongruenceInstance:
        return CongruenceInstance(self.B, N, self.Q, self.phi)


def proposition8_crosscheck(B, Q: float, phi, N_list, h: float | None = None,
                            full_scan: bool = False) -> Prop8Report:
    """Cross-check the covering test against class-by-class solvability.

    Covering implies every class is solvable for every ``N`` (a failure is a
    contradiction). Non-covering only promises a failing class for large
    ``N``; the report gives the smallest failing ``N`` seen, or says none
    was exhibited up to the largest ``N`` tested. With ``full_scan`` every
    class is solved even after a failure, and even when the bracket is
    indeterminate.
    """
    B = as_form(B)
    cov = covering_condition(B, Q, phi, h)
    report = Prop8Report(B, Q, phi, cov, largest_N_tested=max(N_list) if N_list else None)
    if cov.covers is None and not full_scan:
        report.status = "skipped: indeterminate bracket"
        return report
    for N in sorted(N_list):
        ok, wits = all_classes_solvable(report.instance(N), stop_at_first_failure=not (cov.covers or full_scan))
        failing = next((w.class_rep for w in wits if not w.solvable), None)
        report.rows.append(Prop8Row(N, ok, len(wits), failing, bool(cov.covers and not ok), wits))
        if not ok and report.smallest_failing_N is None:
            report.smallest_failing_N = N
    if cov.covers is None:
        report.status = "skipped: indeterminate bracket"
        return report
    if cov.covers:
        report.status = "contradiction" if report.contradictions else "consistent: all classes solvable"
    elif report.smallest_failing_N is not None:
        report.status = f"consistent: failing class at N={report.smallest_failing_N}"
    else:
        report.status = f"not exhibited up to N={report.largest_N_tested}"
    return report
