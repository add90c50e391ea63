"""Empirical tracking of the gap-size envelopes and the minima zero-one law."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import KgapError
from .gaps import (
    FullSphere,
    GapEvaluator,
    GapQuery,
    Orthant,
    as_form,
    build_AQ,
    build_UB,
    distinct_gap_values,
    gap_stats,
    LinearFormMatrix,
)
from .lattice import reduce_full_rank, successive_minima

KM_MAX_DIM = 6


@dataclass(frozen=True)
class GrowthFunction:
    """Increasing ``f`` with a summable reciprocal.

    ``polylog``: ``x * log(e + x)**(1 + eps)``; ``power``: ``x**(1 + eps)``.
    """

    family: str
    epsilon: float

    def __post_init__(self):
        if self.family not in ("polylog", "power"):
            raise ValueError(f"unknown growth family {self.family!r}")
        if not self.epsilon > 0:
            raise ValueError("epsilon must be positive")

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        if self.family == "power":
            out = x ** (1.0 + self.epsilon)
        else:
            out = x * np.log(math.e + x) ** (1.0 + self.epsilon)
        return float(out) if out.ndim == 0 else out

    def to_string(self) -> str:
        return f"{self.family}:{self.epsilon!r}"

    @classmethod
    def parse(cls, text: str) -> "GrowthFunction":
        fam, _, eps = text.partition(":")
        if not eps:
            raise ValueError(f"growth spec needs family:epsilon, got {text!r}")
        return cls(fam.strip().lower(), float(eps))


def random_B(m: int, n: int, seed: int) -> LinearFormMatrix:
    """I.i.d. uniform ``[0, 1)`` entries from numpy's PCG64 seeded with ``seed``."""
    rng = np.random.Generator(np.random.PCG64(seed))
    return LinearFormMatrix(rng.random((m, n)))


def log_spaced(start: float, stop: float, count: int) -> list[float]:
    return [float(x) for x in np.geomspace(start, stop, count)]


@dataclass
class SweepRow:
    Q: float
    sup_K: float
    inf_K: float
    sup_torus_lower: float
    sup_torus_upper: float
    bound_a: float
    bound_b: float
    bound_c_low: float
    status: str = "ok"

    @property
    def ratio_a(self) -> float:
        return self.sup_torus_upper / self.bound_a

    @property
    def ratio_b(self) -> float:
        return self.sup_torus_lower / self.bound_b

    @property
    def ratio_c(self) -> float:
        return self.inf_K / self.bound_c_low

    @property
    def ok(self) -> bool:
        return self.status == "ok"


def envelopes(Q: float, m: int, f: GrowthFunction) -> tuple[float, float, float]:
    """``(bound_a, bound_b, bound_c_low)`` at ``Q``."""
    fl = f(math.log(Q))
    base = Q ** (-1.0 / m)
    return base * fl ** (1.0 / m), base * fl ** (-1.0 / m**2), base * fl ** (-1.0 / m)


def _sweep_row(B, Q, p, S, f, h) -> SweepRow:
    a, b, c = envelopes(Q, B.m, f)
    try:
        st = gap_stats(GapQuery(B, Q, p, S), h)
    except KgapError as exc:
        nan = math.nan
        return SweepRow(Q, nan, nan, nan, nan, a, b, c, status=f"error:{type(exc).__name__}:{exc}")
    return SweepRow(Q, st.sup_over_K, st.inf_over_K, st.sup_over_torus_lower,
                    st.sup_over_torus_upper, a, b, c)


def sweep(B, Q_list, p=math.inf, S=FullSphere(), f=GrowthFunction("power", 1.0),
          h: float = 1e-4, max_workers: int | None = None) -> list[SweepRow]:
    """Gap statistics and the three envelopes for each ``Q`` (in input order)."""
    B = as_form(B)
    Q_list = [float(x) for x in Q_list]
    if any(b <= a for a, b in zip(Q_list, Q_list[1:])):
        raise ValueError("Q_list must be strictly increasing")
    if max_workers and max_workers > 1:
        with ThreadPoolExecutor(max_workers) as pool:
            return list(pool.map(lambda Q: _sweep_row(B, Q, p, S, f, h), Q_list))
    return [_sweep_row(B, Q, p, S, f, h) for Q in Q_list]


@dataclass
class Verdict:
    """Per-row pass flags (``None`` = not evaluated) plus the tail verdict."""

    rows: list[bool | None]
    tail: bool
    tail_start: int
    notes: dict = field(default_factory=dict)


def _tail_start(count: int, tail: float) -> int:
    return int(math.floor(count * (1.0 - tail) + 1e-9))


def _verdict(flags, tail: float, notes=None) -> Verdict:
    start = _tail_start(len(flags), tail)
    tail_flags = [x for x in flags[start:] if x is not None]
    return Verdict(list(flags), bool(tail_flags) and all(tail_flags), start, notes or {})


def check_theorem_a(rows, m: int = 1, p: float = math.inf, full_sphere: bool = True,
                    tail: float = 2.0 / 3.0) -> Verdict:
    """Upper envelope: ``sup_torus_upper < bound_a``.

    With the full sphere the gap never exceeds ``m**(1/p)``, so rows whose
    envelope is above that pass without looking at the data.
    """
    flags = []
    for r in rows:
        if not r.ok:
            flags.append(None)
        elif full_sphere and r.bound_a > m ** (1.0 / p):
            flags.append(True)
        else:
            flags.append(bool(r.sup_torus_upper < r.bound_a))
    return _verdict(flags, tail)


def check_theorem_b(rows, tail: float = 2.0 / 3.0) -> Verdict:
    """Lower envelope on the torus sup: ``sup_torus_lower > bound_b``."""
    flags = [None if not r.ok else bool(r.sup_torus_lower > r.bound_b) for r in rows]
    return _verdict(flags, tail)


def check_theorem_c(rows, S, m: int = 1, tail: float = 2.0 / 3.0) -> Verdict:
    """Lower envelope on the inf over ``K`` and, when ``S`` u ``-S`` covers, boundedness.

    The boundedness part tracks ``inf_K * Q**(1/m)``; it reports the full-sweep
    max, the max over the final third and over the leading two thirds, and
    passes when the final-third max is at most twice the leading max.
    """
    flags = [None if not r.ok else bool(r.inf_K > r.bound_c_low) for r in rows]
    notes: dict = {"upper_checked": S.symmetric_closure_covers(m)}
    if notes["upper_checked"]:
        scaled = [r.inf_K * r.Q ** (1.0 / m) for r in rows if r.ok]
        if scaled:
            cut = len(scaled) - max(1, len(scaled) // 3)
            head = scaled[:cut] or scaled
            notes.update(
                scaled_inf=scaled,
                full_max=max(scaled),
                final_third_max=max(scaled[cut:]),
                head_max=max(head),
            )
            notes["bounded"] = notes["final_third_max"] <= 2.0 * notes["head_max"]
        else:
            notes["bounded"] = False
    return _verdict(flags, tail, notes)


@dataclass
class KMRow:
    R: float
    lambdas: np.ndarray
    lower_env: np.ndarray  # index i-1 for i = 1..d-1
    upper_env: np.ndarray  # index j-2 for j = 2..d

    @property
    def lower_flags(self) -> np.ndarray:
        return self.lambdas[:-1] > self.lower_env

    @property
    def upper_flags(self) -> np.ndarray:
        return self.lambdas[1:] < self.upper_env

    @property
    def product(self) -> float:
        return float(np.prod(self.lambdas))


def km_probe(B, R_list, f: GrowthFunction = GrowthFunction("power", 1.0)) -> list[KMRow]:
    """Successive minima of ``A_R U_B`` against the zero-one-law envelopes."""
    B = as_form(B)
    d = B.d
    if d > KM_MAX_DIM:
        raise ValueError(f"km_probe supports d <= {KM_MAX_DIM}, got {d}")
    U = build_UB(B)
    rows = []
    for R in R_list:
        lam = successive_minima(reduce_full_rank(build_AQ(R, B.m, B.n) @ U)).values
        fl = f(math.log(R))
        lower = np.array([fl ** (-1.0 / (d * i)) for i in range(1, d)])
        upper = np.array([fl ** (1.0 / (d * (d - j + 1))) for j in range(2, d + 1)])
        rows.append(KMRow(float(R), lam, lower, upper))
    return rows


@dataclass
class ThreeGapRow:
    alpha: float
    Q: float
    distinct_gaps: int
    gap_values: list[float]
    sum: float

    @property
    def passed(self) -> bool:
        return self.distinct_gaps <= 3 and abs(self.sum - 1.0) <= 1e-9


def three_gap_row(alpha: float, Q: float, atol: float = 1e-9) -> ThreeGapRow:
    q = GapQuery([[alpha]], Q, math.inf, Orthant((1,)))
    ev = GapEvaluator(q)
    pts = ev.kset.points[:, 0]
    gaps = ev(pts[:, None])
    # each point of the circle contributes its gap once
    s = np.sort(pts)
    first = np.concatenate([[True], np.diff(s) > ev.atol])
    total = float(ev(s[first][:, None]).sum())
    values = distinct_gap_values(gaps, atol)
    return ThreeGapRow(float(alpha), float(Q), len(values), [float(x) for x in values], total)


def three_gap_suite(alpha_list, Q_list, atol: float = 1e-9) -> list[ThreeGapRow]:
    return [three_gap_row(a, Q, atol) for a in alpha_list for Q in Q_list]
