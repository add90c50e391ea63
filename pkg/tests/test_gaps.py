import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from kgap.errors import BudgetError
from kgap.gaps import (
    AngularCone,
    FullSphere,
    GapEvaluator,
    GapQuery,
    HalfSphere,
    LinearFormMatrix,
    Orthant,
    build_AQ,
    build_UB,
    directional_inf,
    distinct_gap_values,
    enumerate_K,
    gap_direct,
    gap_stats,
    gap_via_lattice,
    k_max,
    parse_direction,
    phi,
)

from oracles import brute_gap


def rng(seed):
    return np.random.Generator(np.random.PCG64(seed))


# -- direction sets ---------------------------------------------------------------


def test_direction_membership():
    assert list(FullSphere().contains([[0, 0], [1e-13, 0], [0, 1]])) == [False, False, True]
    o = Orthant((1, -1))
    assert list(o.contains([[1, -1], [1, 1], [1, 0]])) == [True, False, False]
    h = HalfSphere((2.0, 0.0))
    assert h.normal == (1.0, 0.0)
    assert list(h.contains([[1, 5], [-1, 0], [0, 1]])) == [True, False, False]
    c = AngularCone((0.0, 1.0), 0.5)
    assert list(c.contains([[0, 1], [1, 1], [0, 0]])) == [True, False, False]


def test_symmetric_closure_flags():
    assert FullSphere().symmetric_closure_covers(3)
    assert HalfSphere((1.0, 0.0)).symmetric_closure_covers(2)
    assert Orthant((1,)).symmetric_closure_covers(1)
    assert not Orthant((1, 1)).symmetric_closure_covers(2)
    assert not AngularCone((1.0, 0.0), 0.3).symmetric_closure_covers(2)


@pytest.mark.parametrize("text", ["full", "orthant:+-", "half:1.0,0.0", "cone:1.0,0.0:0.5"])
def test_parse_direction_roundtrip(text):
    S = parse_direction(text)
    assert parse_direction(S.to_string()) == S


def test_parse_direction_rejects_junk():
    with pytest.raises(ValueError):
        parse_direction("orthant:+x")


def test_directional_inf_examples():
    assert directional_inf([[1, 0], [-1, 0]], 2, HalfSphere((1.0, 0.0))) == 1.0
    assert directional_inf([[-1, 0]], 2, Orthant((1, 1))) == math.inf
    T = rng(0).standard_normal((1000, 3))
    assert directional_inf(T, 1, FullSphere()) == pytest.approx(np.abs(T).sum(1).min())


# -- K(B;Q) -------------------------------------------------------------------------


def test_enumerate_K_examples():
    assert np.allclose(enumerate_K([[0.5]], 3).points[:, 0], [0.5, 0.0, 0.5])
    K = enumerate_K([[0.25], [0.5]], 2)
    assert np.allclose(K.points, [[0.25, 0.5], [0.5, 0.0]])
    K = enumerate_K(rng(1).random((1, 2)), 100)
    assert len(K.points) == 100 and K.ks.shape == (100, 2)


def test_k_max_snaps_near_integers():
    assert k_max(1000.0, 3) == 10
    assert k_max(8.0 - 1e-15, 3) == 2
    assert k_max(7.99, 3) == 1


def test_enumerate_K_budget():
    with pytest.raises(BudgetError):
        enumerate_K([[0.1]], 2e7)


# -- builders and the lattice route ---------------------------------------------------


def test_builders():
    assert np.array_equal(build_UB(np.zeros((2, 1))), np.eye(3))
    assert np.allclose(build_AQ(1.0, 2, 2), np.eye(4))
    B = rng(2).random((2, 2))
    assert np.linalg.det(build_AQ(37.0, 2, 2) @ build_UB(B)) == pytest.approx(1.0, rel=1e-9)


def test_phi_examples():
    # zero is not in any cone, so the nearest admissible y for w = 0 is at distance 1
    assert phi(np.eye(2), [0.0], math.inf, FullSphere()) == pytest.approx(1.0)
    assert phi(np.eye(2), [0.3], 2, FullSphere()) == pytest.approx(0.3)
    assert phi(np.diag([2.0, 1.0]), [0.3], 2, FullSphere()) == math.inf


def test_gap_examples():
    q = GapQuery([[0.25]], 4, math.inf, Orthant((1,)))
    assert gap_direct(q, [0.0]) == pytest.approx(0.25)
    assert gap_via_lattice(q, [0.0]) == pytest.approx(0.25)
    q = GapQuery([[0.25]], 4, math.inf, Orthant((-1,)))
    assert gap_direct(q, [0.0]) == pytest.approx(0.25)
    q = GapQuery([[0.5]], 3, 2, FullSphere())
    assert gap_via_lattice(q, [0.1]) == pytest.approx(0.1)
    assert gap_direct(q, [0.1]) == pytest.approx(0.1)


def test_gap_matches_widened_window_oracle():
    B = rng(3).random((2, 1))
    q = GapQuery(B, 50, 2, FullSphere())
    v = [0.3, 0.7]
    want = brute_gap(B, 50, v, 2, lambda y: np.abs(y).max() > 1e-12, window=3)
    assert gap_direct(q, v) == pytest.approx(want, rel=1e-12)
    assert gap_via_lattice(q, v) == pytest.approx(want, rel=1e-9)


def _random_direction(g, m):
    kind = g.integers(4)
    if kind == 0:
        return FullSphere()
    if kind == 1:
        return Orthant(tuple(int(s) for s in g.choice([-1, 1], m)))
    if kind == 2:
        return HalfSphere(tuple(g.standard_normal(m)))
    return AngularCone(tuple(g.standard_normal(m)), float(g.uniform(0.4, 2.5)))


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10**6))
def test_path_equivalence_property(seed):
    g = rng(seed)
    m, n = int(g.integers(1, 3)), int(g.integers(1, 3))
    Q = float(g.uniform(2, 400))
    p = float(g.choice([1.0, 2.0, 3.5, math.inf]))
    q = GapQuery(g.random((m, n)), Q, p, _random_direction(g, m))
    v = g.uniform(-1, 2, m)
    a, b = gap_direct(q, v), gap_via_lattice(q, v)
    assert abs(a - b) <= 1e-9 * max(1.0, a)


@pytest.mark.parametrize("seed", range(4))
def test_gap_direct_matches_brute(seed):
    g = rng(50 + seed)
    m = 1 + seed % 2
    B = g.random((m, 1))
    S = HalfSphere(tuple(g.standard_normal(m)))
    v = g.random(m)
    q = GapQuery(B, 30, 1.0, S)
    want = brute_gap(B, 30, v, 1.0, lambda y: float(y @ np.asarray(S.normal)) > 1e-12, window=3)
    assert gap_direct(q, v) == pytest.approx(want, rel=1e-12)


@pytest.mark.parametrize("seed", range(5))
def test_shift_invariance(seed):
    g = rng(seed)
    q = GapQuery(g.random((2, 1)), 80, 2, Orthant((1, -1)))
    v = g.random(2)
    z = g.integers(-3, 4, 2)
    assert gap_direct(q, v + z) == pytest.approx(gap_direct(q, v), abs=1e-9)
    assert gap_via_lattice(q, v + z) == pytest.approx(gap_via_lattice(q, v), abs=1e-9)


def test_staircase_in_Q():
    B = [[0.3141], [0.2718]]
    v = [0.4, 0.1]
    a = gap_direct(GapQuery(B, 10.0, 2), v)
    b = gap_direct(GapQuery(B, 10.9, 2), v)
    assert a == b


@pytest.mark.parametrize("p", [1.0, 2.0, math.inf])
def test_full_sphere_lipschitz(p):
    g = rng(7)
    q = GapQuery(g.random((2, 2)), 300, p)
    ev = GapEvaluator(q)
    V = g.random((200, 2))
    W = V + g.normal(scale=0.01, size=V.shape)
    dv = np.linalg.norm(V - W, ord=p, axis=1)
    assert np.all(np.abs(ev(V) - ev(W)) <= dv + 1e-12)


# -- batched evaluator and stats ---------------------------------------------------------


@pytest.mark.parametrize("seed", range(6))
def test_evaluator_agrees_with_direct(seed):
    g = rng(seed)
    m, n = 1 + seed % 2, 1 + (seed // 2) % 2
    q = GapQuery(g.random((m, n)), 150, float(g.choice([1.0, 2.0, math.inf])), _random_direction(g, m))
    ev = GapEvaluator(q)
    V = np.vstack([g.random((20, m)), ev.kset.points[:10]])
    got = ev(V)
    want = np.array([gap_direct(q, v) for v in V])
    assert np.allclose(got, want, rtol=1e-12, atol=1e-13)


def test_gap_stats_examples():
    s = gap_stats(GapQuery([[1 / 3]], 3, math.inf, Orthant((1,))), 1e-3)
    assert s.sup_over_K == pytest.approx(1 / 3) and s.inf_over_K == pytest.approx(1 / 3)
    s = gap_stats(GapQuery([[0.5]], 3, math.inf, Orthant((1,))), 1e-3)
    assert s.sup_over_K == pytest.approx(0.5) and s.inf_over_K == pytest.approx(0.5)
    assert s.sup_over_torus_upper == math.inf


def test_gap_stats_bracket_width():
    B = rng(11).random((1, 1))
    s = gap_stats(GapQuery(B, 1e3, math.inf), 1e-4)
    assert s.sup_over_torus_upper - s.sup_over_torus_lower <= 5e-5 + 1e-15
    assert s.inf_over_K <= s.sup_over_K <= s.sup_over_torus_upper
    assert s.sup_over_torus_lower <= s.sup_over_torus_upper


def test_gap_stats_grid_budget():
    with pytest.raises(BudgetError):
        gap_stats(GapQuery(np.ones((2, 1)) * 0.3, 10), 1e-4)


def test_distinct_values_clustering():
    assert len(distinct_gap_values([0.1, 0.1 + 1e-12, 0.2, 0.3, 0.3])) == 3


def test_linear_form_validation():
    with pytest.raises(ValueError):
        LinearFormMatrix([[np.nan]])
    with pytest.raises(ValueError):
        GapQuery([[0.5]], 10, p=0.5)
