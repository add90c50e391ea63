import math

import numpy as np
import pytest
from scipy import stats

from kgap.bounds import (
    GrowthFunction,
    SweepRow,
    check_theorem_a,
    check_theorem_b,
    check_theorem_c,
    envelopes,
    km_probe,
    log_spaced,
    random_B,
    sweep,
    three_gap_row,
    three_gap_suite,
)
from kgap.gaps import FullSphere, Orthant

GOLDEN = (math.sqrt(5) - 1) / 2


def test_growth_functions():
    f = GrowthFunction("power", 1.0)
    assert f(3.0) == 9.0
    g = GrowthFunction("polylog", 0.5)
    assert g(2.0) == pytest.approx(2 * math.log(math.e + 2) ** 1.5)
    xs = np.linspace(0.1, 50, 200)
    assert np.all(np.diff(g(xs)) > 0)
    assert GrowthFunction.parse(g.to_string()) == g
    with pytest.raises(ValueError):
        GrowthFunction("power", 0.0)
    with pytest.raises(ValueError):
        GrowthFunction("exp", 1.0)


def test_random_B_determinism():
    assert random_B(2, 3, 5) == random_B(2, 3, 5)
    assert random_B(2, 3, 5) != random_B(2, 3, 6)


def test_random_B_uniform_ks():
    x = random_B(100, 100, 123).entries.ravel()
    assert len(x) == 10_000
    assert stats.kstest(x, "uniform").statistic < 0.02


def test_envelope_ordering():
    f = GrowthFunction("power", 1.0)
    for m in (1, 2, 3):
        for Q in log_spaced(20, 1e8, 9):
            a, b, c = envelopes(Q, m, f)
            assert c <= b <= a


def test_sweep_rational_example():
    f = GrowthFunction("power", 1.0)
    (row,) = sweep([[0.5]], [4.0], math.inf, FullSphere(), f, h=1e-3)
    assert row.sup_K == pytest.approx(0.5)
    assert row.bound_a == pytest.approx(0.25 * math.log(4) ** 2)
    assert row.ratio_a > 1
    assert not check_theorem_a([row]).rows[0]


def test_sweep_rows_in_order_with_workers():
    B = random_B(1, 1, 3)
    Qs = log_spaced(1e2, 1e4, 5)
    a = sweep(B, Qs, h=1e-4)
    b = sweep(B, Qs, h=1e-4, max_workers=3)
    assert [r.Q for r in b] == Qs
    assert [r.sup_K for r in a] == [r.sup_K for r in b]
    for r in a:
        assert r.inf_K <= r.sup_K


def test_sweep_records_budget_errors():
    rows = sweep(random_B(2, 1, 0), [10.0], h=1e-4)
    assert rows[0].status.startswith("error:BudgetError")
    assert check_theorem_b(rows).rows == [None]


def test_sweep_rejects_unsorted():
    with pytest.raises(ValueError):
        sweep([[0.3]], [10.0, 5.0])


def test_theorem_a_irrational_large_Q():
    f = GrowthFunction("power", 1.0)
    (row,) = sweep(random_B(1, 1, 11), [1e6], h=1e-5, f=f)
    assert row.sup_K * 1e6 < f(math.log(1e6))


def _row(Q, sup_up, sup_lo, inf_K, m=1):
    a, b, c = envelopes(Q, m, GrowthFunction("power", 1.0))
    return SweepRow(Q, sup_lo, inf_K, sup_lo, sup_up, a, b, c)


def test_check_a_trivial_pass_and_tail():
    rows = [_row(3.0, 2.0, 0.5, 0.1), _row(1e4, 0.5, 0.5, 0.1), _row(1e5, 1e-5, 1e-5, 1e-6)]
    rows[0].bound_a = 1.5  # above the sup-norm diameter of the torus
    v = check_theorem_a(rows)
    assert v.rows[0] is True
    assert v.rows[1] is False
    assert v.tail_start == 1 and not v.tail


def test_check_c_gate_and_boundedness():
    rows = [_row(Q, 1.0, 1.0, 1.0 / Q) for Q in log_spaced(1e2, 1e5, 6)]
    v = check_theorem_c(rows, FullSphere())
    assert v.notes["bounded"] and v.notes["full_max"] == pytest.approx(1.0)
    v = check_theorem_c(rows, Orthant((1, 1)), m=2)
    assert not v.notes["upper_checked"] and "bounded" not in v.notes
    grow = [_row(Q, 1.0, 1.0, 10.0 / math.sqrt(Q)) for Q in log_spaced(1e2, 1e6, 6)]
    assert not check_theorem_c(grow, FullSphere()).notes["bounded"]


def test_equally_spaced_scaled_inf():
    (row,) = sweep([[1 / 3]], [3.0], math.inf, Orthant((1,)), h=1e-3)
    assert row.inf_K * 3 == pytest.approx(1.0)


def test_km_zero_matrix_diagonal():
    rows = km_probe(np.zeros((1, 2)), [100.0])
    lam = rows[0].lambdas
    assert np.allclose(lam, sorted([100 ** -0.5] * 2 + [100.0]))


def test_km_rows_sane():
    rows = km_probe(random_B(2, 2, 1), log_spaced(10, 1e5, 5))
    for r in rows:
        assert np.all(np.diff(r.lambdas) >= 0)
        assert 2.0 ** -16 <= r.product <= 4.0 ** 2
    assert len(rows[0].lower_env) == 3 and len(rows[0].upper_env) == 3


def test_km_dimension_cap():
    with pytest.raises(ValueError):
        km_probe(random_B(4, 3, 0), [10.0])


def test_three_gap_examples():
    r = three_gap_row(1 / 3, 3)
    assert r.distinct_gaps == 1 and r.gap_values[0] == pytest.approx(1 / 3)
    assert r.sum == pytest.approx(1.0)
    rows = three_gap_suite([GOLDEN, math.sqrt(2) - 1], [1e3, 1e4])
    assert all(x.passed for x in rows)
