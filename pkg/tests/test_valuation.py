import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from dispatchkit.core import Instance, rng_from_seed
from dispatchkit.valuation import (
    DriverView,
    ValuationKind,
    ba_value,
    closure_table,
    closure_value,
    fa_threshold,
    fa_value,
    mnl_value,
    simulate,
    subset_values,
    value,
    welfare,
)
from dispatchkit.core import Assignment
from oracles import EXAMPLE_ONE, ba_outcomes, fa_integral, fa_outcomes, mnl_direct, subset_table

unit = st.floats(0.0, 1.0, allow_nan=False)
pairs = st.lists(st.tuples(unit, unit), min_size=0, max_size=8)


def view(ps):
    return DriverView.from_pairs(ps)


def ex1(*names):
    return view([EXAMPLE_ONE[k] for k in names])


def test_worked_example_values():
    assert fa_value(ex1("a")) == pytest.approx(0.9, abs=1e-12)
    assert fa_value(ex1("a", "b")) == pytest.approx(0.594, abs=1e-12)
    assert fa_value(ex1("a", "c")) == pytest.approx(0.95, abs=1e-12)
    assert fa_value(ex1("a", "b", "c")) == pytest.approx(0.671, abs=1e-12)
    assert ba_value(ex1("a", "b")) == pytest.approx(0.918, abs=1e-12)
    assert ba_value(ex1("b")) == pytest.approx(0.18, abs=1e-12)


def test_empty_and_trivial_sets():
    for kind in ValuationKind:
        assert value(view([]), kind) == 0.0
    assert mnl_value(view([(1, 1)])) == 0.5
    assert mnl_value(view([(1, 0.9)])) == pytest.approx(0.4736842105, abs=1e-10)


@given(pairs)
def test_fa_matches_outcome_enumeration(ps):
    ws = [w for w, _ in ps]
    pr = [p for _, p in ps]
    assert fa_value(view(ps)) == pytest.approx(fa_outcomes(ws, pr), abs=1e-12)
    assert fa_value(view(ps)) == pytest.approx(fa_integral(ws, pr), abs=1e-12)


@given(pairs)
def test_ba_and_mnl_match_definitions(ps):
    ws = [w for w, _ in ps]
    pr = [p for _, p in ps]
    assert ba_value(view(ps)) == pytest.approx(ba_outcomes(ws, pr), abs=1e-12)
    assert mnl_value(view(ps)) == pytest.approx(mnl_direct(ws, pr), abs=1e-15)


@given(pairs)
def test_sandwich(ps):
    v = view(ps)
    mnl, fa = mnl_value(v), fa_value(v)
    assert mnl <= fa + 1e-12
    assert fa <= 2 * mnl + 1e-12


@given(pairs, st.floats(0.0, 3.0))
def test_fa_linear_in_weights(ps, c):
    v = view(ps)
    scaled = DriverView(v.weights * c, v.probs, v.drivers)
    assert fa_value(scaled) == pytest.approx(c * fa_value(v), abs=1e-12)


@given(st.lists(st.floats(0.0, 1.0), max_size=10))
def test_unit_weight_collapse(probs):
    v = DriverView(np.ones(len(probs)), probs, tuple(range(len(probs))))
    target = 1.0 - math.prod(1.0 - p for p in probs)
    assert fa_value(v) == pytest.approx(target, abs=1e-12)
    assert ba_value(v) == pytest.approx(target, abs=1e-12)


def test_threshold_examples():
    t = fa_threshold(view([]))
    assert (t.A, t.B, t.tau) == (0.0, 1.0, 0.0)
    t = fa_threshold(view([(1, 1)]))
    assert t.A == pytest.approx(0.5) and t.B == pytest.approx(0.5) and t.tau == pytest.approx(1.0)
    # a second (1, 1) driver sits exactly on the threshold: zero marginal
    assert fa_value(view([(1, 1), (1, 1)])) == pytest.approx(1.0)


@given(pairs, unit, unit)
def test_threshold_is_exact_marginal(ps, wd, pd):
    v = view(ps)
    t = fa_threshold(v)
    assert t.B > 0
    gain = fa_value(view(ps + [(wd, pd)])) - fa_value(v)
    assert gain == pytest.approx(pd * (wd * t.B - t.A), abs=1e-12)


@given(pairs, unit, st.floats(0.01, 1.0))
def test_threshold_stability(ps, wd, pd):
    t = fa_threshold(view(ps)).tau
    if wd >= t:
        assert fa_threshold(view(ps + [(wd, pd)])).tau <= 3 * wd + 1e-12


@given(pairs, unit)
def test_max_weight_driver_never_hurts(ps, pd):
    wd = max([w for w, _ in ps], default=0.0)
    assert fa_value(view(ps + [(wd, pd)])) >= fa_value(view(ps)) - 1e-12


@given(st.lists(st.tuples(unit, unit), min_size=1, max_size=7), st.data())
def test_ba_monotone_submodular(ps, data):
    n = len(ps)
    d = ps[-1]
    rest = ps[:-1]
    S = [x for x in rest if data.draw(st.booleans())]
    T = [x for x in S if data.draw(st.booleans())]
    gS = ba_value(view(S + [d])) - ba_value(view(S))
    gT = ba_value(view(T + [d])) - ba_value(view(T))
    assert gS >= -1e-12
    assert gS <= gT + 1e-12
    assert n >= 1


@given(st.lists(unit, min_size=2, max_size=6), st.randoms(use_true_random=False))
def test_ba_tie_order_invariant(probs, rnd):
    ps = [(0.5, p) for p in probs]
    shuffled = ps[:]
    rnd.shuffle(shuffled)
    assert ba_value(view(ps)) == pytest.approx(ba_value(view(shuffled)), abs=1e-15)


@pytest.mark.parametrize("kind", ["fa", "ba"])
def test_bernoulli_composition(kind):
    rng = rng_from_seed(4)
    for _ in range(20):
        n = int(rng.integers(1, 8))
        w, p, x = rng.random(n), rng.random(n), rng.random(n)
        expected = 0.0
        for s, val in subset_table(w.tolist(), p.tolist(), kind).items():
            pr = math.prod(x[j] if j in s else 1 - x[j] for j in range(n))
            expected += pr * val
        assert value(DriverView(w, x * p, tuple(range(n))), kind) == pytest.approx(expected, abs=1e-12)


def test_calculus_bound():
    z = np.linspace(1e-6, 50.0, 200_001)
    assert np.max((2 + z) / z * (1 - np.exp(-z))) <= 2.0


def test_subset_tables_match_oracle():
    rng = rng_from_seed(9)
    w, p = rng.random(6), rng.random(6)
    for kind in ("fa", "ba", "mnl"):
        table = subset_values(w, p, kind)
        ref = subset_table(w.tolist(), p.tolist(), kind)
        for s, val in ref.items():
            assert table[sum(1 << j for j in s)] == pytest.approx(val, abs=1e-12)


def test_closure_examples():
    val, best = closure_value(ex1("a", "b"), "fa")
    assert (val, best) == (pytest.approx(0.9), (0,))
    v = ex1("a", "b", "c")
    assert closure_value(v, "ba")[0] == pytest.approx(ba_value(v))
    eps = 0.01
    ex2 = view([(4, eps), (1 + eps, eps), (1, 1)])
    assert closure_value(ex2, "fa")[1] == (0, 2)
    table = subset_values(v.weights, v.probs, "fa")
    clo = closure_table(table)
    assert clo[-1] == pytest.approx(0.95)
    assert np.all(clo >= table)


def test_closure_size_cap():
    with pytest.raises(ValueError):
        closure_value(DriverView(np.ones(26), np.ones(26) / 2, tuple(range(26))), "fa")


def test_simulate_examples():
    mean, se = simulate(ex1("a", "b"), "fa", 10**6, seed=1)
    assert abs(mean - 0.594) <= 4 * se
    zero = DriverView([0.3, 0.9], [0.0, 0.0], (0, 1))
    assert simulate(zero, "fa", 1000, 0) == (0.0, 0.0)
    sure = DriverView([0.2, 0.6, 0.7], [1.0, 1.0, 1.0], (0, 1, 2))
    assert simulate(sure, "fa", 10**5, 0)[0] == pytest.approx(0.5, abs=5e-3)
    assert simulate(sure, "ba", 1000, 0) == (0.7, 0.0)
    with pytest.raises(ValueError):
        simulate(sure, "mnl", 10, 0)


def test_welfare_sums_riders():
    inst = Instance(2, 3, [[1, 0.2, 1], [0.5, 0.5, 0.5]], [[0.9, 0.9, 0.5], [1, 1, 1]])
    asg = Assignment(((0, 2), (1,)))
    assert welfare(inst, asg, "fa") == pytest.approx(0.95 + 0.5)
