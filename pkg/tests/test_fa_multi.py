import itertools

import numpy as np
import pytest

from dispatchkit.baselines import opt_bruteforce
from dispatchkit.core import Instance, gen_uniform, rng_from_seed
from dispatchkit.fa_multi import (
    FaMultiConfig,
    FractionalSolution,
    demand_oracle_mnl,
    fa_multi_solve,
    independent_rounding,
    mnl_knapsack_fptas,
    revenue_ordered_optimum,
    round_and_prune,
    solve_config_lp,
)
from dispatchkit.fa_single import PtasConfig, brute_single, prune
from dispatchkit.valuation import DriverView, closure_table, mnl_value, subset_values
from oracles import all_subsets, full_config_lp, mnl_direct


def rand_view(rng, n):
    return DriverView(rng.random(n), rng.random(n), tuple(range(n)))


def exhaustive(view, costs, budget=None):
    """(best feasible MNL revenue, best net revenue) by listing every subset."""
    ws, ps = view.weights.tolist(), view.probs.tolist()
    best_rev, best_net = 0.0, 0.0
    for s in all_subsets(len(ws)):
        rev = mnl_direct([ws[j] for j in s], [ps[j] for j in s])
        cost = sum(costs[j] for j in s)
        if budget is None or cost <= budget:
            best_rev = max(best_rev, rev)
        best_net = max(best_net, rev - cost)
    return best_rev, best_net


def prefix_scan(view):
    order = np.argsort(-view.weights, kind="stable")
    return max(mnl_direct(view.weights[order[:k]].tolist(), view.probs[order[:k]].tolist()) for k in range(len(order) + 1))


def test_config_validation():
    with pytest.raises(ValueError):
        FaMultiConfig(eps=0)
    with pytest.raises(ValueError):
        FaMultiConfig(delta=1.5)
    with pytest.raises(ValueError):
        FaMultiConfig(pricing="ellipsoid")


def test_revenue_ordered_is_unconstrained_optimum():
    rng = rng_from_seed(1)
    for _ in range(50):
        v = rand_view(rng, 9)
        assert revenue_ordered_optimum(v)[1] == pytest.approx(exhaustive(v, np.zeros(9))[0], abs=1e-12)


def test_fptas_loose_budget_and_zero_budget():
    rng = rng_from_seed(2)
    for _ in range(50):
        v = rand_view(rng, 10)
        costs = rng.random(10)
        s = mnl_knapsack_fptas(v, costs, costs.sum(), 0.1)
        assert mnl_value(v.restrict(s)) >= 0.9 * prefix_scan(v) - 1e-12
        assert mnl_knapsack_fptas(v, costs + 0.01, 0.0, 0.1) == ()


def test_fptas_against_exhaustive():
    rng = rng_from_seed(3)
    for _ in range(150):
        v = rand_view(rng, 12)
        costs = rng.random(12)
        budget = float(rng.random() * 3)
        eps = float(rng.choice([0.05, 0.1, 0.3]))
        s = mnl_knapsack_fptas(v, costs, budget, eps)
        assert costs[list(s)].sum() <= budget + 1e-12
        assert mnl_value(v.restrict(s)) >= (1 - eps) * exhaustive(v, costs, budget)[0] - 1e-12


def test_demand_oracle_examples():
    rng = rng_from_seed(4)
    for _ in range(30):
        v = rand_view(rng, 10)
        s = demand_oracle_mnl(v, np.zeros(10), 0.05)
        assert mnl_value(v.restrict(s)) >= prefix_scan(v) - 0.05
        pricey = 1 + rng.random(10)
        s = demand_oracle_mnl(v, pricey, 0.05)
        assert mnl_value(v.restrict(s)) - pricey[list(s)].sum() >= -0.05
        assert exhaustive(v, pricey)[1] <= 0.0


def test_demand_oracle_against_exhaustive():
    rng = rng_from_seed(5)
    for _ in range(150):
        v = rand_view(rng, 12)
        costs = rng.random(12) * 0.5
        s = demand_oracle_mnl(v, costs, 0.05)
        net = mnl_value(v.restrict(s)) - costs[list(s)].sum()
        assert net >= exhaustive(v, costs)[1] - 0.05


def _check_fractional(frac: FractionalSolution):
    for cols in frac.columns:
        assert sum(y for _, y in cols) == pytest.approx(1.0, abs=1e-8)
        assert all(y >= 0 for _, y in cols)
    assert np.all(frac.marginals().sum(axis=0) <= 1 + 1e-8)
    assert all(b >= a - 1e-9 for a, b in zip(frac.history, frac.history[1:]))
    assert frac.bound >= frac.objective - 1e-12


def test_config_lp_single_rider():
    inst = gen_uniform(1, 8, 3)
    frac = solve_config_lp(inst)
    _check_fractional(frac)
    opt = revenue_ordered_optimum(DriverView.of(inst, 0))[1]
    assert frac.objective == pytest.approx(opt, abs=0.05)
    top = max(frac.columns[0], key=lambda c: c[1])
    assert top[1] == pytest.approx(1.0)


@pytest.mark.parametrize("seed", range(8))
def test_config_lp_matches_full_column_lp(seed):
    inst = gen_uniform(2, 3, seed)
    ref = full_config_lp(inst.weights.tolist(), inst.probs.tolist(), "mnl")
    frac = solve_config_lp(inst, FaMultiConfig(eps=0.05))
    _check_fractional(frac)
    assert abs(frac.objective - ref) <= 0.05 * 2
    assert frac.bound >= ref - 1e-9
    exact = solve_config_lp(inst, FaMultiConfig(pricing="exact-bruteforce"))
    assert exact.objective == pytest.approx(ref, abs=1e-6)


def test_frozen_full_column_value():
    # full-column LP value computed once by the HiGHS-based oracle
    inst = gen_uniform(2, 4, 3)
    assert solve_config_lp(inst, FaMultiConfig(pricing="exact-bruteforce")).objective == pytest.approx(0.9082655389988723, abs=1e-6)


def test_config_lp_all_ones():
    n, m = 4, 5
    inst = Instance(m, n, np.ones((m, n)), np.ones((m, n)))
    frac = solve_config_lp(inst)
    assert frac.objective >= n / 2 - 0.05 * m


def test_certificate_holds_exhaustively():
    for seed in range(6):
        inst = gen_uniform(3, 8, 100 + seed)
        eps = 0.05
        frac = solve_config_lp(inst, FaMultiConfig(eps=eps))
        assert frac.certified
        for i in range(inst.m):
            vals = subset_values(inst.weights[i], inst.probs[i], "mnl")
            cost = np.zeros(1)
            for a in frac.alpha:
                cost = np.concatenate([cost, cost + a])
            assert (vals - cost).max() - frac.beta[i] <= eps + 1e-9


def test_rounding_edge_cases():
    inst = gen_uniform(2, 5, 0)
    empty = FractionalSolution(5, [[((), 1.0)], [((), 1.0)]], 0.0, 0.0, True, 1)
    assert round_and_prune(inst, empty).sets == ((), ())
    one = gen_uniform(1, 6, 2)
    full = FractionalSolution(6, [[(tuple(range(6)), 1.0)]], 0.0, 0.0, True, 1)
    assert round_and_prune(one, full, FaMultiConfig(delta=0.1)).sets[0] == prune(DriverView.of(one, 0), PtasConfig(0.1))[0]


def test_rounding_marginals():
    x = np.array([[0.2, 0.5, 0.0, 0.33], [0.3, 0.5, 0.1, 0.33], [0.1, 0.0, 0.0, 0.34]])
    draws = 100_000
    labels = independent_rounding(x, rng_from_seed(7), draws)
    for i in range(3):
        freq = (labels == i).mean(axis=0)
        sigma = np.sqrt(x[i] * (1 - x[i]) / draws)
        assert np.all(np.abs(freq - x[i]) <= 4 * sigma + 1e-12)
    # overfull columns from LP round-off are clipped, never exceed one rider
    assert independent_rounding(np.array([[0.6], [0.4 + 1e-9]]), rng_from_seed(0), 10).max() <= 1


def test_correlation_gap_sanity():
    rng = rng_from_seed(11)
    for _ in range(20):
        n = int(rng.integers(2, 9))
        w, p = rng.random(n), rng.random(n)
        clo = closure_table(subset_values(w, p, "mnl"))
        # a random distribution over a few sets, and its marginals
        masks = rng.integers(0, 1 << n, size=4)
        y = rng.dirichlet(np.ones(4))
        corr = float(y @ clo[masks])
        x = np.zeros(n)
        for mk, yy in zip(masks, y):
            x += yy * ((int(mk) >> np.arange(n)) & 1)
        ind = 0.0
        for mk in range(1 << n):
            bits = (mk >> np.arange(n)) & 1
            ind += np.prod(np.where(bits, x, 1 - x)) * clo[mk]
        assert ind >= 0.5 * corr - 1e-12


def test_single_rider_solve_matches_ptas():
    for seed in range(10):
        inst = gen_uniform(1, 8, seed)
        sol = fa_multi_solve(inst, FaMultiConfig(seed=seed, repetitions=5))
        best = brute_single(DriverView.of(inst, 0))[1]
        assert sol.welfare >= 0.25 * 0.9 * best - 0.05
        assert sol.assignment.is_valid(inst.n)


def test_multi_rider_guarantee_and_disjointness():
    for seed in range(15):
        inst = gen_uniform(3, 9, 500 + seed)
        sol = fa_multi_solve(inst, FaMultiConfig(seed=seed, repetitions=3))
        assert sol.assignment.is_valid(inst.n)
        opt = opt_bruteforce(inst, "fa").welfare
        assert sol.welfare / opt >= 0.25 * 0.9 - 0.05
        assert sol.meta["fa_bound"] >= opt - 1e-9
        used = list(itertools.chain.from_iterable(sol.assignment.sets))
        assert len(used) == len(set(used))
