import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from dispatchkit.core import rng_from_seed
from dispatchkit.fa_single import (
    EnumerationTooLarge,
    PtasConfig,
    brute_single,
    prune,
    ptas_candidate_count,
    ptas_select,
)
from dispatchkit.valuation import DriverView, closure_value, fa_threshold, fa_value
from oracles import EXAMPLE_ONE, best_set


def rand_view(rng, n):
    return DriverView(rng.random(n), rng.random(n), tuple(range(n)))


def test_config_validation():
    with pytest.raises(ValueError):
        PtasConfig(0.0)
    with pytest.raises(ValueError):
        PtasConfig(1.0)
    assert PtasConfig(0.1).n_buckets == 12
    assert PtasConfig(0.99).n_buckets >= 1


def test_worked_example_brute_and_prune():
    v = DriverView.from_pairs([EXAMPLE_ONE[k] for k in "abc"])
    assert brute_single(v) == ((0, 2), pytest.approx(0.95))
    ab = DriverView.from_pairs([EXAMPLE_ONE["a"], EXAMPLE_ONE["b"]])
    assert prune(ab) == ((0,), pytest.approx(0.9))
    assert prune(ab.restrict([])) == ((), 0.0)


def test_near_tie_instance():
    eps = 0.01
    v = DriverView.from_pairs([(4, eps), (1 + eps, eps), (1, 1)])
    opt = fa_value(v.restrict([0, 2]))
    assert brute_single(v)[0] == (0, 2)
    assert ptas_select(v, PtasConfig(0.05))[1] >= 0.95 * opt


def test_single_driver_and_unit_weights():
    v = DriverView([0.7], [0.4], (5,))
    assert ptas_select(v) == ((5,), pytest.approx(0.28))
    assert brute_single(v) == ((5,), pytest.approx(0.28))
    probs = np.array([0.3, 0.5, 0.9, 0.1])
    u = DriverView(np.ones(4), probs, (0, 1, 2, 3))
    target = 1 - np.prod(1 - probs)
    assert ptas_select(u, PtasConfig(0.2))[1] >= 0.8 * target


def test_brute_single_matches_oracle():
    rng = rng_from_seed(3)
    for _ in range(30):
        v = rand_view(rng, 7)
        val, s = best_set(v.weights.tolist(), v.probs.tolist(), "fa")
        assert brute_single(v) == (s, pytest.approx(val, abs=1e-12))


@given(st.integers(0, 10**6), st.integers(1, 9), st.sampled_from([0.05, 0.1, 0.3, 0.6]))
def test_ptas_guarantee(seed, n, delta):
    v = rand_view(rng_from_seed(seed), n)
    chosen, val = ptas_select(v, PtasConfig(delta))
    assert fa_value(v.restrict(chosen)) == pytest.approx(val, abs=1e-12)
    assert val >= (1 - delta) * brute_single(v)[1] - 1e-12


def test_prune_within_closure():
    rng = rng_from_seed(12)
    for _ in range(20):
        v = rand_view(rng, 12)
        chosen, val = prune(v, PtasConfig(0.1))
        assert set(chosen) <= set(v.drivers)
        assert val >= 0.9 * closure_value(v, "fa")[0]


def test_optimal_set_structure():
    rng = rng_from_seed(21)
    for _ in range(500):
        n = int(rng.integers(1, 13))
        v = rand_view(rng, n)
        s, _ = brute_single(v)
        tau = fa_threshold(v.restrict(s)).tau
        w = v.weights
        for j in range(n):
            if w[j] > tau + 1e-9:
                assert j in s
        for j in s:
            assert w[j] >= tau / 3 - 1e-12


@given(st.lists(st.floats(0.01, 1.0), min_size=2, max_size=6), st.lists(st.tuples(st.floats(0, 1), st.floats(0, 1)), max_size=4), st.data())
def test_higher_probability_swap_above_threshold(bucket_p, others, data):
    # equal (rounded) weights r: swapping in a higher-p member helps whenever r clears the threshold
    r = 0.5
    k = data.draw(st.integers(0, len(bucket_p) - 1))
    rest = [(r, p) for i, p in enumerate(bucket_p) if i != k]
    chosen = rest[: len(rest) // 2]
    base = DriverView.from_pairs(others + chosen)
    if r < fa_threshold(base).tau:
        return
    lo, hi = sorted([bucket_p[k], data.draw(st.floats(0.0, 1.0))])
    a = fa_value(DriverView.from_pairs(others + chosen + [(r, lo)]))
    b = fa_value(DriverView.from_pairs(others + chosen + [(r, hi)]))
    assert b >= a - 1e-12


def test_candidate_count_shrinks_with_coarser_buckets():
    rng = rng_from_seed(8)
    for _ in range(50):
        v = rand_view(rng, 10)
        # (1 + 0.21) = 1.1 ** 2: coarse buckets are unions of fine ones
        assert ptas_candidate_count(v, PtasConfig(0.21)) <= ptas_candidate_count(v, PtasConfig(0.1))
        assert ptas_candidate_count(v, PtasConfig(0.5)) <= ptas_candidate_count(v, PtasConfig(0.1))


def test_enumeration_cap():
    v = rand_view(rng_from_seed(0), 12)
    with pytest.raises(EnumerationTooLarge, match="larger delta"):
        ptas_select(v, PtasConfig(0.1, max_bucket_count=2))
