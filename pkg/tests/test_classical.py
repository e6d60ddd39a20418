from fractions import Fraction
from functools import partial

import numpy as np
import pytest
from hypothesis import given, strategies as st

from juntalab import classical
from juntalab.classical import (binom_tv_kolmogorov, default_repetitions, error_summary,
                                hypergeom_pmf, hypergeom_tv, lower_bound_sample_size,
                                partition_query_budget, partition_tester, run_trials,
                                sampling_tester, sampling_threshold, split_budget)
from juntalab.instances import LARGE, OVERRIDE_POLICIES, SMALL, IntersectionOracle, make_relaxed_oracle


def _oracle(n, k, d, side, override, seed):
    size = k if side == SMALL else k + d
    rng = np.random.default_rng(seed + 10_000)
    A = int(sum(1 << int(j) for j in rng.choice(n, size=size, replace=False)))
    return make_relaxed_oracle(n, k, d, side, A, override, seed)


def test_threshold_k1():
    assert sampling_threshold(1, 1) == pytest.approx(5 / 8)


def test_repetitions_constant():
    assert default_repetitions(8, 8) == 96
    assert default_repetitions(4, 1) == 48 * 17


def test_report_validation():
    with pytest.raises(ValueError):
        classical.TesterReport("maybe", 1, 0)
    with pytest.raises(ValueError):
        classical.TesterReport(SMALL, -1, 0)


def test_sampling_counts_queries():
    o = _oracle(32, 4, 2, LARGE, "ones", 3)
    r = sampling_tester(o, 4, 2, seed=3)
    assert r.queries == o.queries == default_repetitions(4, 2)


def test_sampling_full_large_set_always_hits():
    k, d = 3, 2
    o = make_relaxed_oracle(k + d, k, d, LARGE, (1 << (k + d)) - 1, "zeros")
    r = sampling_tester(o, k, d, seed=1)
    assert r.trials["frequency"] >= 1 - (1 - 1 / k) ** (k + d) - 0.1


def test_sampling_small_side_error_rate():
    reports = [sampling_tester(_oracle(64, 8, 8, SMALL, "zeros", s), 8, 8, seed=s) for s in range(300)]
    assert error_summary(reports, SMALL)["error_rate"] <= 1 / 3


def test_partition_large_k1():
    o = IntersectionOracle(4, 0b11)
    for seed in range(20):
        assert partition_tester(o.clone(), 1, seed=seed).decision == LARGE


@pytest.mark.parametrize("override", OVERRIDE_POLICIES)
def test_partition_one_sided(override):
    for k in range(1, 7):
        for seed in range(30):
            o = _oracle(32, k, 1, SMALL, override, seed)
            r = partition_tester(o, k, seed=seed)
            assert r.decision == SMALL
            assert r.queries == o.queries <= partition_query_budget(k)


def test_partition_large_grid_error():
    for k in (2, 4, 8):
        reports = [partition_tester(_oracle(64, k, 1, LARGE, "exact", s), k, seed=s) for s in range(100)]
        assert error_summary(reports, LARGE)["error_rate"] <= 1 / 3
        assert max(r.queries for r in reports) <= partition_query_budget(k)


def test_split_budget_guard():
    assert split_budget(1) == split_budget(2) == 10


def test_run_trials_worker_independent():
    factory = partial(_oracle, 16, 2, 2, SMALL, "seeded-random")
    a = run_trials("sampling", factory, 2, 2, range(8), workers=1)
    b = run_trials("sampling", factory, 2, 2, range(8), workers=2)
    assert [(r.decision, r.queries, r.trials) for r in a] == [(r.decision, r.queries, r.trials) for r in b]
    with pytest.raises(ValueError):
        run_trials("guess", factory, 2, 2, range(2))


def test_hypergeom_examples():
    assert hypergeom_pmf(4, 1, 2) == [Fraction(1, 2), Fraction(1, 2), 0]
    assert hypergeom_pmf(4, 2, 2) == [Fraction(1, 6), Fraction(2, 3), Fraction(1, 6)]
    assert hypergeom_tv(4, 1, 1, 2) == Fraction(1, 3)
    assert hypergeom_tv(10, 3, 0, 4) == 0
    assert hypergeom_tv(10, 3, 2, 0) == 0
    with pytest.raises(ValueError):
        hypergeom_tv(4, 3, 2, 1)


def test_binom_examples():
    tv, ks = binom_tv_kolmogorov(1, 1, 0.5)
    assert tv == pytest.approx(0.25, abs=1e-15)
    tv, ks = binom_tv_kolmogorov(2, 1, 0.25)
    assert abs(tv - ks) < 1e-12
    assert binom_tv_kolmogorov(3, 2, 1e-6)[0] < 1e-5
    with pytest.raises(ValueError):
        binom_tv_kolmogorov(1, 1, 1.0)


def test_lower_bound_grid_away_from_saturation():
    worst = 0
    for n in range(2, 61, 3):
        for k in range(1, 11):
            for d in range(1, k + 1):
                if 2 * (k + d) > n:
                    continue
                m = lower_bound_sample_size(n, k, d)
                worst = max(worst, hypergeom_tv(n, k, d, m))
    assert worst <= Fraction(19, 20)


@given(st.integers(1, 30), st.integers(1, 30), st.floats(0.001, 0.999))
def test_tv_equals_kolmogorov(k, d, p):
    tv, ks = binom_tv_kolmogorov(k, d, p)
    assert abs(tv - ks) < 1e-12


@given(st.integers(1, 25), st.data())
def test_hypergeom_is_distribution(n, data):
    K = data.draw(st.integers(0, n))
    m = data.draw(st.integers(0, n))
    assert sum(hypergeom_pmf(n, K, m)) == 1
