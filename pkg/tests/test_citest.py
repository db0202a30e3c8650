import math

import numpy as np
import pytest

from oracles import random_corr
from revpc.citest import GaussianSource, OracleSource, TestCounter, ci_test, ci_threshold
from revpc.graph import Dag
from revpc.linalg import correlation_matrix, normal_quantile


def test_threshold_formula():
    assert ci_threshold(0.05, 103, 0) == pytest.approx(1.959963984540054 / 10, rel=1e-12)
    assert ci_threshold(1e-3, 100_000, 1) == pytest.approx(
        normal_quantile(1 - 5e-4) / math.sqrt(100_000 - 4), rel=1e-15
    )


def test_threshold_needs_samples():
    with pytest.raises(ValueError, match="insufficient samples"):
        ci_threshold(0.01, 10, 7)
    assert ci_threshold(0.01, 10, 6) > 0


def test_oracle_source():
    src = OracleSource(Dag.from_edges(3, [(0, 1), (1, 2)]))
    assert ci_test(src, 0, 2, (1,)).independent
    assert not ci_test(src, 0, 2, ()).independent
    with pytest.raises(TypeError):
        OracleSource("not a dag")


def test_counter_records_each_call_once():
    src = OracleSource(Dag.from_edges(3, [(0, 1), (1, 2)]))
    c = TestCounter()
    ci_test(src, 0, 2, (), c)
    ci_test(src, 2, 0, (1,), c)
    ci_test(src, 0, 1, (), c)
    assert c.total == 3
    assert c.per_stage == {0: 2, 1: 1}
    assert c.per_pair == {(0, 2): 2, (0, 1): 1}
    other = TestCounter()
    other.record(1, 2, 0, degenerate=True)
    c.merge(other)
    assert c.total == 4 and c.degenerate == 1


def test_invalid_queries():
    src = OracleSource(Dag.from_edges(3, []))
    for i, j, k in [(0, 0, ()), (0, 1, (1,)), (0, 1, (0, 2))]:
        with pytest.raises(ValueError):
            ci_test(src, i, j, k)


def test_gaussian_source_validation(rng):
    corr = random_corr(rng, 3)
    with pytest.raises(ValueError):
        GaussianSource(corr, 100, 0.0)
    with pytest.raises(ValueError):
        GaussianSource(corr, 4, 0.05)
    with pytest.raises(ValueError):
        GaussianSource(np.ones((2, 3)), 100, 0.05)


def test_gaussian_decision_symmetric(rng):
    src = GaussianSource(random_corr(rng, 8, samples=40), 40, 0.05)
    for _ in range(100):
        i, j, *k = rng.choice(8, size=2 + int(rng.integers(0, 5)), replace=False)
        a, b = src.decide(i, j, tuple(k)), src.decide(j, i, tuple(k))
        assert a == b


def test_gaussian_degenerate_keeps_edge():
    corr = np.ones((4, 4))
    corr[0, 1] = corr[1, 0] = 0.0
    src = GaussianSource(corr, 100, 0.05)
    c = TestCounter()
    d = ci_test(src, 0, 1, (2, 3), c)
    assert not d.independent and d.degenerate and math.isnan(d.statistic)
    assert c.degenerate == 1


def test_batch_decisions_match_serial(rng):
    src = GaussianSource(random_corr(rng, 10, samples=60), 60, 0.05)
    rows = np.array([rng.choice(10, size=5, replace=False) for _ in range(200)])
    indep, stat, deg = src.decide_batch(rows)
    for r, a, s in zip(rows, indep, stat):
        d = src.decide(r[0], r[1], tuple(r[2:]))
        assert a == d.independent
        assert s == pytest.approx(d.statistic, abs=1e-10)
    assert not deg.any()


def test_type_one_error_rate():
    # independent columns: the test should reject about alpha of the time
    rng = np.random.default_rng(2024)
    alpha, rejects = 0.05, 0
    for _ in range(1000):
        x = rng.standard_normal((200, 3))
        src = GaussianSource(correlation_matrix(x), 200, alpha)
        rejects += not src.decide(0, 1, (2,)).independent
    assert rejects / 1000 <= 2 * alpha
