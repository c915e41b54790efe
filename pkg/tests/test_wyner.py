"""Common-information solver tests against brute-force and closed forms."""
import math

import numpy as np
import pytest

from coordinet.information import (WynerConfig, entropy, markov_slack,
                                   mutual_information, wyner_common_information)
from coordinet.pmf import make_joint
from coordinet.sources import dsbs, identical_uniform, independent_bits, triple_abc

from oracles import wyner_deterministic_min

FAST = WynerConfig(restarts=12, seed=3)


def test_independent_is_zero():
    sol = wyner_common_information(independent_bits(), config=FAST)
    assert abs(sol.value) <= 1e-6


@pytest.mark.parametrize("k", [2, 3, 4])
def test_identical_uniform_is_log_k(k):
    sol = wyner_common_information(identical_uniform(k), w_cap=k + 1, config=FAST)
    assert sol.value == pytest.approx(math.log2(k), abs=1e-3)


def test_triple_abc_matches_bruteforce():
    q = triple_abc()
    oracle_value, _ = wyner_deterministic_min(q.table, w_cap=5)
    assert oracle_value == pytest.approx(1.0, abs=1e-9)
    sol = wyner_common_information(q, w_cap=5, config=FAST)
    assert sol.value == pytest.approx(oracle_value, abs=1e-3)


def test_witness_consistency():
    q = dsbs(0.1)
    sol = wyner_common_information(q, config=FAST)
    j = q.attach(sol.witness)
    assert mutual_information(j, ["Y1", "Y2"], ["W"]) == pytest.approx(sol.value, abs=1e-9)
    assert markov_slack(j, ["Y1"], ["W"], ["Y2"]) <= 1e-6
    assert sol.markov_slack <= 1e-6


def test_sandwich_on_random_sources():
    rng = np.random.default_rng(9)
    small = WynerConfig(restarts=6, seed=1)
    for _ in range(8):
        t = rng.gamma(1.0, size=(2, 2))
        q = make_joint([("Y1", 2), ("Y2", 2)], t / t.sum())
        sol = wyner_common_information(q, config=small)
        lo = mutual_information(q, ["Y1"], ["Y2"])
        hi = entropy(q)
        assert lo - 1e-6 <= sol.value <= hi + 1e-6


def test_trace_records_restarts():
    sol = wyner_common_information(identical_uniform(2), w_cap=2, config=FAST)
    assert len(sol.trace) >= 3
    finite = [v for _, v in sol.trace if math.isfinite(v)]
    assert min(finite) == pytest.approx(sol.value, abs=1e-9)


@pytest.mark.parametrize("lam", [10.0, 100.0, 1000.0])
def test_penalty_weight_stability(lam):
    cfg = WynerConfig(restarts=8, seed=2, penalty=lam)
    assert wyner_common_information(independent_bits(), config=cfg).value == pytest.approx(0.0, abs=1e-3)
    assert wyner_common_information(identical_uniform(2), w_cap=3,
                                    config=cfg).value == pytest.approx(1.0, abs=1e-3)
    assert wyner_common_information(triple_abc(), w_cap=5,
                                    config=cfg).value == pytest.approx(1.0, abs=1e-3)


def test_infeasible_cardinality_raises():
    from coordinet.information import OptimizerFailed
    # two W symbols cannot make three perfectly correlated values
    # conditionally independent
    with pytest.raises(OptimizerFailed):
        wyner_common_information(identical_uniform(3), w_cap=2,
                                 config=WynerConfig(restarts=6, seed=0))
