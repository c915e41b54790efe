"""Entropy, mutual information, and Markov-slack tests."""
import numpy as np
import pytest

from coordinet.information import (InfoQuery, conditional_entropy, entropy,
                                   markov_slack, mutual_information)
from coordinet.pmf import UnknownVariable, make_joint

from oracles import binary_entropy, cond_mi_direct, entropy_direct


def random_pmf(rng, sizes, names=None):
    names = names or [f"X{i}" for i in range(len(sizes))]
    t = rng.gamma(1.0, size=int(np.prod(sizes)))
    return make_joint([(n, s) for n, s in zip(names, sizes)], t / t.sum())


def test_entropy_fair_bit():
    p = make_joint([("X", 2)], [0.5, 0.5])
    assert entropy(p, ["X"]) == pytest.approx(1.0, abs=1e-15)


def test_entropy_point_mass():
    p = make_joint([("X", 3)], [0.0, 1.0, 0.0])
    assert entropy(p, ["X"]) == 0.0


def test_entropy_skewed():
    p = make_joint([("X", 2)], [0.25, 0.75])
    assert entropy(p, ["X"]) == pytest.approx(entropy_direct([0.25, 0.75]), abs=1e-12)
    assert entropy(p, ["X"]) == pytest.approx(0.8112781244591328, abs=1e-12)


def test_entropy_unknown_variable():
    with pytest.raises(UnknownVariable):
        entropy(make_joint([("X", 2)], [0.5, 0.5]), ["Y"])


def test_mi_independent_zero():
    p = make_joint([("A", 2), ("B", 2)], np.outer([0.3, 0.7], [0.6, 0.4]))
    assert mutual_information(p, ["A"], ["B"]) == pytest.approx(0.0, abs=1e-12)
    # negatives from rounding are clamped, never returned
    assert mutual_information(p, ["A"], ["B"]) >= 0.0


def test_mi_copy_is_entropy():
    p = make_joint([("Y1", 2), ("Y2", 2)], [0.5, 0, 0, 0.5])
    assert mutual_information(p, ["Y1"], ["Y2"]) == pytest.approx(1.0, abs=1e-12)


def test_mi_dsbs():
    p = make_joint([("Y1", 2), ("Y2", 2)], [0.45, 0.05, 0.05, 0.45])
    expect = 1.0 - binary_entropy(0.1)
    assert mutual_information(p, ["Y1"], ["Y2"]) == pytest.approx(expect, abs=1e-12)


def test_mi_rejects_overlap():
    p = make_joint([("A", 2), ("B", 2)], np.full(4, 0.25))
    with pytest.raises(UnknownVariable):
        mutual_information(p, ["A"], ["A"])


def test_info_query_evaluates():
    p = make_joint([("A", 2), ("B", 2)], [0.45, 0.05, 0.05, 0.45])
    q = InfoQuery(left=("A",), right=("B",))
    assert q.evaluate(p) == mutual_information(p, ["A"], ["B"])


def test_markov_slack_independent_triple():
    rng = np.random.default_rng(0)
    a = rng.dirichlet(np.ones(2))
    b = rng.dirichlet(np.ones(2))
    c = rng.dirichlet(np.ones(3))
    t = np.einsum("i,j,k->ijk", a, b, c)
    p = make_joint([("A", 2), ("B", 2), ("C", 3)], t)
    assert markov_slack(p, ["A"], ["B"], ["C"]) == pytest.approx(0.0, abs=1e-12)


def test_markov_slack_copy_with_independent_middle():
    # A = C a fair bit, B independent of both: I(A;C|B) = I(A;C) = 1
    t = np.zeros((2, 2, 2))
    for a in range(2):
        for b in range(2):
            t[a, b, a] = 0.25
    p = make_joint([("A", 2), ("B", 2), ("C", 2)], t)
    assert markov_slack(p, ["A"], ["B"], ["C"]) == pytest.approx(1.0, abs=1e-12)


def test_markov_slack_constructed_chain():
    rng = np.random.default_rng(1)
    pa = rng.dirichlet(np.ones(2))
    pb_a = rng.dirichlet(np.ones(3), size=2)
    pc_b = rng.dirichlet(np.ones(2), size=3)
    t = np.einsum("a,ab,bc->abc", pa, pb_a, pc_b)
    p = make_joint([("A", 2), ("B", 3), ("C", 2)], t)
    assert markov_slack(p, ["A"], ["B"], ["C"]) <= 1e-12


def test_chain_rule_random():
    rng = np.random.default_rng(2)
    for _ in range(50):
        p = random_pmf(rng, (2, 3))
        assert entropy(p, ["X0", "X1"]) == pytest.approx(
            entropy(p, ["X0"]) + conditional_entropy(p, ["X1"], ["X0"]), abs=1e-10)


def test_mi_three_entropy_identity():
    rng = np.random.default_rng(3)
    for _ in range(50):
        p = random_pmf(rng, (3, 2))
        lhs = mutual_information(p, ["X0"], ["X1"])
        rhs = entropy(p, ["X0"]) + entropy(p, ["X1"]) - entropy(p, ["X0", "X1"])
        assert lhs == pytest.approx(rhs, abs=1e-10)


def test_conditional_mi_matches_direct_oracle():
    rng = np.random.default_rng(4)
    for _ in range(25):
        p = random_pmf(rng, (2, 2, 3))
        mine = mutual_information(p, ["X0"], ["X2"], given=["X1"])
        ref = cond_mi_direct(p.table, (0,), (2,), (1,))
        assert mine == pytest.approx(ref, abs=1e-10)


def test_data_processing_on_chains():
    rng = np.random.default_rng(5)
    for _ in range(25):
        pa = rng.dirichlet(np.ones(3))
        pb_a = rng.dirichlet(np.ones(3), size=3)
        pc_b = rng.dirichlet(np.ones(3), size=3)
        t = np.einsum("a,ab,bc->abc", pa, pb_a, pc_b)
        p = make_joint([("A", 3), ("B", 3), ("C", 3)], t)
        assert mutual_information(p, ["A"], ["C"]) <= mutual_information(p, ["A"], ["B"]) + 1e-10
