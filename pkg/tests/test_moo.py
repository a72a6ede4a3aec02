import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qmoo.benchmarks import LinearObjective, ProblemInstance, build_cost_table, gen_instance
from qmoo.moo import (
    DegenerateFrontError,
    ParetoFront,
    brute_force_pareto,
    dominates,
    front_hypervolume,
    hv_2d,
    hypervolume,
    non_dominated_filter,
    normalized_hv,
    streaming_front,
    weakly_dominates,
)


def all_pairs_front(P):
    """Quadratic reference: indices of rows no other row strictly dominates."""
    return [
        i for i in range(len(P))
        if not any(np.all(P[j] <= P[i]) and np.any(P[j] < P[i]) for j in range(len(P)))
    ]


def hv_inclusion_exclusion(P, r):
    """Union volume of the boxes [p, r] by inclusion-exclusion; exponential but independent."""
    total = 0.0
    for m in range(1, len(P) + 1):
        for subset in itertools.combinations(range(len(P)), m):
            corner = np.max(P[list(subset)], axis=0)
            total += (-1) ** (m + 1) * np.prod(np.clip(r - corner, 0, None))
    return total


def test_dominance_examples():
    assert weakly_dominates((0.2, 0.3), (0.2, 0.5))
    assert not weakly_dominates((0.2, 0.6), (0.3, 0.5))
    assert weakly_dominates((0.4, 0.4), (0.4, 0.4)) and not dominates((0.4, 0.4), (0.4, 0.4))
    with pytest.raises(ValueError):
        weakly_dominates((0.1,), (0.1, 0.2))


def test_filter_examples():
    pts = [(0.1, 0.9), (0.9, 0.1), (0.5, 0.5)]
    assert len(non_dominated_filter(pts)) == 3
    f = non_dominated_filter([(0.1, 0.1), (0.2, 0.2)])
    np.testing.assert_array_equal(f.points, [[0.1, 0.1]])
    assert f.source_indices.tolist() == [0]
    assert len(non_dominated_filter([])) == 0


@settings(max_examples=100)
@given(st.lists(st.tuples(*[st.integers(0, 6)] * 3), min_size=1, max_size=30))
def test_filter_matches_all_pairs_and_is_idempotent(rows):
    P = np.array(rows, dtype=float) / 6
    once = non_dominated_filter(P)
    assert set(map(tuple, once.points)) == set(map(tuple, P[all_pairs_front(P)]))
    assert len(np.unique(once.points, axis=0)) == len(once.points)
    twice = non_dominated_filter(once.points)
    np.testing.assert_array_equal(twice.points, once.points)


def test_hv_examples():
    r = (1, 1)
    assert hypervolume([(0.5, 0.5)], r) == 0.25
    assert abs(hypervolume([(0.2, 0.6), (0.6, 0.2)], r) - 0.48) < 1e-15
    assert hypervolume([], r) == 0.0
    assert hypervolume([(0.5, 0.5), (0.6, 0.6)], r) == 0.25
    assert hypervolume([(1.0, 0.2), (0.3, 1.2)], r) == 0.0
    with pytest.raises(ValueError):
        hypervolume([(0.5, 0.5, 0.5)], r)
    with pytest.raises(ValueError):
        hypervolume([(0.5, 0.5, 0.5)], (1, 1, 1), method="bogus")


@settings(max_examples=150, deadline=None)
@given(st.integers(2, 5), st.lists(st.lists(st.floats(0, 1.2), min_size=5, max_size=5), min_size=0, max_size=7))
def test_hv_matches_inclusion_exclusion(K, rows):
    P = np.array([row[:K] for row in rows]).reshape(-1, K)
    r = np.ones(K)
    inside = P[np.all(P < r, axis=1)]
    expected = hv_inclusion_exclusion(inside, r) if len(inside) else 0.0
    for method in ("wfg", "moocore"):
        assert abs(hypervolume(P, r, method=method) - expected) < 1e-12


@settings(max_examples=60, deadline=None)
@given(st.integers(3, 5), st.integers(1, 25), st.integers(0, 2**32 - 1))
def test_hv_backends_agree_and_are_order_and_duplicate_invariant(K, n, seed):
    rng = np.random.default_rng(seed)
    P = rng.uniform(0, 1, size=(n, K))
    base = hypervolume(P, method="wfg")
    assert abs(hypervolume(P, method="moocore") - base) < 1e-12
    shuffled = np.concatenate([P, P[: n // 2]])[rng.permutation(n + n // 2)]
    assert abs(hypervolume(shuffled, method="wfg") - base) < 1e-12


def test_hv_2d_sweep_handles_dominated_and_out_of_box():
    P = np.array([[0.1, 0.8], [0.2, 0.9], [0.5, 0.3], [0.7, 0.25], [1.5, 0.0]])
    assert abs(hv_2d(P, (1, 1)) - hv_inclusion_exclusion(P[[0, 1, 2, 3]], np.ones(2))) < 1e-15


def test_normalized_hv_examples():
    front = ParetoFront(np.array([[0.1, 0.8], [0.4, 0.4], [0.9, 0.05]]))
    assert abs(normalized_hv(front.points, front) - 1.0) < 1e-12
    assert normalized_hv([], front) == 0.0
    sub = normalized_hv(front.points[:2], front)
    assert 0 < sub <= 1
    with pytest.raises(DegenerateFrontError):
        normalized_hv([(0.5, 0.5)], ParetoFront(np.array([[1.0, 1.0]])))


@pytest.mark.parametrize("chunk", [1, 3, 64, 512])
def test_streaming_front_matches_all_pairs(chunk, rng):
    P = rng.integers(0, 5, size=(300, 3)).astype(float)
    pts, idx = streaming_front(P, chunk=chunk)
    assert idx.tolist() == all_pairs_front(P)


def test_brute_force_examples():
    same = ProblemInstance("custom", 2, 3, 0, [LinearObjective([1, 2, 3]), LinearObjective([1, 2, 3])])
    f = brute_force_pareto(build_cost_table(same))
    assert f.source_indices.tolist() == [0]
    anti = ProblemInstance("custom", 3, 2, 0, [LinearObjective([3, 1]), LinearObjective([-3, -1])])
    table = build_cost_table(anti)
    f = brute_force_pareto(table)
    assert f.source_indices.tolist() == list(range(9))
    assert len(np.unique(table.normalized[0])) == len(np.unique(f.points[:, 0]))


@pytest.mark.parametrize("cls,seed", [("I", 0), ("II", 1), ("III", 2), ("IV", 3), ("V", 4)])
def test_brute_force_matches_all_pairs_oracle(cls, seed):
    table = build_cost_table(gen_instance(cls, 2, 8, seed))
    f = brute_force_pareto(table)
    assert f.source_indices.tolist() == all_pairs_front(table.normalized.T)
    assert front_hypervolume(f) > 0


def dominated_pair(K, rng):
    """A non-dominated set B and a copy A with one member strictly improved, so A is strictly better."""
    B = non_dominated_filter(rng.uniform(0.05, 0.95, size=(rng.integers(1, 12), K))).points
    j = rng.integers(len(B))
    A = B.copy()
    A[j] = B[j] - rng.uniform(0.001, 1.0, size=K) * B[j]
    return A, B


@settings(max_examples=200, deadline=None)
@given(st.integers(2, 5), st.integers(0, 2**32 - 1))
def test_pareto_compliance(K, seed):
    A, B = dominated_pair(K, np.random.default_rng(seed))
    assert all(any(weakly_dominates(a, b) for a in A) for b in B)
    assert hypervolume(A) > hypervolume(B)
