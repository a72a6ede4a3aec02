import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qmoo.benchmarks import LinearObjective, ProblemInstance, build_cost_table, gen_instance
from qmoo.moo import brute_force_pareto, front_hypervolume, hypervolume, non_dominated_filter
from qmoo.nsga2 import MoeaConfig, crowding_distance, fast_non_dominated_sort, genomes_to_indices, run_nsga2


def peel_fronts(P):
    """Front partition by repeatedly removing the non-dominated layer."""
    remaining = list(range(len(P)))
    fronts = []
    while remaining:
        keep = set()
        for i in remaining:
            if not any(np.all(P[j] <= P[i]) and np.any(P[j] < P[i]) for j in remaining):
                keep.add(i)
        fronts.append(sorted(keep))
        remaining = [i for i in remaining if i not in keep]
    return fronts


def test_sort_examples():
    assert fast_non_dominated_sort([(0.1, 0.9), (0.5, 0.5), (0.9, 0.1)]) == [[0, 1, 2]]
    chain = [(0.4, 0.4), (0.1, 0.1), (0.3, 0.3), (0.2, 0.2)]
    assert fast_non_dominated_sort(chain) == [[1], [3], [2], [0]]
    assert fast_non_dominated_sort(np.empty((0, 2))) == []


@settings(max_examples=100)
@given(st.integers(0, 2**32 - 1))
def test_sort_matches_peeling(seed):
    P = np.random.default_rng(seed).integers(0, 6, size=(12, 2)).astype(float)
    fronts = fast_non_dominated_sort(P)
    assert fronts == peel_fronts(P)
    assert sorted(non_dominated_filter(P).points.tolist()) == sorted(np.unique(P[fronts[0]], axis=0).tolist())


def test_crowding_examples():
    assert np.all(np.isinf(crowding_distance([(0.1, 0.2), (0.3, 0.1)])))
    d = crowding_distance([(0.0, 1.0), (0.5, 0.5), (1.0, 0.0)])
    assert np.isinf(d[0]) and np.isinf(d[2]) and d[1] == 2.0
    d = crowding_distance([(0.0, 1.0), (0.5, 0.5), (0.5, 0.5), (1.0, 0.0)])
    assert d.tolist() == [np.inf, 2.0, 0.0, np.inf]
    d = crowding_distance([(0.3, 0.3)] * 4)
    assert d[0] == np.inf and np.all(d[1:] == 0)


def test_crowding_hand_computation_three_objectives():
    F = np.array([[0.0, 0.6, 1.0], [0.2, 0.2, 0.4], [0.6, 0.0, 0.2], [1.0, 1.0, 0.0]])
    d = crowding_distance(F)
    assert np.isinf(d[[0, 2, 3]]).all()
    # point 1: (0.6-0)/1 + (0.6-0)/1 + (1.0-0.2)/1
    assert abs(d[1] - 2.0) < 1e-15


def test_config_validation():
    with pytest.raises(ValueError):
        MoeaConfig(population=21)
    with pytest.raises(ValueError):
        MoeaConfig(iterations=0)


def test_trace_shape_and_archive_monotone():
    table = build_cost_table(gen_instance("II", 2, 8, 0))
    res = run_nsga2(table, MoeaConfig(seed=3))
    assert [r.iteration for r in res.trace] == list(range(1, 201))
    assert res.trace[-1].evaluations == 20 * 201
    best = [r.best_hv for r in res.trace]
    assert np.all(np.diff(best) >= 0)
    assert all(r.best_hv >= r.hv - 1e-15 for r in res.trace)
    assert res.trace[-1].best_hv >= res.trace[0].best_hv
    fhv = front_hypervolume(brute_force_pareto(table))
    assert res.trace[-1].hv <= fhv + 1e-12
    assert abs(hypervolume(res.front.points) - res.trace[-1].hv) < 1e-12


def test_deterministic_with_seed():
    table = build_cost_table(gen_instance("III", 3, 4, 1))
    a, b = run_nsga2(table, MoeaConfig(seed=8)), run_nsga2(table, MoeaConfig(seed=8))
    assert [r.hv for r in a.trace] == [r.hv for r in b.trace]
    assert np.array_equal(a.population, b.population)


def test_population_of_optimum_copies_keeps_front_hv():
    inst = ProblemInstance("custom", 2, 4, 0, [LinearObjective([1, 2, 3, 4]), LinearObjective([2, 1, 1, 3])])
    table = build_cost_table(inst)
    front = brute_force_pareto(table)
    assert front.source_indices.tolist() == [0]
    res = run_nsga2(table, MoeaConfig(iterations=50), initial=np.zeros((20, 4), dtype=int))
    fhv = front_hypervolume(front)
    assert res.initial_hv == fhv
    assert all(r.hv == fhv and r.best_hv == fhv for r in res.trace)


@pytest.mark.parametrize("cls", ["I", "II", "III", "IV"])
def test_tiny_instance_front_within_oracle(cls):
    table = build_cost_table(gen_instance(cls, 2, 4, 0))
    oracle = set(brute_force_pareto(table).source_indices.tolist())
    hits = sum(set(run_nsga2(table, MoeaConfig(seed=s)).front.source_indices.tolist()) <= oracle for s in range(40))
    assert hits >= 35


def test_genome_indices_big_endian():
    assert genomes_to_indices([[1, 2], [0, 1]], 3).tolist() == [5, 1]
