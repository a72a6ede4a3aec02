import math

import numpy as np
import pytest
from scipy.optimize import minimize as scipy_minimize, rosen

from qmoo.optimizers import OptimizerConfig, cmaes_minimize, minimize, powell_minimize, random_init


def test_random_init_examples():
    x = random_init(100_000, np.random.default_rng(0))
    assert x.min() >= -math.pi and x.max() <= math.pi
    assert abs(x.mean()) < 0.02
    assert np.array_equal(random_init(7, np.random.default_rng(3)), random_init(7, np.random.default_rng(3)))
    with pytest.raises(ValueError):
        random_init(0, np.random.default_rng(0))


def test_powell_convex_quadratic():
    x, f, trace = powell_minimize(lambda x: (x[0] - 1) ** 2 + (x[1] + 2) ** 2, np.zeros(2), OptimizerConfig())
    np.testing.assert_allclose(x, [1, -2], atol=1e-6)
    assert trace.records[0].iteration == 0 and trace.records[0].evaluations == 1


def test_powell_constant_terminates_after_one_iteration():
    x, f, trace = powell_minimize(lambda x: 3.5, np.zeros(4), OptimizerConfig())
    assert f == 3.5
    assert [r.iteration for r in trace] == [0, 1]


def test_powell_rosenbrock_against_reference():
    ref = scipy_minimize(rosen, np.zeros(6), method="Powell", options={"maxiter": 200})
    x, f, trace = powell_minimize(rosen, np.zeros(6), OptimizerConfig(iteration_cap=200))
    assert ref.fun < 1e-3
    assert f < 1e-3
    assert len(trace) <= 201


def test_powell_respects_budget_and_best_tracking():
    calls = []

    def f(x):
        calls.append(1)
        return float(np.sum(np.cos(3 * x) + 0.1 * x**2))

    x, fbest, trace = powell_minimize(f, np.full(5, 0.3), OptimizerConfig(max_evaluations=57))
    assert len(calls) == 57 == trace.records[-1].evaluations
    assert np.all(np.diff(trace.best_values) <= 0)
    assert fbest == min(r.best for r in trace)
    with pytest.raises(ValueError):
        OptimizerConfig(max_evaluations=0)


def test_cmaes_sphere_against_reference():
    import cma

    sphere = lambda x: float(np.dot(x, x))
    x0 = np.ones(4)
    es = cma.CMAEvolutionStrategy(x0, 0.3 * 2 * math.pi, {"popsize": 10, "seed": 5, "maxiter": 200, "verbose": -9})
    es.optimize(sphere)
    assert es.result.fbest < 1e-8
    x, f, trace = cmaes_minimize(sphere, x0, OptimizerConfig(method="cmaes", iteration_cap=200, seed=5))
    assert f < 1e-8
    assert len(trace) == 201 and trace.records[-1].evaluations == 1 + 200 * 10


def test_cmaes_deterministic_with_seed():
    f = lambda x: float(np.sum(np.abs(x)))
    cfg = OptimizerConfig(method="cmaes", iteration_cap=30, seed=11)
    a = cmaes_minimize(f, np.full(3, 2.0), cfg)[2]
    b = cmaes_minimize(f, np.full(3, 2.0), cfg)[2]
    assert [(r.value, r.evaluations) for r in a] == [(r.value, r.evaluations) for r in b]
    assert all(np.array_equal(p.params, q.params) for p, q in zip(a, b))


def test_cmaes_noisy_objective_best_so_far_non_increasing():
    rng = np.random.default_rng(1)
    f = lambda x: float(x @ x + rng.uniform(0, 0.01))
    x, fbest, trace = minimize(f, np.ones(4), OptimizerConfig(method="cmaes", iteration_cap=50))
    assert np.all(np.diff(trace.best_values) <= 0)
    assert fbest == trace.best_values[-1]


def test_cmaes_small_population_rejected():
    with pytest.raises(ValueError):
        cmaes_minimize(lambda x: 0.0, np.zeros(2), OptimizerConfig(method="cmaes", population=3))
    with pytest.raises(ValueError):
        OptimizerConfig(method="nelder-mead")
