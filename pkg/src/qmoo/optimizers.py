"""Derivative-free minimizers used to tune circuit angles.

Both methods minimize; hypervolume maximization is done by minimizing its
negative. Every callback invocation is counted, the best value seen so far is
tracked, and one trace record is kept per iteration (one direction-set sweep
for Powell, one generation for CMA-ES), with iteration 0 holding the start.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.optimize import minimize_scalar

log = logging.getLogger(__name__)

Objective = Callable[[np.ndarray], float]


@dataclass
class OptimizerConfig:
    method: str = "powell"
    max_evaluations: int = 1_000_000
    iteration_cap: int = 200
    population: int = 10
    init_low: float = -math.pi
    init_high: float = math.pi
    seed: int = 0
    line_tol: float = 1e-3
    rel_tol: float = 1e-8

    def __post_init__(self) -> None:
        if self.method not in ("powell", "cmaes"):
            raise ValueError(f"unknown optimizer {self.method!r}")
        if self.max_evaluations < 1 or self.iteration_cap < 1:
            raise ValueError("evaluation and iteration caps must be positive")
        if self.population < 1:
            raise ValueError("population must be positive")


@dataclass
class TraceRecord:
    iteration: int
    value: float
    best: float
    evaluations: int
    params: np.ndarray


@dataclass
class Trace:
    records: list[TraceRecord] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.records)

    def __iter__(self):
        return iter(self.records)

    @property
    def best_values(self) -> np.ndarray:
        return np.array([r.best for r in self.records])


class _BudgetExhausted(Exception):
    pass


class _CountingObjective:
    """Wraps the callback: counts calls, enforces the budget, remembers the best point."""

    def __init__(self, f: Objective, max_evaluations: int):
        self.f = f
        self.max_evaluations = max_evaluations
        self.count = 0
        self.best_x: np.ndarray | None = None
        self.best_f = math.inf

    def __call__(self, x: np.ndarray) -> float:
        if self.count >= self.max_evaluations:
            raise _BudgetExhausted
        self.count += 1
        value = float(self.f(x))
        if value < self.best_f or self.best_x is None:
            self.best_f = value
            self.best_x = np.array(x, dtype=np.float64)
        return value


def random_init(n_params: int, rng: np.random.Generator, low: float = -math.pi, high: float = math.pi) -> np.ndarray:
    if n_params < 1:
        raise ValueError("n_params must be >= 1")
    return rng.uniform(low, high, size=n_params)


def _small_improvement(old: float, new: float, rel_tol: float) -> bool:
    return 2.0 * abs(old - new) <= rel_tol * (abs(old) + abs(new)) + 1e-20


def _line_minimize(f: _CountingObjective, x: np.ndarray, u: np.ndarray, tol: float) -> tuple[float, float]:
    """Bounded Brent search for the step ``t`` in ``[-pi, pi]`` along unit direction ``u``."""
    res = minimize_scalar(
        lambda t: f(x + t * u), bounds=(-math.pi, math.pi), method="bounded", options={"xatol": tol}
    )
    return float(res.x), float(res.fun)


def powell_minimize(f: Objective, x0, cfg: OptimizerConfig) -> tuple[np.ndarray, float, Trace]:
    """Powell's conjugate-direction method.

    Directions start as the coordinate axes. A sweep line-minimizes along each
    direction in turn, moving only when the line search improves on the current
    value; then a line search along the normalized net displacement is made and
    that displacement replaces the direction that gave the largest decrease.
    """
    fc = _CountingObjective(f, cfg.max_evaluations)
    x = np.array(x0, dtype=np.float64)
    n = x.size
    trace = Trace()
    try:
        fx = fc(x)
    except _BudgetExhausted:
        raise ValueError("evaluation budget must allow at least one evaluation") from None
    trace.records.append(TraceRecord(0, fx, fc.best_f, fc.count, x.copy()))
    directions = np.eye(n)

    try:
        for iteration in range(1, cfg.iteration_cap + 1):
            x_start, f_start = x.copy(), fx
            largest_drop, largest_idx = 0.0, 0
            for i in range(n):
                t, ft = _line_minimize(fc, x, directions[i], cfg.line_tol)
                if ft < fx:
                    if fx - ft > largest_drop:
                        largest_drop, largest_idx = fx - ft, i
                    x = x + t * directions[i]
                    fx = ft
            step = x - x_start
            length = float(np.linalg.norm(step))
            if length > 0.0:
                u = step / length
                t, ft = _line_minimize(fc, x, u, cfg.line_tol)
                if ft < fx:
                    x = x + t * u
                    fx = ft
                directions[largest_idx] = u
            trace.records.append(TraceRecord(iteration, fx, fc.best_f, fc.count, x.copy()))
            if _small_improvement(f_start, fx, cfg.rel_tol):
                break
    except _BudgetExhausted:
        trace.records.append(TraceRecord(len(trace.records), fx, fc.best_f, fc.count, x.copy()))

    return fc.best_x, fc.best_f, trace


def cmaes_minimize(f: Objective, x0, cfg: OptimizerConfig) -> tuple[np.ndarray, float, Trace]:
    """(mu/mu_w, lambda)-CMA-ES with cumulative step-size adaptation.

    Uses log-rank recombination weights, rank-one plus rank-mu covariance
    updates and an initial step of 0.3 times the init interval width. The
    population is evaluated in index order and ranked with a stable sort, so
    ties resolve by candidate index.
    """
    lam = cfg.population
    if lam < 4:
        raise ValueError("CMA-ES needs a population of at least 4")
    rng = np.random.default_rng(cfg.seed)
    fc = _CountingObjective(f, cfg.max_evaluations)
    mean = np.array(x0, dtype=np.float64)
    n = mean.size

    mu = lam // 2
    weights = math.log(mu + 0.5) - np.log(np.arange(1, mu + 1))
    weights /= weights.sum()
    mu_eff = 1.0 / np.sum(weights**2)
    c_sigma = (mu_eff + 2.0) / (n + mu_eff + 5.0)
    d_sigma = 1.0 + 2.0 * max(0.0, math.sqrt((mu_eff - 1.0) / (n + 1.0)) - 1.0) + c_sigma
    c_c = (4.0 + mu_eff / n) / (n + 4.0 + 2.0 * mu_eff / n)
    c_1 = 2.0 / ((n + 1.3) ** 2 + mu_eff)
    c_mu = min(1.0 - c_1, 2.0 * (mu_eff - 2.0 + 1.0 / mu_eff) / ((n + 2.0) ** 2 + mu_eff))
    chi_n = math.sqrt(n) * (1.0 - 1.0 / (4.0 * n) + 1.0 / (21.0 * n * n))

    sigma = 0.3 * (cfg.init_high - cfg.init_low)
    C = np.eye(n)
    B = np.eye(n)
    D = np.ones(n)
    p_sigma = np.zeros(n)
    p_c = np.zeros(n)

    trace = Trace()
    try:
        f0 = fc(mean)
    except _BudgetExhausted:
        raise ValueError("evaluation budget must allow at least one evaluation") from None
    trace.records.append(TraceRecord(0, f0, fc.best_f, fc.count, mean.copy()))

    for generation in range(1, cfg.iteration_cap + 1):
        z = rng.standard_normal((lam, n))
        y = (z * D) @ B.T
        X = mean + sigma * y
        values = np.empty(lam)
        try:
            for j in range(lam):
                values[j] = fc(X[j])
        except _BudgetExhausted:
            done = values[:j]
            if j:
                trace.records.append(
                    TraceRecord(generation, float(done.min()), fc.best_f, fc.count, X[int(np.argmin(done))].copy())
                )
            break
        order = np.argsort(values, kind="stable")
        trace.records.append(
            TraceRecord(generation, float(values[order[0]]), fc.best_f, fc.count, X[order[0]].copy())
        )

        y_sel = y[order[:mu]]
        y_w = weights @ y_sel
        mean = mean + sigma * y_w

        inv_sqrt_C_yw = B @ ((B.T @ y_w) / D)
        p_sigma = (1.0 - c_sigma) * p_sigma + math.sqrt(c_sigma * (2.0 - c_sigma) * mu_eff) * inv_sqrt_C_yw
        ps_norm = float(np.linalg.norm(p_sigma))
        h_sigma = ps_norm / math.sqrt(1.0 - (1.0 - c_sigma) ** (2 * generation)) < (1.4 + 2.0 / (n + 1.0)) * chi_n
        p_c = (1.0 - c_c) * p_c + h_sigma * math.sqrt(c_c * (2.0 - c_c) * mu_eff) * y_w

        rank_mu = (y_sel.T * weights) @ y_sel
        delta_h = (1.0 - h_sigma) * c_c * (2.0 - c_c)
        C = (1.0 - c_1 - c_mu) * C + c_1 * (np.outer(p_c, p_c) + delta_h * C) + c_mu * rank_mu
        sigma *= math.exp((c_sigma / d_sigma) * (ps_norm / chi_n - 1.0))

        C = np.triu(C) + np.triu(C, 1).T
        try:
            eigvals, B = np.linalg.eigh(C)
            if not np.all(np.isfinite(eigvals)) or eigvals.min() <= 0 or eigvals.max() > 1e14 * eigvals.min():
                raise np.linalg.LinAlgError("ill-conditioned covariance")
            D = np.sqrt(eigvals)
        except np.linalg.LinAlgError:
            log.warning("CMA-ES covariance degenerated at generation %d; resetting to identity", generation)
            C, B, D = np.eye(n), np.eye(n), np.ones(n)
            p_c = np.zeros(n)
            p_sigma = np.zeros(n)
        if not math.isfinite(sigma) or sigma <= 0.0:
            log.warning("CMA-ES step size degenerated at generation %d; resetting", generation)
            sigma = 0.3 * (cfg.init_high - cfg.init_low)

    return fc.best_x, fc.best_f, trace


def minimize(f: Objective, x0, cfg: OptimizerConfig) -> tuple[np.ndarray, float, Trace]:
    if cfg.method == "powell":
        return powell_minimize(f, x0, cfg)
    return cmaes_minimize(f, x0, cfg)
