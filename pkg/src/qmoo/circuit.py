"""The layered multi-objective variational circuit and its hypervolume score.

Each layer holds one block per objective, applied in ascending objective
order: the cost phase ``exp(-i gamma C_k)`` followed by the mixer
``exp(-i(beta1 sum L_x + beta2 sum L_z^2))`` on every qudit. Phase
Hamiltonians use the normalized costs from the cost table.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .benchmarks import CostTable
from .moo import hypervolume
from .operators import mixer_matrix
from .statevector import (
    QuditRegister,
    StateVector,
    apply_same_local_unitary_all,
    phase_inplace,
    sample_array,
    top_k_weights,
)


@dataclass
class CircuitParams:
    """Variational angles: ``gammas[l, k]`` and ``betas[l, k] = (beta1, beta2)``."""

    gammas: np.ndarray
    betas: np.ndarray

    def __post_init__(self) -> None:
        self.gammas = np.asarray(self.gammas, dtype=np.float64)
        self.betas = np.asarray(self.betas, dtype=np.float64)
        if self.gammas.ndim != 2 or self.betas.shape != self.gammas.shape + (2,):
            raise ValueError(
                f"expected gammas (L, K) and betas (L, K, 2), got {self.gammas.shape} and {self.betas.shape}"
            )

    @property
    def L(self) -> int:
        return self.gammas.shape[0]

    @property
    def K(self) -> int:
        return self.gammas.shape[1]

    @classmethod
    def zeros(cls, L: int, K: int) -> "CircuitParams":
        return cls(np.zeros((L, K)), np.zeros((L, K, 2)))


def n_params(L: int, K: int, d: int) -> int:
    return (2 if d == 2 else 3) * L * K


def pack_params(params: CircuitParams, d: int) -> np.ndarray:
    """Flatten to ``(gamma, beta1[, beta2])`` per block, layers outer, objectives inner."""
    per_block = 2 if d == 2 else 3
    out = np.empty((params.L, params.K, per_block))
    out[:, :, 0] = params.gammas
    out[:, :, 1] = params.betas[:, :, 0]
    if per_block == 3:
        out[:, :, 2] = params.betas[:, :, 1]
    return out.reshape(-1)


def unpack_params(vector: Sequence[float], L: int, K: int, d: int) -> CircuitParams:
    v = np.asarray(vector, dtype=np.float64)
    if v.shape != (n_params(L, K, d),):
        raise ValueError(f"parameter vector has length {v.size}, expected {n_params(L, K, d)}")
    per_block = 2 if d == 2 else 3
    blocks = v.reshape(L, K, per_block)
    betas = np.zeros((L, K, 2))
    betas[:, :, 0] = blocks[:, :, 1]
    if per_block == 3:
        betas[:, :, 1] = blocks[:, :, 2]
    return CircuitParams(blocks[:, :, 0].copy(), betas)


@dataclass(frozen=True)
class ShotPolicy:
    """Finite-shot sampling, or ``shots=None`` for exact top weights."""

    shots: int | None = None

    def __post_init__(self) -> None:
        if self.shots is not None and self.shots < 1:
            raise ValueError("shot count must be >= 1")

    @property
    def exact(self) -> bool:
        return self.shots is None

    @property
    def label(self) -> str:
        return "exact" if self.shots is None else str(self.shots)

    @classmethod
    def parse(cls, text: str | int | None) -> "ShotPolicy":
        if text is None or str(text).lower() in ("exact", "inf", "none"):
            return cls(None)
        return cls(int(text))


@dataclass
class EvaluationResult:
    hv: float
    solutions: list[tuple[int, tuple[float, ...]]]
    pareto_weight: float | None = None
    state: StateVector | None = field(default=None, repr=False)

    @property
    def indices(self) -> list[int]:
        return [i for i, _ in self.solutions]


def prepare_amplitudes(table: CostTable, params: CircuitParams) -> np.ndarray:
    inst = table.instance
    d, N = inst.d, inst.N
    if params.K != table.K:
        raise ValueError(f"parameters are for K={params.K} objectives, table has K={table.K}")
    psi = np.full(table.dim, 1.0 / np.sqrt(table.dim), dtype=np.complex128)
    for l in range(params.L):
        for k in range(params.K):
            gamma = params.gammas[l, k]
            if gamma != 0.0:
                phase_inplace(psi, gamma * table.normalized[k])
            b1, b2 = params.betas[l, k]
            if b1 != 0.0 or (d > 2 and b2 != 0.0):
                psi = apply_same_local_unitary_all(psi, mixer_matrix(d, b1, b2), d, N)
    return psi


def prepare_state(table: CostTable, params: CircuitParams) -> StateVector:
    reg = QuditRegister(table.instance.d, table.instance.N)
    return StateVector(reg, prepare_amplitudes(table, params))


def select_solutions(
    probs: np.ndarray, policy: ShotPolicy, n_select: int, rng: np.random.Generator | None
) -> np.ndarray:
    """Basis indices kept from one circuit execution: top by count, or by exact weight."""
    if policy.exact:
        return top_k_weights(probs, n_select)
    if rng is None:
        raise ValueError("finite-shot evaluation needs a random generator")
    return top_k_weights(sample_array(probs, policy.shots, rng), n_select)


def evaluate_params(
    table: CostTable,
    params: CircuitParams,
    policy: ShotPolicy = ShotPolicy(),
    n_select: int = 20,
    rng: np.random.Generator | None = None,
    pareto_set: Iterable[int] | np.ndarray | None = None,
    keep_state: bool = False,
) -> EvaluationResult:
    if n_select < 1:
        raise ValueError("n_select must be >= 1")
    psi = prepare_amplitudes(table, params)
    probs = psi.real**2 + psi.imag**2
    chosen = select_solutions(probs, policy, n_select, rng)
    vectors = table.vectors(chosen)
    hv = hypervolume(vectors, np.ones(table.K)) if len(chosen) else 0.0
    weight = None
    if pareto_set is not None:
        ps = np.asarray(list(pareto_set) if not isinstance(pareto_set, np.ndarray) else pareto_set, dtype=np.int64)
        weight = float(probs[ps].sum()) if ps.size else 0.0
    solutions = [(int(i), tuple(float(v) for v in vec)) for i, vec in zip(chosen, vectors)]
    state = None
    if keep_state:
        state = StateVector(QuditRegister(table.instance.d, table.instance.N), psi)
    return EvaluationResult(hv, solutions, weight, state)
