"""Dense statevector simulation of N qudits with local dimension d.

Basis states are indexed big-endian: the first qudit is the most significant
digit, so ``|x_1, ..., x_N>`` maps to ``sum_n x_n * d**(N - n)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

DEFAULT_DIM_CAP = 2**24

_UNITARY_TOL = 1e-10


@dataclass(frozen=True)
class QuditRegister:
    d: int
    N: int
    cap: int = DEFAULT_DIM_CAP

    def __post_init__(self) -> None:
        if self.d < 2:
            raise ValueError(f"local dimension must be >= 2, got {self.d}")
        if self.N < 1:
            raise ValueError(f"qudit count must be >= 1, got {self.N}")
        if self.d**self.N > self.cap:
            raise ValueError(f"Hilbert space dimension {self.d}**{self.N} exceeds cap {self.cap}")

    @property
    def dim(self) -> int:
        return self.d**self.N

    def digits(self) -> np.ndarray:
        """All basis digit vectors as a ``(dim, N)`` integer array, in index order."""
        idx = np.arange(self.dim)
        out = np.empty((self.dim, self.N), dtype=np.int64)
        for n in range(self.N - 1, -1, -1):
            idx, out[:, n] = np.divmod(idx, self.d)
        return out


@dataclass
class StateVector:
    register: QuditRegister
    amplitudes: np.ndarray

    def __post_init__(self) -> None:
        self.amplitudes = np.asarray(self.amplitudes, dtype=np.complex128)
        if self.amplitudes.shape != (self.register.dim,):
            raise ValueError(
                f"amplitude array has shape {self.amplitudes.shape}, expected ({self.register.dim},)"
            )

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def probabilities(self) -> np.ndarray:
        return self.amplitudes.real**2 + self.amplitudes.imag**2

    def copy(self) -> "StateVector":
        return StateVector(self.register, self.amplitudes.copy())


@dataclass
class ShotCounts:
    """Measurement outcome histogram; ``counts`` maps basis index to count."""

    counts: dict[int, int] = field(default_factory=dict)
    total: int = 0


def encode(x: Sequence[int], reg: QuditRegister) -> int:
    digits = np.asarray(x, dtype=np.int64)
    if digits.shape != (reg.N,):
        raise ValueError(f"digit vector must have length {reg.N}, got shape {digits.shape}")
    if np.any(digits < 0) or np.any(digits >= reg.d):
        raise ValueError(f"digits must lie in [0, {reg.d}), got {list(x)}")
    index = 0
    for digit in digits:
        index = index * reg.d + int(digit)
    return index


def decode(i: int, reg: QuditRegister) -> tuple[int, ...]:
    i = int(i)
    if not 0 <= i < reg.dim:
        raise ValueError(f"basis index {i} outside [0, {reg.dim})")
    digits = []
    for _ in range(reg.N):
        i, r = divmod(i, reg.d)
        digits.append(r)
    return tuple(reversed(digits))


def uniform_state(reg: QuditRegister) -> StateVector:
    amp = np.full(reg.dim, 1.0 / np.sqrt(reg.dim), dtype=np.complex128)
    return StateVector(reg, amp)


def basis_state(index: int, reg: QuditRegister) -> StateVector:
    amp = np.zeros(reg.dim, dtype=np.complex128)
    amp[index] = 1.0
    return StateVector(reg, amp)


def phase_inplace(amplitudes: np.ndarray, phases: np.ndarray) -> None:
    """``amplitudes *= exp(-i * phases)`` without building an intermediate complex exponent."""
    factor = np.empty(phases.shape, dtype=np.complex128)
    np.cos(phases, out=factor.real)
    np.sin(phases, out=factor.imag)
    np.negative(factor.imag, out=factor.imag)
    amplitudes *= factor


def apply_diagonal_phase(state: StateVector, phases: np.ndarray) -> StateVector:
    """Multiply each amplitude by ``exp(-i * phases[i])``."""
    phases = np.asarray(phases, dtype=np.float64)
    if phases.shape != (state.register.dim,):
        raise ValueError(f"phase array has shape {phases.shape}, expected ({state.register.dim},)")
    if not np.all(np.isfinite(phases)):
        raise ValueError("phases must be finite")
    out = state.copy()
    phase_inplace(out.amplitudes, phases)
    return out


def _check_unitary(U: np.ndarray, d: int) -> np.ndarray:
    U = np.asarray(U, dtype=np.complex128)
    if U.shape != (d, d):
        raise ValueError(f"gate must be {d}x{d}, got {U.shape}")
    if not np.allclose(U.conj().T @ U, np.eye(d), rtol=0.0, atol=_UNITARY_TOL):
        raise ValueError("gate is not unitary within tolerance")
    return U


def apply_local_unitary(state: StateVector, U: np.ndarray, qudit_index: int) -> StateVector:
    """Apply a single-qudit gate to qudit ``qudit_index`` (1-based, 1 is most significant)."""
    reg = state.register
    U = _check_unitary(U, reg.d)
    if not 1 <= qudit_index <= reg.N:
        raise ValueError(f"qudit index {qudit_index} outside [1, {reg.N}]")
    left = reg.d ** (qudit_index - 1)
    right = reg.d ** (reg.N - qudit_index)
    psi = state.amplitudes.reshape(left, reg.d, right)
    new = np.einsum("ab,ibj->iaj", U, psi).reshape(-1)
    return StateVector(reg, new)


def _group_size(d: int) -> int:
    # qudits fused per contraction; measured fastest on dense complex128 states
    return 1 if d >= 5 else (2 if d >= 3 else 3)


def apply_same_local_unitary_all(amplitudes: np.ndarray, U: np.ndarray, d: int, N: int) -> np.ndarray:
    """Apply ``U`` to every qudit and return the new amplitude array.

    Each step contracts a group of leading qudit axes with the Kronecker power
    of ``U`` and rotates them to the end; once all N qudits have been visited
    the axis order is restored.
    """
    g = _group_size(d)
    powers = {1: U}
    psi = amplitudes
    remaining = N
    while remaining > 0:
        s = min(g, remaining)
        if s not in powers:
            W = U
            for _ in range(s - 1):
                W = np.kron(W, U)
            powers[s] = W
        psi = (powers[s] @ psi.reshape(d**s, -1)).T.reshape(-1)
        remaining -= s
    return psi


def sample(state: StateVector, n_shots: int, rng: np.random.Generator) -> ShotCounts:
    if n_shots < 1:
        raise ValueError("n_shots must be >= 1")
    counts = sample_array(state.probabilities(), n_shots, rng)
    nz = np.flatnonzero(counts)
    return ShotCounts({int(i): int(counts[i]) for i in nz}, int(n_shots))


def sample_array(probs: np.ndarray, n_shots: int, rng: np.random.Generator) -> np.ndarray:
    """Multinomial counts over all basis states as a dense integer array."""
    p = probs / probs.sum()
    return rng.multinomial(n_shots, p)


def top_k_weights(weights: np.ndarray, k: int) -> np.ndarray:
    """Indices of the ``k`` largest positive weights, descending, ties by ascending index."""
    if k < 1:
        raise ValueError("k must be >= 1")
    weights = np.asarray(weights)
    candidates = np.flatnonzero(weights > 0)
    if candidates.size > k:
        w = weights[candidates]
        threshold = np.partition(w, w.size - k)[w.size - k]
        above = candidates[w > threshold]
        ties = candidates[w == threshold][: k - above.size]
        candidates = np.concatenate([above, ties])
    order = np.lexsort((candidates, -weights[candidates]))
    return candidates[order]


def top_k(source: ShotCounts | StateVector | Mapping[int, int], k: int) -> list[int]:
    """The ``k`` most frequent (or most probable) basis indices.

    Accepts measured counts, or a state for the exact-weight limit. Ties are
    resolved by ascending basis index.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    if isinstance(source, StateVector):
        return [int(i) for i in top_k_weights(source.probabilities(), k)]
    counts = source.counts if isinstance(source, ShotCounts) else source
    ranked = sorted((-c, i) for i, c in counts.items() if c > 0)
    return [i for _, i in ranked[:k]]


def pareto_weight(state: StateVector, pareto_set: Iterable[int]) -> float:
    idx = np.fromiter((int(i) for i in pareto_set), dtype=np.int64)
    if idx.size == 0:
        return 0.0
    return float(state.probabilities()[np.unique(idx)].sum())
