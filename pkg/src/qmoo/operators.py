"""Single-qudit angular momentum generators and the block mixer unitary."""

from __future__ import annotations

import numpy as np


def _check_dim(d: int) -> None:
    if d < 2:
        raise ValueError(f"local dimension must be >= 2, got {d}")


def _lz_diagonal(d: int) -> np.ndarray:
    x = np.arange(d, dtype=np.float64)
    return (2.0 * x - d + 1.0) / 2.0


def angular_momentum_x(d: int) -> np.ndarray:
    """Spin-(d-1)/2 ``L_x``: ``<x+1|L_x|x> = sqrt((x+1)(d-1-x)) / 2``, real symmetric tridiagonal."""
    _check_dim(d)
    x = np.arange(d - 1, dtype=np.float64)
    off = 0.5 * np.sqrt((x + 1.0) * (d - 1.0 - x))
    return (np.diag(off, 1) + np.diag(off, -1)).astype(np.complex128)


def angular_momentum_z(d: int) -> np.ndarray:
    _check_dim(d)
    return np.diag(_lz_diagonal(d)).astype(np.complex128)


def squeezing(d: int) -> np.ndarray:
    """One-axis twisting generator ``L_z**2`` (a multiple of identity for d=2)."""
    _check_dim(d)
    return np.diag(_lz_diagonal(d) ** 2).astype(np.complex128)


def hermitian_expm(H: np.ndarray) -> np.ndarray:
    """``exp(-i H)`` for Hermitian ``H`` via eigendecomposition."""
    w, V = np.linalg.eigh(H)
    return (V * np.exp(-1j * w)) @ V.conj().T


def mixer_generator(d: int, beta1: float, beta2: float) -> np.ndarray:
    H = beta1 * angular_momentum_x(d)
    # L_z^2 is a global phase at d=2 and is dropped there
    if d > 2:
        H = H + beta2 * squeezing(d)
    return H


def mixer_matrix(d: int, beta1: float, beta2: float = 0.0) -> np.ndarray:
    """Per-qudit mixer ``exp(-i(beta1 L_x + beta2 L_z^2))``; ``beta2`` is ignored for d=2."""
    _check_dim(d)
    if not (np.isfinite(beta1) and np.isfinite(beta2)):
        raise ValueError("mixer angles must be finite")
    return hermitian_expm(mixer_generator(d, beta1, beta2))
