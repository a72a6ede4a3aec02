"""Seeded benchmark instances (classes I-V) and exhaustive normalized cost tables.

Random draws use ``numpy.random.Generator(PCG64(seed))``. For each objective,
in objective order, the draw order is: coupling entries (upper triangle,
row-major, or chain links in order, or diagonal entries), then the local
field noise ``g``, then the target point ``x0``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence, Union

import numpy as np

from .statevector import DEFAULT_DIM_CAP, QuditRegister

CLASSES = ("I", "II", "III", "IV", "V")
N_OBJECTIVES = {"I": 2, "II": 2, "III": 2, "IV": 3, "V": 5}

AFM_RANGE = (0.5, 1.0)
FM_RANGE = (-1.0, -0.5)
DIAG_RANGE = (0.5, 1.0)
FIELD_RANGE = (-1.0, 1.0)


@dataclass
class LinearObjective:
    c: np.ndarray
    kind: str = "linear"

    def __post_init__(self) -> None:
        self.c = np.asarray(self.c, dtype=np.float64)


@dataclass
class QuadraticObjective:
    J: np.ndarray
    h: np.ndarray
    kind: str = "quadratic"
    label: str = ""

    def __post_init__(self) -> None:
        self.J = np.asarray(self.J, dtype=np.float64)
        self.h = np.asarray(self.h, dtype=np.float64)
        if not np.array_equal(self.J, self.J.T):
            raise ValueError("coupling matrix must be exactly symmetric")


Objective = Union[LinearObjective, QuadraticObjective]


@dataclass
class ProblemInstance:
    class_tag: str
    d: int
    N: int
    seed: int
    objectives: list[Objective]
    metadata: dict = field(default_factory=dict)

    @property
    def K(self) -> int:
        return len(self.objectives)

    @property
    def register(self) -> QuditRegister:
        return QuditRegister(self.d, self.N)


@dataclass
class CostTable:
    """Normalized per-basis-state costs, shape ``(K, d**N)``."""

    instance: ProblemInstance
    raw_min: np.ndarray
    raw_max: np.ndarray
    normalized: np.ndarray
    degenerate: list[bool]

    @property
    def K(self) -> int:
        return self.normalized.shape[0]

    @property
    def dim(self) -> int:
        return self.normalized.shape[1]

    def vectors(self, indices: Sequence[int] | np.ndarray) -> np.ndarray:
        """Objective vectors of the given basis indices, shape ``(len(indices), K)``."""
        return self.normalized[:, np.asarray(indices, dtype=np.int64)].T


def eval_raw(obj: Objective, x: Sequence[int]) -> float:
    x = np.asarray(x, dtype=np.float64)
    if isinstance(obj, LinearObjective):
        if x.shape != obj.c.shape:
            raise ValueError(f"digit vector length {x.size} does not match objective size {obj.c.size}")
        return float(obj.c @ x)
    if x.shape != obj.h.shape:
        raise ValueError(f"digit vector length {x.size} does not match objective size {obj.h.size}")
    return float(x @ obj.J @ x + obj.h @ x)


def eval_raw_all(obj: Objective, X: np.ndarray) -> np.ndarray:
    """Vectorized ``eval_raw`` over the rows of ``X``."""
    X = np.asarray(X, dtype=np.float64)
    if isinstance(obj, LinearObjective):
        return X @ obj.c
    return np.einsum("ij,ij->i", X @ obj.J, X) + X @ obj.h


def _spin_field(J: np.ndarray, d: int, rng: np.random.Generator) -> np.ndarray:
    g = rng.uniform(*FIELD_RANGE, size=J.shape[0])
    return g - d * J.sum(axis=0)


def _dense_coupling(N: int, d: int, rng: np.random.Generator, lo_hi: tuple[float, float], label: str):
    J = np.zeros((N, N))
    for i in range(N):
        for j in range(i + 1, N):
            J[i, j] = J[j, i] = rng.uniform(*lo_hi)
    return QuadraticObjective(J, _spin_field(J, d, rng), label=label)


def _chain_coupling(N: int, d: int, rng: np.random.Generator, ranges: Sequence[tuple[float, float]], label: str):
    J = np.zeros((N, N))
    for i, lo_hi in enumerate(ranges):
        J[i, i + 1] = J[i + 1, i] = rng.uniform(*lo_hi)
    return QuadraticObjective(J, _spin_field(J, d, rng), label=label)


def _distance(N: int, d: int, rng: np.random.Generator, scaled: bool):
    if scaled:
        J = np.diag(rng.uniform(*DIAG_RANGE, size=N))
    else:
        J = np.eye(N)
    x0 = rng.uniform(0.0, d - 1.0, size=N)
    return QuadraticObjective(J, -2.0 * J @ x0, label="distance")


def gen_instance(class_tag: str, d: int, N: int, seed: int) -> ProblemInstance:
    if class_tag not in CLASSES:
        raise ValueError(f"unknown benchmark class {class_tag!r}; expected one of {CLASSES}")
    if d < 2:
        raise ValueError(f"local dimension must be >= 2, got {d}")
    if N < 2:
        raise ValueError(f"need at least 2 variables, got N={N}")
    if class_tag == "V" and N < 4:
        raise ValueError("class V needs N >= 4 so both half-chains are nonempty")
    rng = np.random.Generator(np.random.PCG64(seed))

    if class_tag == "I":
        c1 = rng.uniform(-1.0, 1.0, size=N)
        u = rng.uniform(-1.0, 1.0, size=N)
        objectives: list[Objective] = [LinearObjective(c1), LinearObjective(-0.5 * c1 + 0.5 * u)]
    elif class_tag == "II":
        objectives = [
            _dense_coupling(N, d, rng, AFM_RANGE, "afm"),
            _dense_coupling(N, d, rng, FM_RANGE, "fm"),
        ]
    elif class_tag == "III":
        objectives = [_dense_coupling(N, d, rng, AFM_RANGE, "afm"), _distance(N, d, rng, scaled=True)]
    elif class_tag == "IV":
        objectives = [
            _dense_coupling(N, d, rng, AFM_RANGE, "afm"),
            _dense_coupling(N, d, rng, FM_RANGE, "fm"),
            _distance(N, d, rng, scaled=True),
        ]
    else:
        half = N // 2
        links = range(1, N)  # link i couples variables i and i+1 (1-based)
        fm_first = [FM_RANGE if i <= half else AFM_RANGE for i in links]
        afm_first = [AFM_RANGE if i <= half else FM_RANGE for i in links]
        objectives = [
            _chain_coupling(N, d, rng, [AFM_RANGE] * (N - 1), "afm_chain"),
            _chain_coupling(N, d, rng, [FM_RANGE] * (N - 1), "fm_chain"),
            _distance(N, d, rng, scaled=False),
            _chain_coupling(N, d, rng, fm_first, "fm_afm_chain"),
            _chain_coupling(N, d, rng, afm_first, "afm_fm_chain"),
        ]

    metadata = {
        "rng": "PCG64",
        "afm_range": list(AFM_RANGE),
        "fm_range": list(FM_RANGE),
        "diag_range": list(DIAG_RANGE),
        "field_range": list(FIELD_RANGE),
    }
    return ProblemInstance(class_tag, d, N, seed, objectives, metadata)


def build_cost_table(instance: ProblemInstance, cap: int = DEFAULT_DIM_CAP) -> CostTable:
    if instance.d**instance.N > cap:
        raise MemoryError(f"{instance.d}**{instance.N} basis states exceed enumeration cap {cap}")
    X = QuditRegister(instance.d, instance.N, cap).digits()
    raw = np.stack([eval_raw_all(obj, X) for obj in instance.objectives])
    lo = raw.min(axis=1)
    hi = raw.max(axis=1)
    degenerate = [bool(h == l) for l, h in zip(lo, hi)]
    normalized = np.zeros_like(raw)
    for k, degen in enumerate(degenerate):
        if not degen:
            normalized[k] = (raw[k] - lo[k]) / (hi[k] - lo[k])
    return CostTable(instance, lo, hi, normalized, degenerate)


def normalize_column(values: np.ndarray) -> np.ndarray:
    values = np.asarray(values, dtype=np.float64)
    lo, hi = values.min(), values.max()
    if hi == lo:
        return np.zeros_like(values)
    return (values - lo) / (hi - lo)


# -- serialization ---------------------------------------------------------

def _hex(a: np.ndarray) -> list:
    return [float(v).hex() for v in np.ravel(a)]


def _unhex(values: Sequence[str], shape=None) -> np.ndarray:
    arr = np.array([float.fromhex(v) for v in values], dtype=np.float64)
    return arr.reshape(shape) if shape is not None else arr


def instance_to_dict(instance: ProblemInstance, table: CostTable | None = None) -> dict:
    objs = []
    for obj in instance.objectives:
        if isinstance(obj, LinearObjective):
            objs.append({"kind": "linear", "c": _hex(obj.c)})
        else:
            objs.append({"kind": "quadratic", "label": obj.label, "J": _hex(obj.J), "h": _hex(obj.h)})
    out = {
        "format": "qmoo-instance/1",
        "class": instance.class_tag,
        "d": instance.d,
        "N": instance.N,
        "K": instance.K,
        "seed": instance.seed,
        "metadata": instance.metadata,
        "objectives": objs,
        "normalization": None,
    }
    if table is not None:
        out["normalization"] = {
            "raw_min": _hex(table.raw_min),
            "raw_max": _hex(table.raw_max),
            "degenerate": table.degenerate,
        }
    return out


def instance_from_dict(data: dict) -> ProblemInstance:
    N = int(data["N"])
    objectives: list[Objective] = []
    for obj in data["objectives"]:
        if obj["kind"] == "linear":
            objectives.append(LinearObjective(_unhex(obj["c"])))
        else:
            objectives.append(
                QuadraticObjective(_unhex(obj["J"], (N, N)), _unhex(obj["h"]), label=obj.get("label", ""))
            )
    return ProblemInstance(
        data["class"], int(data["d"]), N, int(data["seed"]), objectives, dict(data.get("metadata", {}))
    )
