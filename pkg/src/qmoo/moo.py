"""Pareto dominance, non-dominated filtering and the exact hypervolume indicator.

All objectives are minimized. The hypervolume is the Lebesgue measure of the
region dominated by a point set and bounded above by a reference point.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING, Sequence

import moocore
import numpy as np

if TYPE_CHECKING:
    from .benchmarks import CostTable


class DegenerateFrontError(ValueError):
    """The reference front has zero hypervolume, so normalization is undefined."""


@dataclass
class ParetoFront:
    points: np.ndarray
    source_indices: np.ndarray | None = None

    def __len__(self) -> int:
        return len(self.points)


def _as_points(points, K: int | None = None) -> np.ndarray:
    P = np.asarray(points, dtype=np.float64)
    if P.size == 0:
        return np.empty((0, K if K is not None else 0))
    if P.ndim == 1:
        P = P[None, :]
    if P.ndim != 2:
        raise ValueError(f"points must be a 2D array, got shape {P.shape}")
    if K is not None and P.shape[1] != K:
        raise ValueError(f"points have {P.shape[1]} objectives, reference has {K}")
    return P


def weakly_dominates(a: Sequence[float], b: Sequence[float]) -> bool:
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ValueError(f"objective vectors differ in length: {a.shape} vs {b.shape}")
    return bool(np.all(a <= b))


def dominates(a: Sequence[float], b: Sequence[float]) -> bool:
    """Strict Pareto order: weakly dominates and differs somewhere."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    return weakly_dominates(a, b) and bool(np.any(a < b))


def _nondominated_mask(P: np.ndarray, keep_duplicates: bool = False) -> np.ndarray:
    """Pairwise non-dominance mask; duplicates keep their first occurrence unless requested."""
    le = np.all(P[:, None, :] <= P[None, :, :], axis=2)
    eq = le & le.T
    dominated = (le & ~eq).any(axis=0)
    if keep_duplicates:
        return ~dominated
    dup = np.triu(eq, k=1).any(axis=0)
    return ~(dominated | dup)


def nondominated_unique(points) -> np.ndarray:
    """Mutually non-dominated points with duplicates collapsed, in input order."""
    P = _as_points(points)
    if len(P) <= 1:
        return P.copy()
    return P[_nondominated_mask(P)]


def non_dominated_filter(points) -> ParetoFront:
    P = _as_points(points)
    if len(P) == 0:
        return ParetoFront(P, np.empty(0, dtype=np.int64))
    idx = np.flatnonzero(_nondominated_mask(P))
    return ParetoFront(P[idx], idx)


# -- hypervolume -----------------------------------------------------------

def hv_2d(points: np.ndarray, ref: Sequence[float]) -> float:
    """Sorted sweep for two objectives; dominated points are tolerated."""
    P = _as_points(points, 2)
    r = np.asarray(ref, dtype=np.float64)
    P = P[np.all(P < r, axis=1)]
    if len(P) == 0:
        return 0.0
    order = np.lexsort((P[:, 1], P[:, 0]))
    x = P[order, 0]
    y = np.minimum.accumulate(P[order, 1])
    widths = np.diff(np.append(x, r[0]))
    return float(np.sum(widths * (r[1] - y)))


def _hv_sorted(P: np.ndarray, r: np.ndarray) -> float:
    """Exact HV of points strictly inside the reference box.

    Points are processed in descending order of the last objective. Every point
    after ``p`` is then no worse than ``p`` in that objective, so the limit set
    of ``p`` has a constant last coordinate and its exclusive contribution
    factors into ``(r_K - p_K)`` times a ``K-1`` dimensional exclusive volume.
    """
    n, K = P.shape
    if n == 0:
        return 0.0
    if n == 1:
        return float(np.prod(r - P[0]))
    if K == 2:
        return hv_2d(P, r)
    if n > 2:
        P = P[_nondominated_mask(P)]
        n = len(P)
    P = P[np.argsort(-P[:, -1], kind="stable")]
    head = P[:, :-1]
    r_head = r[:-1]
    total = 0.0
    for i in range(n):
        p = head[i]
        box = float(np.prod(r_head - p))
        if i + 1 < n:
            limited = np.maximum(head[i + 1 :], p)
            limited = limited[np.all(limited < r_head, axis=1)]
            box -= _hv_sorted(limited, r_head)
        total += (r[-1] - P[i, -1]) * box
    return total


def hypervolume(points, r: Sequence[float] | None = None, method: str = "auto") -> float:
    """Exact hypervolume of ``points`` w.r.t. reference ``r`` (default all ones).

    Points that are not strictly better than ``r`` in every coordinate span no
    volume and are dropped. The result is independent of point order and of
    duplicates.

    ``method`` selects the exact algorithm for three or more objectives:
    ``"wfg"`` is the in-package recursion, ``"moocore"`` the compiled
    dimension-sweep from moocore, and ``"auto"`` picks moocore. Two objectives
    always use the sorted sweep.
    """
    if method not in ("auto", "wfg", "moocore"):
        raise ValueError(f"unknown hypervolume method {method!r}")
    if r is None:
        P = _as_points(points)
        if len(P) == 0:
            return 0.0
        ref = np.ones(P.shape[1])
    else:
        ref = np.asarray(r, dtype=np.float64)
        P = _as_points(points, len(ref))
    if len(P) == 0:
        return 0.0
    if P.shape[1] < 2:
        raise ValueError("hypervolume needs at least 2 objectives")
    P = P[np.all(P < ref, axis=1)]
    if len(P) == 0:
        return 0.0
    if P.shape[1] == 2:
        return hv_2d(P, ref)
    if method == "wfg":
        if len(P) > 256:
            P = streaming_front(P)[0]
        return _hv_sorted(np.unique(P, axis=0), ref)
    return float(moocore.hypervolume(P, ref=ref))


def normalized_hv(points, front, r: Sequence[float] | None = None) -> float:
    front_pts = front.points if isinstance(front, ParetoFront) else front
    denom = hypervolume(front_pts, r)
    if denom <= 0.0:
        raise DegenerateFrontError("reference front has zero hypervolume")
    return hypervolume(points, r) / denom


# -- exhaustive Pareto front -----------------------------------------------

def streaming_front(P: np.ndarray, chunk: int = 512) -> tuple[np.ndarray, np.ndarray]:
    """All efficient rows of ``P`` (duplicates kept) and their row indices, ascending.

    Rows are visited in lexicographic order so a dominating row always comes
    first; each chunk is screened against the accumulated front and then
    against itself.
    """
    P = np.asarray(P, dtype=np.float64)
    n, K = P.shape
    order = np.lexsort(P.T[::-1])
    front_idx = np.empty(0, dtype=np.int64)
    for start in range(0, n, chunk):
        cand = order[start : start + chunk]
        C = P[cand]
        if front_idx.size:
            F = P[front_idx]
            le = np.all(F[:, None, :] <= C[None, :, :], axis=2)
            lt = np.any(F[:, None, :] < C[None, :, :], axis=2)
            alive = ~(le & lt).any(axis=0)
            cand, C = cand[alive], C[alive]
        if cand.size > 1:
            cand = cand[_nondominated_mask(C, keep_duplicates=True)]
        front_idx = np.concatenate([front_idx, cand])
    front_idx = np.sort(front_idx)
    return P[front_idx], front_idx


def brute_force_pareto(table: "CostTable") -> ParetoFront:
    """Exact Pareto front over every basis state of a cost table.

    Every efficient basis state is listed (states sharing an objective vector
    all appear), ordered by ascending basis index.
    """
    pts, idx = streaming_front(table.normalized.T)
    return ParetoFront(pts, idx)


def front_hypervolume(front: ParetoFront, r: Sequence[float] | None = None) -> float:
    return hypervolume(np.unique(front.points, axis=0), r)
