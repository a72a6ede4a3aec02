"""NSGA-II baseline over the integer search domain {0, ..., d-1}^N."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .benchmarks import CostTable
from .moo import ParetoFront, hypervolume, non_dominated_filter


@dataclass
class MoeaConfig:
    population: int = 20
    iterations: int = 200
    crossover_rate: float = 0.9
    gene_swap_prob: float = 0.5
    mutation_rate: float | None = None  # None means 1/N
    tournament_size: int = 2
    seed: int = 0

    def __post_init__(self) -> None:
        if self.population < 2 or self.population % 2:
            raise ValueError("population must be a positive even number")
        if self.iterations < 1:
            raise ValueError("iterations must be >= 1")


@dataclass
class Individual:
    genome: np.ndarray
    objectives: np.ndarray
    rank: int = -1
    crowding: float = 0.0


@dataclass
class MoeaTraceRow:
    iteration: int
    evaluations: int
    hv: float
    best_hv: float
    archive_size: int = 0


@dataclass
class MoeaResult:
    front: ParetoFront
    trace: list[MoeaTraceRow] = field(default_factory=list)
    initial_hv: float = 0.0
    population: np.ndarray | None = None
    archive: ParetoFront | None = None


def _objective_matrix(pop) -> np.ndarray:
    if len(pop) and isinstance(pop[0], Individual):
        return np.array([ind.objectives for ind in pop], dtype=np.float64)
    return np.asarray(pop, dtype=np.float64)


def fast_non_dominated_sort(pop) -> list[list[int]]:
    """Partition into fronts of indices; front 0 is the non-dominated set."""
    F = _objective_matrix(pop)
    n = len(F)
    if n == 0:
        return []
    le = np.all(F[:, None, :] <= F[None, :, :], axis=2)
    lt = np.any(F[:, None, :] < F[None, :, :], axis=2)
    dom = le & lt  # dom[i, j]: i dominates j
    count = dom.sum(axis=0)
    fronts = []
    current = np.flatnonzero(count == 0)
    while current.size:
        fronts.append([int(i) for i in current])
        count = count - dom[current].sum(axis=0)
        count[current] = -1
        current = np.flatnonzero(count == 0)
    return fronts


def crowding_distance(front) -> np.ndarray:
    """Crowding distance per member; repeated objective vectors after the first copy get 0.

    Distances are computed over the distinct vectors so duplicates neither
    split a gap nor shield each other from truncation.
    """
    F = _objective_matrix(front)
    m = len(F)
    dist = np.zeros(m)
    if m <= 2:
        dist[:] = np.inf
        return dist
    uniq, first, inverse = np.unique(F, axis=0, return_index=True, return_inverse=True)
    inverse = inverse.reshape(-1)
    u = len(uniq)
    ud = np.zeros(u)
    if u <= 2:
        ud[:] = np.inf
    else:
        for k in range(F.shape[1]):
            order = np.argsort(uniq[:, k], kind="stable")
            col = uniq[order, k]
            ud[order[0]] = ud[order[-1]] = np.inf
            span = col[-1] - col[0]
            if span > 0:
                ud[order[1:-1]] += (col[2:] - col[:-2]) / span
    dist[first] = ud
    return dist


def _rank_and_crowd(objs: np.ndarray) -> tuple[np.ndarray, np.ndarray, list[list[int]]]:
    fronts = fast_non_dominated_sort(objs)
    rank = np.empty(len(objs), dtype=np.int64)
    crowd = np.empty(len(objs))
    for r, front in enumerate(fronts):
        rank[front] = r
        crowd[front] = crowding_distance(objs[front])
    return rank, crowd, fronts


def _tournament(rng: np.random.Generator, rank: np.ndarray, crowd: np.ndarray, size: int) -> int:
    entrants = rng.integers(0, len(rank), size=size)
    best = int(entrants[0])
    for c in entrants[1:]:
        c = int(c)
        if rank[c] < rank[best] or (rank[c] == rank[best] and crowd[c] > crowd[best]):
            best = c
    return best


def _front_hv(objs: np.ndarray, rank: np.ndarray, ref: np.ndarray) -> float:
    return hypervolume(objs[rank == 0], ref)


def _update_archive(archive: np.ndarray, new: np.ndarray, table: CostTable) -> np.ndarray:
    """Merge basis indices into the archive and keep only its non-dominated members."""
    merged = np.union1d(archive, new)
    kept = non_dominated_filter(table.vectors(merged))
    return merged[kept.source_indices]


def run_nsga2(table: CostTable, cfg: MoeaConfig = MoeaConfig(), initial: np.ndarray | None = None) -> MoeaResult:
    """Generational NSGA-II with uniform crossover and random-reset mutation.

    Offspring come from binary tournaments on (rank, crowding); survivors are
    chosen from parents and offspring together by front, then by crowding
    distance. One trace row per iteration records the hypervolume of the
    population's non-dominated set and of an unbounded external archive of
    every non-dominated solution evaluated so far; the latter cannot decrease.
    ``initial`` optionally fixes the starting genomes.
    """
    inst = table.instance
    d, N = inst.d, inst.N
    P = cfg.population
    mut = cfg.mutation_rate if cfg.mutation_rate is not None else 1.0 / N
    powers = d ** np.arange(N - 1, -1, -1)
    ref = np.ones(table.K)
    rng = np.random.default_rng(cfg.seed)

    def evaluate(genomes: np.ndarray) -> np.ndarray:
        return table.normalized[:, genomes @ powers].T

    if initial is None:
        genomes = rng.integers(0, d, size=(P, N))
    else:
        genomes = np.array(initial, dtype=np.int64)
        if genomes.shape != (P, N) or genomes.min() < 0 or genomes.max() >= d:
            raise ValueError(f"initial population must be a ({P}, {N}) array of digits in [0, {d})")
    objs = evaluate(genomes)
    evaluations = P
    rank, crowd, _ = _rank_and_crowd(objs)
    initial_hv = _front_hv(objs, rank, ref)
    archive = _update_archive(np.empty(0, dtype=np.int64), genomes @ powers, table)
    trace: list[MoeaTraceRow] = []

    for it in range(1, cfg.iterations + 1):
        children = np.empty((P, N), dtype=genomes.dtype)
        for c in range(0, P, 2):
            a = genomes[_tournament(rng, rank, crowd, cfg.tournament_size)]
            b = genomes[_tournament(rng, rank, crowd, cfg.tournament_size)]
            c1, c2 = a.copy(), b.copy()
            if rng.random() < cfg.crossover_rate:
                swap = rng.random(N) < cfg.gene_swap_prob
                c1[swap], c2[swap] = b[swap], a[swap]
            for child in (c1, c2):
                hit = rng.random(N) < mut
                child[hit] = rng.integers(0, d, size=int(hit.sum()))
            children[c], children[c + 1] = c1, c2
        child_objs = evaluate(children)
        evaluations += P
        archive = _update_archive(archive, children @ powers, table)

        all_genomes = np.concatenate([genomes, children])
        all_objs = np.concatenate([objs, child_objs])
        r_all, c_all, fronts = _rank_and_crowd(all_objs)
        keep: list[int] = []
        for front in fronts:
            if len(keep) + len(front) <= P:
                keep.extend(front)
            else:
                order = sorted(front, key=lambda i: -c_all[i])
                keep.extend(order[: P - len(keep)])
            if len(keep) == P:
                break
        keep_idx = np.array(keep)
        genomes, objs = all_genomes[keep_idx], all_objs[keep_idx]
        rank, crowd, _ = _rank_and_crowd(objs)

        hv = _front_hv(objs, rank, ref)
        best = hypervolume(table.vectors(archive), ref)
        trace.append(MoeaTraceRow(it, evaluations, hv, best, int(archive.size)))

    first = rank == 0
    basis = np.unique(genomes[first] @ powers)
    front = ParetoFront(table.vectors(basis), basis)
    return MoeaResult(front, trace, initial_hv, genomes, ParetoFront(table.vectors(archive), archive))


def genomes_to_indices(genomes: Sequence[Sequence[int]], d: int) -> np.ndarray:
    G = np.asarray(genomes, dtype=np.int64)
    return G @ (d ** np.arange(G.shape[1] - 1, -1, -1))
