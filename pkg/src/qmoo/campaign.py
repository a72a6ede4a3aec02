"""Seeded experiment campaigns, run records and quantile reports.

Every random stream of a run is derived from
``SeedSequence(campaign_seed, spawn_key=(instance_seed, run_index, stream))``,
so a run's output depends only on its configuration. Run records are
line-delimited JSON: a header line, one line per iteration, a final line.
"""

from __future__ import annotations

import csv
import functools
import glob as globlib
import json
import logging
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from . import __version__
from .benchmarks import CostTable, build_cost_table, gen_instance, instance_to_dict
from .circuit import ShotPolicy, evaluate_params, n_params, prepare_amplitudes, unpack_params
from .moo import brute_force_pareto, front_hypervolume
from .nsga2 import MoeaConfig, run_nsga2
from .optimizers import OptimizerConfig, minimize, random_init

log = logging.getLogger(__name__)

STREAM_INIT, STREAM_SHOTS, STREAM_OPTIMIZER, STREAM_MOEA = range(4)


@dataclass
class CampaignConfig:
    problem_class: str = "V"
    d: int = 5
    N: int = 6
    instance_seeds: list[int] = field(default_factory=lambda: list(range(11)))
    runs: int = 50
    layers: list[int] = field(default_factory=lambda: [1])
    shots: list[str] = field(default_factory=lambda: ["128"])
    n_select: int = 20
    method: str = "powell"
    iteration_cap: int = 200
    max_evaluations: int = 1_000_000
    population: int = 10
    line_tol: float = 1e-3
    campaign_seed: int = 0
    record_timing: bool = False

    def __post_init__(self) -> None:
        self.instance_seeds = [int(s) for s in self.instance_seeds]
        if len(set(self.instance_seeds)) != len(self.instance_seeds):
            raise ValueError("instance seeds must be distinct")
        self.layers = [int(l) for l in self.layers]
        self.shots = [ShotPolicy.parse(s).label for s in self.shots]
        if self.runs < 1:
            raise ValueError("runs must be >= 1")

    @classmethod
    def from_dict(cls, data: dict) -> "CampaignConfig":
        known = {f for f in cls.__dataclass_fields__}
        return cls(**{k: v for k, v in data.items() if k in known})


@dataclass
class BaselineConfig:
    problem_class: str = "II"
    d: int = 2
    N: int = 8
    instance_seeds: list[int] = field(default_factory=lambda: list(range(11)))
    runs: int = 40
    population: int = 20
    iterations: int = 200
    campaign_seed: int = 0
    record_timing: bool = False

    def __post_init__(self) -> None:
        self.instance_seeds = [int(s) for s in self.instance_seeds]
        if len(set(self.instance_seeds)) != len(self.instance_seeds):
            raise ValueError("instance seeds must be distinct")

    @classmethod
    def from_dict(cls, data: dict) -> "BaselineConfig":
        known = {f for f in cls.__dataclass_fields__}
        return cls(**{k: v for k, v in data.items() if k in known})


@dataclass
class RunRecord:
    header: dict
    rows: list[dict]
    solutions: list[tuple[int, list[float]]]
    final: dict
    wall_time: float | None = None

    @property
    def name(self) -> str:
        h = self.header
        shots = h.get("shots") or "na"
        layers = h.get("layers") or 0
        return (
            f"{h['method']}_{h['class']}_d{h['d']}_N{h['N']}_L{layers}_s{shots}"
            f"_i{h['instance_seed']}_r{h['run']}.jsonl"
        )

    def to_text(self) -> str:
        lines = [{"type": "header", **self.header, "wall_time": self.wall_time}]
        lines += [{"type": "row", **row} for row in self.rows]
        lines.append({"type": "final", **self.final, "solutions": [[i, v] for i, v in self.solutions]})
        return "".join(_dumps(line) + "\n" for line in lines)

    @classmethod
    def from_text(cls, text: str) -> "RunRecord":
        header, rows, final = None, [], None
        for line in text.splitlines():
            if not line.strip():
                continue
            obj = json.loads(line)
            kind = obj.pop("type")
            if kind == "header":
                header = obj
            elif kind == "row":
                rows.append(obj)
            elif kind == "final":
                final = obj
        if header is None or final is None:
            raise ValueError("run record is missing its header or final line")
        wall = header.pop("wall_time", None)
        solutions = [(int(i), list(v)) for i, v in final.pop("solutions")]
        return cls(header, rows, solutions, final, wall)

    @classmethod
    def load(cls, path: str | os.PathLike) -> "RunRecord":
        return cls.from_text(Path(path).read_text())


def _dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), allow_nan=False)


def write_atomic(path: Path, text: str) -> None:
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(text)
    os.replace(tmp, path)


def derive_seed(campaign_seed: int, instance_seed: int, run: int, stream: int) -> np.random.SeedSequence:
    return np.random.SeedSequence(campaign_seed, spawn_key=(instance_seed, run, stream))


def derive_rng(campaign_seed: int, instance_seed: int, run: int, stream: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(derive_seed(campaign_seed, instance_seed, run, stream)))


@dataclass
class Oracle:
    table: CostTable
    front_indices: np.ndarray
    front_points: np.ndarray
    front_hv: float


@functools.lru_cache(maxsize=16)
def load_oracle(problem_class: str, d: int, N: int, seed: int) -> Oracle:
    table = build_cost_table(gen_instance(problem_class, d, N, seed))
    front = brute_force_pareto(table)
    return Oracle(table, front.source_indices, front.points, front_hypervolume(front))


def oracle_to_dict(oracle: Oracle, scatter: bool = False) -> dict:
    inst = oracle.table.instance
    out = {
        "format": "qmoo-oracle/1",
        "instance": instance_to_dict(inst, oracle.table),
        "front_hv": oracle.front_hv,
        "front_size": int(len(oracle.front_indices)),
        "front": [[int(i), [float(v) for v in p]] for i, p in zip(oracle.front_indices, oracle.front_points)],
    }
    if scatter:
        out["scatter"] = [[float(v) for v in col] for col in oracle.table.normalized]
    return out


# -- single runs -----------------------------------------------------------

def run_qmoo(cfg: CampaignConfig, instance_seed: int, run: int, layers: int, shots: str) -> RunRecord:
    oracle = load_oracle(cfg.problem_class, cfg.d, cfg.N, instance_seed)
    table = oracle.table
    K, d = table.K, cfg.d
    policy = ShotPolicy.parse(shots)
    init_rng = derive_rng(cfg.campaign_seed, instance_seed, run, STREAM_INIT)
    shot_rng = derive_rng(cfg.campaign_seed, instance_seed, run, STREAM_SHOTS)
    opt_seed = int(derive_seed(cfg.campaign_seed, instance_seed, run, STREAM_OPTIMIZER).generate_state(1)[0])
    opt_cfg = OptimizerConfig(
        method=cfg.method,
        max_evaluations=cfg.max_evaluations,
        iteration_cap=cfg.iteration_cap,
        population=cfg.population,
        seed=opt_seed,
        line_tol=cfg.line_tol,
    )
    x0 = random_init(n_params(layers, K, d), init_rng, opt_cfg.init_low, opt_cfg.init_high)
    best = {"hv": -math.inf, "solutions": []}

    def objective(x: np.ndarray) -> float:
        res = evaluate_params(table, unpack_params(x, layers, K, d), policy, cfg.n_select, shot_rng)
        if res.hv > best["hv"]:
            best["hv"] = res.hv
            best["solutions"] = res.solutions
        return -res.hv

    start = time.perf_counter()
    x_best, f_best, trace = minimize(objective, x0, opt_cfg)
    wall = time.perf_counter() - start

    front_set = oracle.front_indices
    rows = []
    for rec in trace:
        probs = np.abs(prepare_amplitudes(table, unpack_params(rec.params, layers, K, d))) ** 2
        hv, best_hv = -rec.value, -rec.best
        rows.append(
            {
                "iteration": rec.iteration,
                "evaluations": rec.evaluations,
                "hv": hv,
                "best_hv": best_hv,
                "normalized_hv": hv / oracle.front_hv,
                "best_normalized_hv": best_hv / oracle.front_hv,
                "pareto_weight": float(probs[front_set].sum()),
            }
        )
    header = {
        "format": "qmoo-run/1",
        "version": __version__,
        "method": cfg.method,
        "class": cfg.problem_class,
        "d": cfg.d,
        "N": cfg.N,
        "K": K,
        "layers": layers,
        "shots": policy.label,
        "n_select": cfg.n_select,
        "instance_seed": instance_seed,
        "run": run,
        "campaign_seed": cfg.campaign_seed,
        "optimizer": {k: v for k, v in asdict(opt_cfg).items()},
        "n_params": int(x0.size),
        "front_hv": oracle.front_hv,
        "x0": [float(v) for v in x0],
    }
    final = {
        "hv": -f_best,
        "normalized_hv": -f_best / oracle.front_hv,
        "evaluations": trace.records[-1].evaluations,
        "iterations": trace.records[-1].iteration,
        "params": [float(v) for v in x_best],
    }
    solutions = [(i, list(v)) for i, v in best["solutions"]]
    return RunRecord(header, rows, solutions, final, wall if cfg.record_timing else None)


def run_baseline(cfg: BaselineConfig, instance_seed: int, run: int) -> RunRecord:
    oracle = load_oracle(cfg.problem_class, cfg.d, cfg.N, instance_seed)
    seed = int(derive_seed(cfg.campaign_seed, instance_seed, run, STREAM_MOEA).generate_state(1)[0])
    moea = MoeaConfig(population=cfg.population, iterations=cfg.iterations, seed=seed)
    start = time.perf_counter()
    result = run_nsga2(oracle.table, moea)
    wall = time.perf_counter() - start
    rows = [
        {
            "iteration": r.iteration,
            "evaluations": r.evaluations,
            "hv": r.hv,
            "best_hv": r.best_hv,
            "normalized_hv": r.hv / oracle.front_hv,
            "best_normalized_hv": r.best_hv / oracle.front_hv,
            "pareto_weight": None,
        }
        for r in result.trace
    ]
    header = {
        "format": "qmoo-run/1",
        "version": __version__,
        "method": "nsga2",
        "class": cfg.problem_class,
        "d": cfg.d,
        "N": cfg.N,
        "K": oracle.table.K,
        "layers": None,
        "shots": None,
        "n_select": cfg.population,
        "instance_seed": instance_seed,
        "run": run,
        "campaign_seed": cfg.campaign_seed,
        "moea": asdict(moea),
        "front_hv": oracle.front_hv,
        "initial_hv": result.initial_hv,
    }
    last = result.trace[-1]
    final = {
        "hv": last.hv,
        "normalized_hv": last.hv / oracle.front_hv,
        "evaluations": last.evaluations,
        "iterations": last.iteration,
    }
    solutions = [(int(i), [float(v) for v in p]) for i, p in zip(result.front.source_indices, result.front.points)]
    return RunRecord(header, rows, solutions, final, wall if cfg.record_timing else None)


# -- campaigns -------------------------------------------------------------

def _execute(task: tuple) -> tuple[str, float | None, str | None]:
    kind, cfg, args, out_dir = task
    try:
        record = run_qmoo(cfg, *args) if kind == "qmoo" else run_baseline(cfg, *args)
    except Exception as exc:  # a failing run is logged and the campaign continues
        log.exception("run %s %s failed", kind, args)
        return "", None, f"{type(exc).__name__}: {exc}"
    path = Path(out_dir) / record.name
    write_atomic(path, record.to_text())
    return str(path), record.wall_time, None


def _dispatch(tasks: list[tuple], threads: int) -> list[tuple[str, float | None, str | None]]:
    if threads <= 1:
        return [_execute(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(_execute, tasks, chunksize=1))


def run_campaign(cfg: CampaignConfig, out_dir: str | os.PathLike, threads: int = 1) -> list[Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_atomic(out / "campaign.json", _dumps({"kind": "qmoo", "version": __version__, **asdict(cfg)}) + "\n")
    tasks = [
        ("qmoo", cfg, (seed, run, layers, shots), str(out))
        for seed in cfg.instance_seeds
        for layers in cfg.layers
        for shots in cfg.shots
        for run in range(cfg.runs)
    ]
    return _finish(out, tasks, threads)


def run_baseline_campaign(cfg: BaselineConfig, out_dir: str | os.PathLike, threads: int = 1) -> list[Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_atomic(out / "campaign.json", _dumps({"kind": "nsga2", "version": __version__, **asdict(cfg)}) + "\n")
    tasks = [("nsga2", cfg, (seed, run), str(out)) for seed in cfg.instance_seeds for run in range(cfg.runs)]
    return _finish(out, tasks, threads)


def _finish(out: Path, tasks: list[tuple], threads: int) -> list[Path]:
    results = _dispatch(tasks, threads)
    failures = [(t[2], err) for t, (_, _, err) in zip(tasks, results) if err]
    for args, err in failures:
        log.error("run %s failed: %s", args, err)
    timed = [(p, w) for p, w, _ in results if p and w is not None]
    if timed:
        with open(out / "timing.csv", "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["record", "wall_time_s"])
            for p, w in timed:
                writer.writerow([Path(p).name, f"{w:.3f}"])
    return [Path(p) for p, _, _ in results if p]


# -- reporting -------------------------------------------------------------

def nearest_rank(values: Sequence[float], percent: int) -> float:
    """Nearest-rank percentile: the smallest value with at least ``percent``% of the data at or below it."""
    if not values:
        raise ValueError("no values")
    if not 0 < percent <= 100:
        raise ValueError("percent must be in (0, 100]")
    ordered = sorted(values)
    rank = -(-percent * len(ordered) // 100)
    return ordered[max(rank, 1) - 1]


GROUP_KEYS = ("class", "d", "N", "method", "shots", "layers")


def group_key(record: RunRecord) -> tuple:
    return tuple(record.header.get(k) for k in GROUP_KEYS)


def aligned_series(records: Sequence[RunRecord], column: str = "normalized_hv") -> np.ndarray:
    """Per-iteration values, one row per run; runs that stopped early carry their last value forward."""
    horizon = max(r.rows[-1]["iteration"] for r in records)
    out = np.empty((len(records), horizon + 1))
    for j, rec in enumerate(records):
        by_iter = {row["iteration"]: row[column] for row in rec.rows}
        first = min(by_iter)
        value = by_iter[first]
        for it in range(horizon + 1):
            value = by_iter.get(it, value)
            out[j, it] = value
    return out


def load_records(pattern: str | Iterable[str]) -> list[RunRecord]:
    paths = sorted(globlib.glob(pattern)) if isinstance(pattern, str) else sorted(pattern)
    return [RunRecord.load(p) for p in paths]


def report(records: Sequence[RunRecord], out_dir: str | os.PathLike) -> dict[str, Path]:
    """Write per-iteration and final-value quantile tables as CSV."""
    if not records:
        raise ValueError("no run records to report on")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    groups: dict[tuple, list[RunRecord]] = {}
    for rec in records:
        groups.setdefault(group_key(rec), []).append(rec)

    paths = {
        "trace": out / "trace_quantiles.csv",
        "final": out / "final_summary.csv",
        "values": out / "final_values.csv",
    }
    with open(paths["trace"], "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow([*GROUP_KEYS, "iteration", "n_runs", "median", "q20", "q80"])
        for key in sorted(groups, key=_sort_key):
            series = aligned_series(groups[key])
            # iteration 0 exists only for optimizer traces; generational traces start at 1
            start = min(r.rows[0]["iteration"] for r in groups[key])
            for it in range(start, series.shape[1]):
                col = list(series[:, it])
                w.writerow([*key, it, len(col), *(_fmt(nearest_rank(col, p)) for p in (50, 20, 80))])
    with open(paths["final"], "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow([*GROUP_KEYS, "n_runs", "median", "q20", "q80", "min", "max", "mean"])
        for key in sorted(groups, key=_sort_key):
            vals = [r.rows[-1]["normalized_hv"] for r in groups[key]]
            stats = [nearest_rank(vals, p) for p in (50, 20, 80)] + [min(vals), max(vals), float(np.mean(vals))]
            w.writerow([*key, len(vals), *(_fmt(v) for v in stats)])
    with open(paths["values"], "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow([*GROUP_KEYS, "instance_seed", "run", "iterations", "evaluations", "final_normalized_hv"])
        for rec in sorted(records, key=lambda r: (_sort_key(group_key(r)), r.header["instance_seed"], r.header["run"])):
            last = rec.rows[-1]
            w.writerow(
                [*group_key(rec), rec.header["instance_seed"], rec.header["run"], last["iteration"],
                 last["evaluations"], _fmt(last["normalized_hv"])]
            )
    return paths


def _sort_key(key: tuple) -> tuple:
    return tuple("" if v is None else str(v) for v in key)


def _fmt(v: float) -> str:
    return repr(float(v))
