"""Command-line entry point: ``qmoo {gen,oracle,run,baseline,report}``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import asdict
from pathlib import Path

from .benchmarks import CLASSES, build_cost_table, gen_instance, instance_from_dict, instance_to_dict
from .campaign import (
    BaselineConfig,
    CampaignConfig,
    Oracle,
    _dumps,
    load_records,
    oracle_to_dict,
    report,
    run_baseline_campaign,
    run_campaign,
    write_atomic,
)
from .moo import brute_force_pareto, front_hypervolume

log = logging.getLogger("qmoo")


def _seeds(text: str) -> list[int]:
    """Parse ``"0-10"``, ``"1,4,7"`` or a mix of both."""
    out: list[int] = []
    for part in text.split(","):
        part = part.strip()
        if "-" in part[1:]:
            lo, hi = part.split("-", 1)
            out.extend(range(int(lo), int(hi) + 1))
        elif part:
            out.append(int(part))
    return out


def _csv(kind):
    return lambda text: [kind(v) for v in text.split(",") if v.strip()]


def _write_json(path: str, obj: dict) -> None:
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    write_atomic(target, _dumps(obj) + "\n")


def cmd_gen(args) -> int:
    inst = gen_instance(args.problem_class, args.d, args.n, args.seed)
    table = build_cost_table(inst)
    _write_json(args.out, instance_to_dict(inst, table))
    print(f"wrote {args.out}: class {inst.class_tag}, d={inst.d}, N={inst.N}, K={inst.K}")
    return 0


def cmd_oracle(args) -> int:
    inst = instance_from_dict(json.loads(Path(args.instance).read_text()))
    table = build_cost_table(inst)
    front = brute_force_pareto(table)
    oracle = Oracle(table, front.source_indices, front.points, front_hypervolume(front))
    _write_json(args.out, oracle_to_dict(oracle, scatter=args.scatter))
    print(f"wrote {args.out}: front size {len(front.source_indices)}, HV {oracle.front_hv:.12g}")
    return 0


def _load_config(path: str | None) -> dict:
    if not path:
        return {}
    data = json.loads(Path(path).read_text())
    data.pop("kind", None)
    data.pop("version", None)
    return data


def _override(base: dict, args, mapping: dict[str, str]) -> dict:
    for attr, key in mapping.items():
        value = getattr(args, attr, None)
        if value is not None:
            base[key] = value
    return base


_COMMON = {"problem_class": "problem_class", "d": "d", "n": "N", "seeds": "instance_seeds", "runs": "runs",
           "campaign_seed": "campaign_seed", "timing": "record_timing"}


def cmd_run(args) -> int:
    data = _override(
        _load_config(args.config),
        args,
        {**_COMMON, "layers": "layers", "shots": "shots", "optimizer": "method", "select": "n_select",
         "iterations": "iteration_cap", "max_evaluations": "max_evaluations", "population": "population"},
    )
    cfg = CampaignConfig.from_dict(data)
    paths = run_campaign(cfg, args.out, threads=args.threads)
    print(f"wrote {len(paths)} run records to {args.out}")
    return 0


def cmd_baseline(args) -> int:
    data = _override(
        _load_config(args.config), args, {**_COMMON, "iterations": "iterations", "population": "population"}
    )
    cfg = BaselineConfig.from_dict(data)
    paths = run_baseline_campaign(cfg, args.out, threads=args.threads)
    print(f"wrote {len(paths)} run records to {args.out}")
    return 0


def cmd_report(args) -> int:
    records = load_records(args.records)
    if not records:
        print(f"no run records match {args.records!r}", file=sys.stderr)
        return 2
    paths = report(records, args.out)
    for p in paths.values():
        print(f"wrote {p}")
    return 0


def cmd_config(args) -> int:
    cfg = BaselineConfig() if args.baseline else CampaignConfig()
    print(json.dumps(asdict(cfg), indent=2, sort_keys=True))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qmoo", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def problem(p, required: bool):
        p.add_argument("--class", dest="problem_class", choices=CLASSES, required=required)
        p.add_argument("--d", type=int, required=required)
        p.add_argument("--n", type=int, required=required, help="number of qudits / variables")

    p = sub.add_parser("gen", help="generate a benchmark instance file")
    problem(p, True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("oracle", help="brute-force Pareto front of an instance file")
    p.add_argument("instance")
    p.add_argument("--out", required=True)
    p.add_argument("--scatter", action="store_true", help="include every basis state's objective vector")
    p.set_defaults(func=cmd_oracle)

    def campaign(p):
        problem(p, False)
        p.add_argument("--config", help="JSON campaign config; flags override its fields")
        p.add_argument("--seeds", type=_seeds, help="instance seeds, e.g. 0-10 or 0,3,5")
        p.add_argument("--runs", type=int)
        p.add_argument("--iterations", type=int)
        p.add_argument("--population", type=int)
        p.add_argument("--campaign-seed", dest="campaign_seed", type=int)
        p.add_argument("--timing", action="store_const", const=True, help="record wall time per run")
        p.add_argument("--threads", type=int, default=1)
        p.add_argument("--out", required=True)

    p = sub.add_parser("run", help="variational campaign")
    campaign(p)
    p.add_argument("--layers", type=_csv(int))
    p.add_argument("--shots", type=_csv(str), help='comma list of integers or "exact"')
    p.add_argument("--optimizer", choices=("powell", "cmaes"))
    p.add_argument("--select", type=int, help="solutions kept per evaluation")
    p.add_argument("--max-evaluations", dest="max_evaluations", type=int)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("baseline", help="NSGA-II campaign")
    campaign(p)
    p.set_defaults(func=cmd_baseline)

    p = sub.add_parser("report", help="quantile tables from run records")
    p.add_argument("records", help="glob pattern of run record files")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("config", help="print a default campaign config")
    p.add_argument("--baseline", action="store_true")
    p.set_defaults(func=cmd_config)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (ValueError, MemoryError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
