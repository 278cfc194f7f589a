"""Command line entry point: ``mpmo run | reffront | report | world``."""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import yaml

from mpmo.core import ContractViolation
from mpmo.harness import (
    ALGORITHMS,
    COMPETITION_SEEDS,
    FORMATS,
    ExperimentConfig,
    aggregate,
    emit_table,
    load_records,
)
from mpmo.suite import DEFAULT_RESOLUTION, PROBLEM_IDS, default_cache_dir, front_path, load_or_build_front
from mpmo.uav import CASES, generate_world, save_world

SUITES = {"e": PROBLEM_IDS, "uav": CASES, "all": PROBLEM_IDS + CASES}


def parse_int_list(text) -> list[int]:
    """Parse ``"1..5,9"`` style lists (also accepts a list of ints)."""
    if isinstance(text, int):
        return [text]
    if isinstance(text, (list, tuple)):
        return [int(v) for v in text]
    out: list[int] = []
    for part in str(text).split(","):
        part = part.strip()
        if not part:
            continue
        if ".." in part:
            lo, hi = part.split("..", 1)
            lo, hi = int(lo), int(hi)
            if hi < lo:
                raise ContractViolation(f"empty range {part!r}")
            out.extend(range(lo, hi + 1))
        else:
            out.append(int(part))
    return out


def parse_name_list(text) -> list[str]:
    if isinstance(text, (list, tuple)):
        return [str(v).strip().upper() for v in text]
    return [p.strip().upper() for p in str(text).split(",") if p.strip()]


def load_config_file(path) -> dict:
    """Read a YAML config. Keys may sit at top level or under a ``run`` section."""
    data = yaml.safe_load(Path(path).read_text(encoding="utf-8")) or {}
    if not isinstance(data, dict):
        raise ContractViolation(f"config file {path} must hold a mapping")
    if isinstance(data.get("run"), dict):
        data = {**{k: v for k, v in data.items() if k != "run"}, **data["run"]}
    return data


def _settings(args) -> dict:
    """Merge config-file values with explicitly given flags (flags win)."""
    merged = load_config_file(args.config) if args.config else {}
    for key in ("suite", "problems", "dims", "seeds", "algo", "out", "world_seed", "resolution",
                "fe_budget", "workers", "competition", "force", "metrics", "formats"):
        val = getattr(args, key, None)
        if val is not None:
            merged[key] = val
    return merged


def build_experiment_config(args) -> ExperimentConfig:
    s = _settings(args)
    suite = str(s.get("suite", "e")).lower()
    if suite not in SUITES:
        raise ContractViolation(f"unknown suite {suite!r}; choose from {sorted(SUITES)}")
    problems = parse_name_list(s["problems"]) if s.get("problems") else list(SUITES[suite])
    stray = [p for p in problems if p not in SUITES[suite]]
    if stray:
        raise ContractViolation(f"problems {stray} are not in suite {suite!r}")
    if "out" not in s:
        raise ContractViolation("an output directory is required (--out or 'out' in the config file)")
    kwargs = dict(
        problems=problems,
        out=Path(s["out"]),
        algo=str(s.get("algo", "mpnds")),
        ea=dict(s.get("ea") or {}),
        world_seed=int(s.get("world_seed", 1)),
        resolution=int(s.get("resolution", DEFAULT_RESOLUTION)),
        fe_budget=None if s.get("fe_budget") is None else int(s["fe_budget"]),
        competition=bool(s.get("competition", False)),
        force=bool(s.get("force", False)),
        workers=int(s.get("workers", 1)),
        extra_metrics=parse_name_list(s["metrics"]) if s.get("metrics") else [],
        formats=[f.lower() for f in parse_name_list(s["formats"])] if s.get("formats") else [],
    )
    if s.get("dims") is not None:
        kwargs["dims"] = parse_int_list(s["dims"])
    kwargs["seeds"] = parse_int_list(s["seeds"]) if s.get("seeds") is not None else list(COMPETITION_SEEDS)
    return ExperimentConfig(**kwargs)


def cmd_run(args) -> int:
    from mpmo.harness import run_experiment

    cfg = build_experiment_config(args)
    records = run_experiment(cfg)
    failed = [r for r in records if r.status != "ok"]
    print(f"{len(records)} runs recorded under {cfg.out} ({len(failed)} failed)")
    return 1 if failed else 0


def cmd_reffront(args) -> int:
    cache = Path(args.out) if args.out else default_cache_dir()
    front = load_or_build_front(args.problem.upper(), args.dim, args.resolution, args.seed, cache)
    path = front_path(cache, front.problem_id, front.n, front.resolution, front.seed)
    print(f"{front.problem_id} d={front.n}: {front.points.shape[0]} points, version {front.version_id} -> {path}")
    return 0


def cmd_report(args) -> int:
    records = load_records(args.inp, args.algo)
    if not records:
        raise ContractViolation(f"no run records for algorithm {args.algo!r} under {args.inp}")
    text = emit_table(aggregate(records, label=args.algo), args.format, args.out)
    if args.out is None:
        sys.stdout.write(text)
    return 0


def cmd_world(args) -> int:
    world = generate_world(args.seed)
    out = Path(args.out)
    if out.is_dir() or args.out.endswith(("/", "\\")):
        out = out / f"world_s{args.seed}.json"
    path = save_world(world, out)
    print(f"world seed {args.seed} (version {world.version_id}) -> {path}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="mpmo", description="Multiparty multiobjective benchmark toolkit")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="execute runs and persist their records")
    r.add_argument("--config", help="YAML file mirroring these flags; flags take precedence")
    r.add_argument("--suite", choices=sorted(SUITES))
    r.add_argument("--problems", help="comma list, e.g. E1,E2")
    r.add_argument("--dims", help="comma list of suite-E dimensions, e.g. 10,30,50")
    r.add_argument("--seeds", help="seed list such as 1..30 or 1,2,5")
    r.add_argument("--algo", choices=ALGORITHMS)
    r.add_argument("--out", help="output directory")
    r.add_argument("--world-seed", dest="world_seed", type=int)
    r.add_argument("--resolution", type=int, help="reference-front samples per party")
    r.add_argument("--fe-budget", dest="fe_budget", type=int, help="override the budget (not in competition mode)")
    r.add_argument("--workers", type=int)
    r.add_argument("--metrics", help="extra metrics to compute, e.g. MPHV")
    r.add_argument("--formats", help="tables to emit after the runs, e.g. text,csv")
    r.add_argument("--competition", action="store_const", const=True, help="enforce seeds 1..30 and full budgets")
    r.add_argument("--force", action="store_const", const=True, help="rerun even if records exist")
    r.set_defaults(func=cmd_run)

    f = sub.add_parser("reffront", help="build (or load) a cached reference front")
    f.add_argument("--problem", required=True)
    f.add_argument("--dim", type=int, required=True)
    f.add_argument("--resolution", type=int, default=DEFAULT_RESOLUTION)
    f.add_argument("--seed", type=int, default=0)
    f.add_argument("--out", help="cache directory (default: $MPMO_CACHE or ~/.cache/mpmo/fronts)")
    f.set_defaults(func=cmd_reffront)

    t = sub.add_parser("report", help="aggregate run records into a results table")
    t.add_argument("--in", dest="inp", required=True, help="experiment output directory")
    t.add_argument("--format", choices=sorted(FORMATS), default="text")
    t.add_argument("--algo", choices=ALGORITHMS, default="mpnds")
    t.add_argument("--out", help="write the table here instead of stdout")
    t.set_defaults(func=cmd_report)

    w = sub.add_parser("world", help="generate and save a UAV world")
    w.add_argument("--seed", type=int, required=True)
    w.add_argument("--out", required=True, help="JSON file, or a directory to hold world_s<seed>.json")
    w.set_defaults(func=cmd_world)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (ContractViolation, FileNotFoundError, yaml.YAMLError) as exc:
        print(f"mpmo: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
