"""Experiment orchestration, aggregation and results-table reporting.

Output directory layout::

    OUT/fronts/    versioned reference fronts (suite E)
    OUT/worlds/    serialized UAV worlds
    OUT/runs/ALGO/ one JSON RunRecord per (problem, dimension, seed)
    OUT/norm/      frozen MPHV normalization bounds per UAV case
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import logging
import statistics
import time
import traceback
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from mpmo import __version__
from mpmo.algo import EAConfig, run_baseline, run_random_search
from mpmo.core import ContractViolation
from mpmo.metrics import NormalizationBounds, mphv_report, mpigd, normalization_bounds
from mpmo.suite import DIMENSIONS, PROBLEM_IDS, load_or_build_front, make_suite_problem
from mpmo.uav import CASES, GENOME_LENGTH, generate_world, load_world, make_uav_case, save_world

log = logging.getLogger(__name__)

ALGORITHMS = ("mpnds", "random")
COMPETITION_SEEDS = tuple(range(1, 31))
UAV_BUDGET = 100_000
STAT_ROWS = ("Best", "Median", "Worst", "Mean", "StDev")
BLOCKS = (
    (("E1", "E2", "E3", "E4", "E5", "E6"), DIMENSIONS),
    (("E7", "E8", "E9", "E10", "E11", "-"), DIMENSIONS),
    (CASES, (GENOME_LENGTH,)),
)
EMPTY_TEXT = "—"


def is_uav(problem_id: str) -> bool:
    return problem_id.upper() in CASES


def metric_for(problem_id: str) -> str:
    return "MPHV" if is_uav(problem_id) else "MPIGD"


def fe_budget(problem_id: str, dim: int) -> int:
    """Evaluation budget: 1000 * D * M for suite E, 100000 for UAV cases."""
    pid = problem_id.upper()
    if is_uav(pid):
        return UAV_BUDGET
    if pid not in PROBLEM_IDS:
        raise ContractViolation(f"unknown problem {problem_id!r}")
    from mpmo.suite import SUITE

    return 1000 * dim * len(SUITE[pid])


@dataclass
class ExperimentConfig:
    problems: list[str]
    out: Path
    dims: list[int] = field(default_factory=lambda: list(DIMENSIONS))
    seeds: list[int] = field(default_factory=lambda: list(COMPETITION_SEEDS))
    algo: str = "mpnds"
    ea: dict = field(default_factory=dict)
    world_seed: int = 1
    resolution: int = 10_000
    front_seed: int = 0
    fe_budget: int | None = None  # override, non-competition runs only
    competition: bool = False
    force: bool = False
    workers: int = 1
    extra_metrics: list[str] = field(default_factory=list)
    formats: list[str] = field(default_factory=list)

    def __post_init__(self):
        self.out = Path(self.out)
        self.problems = [p.upper() for p in self.problems]
        for p in self.problems:
            if p not in PROBLEM_IDS and p not in CASES:
                raise ContractViolation(f"unknown problem {p!r}")
        if self.algo not in ALGORITHMS:
            raise ContractViolation(f"unknown algorithm {self.algo!r}; choose from {ALGORITHMS}")
        if not self.seeds:
            raise ContractViolation("at least one seed is required")
        self.extra_metrics = [m.upper() for m in self.extra_metrics]
        for m in self.extra_metrics:
            if m not in ("MPIGD", "MPHV"):
                raise ContractViolation(f"unknown metric {m!r}")
            if m == "MPIGD" and any(is_uav(p) for p in self.problems):
                raise ContractViolation("MPIGD needs a reference front, which UAV cases do not have")
        for f in self.formats:
            if f not in FORMATS:
                raise ContractViolation(f"unknown format {f!r}; choose from {sorted(FORMATS)}")
        if self.fe_budget is not None and self.fe_budget < 1:
            raise ContractViolation("fe_budget must be positive")
        if self.competition:
            if tuple(self.seeds) != COMPETITION_SEEDS:
                raise ContractViolation("competition mode requires seeds 1..30")
            if self.fe_budget is not None:
                raise ContractViolation("competition mode does not allow a budget override")
            bad = [d for d in self.dims if d not in DIMENSIONS]
            if bad:
                raise ContractViolation(f"competition dimensions are {DIMENSIONS}, got {bad}")

    def cells(self) -> list[tuple[str, int]]:
        out = []
        for p in self.problems:
            if is_uav(p):
                out.append((p, GENOME_LENGTH))
            else:
                out.extend((p, d) for d in self.dims)
        return out

    def budget(self, problem_id: str, dim: int) -> int:
        return self.fe_budget if self.fe_budget is not None else fe_budget(problem_id, dim)


@dataclass
class RunRecord:
    problem: str
    dim: int
    seed: int
    algo: str
    fe_budget: int
    fe_used: int = 0
    metric_name: str = ""
    metric_value: float | None = None
    metric_extra: dict = field(default_factory=dict)
    wall_time: float = 0.0
    config_hash: str = ""
    reference_version: str = ""
    status: str = "ok"
    error: str = ""
    archive_objectives: list = field(default_factory=list)
    archive_decisions: list = field(default_factory=list)  # UAV cases only
    trace: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "RunRecord":
        return cls(**d)


def _config_hash(cfg: ExperimentConfig, problem: str, dim: int, reference_version: str) -> str:
    payload = {
        "algo": cfg.algo,
        "ea": {k: v for k, v in sorted(cfg.ea.items()) if k != "seed"},
        "budget": cfg.budget(problem, dim),
        "problem": problem,
        "dim": dim,
        "reference": reference_version,
        "extra": sorted(cfg.extra_metrics),
        "code": __version__,
    }
    return hashlib.sha256(json.dumps(payload, sort_keys=True).encode()).hexdigest()[:16]


def record_path(out: Path, algo: str, problem: str, dim: int, seed: int) -> Path:
    return Path(out) / "runs" / algo / f"{problem}_d{dim}_s{seed}.json"


def save_record(rec: RunRecord, out: Path) -> Path:
    path = record_path(out, rec.algo, rec.problem, rec.dim, rec.seed)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(rec.to_dict()) + "\n", encoding="utf-8")
    return path


def load_records(out: Path, algo: str | None = None) -> list[RunRecord]:
    base = Path(out) / "runs"
    pattern = f"{algo}/*.json" if algo else "*/*.json"
    return [RunRecord.from_dict(json.loads(p.read_text(encoding="utf-8"))) for p in sorted(base.glob(pattern))]


def world_file(out: Path, seed: int) -> Path:
    return Path(out) / "worlds" / f"world_s{seed}.json"


def _ensure_world(cfg: ExperimentConfig):
    path = world_file(cfg.out, cfg.world_seed)
    if path.exists():
        return load_world(path), path
    world = generate_world(cfg.world_seed)
    save_world(world, path)
    return world, path


def _execute(task: dict) -> dict:
    """Run one (problem, dim, seed). Runs in a worker process; returns a record dict."""
    rec = RunRecord(task["problem"], task["dim"], task["seed"], task["algo"], task["budget"],
                    metric_name=metric_for(task["problem"]), config_hash=task["config_hash"],
                    reference_version=task["reference_version"])
    t0 = time.perf_counter()
    try:
        if is_uav(rec.problem):
            problem = make_uav_case(rec.problem, load_world(task["world_path"]))
            monitor = None
        else:
            problem = make_suite_problem(rec.problem, rec.dim)
            front = load_or_build_front(rec.problem, rec.dim, task["resolution"], task["front_seed"],
                                        task["front_dir"])

            def monitor(F, front=front):
                return mpigd(front, F, problem.arities)

        if rec.algo == "mpnds":
            ea = dict(task["ea"], fe_budget=rec.fe_budget, seed=rec.seed)
            archive = run_baseline(problem, EAConfig(**ea), monitor=monitor)
        else:
            archive = run_random_search(problem, rec.seed, rec.fe_budget, monitor=monitor)
        rec.fe_used = archive.fe_used
        rec.archive_objectives = archive.F.tolist()
        if is_uav(rec.problem):
            rec.archive_decisions = archive.X.tolist()
        rec.trace = archive.trace
        if not is_uav(rec.problem):
            for entry in rec.trace:
                entry.pop("objectives", None)
            if archive.F.shape[0]:
                rec.metric_value = mpigd(front, archive.F)
                if "MPHV" in task["extra_metrics"]:
                    bounds = normalization_bounds([front.points], front.arities)
                    rec.metric_extra["MPHV"] = mphv_report(archive.F, bounds, seed=rec.seed).value
            else:
                rec.status, rec.error = "failed", "empty archive"
    except Exception as exc:  # recorded, not raised: one failed run must not sink the sweep
        rec.status = "failed"
        rec.error = f"{type(exc).__name__}: {exc}\n{traceback.format_exc()}"
    rec.wall_time = time.perf_counter() - t0
    return rec.to_dict()


def norm_path(out: Path, problem: str) -> Path:
    return Path(out) / "norm" / f"{problem}.json"


def _uav_bounds(cfg: ExperimentConfig, problem: str) -> NormalizationBounds | None:
    """Frozen bounds if stored, else computed from every algorithm's runs and stored."""
    path = norm_path(cfg.out, problem)
    if path.exists():
        return NormalizationBounds.from_dict(json.loads(path.read_text(encoding="utf-8")))
    sets = [np.asarray(r.archive_objectives, dtype=float).reshape(-1, 4)
            for r in load_records(cfg.out) if r.problem == problem and r.status == "ok"]
    sets = [s for s in sets if s.shape[0]]
    if not sets:
        return None
    bounds = normalization_bounds(sets, (2, 2))
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(bounds.to_dict()) + "\n", encoding="utf-8")
    return bounds


def _score_uav(rec: RunRecord, bounds: NormalizationBounds, bounds_id: str) -> None:
    F = np.asarray(rec.archive_objectives, dtype=float).reshape(-1, 4)
    if F.shape[0] == 0:
        rec.status, rec.error = "failed", "no feasible solution in the final archive"
        return
    rep = mphv_report(F, bounds, reference_id=bounds_id)
    rec.metric_value = rep.value
    rec.metric_extra = {"average": rep.extra["average"], "per_party": rep.extra["per_party"]}
    for entry in rec.trace:
        objs = np.asarray(entry.pop("objectives", []), dtype=float).reshape(-1, 4)
        if objs.shape[0]:
            entry["metric"] = mphv_report(objs, bounds).value


def run_experiment(cfg: ExperimentConfig) -> list[RunRecord]:
    """Execute every (problem, dimension, seed) of ``cfg`` and persist the records.

    Existing records with a matching configuration hash are reused unless
    ``cfg.force`` is set. UAV records are scored with MPHV after all of their
    runs finish, using bounds shared across algorithms and frozen on disk.
    """
    cfg.out.mkdir(parents=True, exist_ok=True)
    front_dir = cfg.out / "fronts"
    world_path = None
    world = None
    if any(is_uav(p) for p in cfg.problems):
        world, world_path = _ensure_world(cfg)

    tasks, records = [], {}
    for problem, dim in cfg.cells():
        if is_uav(problem):
            ref_version = world.version_id
        else:
            ref_version = load_or_build_front(problem, dim, cfg.resolution, cfg.front_seed, front_dir).version_id
        chash = _config_hash(cfg, problem, dim, ref_version)
        for seed in cfg.seeds:
            path = record_path(cfg.out, cfg.algo, problem, dim, seed)
            if path.exists() and not cfg.force:
                old = RunRecord.from_dict(json.loads(path.read_text(encoding="utf-8")))
                if old.config_hash == chash and old.status == "ok":
                    records[(problem, dim, seed)] = old
                    continue
            tasks.append({
                "problem": problem, "dim": dim, "seed": seed, "algo": cfg.algo,
                "budget": cfg.budget(problem, dim), "ea": dict(cfg.ea), "config_hash": chash,
                "reference_version": ref_version, "resolution": cfg.resolution,
                "front_seed": cfg.front_seed, "front_dir": str(front_dir),
                "world_path": str(world_path) if world_path else None,
                "extra_metrics": list(cfg.extra_metrics),
            })
    log.info("%d runs to execute, %d reused", len(tasks), len(records))

    if cfg.workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            results = list(pool.map(_execute, tasks))
    else:
        results = [_execute(t) for t in tasks]

    fresh = []
    for d in results:
        rec = RunRecord.from_dict(d)
        if rec.status != "ok":
            log.warning("run %s d=%d seed=%d failed: %s", rec.problem, rec.dim, rec.seed,
                        rec.error.splitlines()[0] if rec.error else "")
        save_record(rec, cfg.out)
        records[(rec.problem, rec.dim, rec.seed)] = rec
        fresh.append(rec)

    for problem in {r.problem for r in fresh if is_uav(r.problem)}:
        bounds = _uav_bounds(cfg, problem)
        bid = f"norm-{problem}-" + hashlib.sha256(json.dumps(bounds.to_dict()).encode()).hexdigest()[:12] \
            if bounds else ""
        for rec in fresh:
            if rec.problem == problem and rec.status == "ok":
                if bounds is None:
                    rec.status, rec.error = "failed", "no feasible solutions to normalize against"
                else:
                    _score_uav(rec, bounds, bid)
                save_record(rec, cfg.out)

    out = [records[k] for k in sorted(records)]
    if cfg.formats:
        table = aggregate(load_records(cfg.out, cfg.algo), label=cfg.algo)
        for fmt in cfg.formats:
            emit_table(table, fmt, cfg.out / "report" / f"{cfg.algo}.{SUFFIX[fmt]}")
    return out


@dataclass
class CellStats:
    metric: str
    best: float | None = None
    median: float | None = None
    worst: float | None = None
    mean: float | None = None
    stdev: float | None = None
    runs: int = 0
    failed: int = 0

    @property
    def complete(self) -> bool:
        return self.failed == 0 and self.runs > 0

    def row(self, stat: str) -> float | None:
        return getattr(self, stat.lower())


@dataclass
class StatTable:
    cells: dict = field(default_factory=dict)  # (problem, dim) -> CellStats
    label: str = ""

    def __eq__(self, other):
        return isinstance(other, StatTable) and self.cells == other.cells


def aggregate(records, label: str = "") -> StatTable:
    """Best/median/worst/mean/sample-stdev per (problem, dimension)."""
    groups: dict = {}
    for r in records:
        groups.setdefault((r.problem, r.dim), []).append(r)
    table = StatTable(label=label)
    for key, recs in groups.items():
        metric = recs[0].metric_name or metric_for(key[0])
        ok = [r.metric_value for r in recs if r.status == "ok" and r.metric_value is not None]
        cell = CellStats(metric, runs=len(ok), failed=len(recs) - len(ok))
        if ok:
            v = [float(x) for x in ok]
            maximize = metric == "MPHV"
            cell.best = max(v) if maximize else min(v)
            cell.worst = min(v) if maximize else max(v)
            # statistics rounds exactly, so constant samples give stdev 0.0
            cell.median = float(statistics.median(v))
            cell.mean = float(statistics.mean(v))
            cell.stdev = float(statistics.stdev(v)) if len(v) > 1 else None
        table.cells[key] = cell
    return table


def _fmt(v: float | None) -> str:
    return EMPTY_TEXT if v is None else f"{v:.6g}"


def _direction(metric: str) -> str:
    return "higher is better" if metric == "MPHV" else "lower is better"


def _emit_text(table: StatTable) -> str:
    lines = []
    if table.label:
        lines.append(f"Results: {table.label}")
    marked = False
    for problems, dims in BLOCKS:
        metric = "MPHV" if problems[0] in CASES else "MPIGD"
        width = 13
        lines.append("")
        lines.append(f"{metric} ({_direction(metric)})")
        head = f"{'':<6} {'':<7}" + "".join(f"{p:>{width}}" for p in problems)
        lines.append(head)
        lines.append("-" * len(head))
        for d in dims:
            for i, stat in enumerate(STAT_ROWS):
                cells = []
                for p in problems:
                    c = table.cells.get((p, d))
                    if p == "-":
                        cells.append(" " * width)
                        continue
                    text = EMPTY_TEXT if c is None else _fmt(c.row(stat))
                    if c is not None and not c.complete:
                        text += "*"
                        marked = True
                    cells.append(f"{text:>{width}}")
                lines.append(f"{('d=' + str(d)) if i == 0 else '':<6} {stat:<7}" + "".join(cells))
            lines.append("-" * len(head))
    if marked:
        lines.append("* incomplete cell: at least one run failed")
    return "\n".join(lines) + "\n"


def _emit_csv(table: StatTable) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["block", "d", "row", "c1", "c2", "c3", "c4", "c5", "c6"])
    for b, (problems, dims) in enumerate(BLOCKS, start=1):
        w.writerow([b, "", "Problem", *problems])
        w.writerow([b, "", "Metric", *[("" if p == "-" else metric_for(p)) for p in problems]])
        for d in dims:
            for stat in STAT_ROWS + ("Runs", "Failed"):
                row = []
                for p in problems:
                    c = table.cells.get((p, d))
                    if c is None:
                        row.append("")
                    elif stat in ("Runs", "Failed"):
                        row.append(str(getattr(c, stat.lower())))
                    else:
                        v = c.row(stat)
                        row.append("" if v is None else repr(v))
                w.writerow([b, d, stat, *row])
    return buf.getvalue()


def parse_csv(text: str) -> StatTable:
    """Inverse of the CSV emitter."""
    table = StatTable()
    problems: list[str] = []
    metrics: list[str] = []
    reader = csv.reader(io.StringIO(text))
    next(reader)
    for row in reader:
        _, d, kind, *vals = row
        if kind == "Problem":
            problems = vals
            continue
        if kind == "Metric":
            metrics = vals
            continue
        for p, m, v in zip(problems, metrics, vals):
            if p == "-" or v == "":
                continue
            key = (p, int(d))
            cell = table.cells.setdefault(key, CellStats(m))
            if kind in ("Runs", "Failed"):
                setattr(cell, kind.lower(), int(v))
            else:
                setattr(cell, kind.lower(), float(v))
    return table


def _emit_latex(table: StatTable) -> str:
    out = [r"\begin{tabular}{|c|l|c|c|c|c|c|c|}", r"\hline"]
    for b, (problems, dims) in enumerate(BLOCKS):
        if b:
            out += [r"\multicolumn{8}{c}{} \\", r"\hline"]
        heads = " & ".join(("-" if p == "-" else f"${p[0]}_{{{p[1:]}}}$") for p in problems)
        out += [rf" & & {heads} \\", r"\hline"]
        for d in dims:
            for i, stat in enumerate(STAT_ROWS):
                first = rf"\multirow{{5}}{{*}}{{d={d}}}" if i == 0 else ""
                vals = []
                for p in problems:
                    c = table.cells.get((p, d))
                    vals.append("" if c is None or c.row(stat) is None else _fmt(c.row(stat)))
                out.append(f"{first} & {stat} & " + " & ".join(vals) + r" \\")
                out.append(r"\cline{2-8}" if i < len(STAT_ROWS) - 1 else r"\hline")
    out.append(r"\end{tabular}")
    return "\n".join(out) + "\n"


FORMATS = {"text": _emit_text, "csv": _emit_csv, "latex": _emit_latex}
SUFFIX = {"text": "txt", "csv": "csv", "latex": "tex"}


def emit_table(table: StatTable, fmt: str = "text", dest=None) -> str:
    """Render ``table`` as text, CSV or LaTeX; also write it to ``dest`` when given."""
    if fmt not in FORMATS:
        raise ContractViolation(f"unknown format {fmt!r}; choose from {sorted(FORMATS)}")
    text = FORMATS[fmt](table)
    if dest is not None:
        dest = Path(dest)
        dest.parent.mkdir(parents=True, exist_ok=True)
        dest.write_text(text, encoding="utf-8")
    return text


