import json
import math

import numpy as np
import pytest

from mpmo.core import ContractViolation
from mpmo.harness import (
    BLOCKS,
    EMPTY_TEXT,
    STAT_ROWS,
    ExperimentConfig,
    RunRecord,
    aggregate,
    emit_table,
    fe_budget,
    load_records,
    norm_path,
    parse_csv,
    record_path,
    run_experiment,
)
from mpmo.metrics import mpigd
from mpmo.suite import load_or_build_front


def _rec(problem, dim, seed, value, metric="MPIGD", status="ok"):
    return RunRecord(problem, dim, seed, "mpnds", 1, 1, metric, value, status=status)


def test_budgets():
    assert fe_budget("E1", 10) == 20000
    assert fe_budget("E7", 30) == 90000
    assert fe_budget("C3", 88) == 100000
    with pytest.raises(ContractViolation):
        fe_budget("E12", 10)


def test_config_validation(tmp_path):
    with pytest.raises(ContractViolation):
        ExperimentConfig(["E1"], tmp_path, seeds=[1, 2], competition=True)
    with pytest.raises(ContractViolation):
        ExperimentConfig(["E1"], tmp_path, competition=True, fe_budget=100)
    with pytest.raises(ContractViolation):
        ExperimentConfig(["E1"], tmp_path, dims=[12], competition=True)
    with pytest.raises(ContractViolation):
        ExperimentConfig(["Z1"], tmp_path)
    with pytest.raises(ContractViolation):
        ExperimentConfig(["E1"], tmp_path, algo="nsga3")
    with pytest.raises(ContractViolation):
        ExperimentConfig(["C1"], tmp_path, extra_metrics=["MPIGD"])
    cfg = ExperimentConfig(["E1", "C2"], tmp_path, dims=[10, 30], competition=True)
    assert cfg.seeds == list(range(1, 31))
    assert cfg.cells() == [("E1", 10), ("E1", 30), ("C2", 88)]


def test_suite_run_idempotent_and_reproducible(tmp_path):
    cfg = ExperimentConfig(["E1"], tmp_path, dims=[10], seeds=[1, 2], fe_budget=1000)
    recs = run_experiment(cfg)
    assert [(r.problem, r.dim, r.seed) for r in recs] == [("E1", 10, 1), ("E1", 10, 2)]
    front = load_or_build_front("E1", 10, cache_dir=tmp_path / "fronts")
    for r in recs:
        assert r.status == "ok" and r.fe_used == 1000
        assert r.metric_value == mpigd(front, np.array(r.archive_objectives))
        assert r.reference_version == front.version_id
        assert all("objectives" not in e for e in r.trace)
    path = record_path(tmp_path, "mpnds", "E1", 10, 1)
    stamp = path.stat().st_mtime_ns
    again = run_experiment(cfg)
    assert path.stat().st_mtime_ns == stamp
    assert [r.wall_time for r in again] == [r.wall_time for r in recs]
    cfg.force = True
    forced = run_experiment(cfg)
    assert [r.metric_value for r in forced] == [r.metric_value for r in recs]
    assert path.stat().st_mtime_ns != stamp


def test_changed_config_reruns(tmp_path):
    base = ExperimentConfig(["E2"], tmp_path, dims=[10], seeds=[1], fe_budget=600)
    first = run_experiment(base)[0]
    other = run_experiment(ExperimentConfig(["E2"], tmp_path, dims=[10], seeds=[1], fe_budget=800))[0]
    assert other.config_hash != first.config_hash and other.fe_used == 800


def test_workers_match_serial(tmp_path):
    a = run_experiment(ExperimentConfig(["E6"], tmp_path / "a", dims=[10], seeds=[1, 2], fe_budget=500))
    b = run_experiment(ExperimentConfig(["E6"], tmp_path / "b", dims=[10], seeds=[1, 2], fe_budget=500,
                                        workers=2))
    assert [r.metric_value for r in a] == [r.metric_value for r in b]


def test_extra_mphv_metric(tmp_path):
    rec = run_experiment(ExperimentConfig(["E1"], tmp_path, dims=[10], seeds=[1], fe_budget=4000,
                                          extra_metrics=["mphv"]))[0]
    assert 0.0 <= rec.metric_extra["MPHV"] <= 2 * 1.21


def test_uav_frozen_normalization(tmp_path):
    cfg = ExperimentConfig(["C1"], tmp_path, seeds=[1, 2], fe_budget=600)
    recs = run_experiment(cfg)
    bounds_file = norm_path(tmp_path, "C1")
    frozen = bounds_file.read_text()
    for r in recs:
        assert r.metric_name == "MPHV" and r.metric_value > 0
        assert r.metric_extra["average"] == pytest.approx(r.metric_value / 2)
        assert all("objectives" not in e for e in r.trace)
        assert r.trace[-1]["metric"] == r.metric_value
    assert (tmp_path / "worlds" / "world_s1.json").exists()
    rnd = run_experiment(ExperimentConfig(["C1"], tmp_path, seeds=[1], fe_budget=600, algo="random"))
    assert bounds_file.read_text() == frozen
    assert rnd[0].status in ("ok", "failed")
    assert {r.algo for r in load_records(tmp_path)} == {"mpnds", "random"}


def test_failed_run_recorded_and_marked(tmp_path):
    cfg = ExperimentConfig(["E1"], tmp_path, dims=[10], seeds=[1], fe_budget=500, ea={"population_size": 99})
    rec = run_experiment(cfg)[0]
    assert rec.status == "failed" and "population_size" in rec.error
    saved = json.loads(record_path(tmp_path, "mpnds", "E1", 10, 1).read_text())
    assert saved["status"] == "failed"
    table = aggregate([rec, _rec("E1", 10, 2, 0.5)])
    cell = table.cells[("E1", 10)]
    assert not cell.complete and cell.runs == 1 and cell.failed == 1
    assert "*" in emit_table(table, "text")


def test_aggregate_examples():
    t = aggregate([_rec("E1", 10, s, 0.7) for s in range(1, 31)])
    c = t.cells[("E1", 10)]
    assert (c.best, c.median, c.worst, c.mean, c.stdev) == (0.7, 0.7, 0.7, 0.7, 0.0)
    t = aggregate([_rec("E1", 10, s, float(s)) for s in range(1, 31)])
    c = t.cells[("E1", 10)]
    assert (c.best, c.worst, c.mean, c.median) == (1.0, 30.0, 15.5, 15.5)
    t = aggregate([_rec("E1", 10, 1, 0.0), _rec("E1", 10, 2, 2.0)])
    assert t.cells[("E1", 10)].stdev == pytest.approx(math.sqrt(2))
    t = aggregate([_rec("C1", 88, s, v, "MPHV") for s, v in enumerate([1.0, 3.0, 2.0])])
    c = t.cells[("C1", 88)]
    assert c.best == 3.0 and c.worst == 1.0 and c.best >= c.median >= c.worst
    single = aggregate([_rec("E2", 30, 1, 0.4)]).cells[("E2", 30)]
    assert single.stdev is None


def _full_table():
    rng = np.random.default_rng(0)
    recs = []
    for problems, dims in BLOCKS:
        for p in problems:
            if p == "-":
                continue
            for d in dims:
                metric = "MPHV" if p.startswith("C") else "MPIGD"
                recs += [_rec(p, d, s, float(rng.random()), metric) for s in range(1, 4)]
    return aggregate(recs)


def test_csv_round_trip_lossless():
    t = _full_table()
    assert parse_csv(emit_table(t, "csv")) == t
    sparse = aggregate([_rec("E3", 50, 1, 1 / 3), _rec("C6", 88, 1, 2 / 3, "MPHV")])
    assert parse_csv(emit_table(sparse, "csv")) == sparse


def test_text_layout():
    text = emit_table(aggregate([_rec("E1", 10, 1, 0.123456789)]), "text")
    assert "0.123457" in text
    assert text.count("d=88") == 1
    for stat in STAT_ROWS:
        assert text.count(f" {stat} ") == 7  # 3 + 3 + 1 dimension blocks
    assert EMPTY_TEXT in text
    assert "lower is better" in text and "higher is better" in text


def test_csv_empty_cells():
    csv_text = emit_table(aggregate([_rec("E1", 10, 1, 0.5)]), "csv")
    row = next(line for line in csv_text.splitlines() if line.startswith("1,10,Best"))
    assert row == "1,10,Best,0.5,,,,,"
    assert "3,88,Best" in csv_text


def test_latex_layout(tmp_path):
    tex = emit_table(_full_table(), "latex", tmp_path / "t.tex")
    assert (tmp_path / "t.tex").read_text() == tex
    assert tex.count(r"\multirow{5}{*}{d=") == 7 and r"{d=88}" in tex
    assert tex.startswith(r"\begin{tabular}") and tex.rstrip().endswith(r"\end{tabular}")
    with pytest.raises(ContractViolation):
        emit_table(_full_table(), "html")
