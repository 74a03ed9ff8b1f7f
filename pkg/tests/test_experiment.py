import csv
import json
import shutil

import numpy as np
import pytest

from degcorr import InvalidConfig
from degcorr.experiment import ExperimentConfig, load_result, run_experiment
from degcorr.rng import mix

RESULT_FILES = ("config.json", "limits.json", "metrics.csv", "summary.csv")


def cfg(**kw):
    base = dict(model="irg", params={"weight": "const:2"}, sizes=[50, 100], replicas=2,
                metrics=["pearson", "spearman", "annd"], k_values=[1, 2], limit_mc_samples=20_000)
    base.update(kw)
    return ExperimentConfig(**base)


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


@pytest.mark.parametrize("bad", [
    dict(sizes=[100, 50]),
    dict(sizes=[]),
    dict(replicas=0),
    dict(metrics=["annd"], k_values=[]),
    dict(metrics=["bogus"]),
    dict(g="sqrt"),
    dict(model="ba"),
    dict(params={"weight": "nope:1"}),
    dict(model="rgg", params={"dim": 1}),
])
def test_invalid_configs(bad):
    with pytest.raises(InvalidConfig):
        cfg(**bad)


def test_from_dict_rejects_unknown_and_missing_fields(tmp_path):
    with pytest.raises(InvalidConfig):
        ExperimentConfig.from_dict({"model": "irg", "params": {"weight": "const:1"}, "sizes": [10], "colour": 1})
    with pytest.raises(InvalidConfig):
        ExperimentConfig.from_dict({"model": "irg"})
    (tmp_path / "c.json").write_text("[1, 2]")
    with pytest.raises(InvalidConfig):
        ExperimentConfig.from_file(tmp_path / "c.json")


def test_smallest_run(tmp_path):
    res = run_experiment(cfg(sizes=[10], replicas=1, metrics=["pearson"], k_values=[]), tmp_path)
    assert len(res.records) == 1
    rec = json.loads((tmp_path / "records.jsonl").read_text())
    assert rec["status"] == "ok" and rec["report"]["n"] == 10
    assert rec["seed"] == mix(0, 10, 0)


def test_cell_seeds():
    c = cfg(base_seed=99)
    assert c.cell_seed(50, 1) == mix(99, 50, 1)
    assert len({c.cell_seed(n, r) for n in c.sizes for r in range(c.replicas)}) == 4


def test_cardinalities(tmp_path):
    c = cfg(metrics=["annd", "kendall"], k_values=[1, 2, 3])
    res = run_experiment(c, tmp_path)
    rows = read_csv(tmp_path / "metrics.csv")
    assert rows[0] == ["size", "replica", "metric", "k", "value"]
    assert sum(r[2] == "annd" for r in rows[1:]) == 12
    summary = read_csv(tmp_path / "summary.csv")
    assert summary[0] == ["size", "metric", "k", "median", "mean", "iqr", "limit", "abs_median_minus_limit"]
    assert len(summary) - 1 == len(c.sizes) * (1 + 3)
    assert set(res.limits) == {"kendall", "annd:1", "annd:2", "annd:3"}
    assert len(read_csv(tmp_path / "timings.csv")) == 1 + 4


def test_empty_metric_selection(tmp_path):
    run_experiment(cfg(metrics=[], k_values=[]), tmp_path)
    assert read_csv(tmp_path / "metrics.csv") == [["size", "replica", "metric", "k", "value"]]
    assert len(read_csv(tmp_path / "summary.csv")) == 1
    assert json.loads((tmp_path / "limits.json").read_text()) == {}


def test_rerun_is_byte_identical(tmp_path):
    c = cfg()
    run_experiment(c, tmp_path / "a")
    run_experiment(c, tmp_path / "b")
    for name in RESULT_FILES:
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes(), name


def test_rerun_in_place_reuses_everything(tmp_path):
    c = cfg()
    run_experiment(c, tmp_path)
    journal = (tmp_path / "records.jsonl").read_bytes()
    before = {n: (tmp_path / n).read_bytes() for n in RESULT_FILES}
    run_experiment(c, tmp_path)
    assert (tmp_path / "records.jsonl").read_bytes() == journal
    assert {n: (tmp_path / n).read_bytes() for n in RESULT_FILES} == before


def test_resume_after_interruption(tmp_path):
    c = cfg(sizes=[40, 80, 160])
    run_experiment(c, tmp_path / "full")
    # simulate a run killed after the first size, mid-way through writing the next record
    part = tmp_path / "part"
    part.mkdir()
    for name in ("config.json", "limits.json"):
        shutil.copy(tmp_path / "full" / name, part / name)
    lines = (tmp_path / "full" / "records.jsonl").read_text().splitlines(keepends=True)
    (part / "records.jsonl").write_text("".join(lines[:2]) + lines[2][: len(lines[2]) // 2])
    res = run_experiment(c, part)
    assert len(res.records) == 6
    for name in RESULT_FILES:
        assert (part / name).read_bytes() == (tmp_path / "full" / name).read_bytes(), name
    loaded = load_result(part)
    assert [r["seed"] for r in loaded.records] == [r["seed"] for r in res.records]


def test_parallel_matches_serial(tmp_path):
    run_experiment(cfg(replicas=3), tmp_path / "serial")
    run_experiment(cfg(replicas=3, workers=3), tmp_path / "parallel")
    for name in RESULT_FILES:
        assert (tmp_path / "serial" / name).read_bytes() == (tmp_path / "parallel" / name).read_bytes(), name


def test_directory_with_other_config_refused(tmp_path):
    run_experiment(cfg(), tmp_path)
    with pytest.raises(InvalidConfig):
        run_experiment(cfg(base_seed=1), tmp_path)
    run_experiment(cfg(workers=2), tmp_path)  # worker count does not change results


def test_failed_cells_are_recorded(tmp_path):
    c = ExperimentConfig(model="rgg", params={"dim": 1, "radius": 3.0}, sizes=[5, 200], replicas=2,
                         metrics=["pearson"], limit_mc_samples=1000)
    res = run_experiment(c, tmp_path)
    status = [(r["size"], r["status"]) for r in res.records]
    assert status == [(5, "error"), (5, "error"), (200, "ok"), (200, "ok")]
    assert "RadiusTooLarge" in res.records[0]["error"]
    rows = read_csv(tmp_path / "metrics.csv")
    assert [r[4] for r in rows[1:3]] == ["error", "error"]
    assert res.summary_row(5, "pearson")["median"] is None


def test_undefined_pearson_recorded_literally(tmp_path):
    # W = 5 and n = 10: every pair is joined, so the graph is complete and regular
    c = ExperimentConfig(model="irg", params={"weight": "const:5"}, sizes=[10], replicas=2,
                         metrics=["pearson", "annd"], k_values=[9, 3], limit_mc_samples=1000)
    run_experiment(c, tmp_path)
    rows = read_csv(tmp_path / "metrics.csv")[1:]
    assert [r[4] for r in rows if r[2] == "pearson"] == ["undefined", "undefined"]
    assert [r[4] for r in rows if r[2] == "annd" and r[3] == "3"] == ["absent", "absent"]


def test_limits_follow_model(tmp_path):
    c = ExperimentConfig(model="rgg", params={"dim": 1, "radius": 2.0, "p": 1.0}, sizes=[200], replicas=1,
                         metrics=["pearson", "annd"], k_values=[5], limit_mc_samples=1000)
    res = run_experiment(c, tmp_path)
    assert res.limits["pearson"]["value"] == pytest.approx(0.75)
    assert res.limits["annd:5"]["value"] == pytest.approx(5.0)
    c2 = cfg(params={"weight": "const:2", "normalization": "total_weight"}, metrics=["annd"], k_values=[2])
    assert run_experiment(c2, tmp_path / "irg").limits["annd:2"]["value"] == pytest.approx(3.0)


def test_heavy_tail_limit_error_does_not_abort(tmp_path):
    c = cfg(params={"weight": "pareto:2.5:1"}, metrics=["pearson", "spearman"], k_values=[])
    res = run_experiment(c, tmp_path)
    assert res.limits["pearson"]["status"] == "error"
    assert res.limits["spearman"]["status"] == "ok"
    assert res.summary_row(100, "pearson")["limit"] is None


def test_spearman_convergence_example(tmp_path):
    c = ExperimentConfig(model="irg", params={"weight": "const:2"}, sizes=[1000, 10000], replicas=10,
                         metrics=["spearman"], limit_mc_samples=100_000)
    res = run_experiment(c, tmp_path)
    med = [float(np.median(np.abs(res.values(n, "spearman")))) for n in c.sizes]
    assert med[1] < med[0]
    assert med[1] < 0.05
