"""Convergence experiments: sample graphs at growing sizes, measure, compare to limits.

An experiment directory holds

* ``config.json``   the normalised configuration,
* ``records.jsonl`` one line per (size, replica), appended as cells finish,
* ``limits.json``   limit values for every selected metric,
* ``metrics.csv``, ``summary.csv``  roll-ups written by :func:`summarize`,
* ``timings.csv``   wall time per cell.

Re-running on an existing directory skips the cells already in the journal,
so an interrupted run resumes where it stopped. Everything except the wall
times is a deterministic function of the configuration.
"""

from __future__ import annotations

import csv
import hashlib
import json
import logging
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from .errors import DegcorrError, InvalidConfig
from .limits import LimitLaw, evaluate_limit
from .metrics import G_TRANSFORMS, UNDEFINED, compute_report
from .models import RggParams, SampledGraph, WeightLaw, sample_irg, sample_rgg
from .rng import mix

log = logging.getLogger(__name__)

__all__ = ["ExperimentConfig", "ExperimentResult", "run_experiment", "summarize", "load_result",
           "SCALAR_METRICS", "PER_K_METRICS"]

SCALAR_METRICS = ("pearson", "spearman", "kendall", "ddist")
PER_K_METRICS = ("annd", "annr")
_REPORT_KEY = {"pearson": "pearson", "spearman": "spearman", "kendall": "kendall",
               "ddist": "degree_distance", "annd": "annd", "annr": "annr"}


@dataclass
class ExperimentConfig:
    model: str
    params: dict[str, Any]
    sizes: list[int]
    replicas: int = 1
    metrics: list[str] = field(default_factory=lambda: list(SCALAR_METRICS))
    g: str = "identity"
    k_values: list[int] = field(default_factory=list)
    base_seed: int = 0
    limit_mc_samples: int = 100_000
    output_dir: str | None = None
    workers: int = 1

    def __post_init__(self):
        self.validate()

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> ExperimentConfig:
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(data) - known
        if unknown:
            raise InvalidConfig(f"unknown config field(s): {sorted(unknown)}")
        try:
            return cls(**data)
        except TypeError as exc:
            raise InvalidConfig(str(exc)) from exc

    @classmethod
    def from_file(cls, path: str | os.PathLike) -> ExperimentConfig:
        try:
            with open(path, encoding="utf-8") as fh:
                data = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise InvalidConfig(f"cannot read config {path}: {exc}") from exc
        if not isinstance(data, dict):
            raise InvalidConfig("config must be a JSON object")
        return cls.from_dict(data)

    def validate(self) -> None:
        if self.model not in ("irg", "rgg"):
            raise InvalidConfig(f"model must be 'irg' or 'rgg', got {self.model!r}")
        if not self.sizes or any(not isinstance(n, int) or n < 1 for n in self.sizes):
            raise InvalidConfig("sizes must be a non-empty list of positive integers")
        if any(b <= a for a, b in zip(self.sizes, self.sizes[1:])):
            raise InvalidConfig("sizes must be strictly increasing")
        if not isinstance(self.replicas, int) or self.replicas < 1:
            raise InvalidConfig("replicas must be >= 1")
        bad = [m for m in self.metrics if m not in SCALAR_METRICS + PER_K_METRICS]
        if bad:
            raise InvalidConfig(f"unknown metric(s) {bad}")
        if len(set(self.metrics)) != len(self.metrics):
            raise InvalidConfig("metrics must not repeat")
        if any(m in PER_K_METRICS for m in self.metrics) and not self.k_values:
            raise InvalidConfig("k_values must be non-empty when annd or annr is selected")
        if any(not isinstance(k, int) or k < 1 for k in self.k_values):
            raise InvalidConfig("k_values must be positive integers")
        if self.g not in G_TRANSFORMS:
            raise InvalidConfig(f"g must be one of {sorted(G_TRANSFORMS)}")
        if self.limit_mc_samples < 1 or self.workers < 1:
            raise InvalidConfig("limit_mc_samples and workers must be positive")
        try:
            self.limit_law()
        except (ValueError, KeyError, TypeError) as exc:
            raise InvalidConfig(f"bad model params {self.params}: {exc}") from exc

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)

    def fingerprint(self) -> str:
        """Hash of everything that determines the results (not where or how fast)."""
        core = {k: v for k, v in self.to_dict().items() if k not in ("output_dir", "workers")}
        return hashlib.sha256(json.dumps(core, sort_keys=True).encode()).hexdigest()[:16]

    # -- model plumbing ------------------------------------------------------

    def weight_law(self) -> WeightLaw:
        return WeightLaw.parse(str(self.params["weight"]))

    def rgg_params(self) -> RggParams:
        return RggParams(int(self.params["dim"]), float(self.params["radius"]), float(self.params.get("p", 1.0)))

    def limit_law(self) -> LimitLaw:
        if self.model == "irg":
            return LimitLaw.irg_for_normalization(self.weight_law(), self.params.get("normalization", "n"))
        return LimitLaw.from_rgg(self.rgg_params())

    def sample(self, n: int, seed: int) -> SampledGraph:
        if self.model == "irg":
            return sample_irg(n, self.weight_law(), seed, normalization=self.params.get("normalization", "n"))
        return sample_rgg(n, self.rgg_params(), seed)

    def cell_seed(self, n: int, replica: int) -> int:
        return mix(self.base_seed, n, replica)

    def metric_keys(self) -> list[tuple[str, int | None]]:
        keys: list[tuple[str, int | None]] = []
        for m in self.metrics:
            if m in PER_K_METRICS:
                keys.extend((m, k) for k in self.k_values)
            else:
                keys.append((m, None))
        return keys


def _limit_key(metric: str, k: int | None) -> str:
    return metric if k is None else f"{metric}:{k}"


@dataclass
class ExperimentResult:
    config: ExperimentConfig
    records: list[dict[str, Any]]
    limits: dict[str, dict[str, Any]]
    summary: list[dict[str, Any]] = field(default_factory=list)

    def values(self, size: int, metric: str, k: int | None = None) -> list[float]:
        """Numeric values of one metric over the replicas at ``size``."""
        out = []
        for rec in self.records:
            if rec["size"] == size:
                v = _cell_value(rec, metric, k)
                if isinstance(v, float):
                    out.append(v)
        return out

    def summary_row(self, size: int, metric: str, k: int | None = None) -> dict[str, Any]:
        for row in self.summary:
            if row["size"] == size and row["metric"] == metric and row["k"] == k:
                return row
        raise KeyError((size, metric, k))


def _run_cell(cfg_dict: dict[str, Any], size: int, replica: int) -> dict[str, Any]:
    cfg = ExperimentConfig.from_dict(cfg_dict)
    seed = cfg.cell_seed(size, replica)
    rec: dict[str, Any] = {"size": size, "replica": replica, "seed": seed}
    t0 = time.perf_counter()
    try:
        sampled = cfg.sample(size, seed)
        report = compute_report(sampled.graph, cfg.g)
        rec["status"] = "ok"
        rec["report"] = report.to_json()
    except (DegcorrError, ValueError, ArithmeticError) as exc:
        rec["status"] = "error"
        rec["error"] = f"{type(exc).__name__}: {exc}"
    rec["wall_time"] = time.perf_counter() - t0
    return rec


def _cell_value(rec: dict[str, Any], metric: str, k: int | None) -> float | str:
    if rec.get("status") != "ok":
        return "error"
    v = rec["report"][_REPORT_KEY[metric]]
    if k is not None:
        v = v.get(str(k))
        if v is None:
            return "absent"
    if v == "undefined" or v is UNDEFINED:
        return "undefined"
    return float(v)


def _compute_limits(cfg: ExperimentConfig) -> dict[str, dict[str, Any]]:
    law = cfg.limit_law()
    out: dict[str, dict[str, Any]] = {}
    for metric, k in cfg.metric_keys():
        key = _limit_key(metric, k)
        seed = mix(cfg.base_seed, "limits", key)
        try:
            val = evaluate_limit(law, metric, k=k, g=cfg.g, mc_samples=cfg.limit_mc_samples, seed=seed)
            out[key] = {"status": "ok", **val.to_json()}
        except (DegcorrError, ValueError) as exc:
            out[key] = {"status": "error", "error": f"{type(exc).__name__}: {exc}",
                        "value": None, "stderr": None, "method": None}
    return out


def _write_json(path: Path, payload: Any) -> None:
    tmp = path.with_suffix(path.suffix + ".tmp")
    tmp.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    os.replace(tmp, path)


def _journal_line(rec: dict[str, Any]) -> str:
    return json.dumps(rec, sort_keys=True) + "\n"


def _load_journal(path: Path) -> list[dict[str, Any]]:
    if not path.exists():
        return []
    records, good = [], []
    for line in path.read_text(encoding="utf-8").splitlines(keepends=True):
        if not line.endswith("\n"):
            break  # torn final write from an interrupted run
        try:
            records.append(json.loads(line))
        except json.JSONDecodeError:
            break
        good.append(line)
    if sum(map(len, good)) != path.stat().st_size:
        path.write_text("".join(good), encoding="utf-8")
    return records


def run_experiment(cfg: ExperimentConfig, output_dir: str | os.PathLike | None = None) -> ExperimentResult:
    """Run (or resume) the experiment and persist all outputs before returning."""
    out = Path(output_dir or cfg.output_dir or ".")
    out.mkdir(parents=True, exist_ok=True)
    cfg_path = out / "config.json"
    stored = {**cfg.to_dict(), "output_dir": None, "workers": None, "fingerprint": cfg.fingerprint()}
    if cfg_path.exists():
        previous = json.loads(cfg_path.read_text(encoding="utf-8"))
        if previous.get("fingerprint") != cfg.fingerprint():
            raise InvalidConfig(f"{out} already holds results for a different configuration")
    else:
        _write_json(cfg_path, stored)

    limits_path = out / "limits.json"
    if limits_path.exists():
        limits = json.loads(limits_path.read_text(encoding="utf-8"))
    else:
        limits = _compute_limits(cfg)
        _write_json(limits_path, limits)

    journal = out / "records.jsonl"
    done = {(r["size"], r["replica"]): r for r in _load_journal(journal)}
    todo = [(n, r) for n in cfg.sizes for r in range(cfg.replicas) if (n, r) not in done]
    log.info("experiment %s: %d cells done, %d to run", cfg.fingerprint(), len(done), len(todo))

    cfg_dict = cfg.to_dict()
    with open(journal, "a", encoding="utf-8") as fh:
        if cfg.workers > 1 and len(todo) > 1:
            with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
                results = pool.map(_run_cell, [cfg_dict] * len(todo), *zip(*todo))
                for rec in results:
                    fh.write(_journal_line(rec))
                    fh.flush()
                    done[(rec["size"], rec["replica"])] = rec
        else:
            for n, r in todo:
                rec = _run_cell(cfg_dict, n, r)
                fh.write(_journal_line(rec))
                fh.flush()
                done[(n, r)] = rec

    records = [done[(n, r)] for n in cfg.sizes for r in range(cfg.replicas)]
    result = ExperimentResult(cfg, records, limits)
    summarize(result, out)
    return result


def _fmt(v: Any) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


def summarize(res: ExperimentResult, output_dir: str | os.PathLike | None = None) -> dict[str, list[list[str]]]:
    """Build ``metrics.csv``, ``summary.csv`` and ``limits.json``; write them if a directory is given."""
    cfg = res.config
    keys = cfg.metric_keys()
    metric_rows = [["size", "replica", "metric", "k", "value"]]
    for rec in res.records:
        for metric, k in keys:
            metric_rows.append([str(rec["size"]), str(rec["replica"]), metric, _fmt(k),
                                _fmt(_cell_value(rec, metric, k))])

    summary_rows = [["size", "metric", "k", "median", "mean", "iqr", "limit", "abs_median_minus_limit"]]
    res.summary = []
    for n in cfg.sizes:
        for metric, k in keys:
            vals = np.array(res.values(n, metric, k))
            lim = res.limits.get(_limit_key(metric, k), {}).get("value")
            row: dict[str, Any] = {"size": n, "metric": metric, "k": k, "median": None, "mean": None,
                                   "iqr": None, "limit": lim, "abs_dev": None, "count": len(vals)}
            if len(vals):
                q25, med, q75 = np.percentile(vals, [25, 50, 75])
                row.update(median=float(med), mean=float(vals.mean()), iqr=float(q75 - q25))
                if lim is not None and math.isfinite(lim):
                    row["abs_dev"] = abs(float(med) - lim)
            res.summary.append(row)
            summary_rows.append([str(n), metric, _fmt(k), _fmt(row["median"]), _fmt(row["mean"]),
                                 _fmt(row["iqr"]), _fmt(lim), _fmt(row["abs_dev"])])

    timing_rows = [["size", "replica", "wall_time"]]
    timing_rows += [[str(r["size"]), str(r["replica"]), f"{r['wall_time']:.6f}"] for r in res.records]

    if output_dir is not None:
        out = Path(output_dir)
        for name, rows in (("metrics.csv", metric_rows), ("summary.csv", summary_rows), ("timings.csv", timing_rows)):
            with open(out / name, "w", encoding="utf-8", newline="") as fh:
                csv.writer(fh, lineterminator="\n").writerows(rows)
        _write_json(out / "limits.json", res.limits)
    return {"metrics.csv": metric_rows, "summary.csv": summary_rows, "timings.csv": timing_rows}


def load_result(output_dir: str | os.PathLike) -> ExperimentResult:
    out = Path(output_dir)
    stored = json.loads((out / "config.json").read_text(encoding="utf-8"))
    stored.pop("fingerprint", None)
    stored["workers"] = 1
    cfg = ExperimentConfig.from_dict(stored)
    by_key = {(r["size"], r["replica"]): r for r in _load_journal(out / "records.jsonl")}
    records = [by_key[(n, r)] for n in cfg.sizes for r in range(cfg.replicas) if (n, r) in by_key]
    limits = json.loads((out / "limits.json").read_text(encoding="utf-8"))
    res = ExperimentResult(cfg, records, limits)
    summarize(res)
    return res
