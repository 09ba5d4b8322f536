"""Generator -> black box -> explainers -> metrics, aggregated per method."""

from __future__ import annotations

import hashlib
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from .core import StepFunction
from .explainers import (
    METHODS,
    SurvBeNIMConfig,
    SurvBeXConfig,
    SurvLIMEConfig,
    SurvNAMConfig,
    fit_survbenim_global,
    fit_survbenim_local,
    fit_survbex,
    fit_survlime,
    fit_survnam,
)
from .forest import ForestConfig, fit_rsf
from .metrics import cindex_vec, dist_D, dist_KL, normalize_importance, sf_distance
from .synth import PRESETS, gen_clustered_dataset, gen_test_points, preset

METRIC_KEYS = ("D", "KL", "C", "sf_distance")
AGGREGATE_NAMES = {"D": "MSD", "KL": "MKL", "C": "MCI", "sf_distance": "MSFD"}
# stream ids for seeds derived from the experiment seed; per-anchor streams use 0..n_test-1
_FOREST_STREAM = 2**31 - 1
_ANCHOR_STREAM = 2**31 - 2


@dataclass(frozen=True)
class ExperimentConfig:
    preset: str = "2c5f"
    n_test: int = 20
    methods: tuple[str, ...] = ("survbenim-local", "survbex", "survlime", "survnam")
    forest: ForestConfig = field(default_factory=ForestConfig)
    survbenim: SurvBeNIMConfig = field(default_factory=SurvBeNIMConfig)
    survbex: SurvBeXConfig = field(default_factory=SurvBeXConfig)
    survlime: SurvLIMEConfig = field(default_factory=SurvLIMEConfig)
    survnam: SurvNAMConfig = field(default_factory=SurvNAMConfig)
    global_epochs: int = 500
    n_points: int | None = None  # per-cluster size override
    seed: int = 0
    workers: int = 1

    def __post_init__(self):
        object.__setattr__(self, "methods", tuple(self.methods))
        if self.preset not in PRESETS:
            raise ValueError(f"unknown preset {self.preset!r}; expected one of {PRESETS}")
        bad = [m for m in self.methods if m not in METHODS]
        if bad:
            raise ValueError(f"unknown method(s) {bad}; expected a subset of {METHODS}")
        if self.n_test < 1:
            raise ValueError("n_test must be at least 1")

    def to_dict(self) -> dict:
        doc = asdict(self)
        doc.pop("workers")  # does not affect results
        return doc

    def hash(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()[:16]


@dataclass
class InstanceRow:
    index: int
    anchor: list
    b_true: list
    importance: list | None = None
    D: float | None = None
    KL: float | None = None
    C: float | None = None
    sf_distance: float | None = None
    skipped: str | None = None


@dataclass
class MetricsReport:
    method: str
    config_hash: str
    rows: list[InstanceRow]
    aggregates: dict = field(default_factory=dict)

    @property
    def n_skipped(self) -> int:
        return sum(r.skipped is not None for r in self.rows)

    def column(self, key: str) -> np.ndarray:
        """Defined values of one per-instance metric."""
        return np.array([getattr(r, key) for r in self.rows if getattr(r, key) is not None], dtype=float)

    def aggregate(self) -> dict:
        out = {}
        for key, name in AGGREGATE_NAMES.items():
            col = self.column(key)
            out[name] = float(col.mean()) if col.size else None
            out[name + "_sd"] = float(col.std()) if col.size else None
            out[name + "_median"] = float(np.median(col)) if col.size else None
        out["n_rows"] = len(self.rows)
        out["n_skipped"] = self.n_skipped
        self.aggregates = out
        return out

    def to_dict(self) -> dict:
        return {
            "format_version": 1,
            "kind": "metrics_report",
            "method": self.method,
            "config_hash": self.config_hash,
            "aggregates": self.aggregates,
            "rows": [asdict(r) for r in self.rows],
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "MetricsReport":
        return cls(doc["method"], doc["config_hash"], [InstanceRow(**r) for r in doc["rows"]], doc["aggregates"])


def instance_metrics(importance, b_true, fitted_sf: StepFunction, blackbox_sf: StepFunction) -> dict:
    b_model = normalize_importance(importance).normalized
    b_ref = normalize_importance(b_true).normalized
    return {
        "D": dist_D(b_model, b_ref),
        "KL": dist_KL(b_model, b_ref),
        "C": cindex_vec(b_model, b_ref),
        "sf_distance": sf_distance(fitted_sf, blackbox_sf),
    }


def _seed_for(seed: int, index: int) -> int:
    return int(np.random.SeedSequence([seed, index]).generate_state(1)[0])


def _explain(method, blackbox, dataset, x, config: ExperimentConfig, seed: int):
    if method == "survbenim-local":
        return fit_survbenim_local(blackbox, dataset, x, replace(config.survbenim, seed=seed))
    if method == "survbex":
        return fit_survbex(blackbox, dataset, x, replace(config.survbex, seed=seed))
    if method == "survlime":
        return fit_survlime(blackbox, dataset, x, replace(config.survlime, seed=seed))
    if method == "survnam":
        return fit_survnam(blackbox, dataset, x, replace(config.survnam, seed=seed))
    raise ValueError(f"method {method!r} is not a per-instance fit")


def _row(index, method, explain, blackbox, x, b_true) -> InstanceRow:
    row = InstanceRow(index, x.tolist(), b_true.tolist())
    try:
        result = explain()
        row.importance = result.importance.tolist()
        bb_sf = StepFunction(blackbox.time_grid, blackbox.predict_sf(x), 1.0)
        for key, value in instance_metrics(result.importance, b_true, result.fitted_sf, bb_sf).items():
            setattr(row, key, value)
    except (ValueError, FloatingPointError) as exc:
        row.skipped = f"{type(exc).__name__}: {exc}"
    return row


def _local_task(args):
    index, method, blackbox, dataset, x, b_true, config = args
    seed = _seed_for(config.seed, index)
    return _row(index, method, lambda: _explain(method, blackbox, dataset, x, config, seed), blackbox, x, b_true)


@dataclass
class ExperimentOutput:
    config: ExperimentConfig
    reports: dict[str, MetricsReport]
    blackbox: object
    dataset: object
    anchors: np.ndarray
    b_true: np.ndarray


def setup(config: ExperimentConfig):
    """Dataset, fitted black box and test anchors for an experiment."""
    overrides = {"seed": config.seed}
    if config.n_points is not None:
        overrides["n_points"] = config.n_points
    gen = preset(config.preset, **overrides)
    dataset, _ = gen_clustered_dataset(gen)
    # the experiment seed drives everything; forest.seed is replaced by a derived one
    blackbox = fit_rsf(dataset, replace(config.forest, seed=_seed_for(config.seed, _FOREST_STREAM)), workers=config.workers)
    anchors, b_true = gen_test_points(gen, config.n_test, _seed_for(config.seed, _ANCHOR_STREAM))
    return dataset, blackbox, anchors, b_true


def run_experiment(config: ExperimentConfig, prepared=None) -> ExperimentOutput:
    """Explain ``n_test`` fresh points with every requested method.

    An explainer that fails on a point yields a skipped row carrying the reason.
    """
    dataset, blackbox, anchors, b_true = prepared if prepared is not None else setup(config)
    h = config.hash()
    reports = {}
    for method in config.methods:
        if method == "survbenim-global":
            cfg = replace(config.survbenim, epochs=config.global_epochs, seed=config.seed)
            model = fit_survbenim_global(blackbox, dataset, anchors, cfg)
            rows = [
                _row(i, method, lambda x=x, i=i: model.explain(x, seed=_seed_for(config.seed, i)), blackbox, x, b)
                for i, (x, b) in enumerate(zip(anchors, b_true))
            ]
        else:
            tasks = [(i, method, blackbox, dataset, x, b, config) for i, (x, b) in enumerate(zip(anchors, b_true))]
            if config.workers > 1:
                with ProcessPoolExecutor(config.workers) as pool:
                    rows = list(pool.map(_local_task, tasks))
            else:
                rows = [_local_task(t) for t in tasks]
        report = MetricsReport(method, h, rows)
        report.aggregate()
        reports[method] = report
    return ExperimentOutput(config, reports, blackbox, dataset, anchors, b_true)


def report_table(reports: dict[str, MetricsReport]) -> list[list]:
    """Rows of ``method, MSD, MKL, MCI, MSFD`` plus the matching standard deviations."""
    header = ["method", "MSD", "MKL", "MCI", "MSFD", "MSD_sd", "MKL_sd", "MCI_sd", "MSFD_sd", "n_skipped"]
    table = [header]
    for name, rep in reports.items():
        a = rep.aggregates or rep.aggregate()
        table.append([name] + [a[k] for k in header[1:]])
    return table


def format_table(reports: dict[str, MetricsReport]) -> str:
    table = report_table(reports)
    lines = ["{:<18}{:>9}{:>9}{:>9}{:>9}".format(*table[0][:5])]
    for row in table[1:]:
        cells = ["-" if v is None or (isinstance(v, float) and math.isnan(v)) else f"{v:.4f}" for v in row[1:5]]
        lines.append("{:<18}{:>9}{:>9}{:>9}{:>9}".format(row[0], *cells))
    return "\n".join(lines)
