"""Command-line interface.

Every command takes an optional JSON config (``--config``); ``--seed`` overrides
the config's seed. Failures print a single ``error: <command>: <message>`` line
to stderr, exit nonzero, and delete any files the command had written.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import os
import sys
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

import numpy as np

from . import io
from .core import StepFunction, cindex_times, expected_time
from .experiment import (
    ExperimentConfig,
    InstanceRow,
    MetricsReport,
    format_table,
    instance_metrics,
    report_table,
    run_experiment,
)
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
from .forest import ForestConfig, RSFModel, fit_rsf
from .synth import PRESETS, GeneratorConfig, gen_clustered_dataset, preset

log = logging.getLogger("survbenim")


class UsageError(ValueError):
    """Bad invocation or config; exits with status 2."""


@dataclass(frozen=True)
class GenerateConfig:
    format_version: int = 1
    preset: str | None = "2c5f"
    generator: GeneratorConfig | None = None  # custom generator, used when preset is null
    n_points: int | None = None
    seed: int = 0


@dataclass(frozen=True)
class TrainConfig:
    format_version: int = 1
    dataset: str = "dataset.csv"
    forest: ForestConfig = field(default_factory=ForestConfig)
    seed: int = 0


@dataclass(frozen=True)
class ExplainConfig:
    format_version: int = 1
    dataset: str = "dataset.csv"
    model: str = "forest.json"
    method: str = "survbenim-local"
    anchor_rows: tuple[int, ...] = (0,)  # rows of the dataset to explain
    anchors: tuple[tuple[float, ...], ...] | None = None  # explicit points; overrides anchor_rows
    survbenim: SurvBeNIMConfig = field(default_factory=SurvBeNIMConfig)
    survbex: SurvBeXConfig = field(default_factory=SurvBeXConfig)
    survlime: SurvLIMEConfig = field(default_factory=SurvLIMEConfig)
    survnam: SurvNAMConfig = field(default_factory=SurvNAMConfig)
    global_epochs: int = 500
    seed: int = 0


@dataclass(frozen=True)
class EvaluateConfig:
    format_version: int = 1
    model: str = "forest.json"
    explanations: tuple[str, ...] = ()
    ground_truth: str | None = "ground_truth.json"
    b_true: tuple[tuple[float, ...], ...] | None = None  # one per explanation; overrides ground_truth
    seed: int = 0  # unused; accepted for uniformity


@dataclass(frozen=True)
class ExportCurvesConfig:
    format_version: int = 1
    explanations: tuple[str, ...] = ()
    seed: int = 0


@dataclass(frozen=True)
class RunExperimentConfig:
    format_version: int = 1
    experiment: ExperimentConfig = field(default_factory=ExperimentConfig)
    seed: int | None = None


def _load_config(cls, path, seed, base_dir: Path):
    doc = {}
    if path is not None:
        try:
            doc = json.loads(Path(path).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config {path}: {exc}") from None
    try:
        cfg = io.from_dict(cls, doc)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    if cfg.format_version != 1:
        raise UsageError(f"unsupported config format_version {cfg.format_version}")
    if seed is not None:
        cfg = replace(cfg, seed=seed)
    return cfg


def _resolve(base: Path, p: str) -> Path:
    p = Path(p)
    return p if p.is_absolute() else base / p


class Outputs:
    """Tracks written files so a failed command can remove them."""

    def __init__(self, out_dir: Path):
        self.dir = out_dir
        self.written: list[Path] = []

    def path(self, name: str) -> Path:
        p = self.dir / name
        self.written.append(p)
        return p

    def cleanup(self):
        io.remove_quietly(self.written)


def cmd_generate(args, out: Outputs):
    cfg = _load_config(GenerateConfig, args.config, args.seed, out.dir)
    if args.preset is not None:
        cfg = replace(cfg, preset=args.preset, generator=None)
    if cfg.preset is not None:
        if cfg.preset not in PRESETS:
            raise UsageError(f"unknown preset {cfg.preset!r}; valid presets: {', '.join(PRESETS)}")
        overrides = {"seed": cfg.seed}
        if cfg.n_points is not None:
            overrides["n_points"] = cfg.n_points
        gen = preset(cfg.preset, **overrides)
    elif cfg.generator is not None:
        gen = replace(cfg.generator, seed=cfg.seed)
    else:
        raise UsageError("config needs either preset or generator")
    dataset, gt = gen_clustered_dataset(gen)
    io.save_dataset_csv(dataset, out.path("dataset.csv"))
    doc = {"format_version": 1, "kind": "ground_truth", "generator": asdict(gen), **gt.to_dict()}
    io.write_json(doc, out.path("ground_truth.json"), io.GROUND_TRUTH_SCHEMA)
    print(f"n={dataset.n} d={dataset.d} censored={1 - dataset.events.mean():.3f}")


def cmd_train(args, out: Outputs):
    cfg = _load_config(TrainConfig, args.config, args.seed, out.dir)
    dataset = io.load_dataset_csv(_resolve(out.dir, args.dataset or cfg.dataset))
    model = fit_rsf(dataset, replace(cfg.forest, seed=cfg.seed), workers=args.workers)
    io.write_json(model.to_dict(), out.path("forest.json"), io.FOREST_SCHEMA)
    c = cindex_times(dataset.times, expected_time(model.predict_sf(dataset.X), model.time_grid), dataset.events)
    print(f"training_cindex={'nan' if c is None else format(c, '.6f')}")


def _load_model(path) -> RSFModel:
    return RSFModel.from_dict(io.read_json(path, io.FOREST_SCHEMA))


def cmd_explain(args, out: Outputs):
    cfg = _load_config(ExplainConfig, args.config, args.seed, out.dir)
    if args.method is not None:
        cfg = replace(cfg, method=args.method)
    if cfg.method not in METHODS:
        raise UsageError(f"unknown method {cfg.method!r}; valid methods: {', '.join(METHODS)}")
    dataset = io.load_dataset_csv(_resolve(out.dir, args.dataset or cfg.dataset))
    model = _load_model(_resolve(out.dir, args.model or cfg.model))
    if cfg.anchors is not None:
        anchors, rows = np.asarray(cfg.anchors, dtype=float), [None] * len(cfg.anchors)
    else:
        rows = list(cfg.anchor_rows)
        if any(not 0 <= r < dataset.n for r in rows):
            raise UsageError(f"anchor_rows must lie in [0, {dataset.n})")
        anchors = dataset.X[rows]
    if anchors.ndim != 2 or anchors.shape[1] != dataset.d:
        raise UsageError(f"anchors must have {dataset.d} features")
    seeds = [int(s) for s in np.random.SeedSequence(cfg.seed).generate_state(len(anchors))]
    m = cfg.method
    model_global = None
    if m == "survbenim-global":
        model_global = fit_survbenim_global(model, dataset, anchors,
                                            replace(cfg.survbenim, epochs=cfg.global_epochs, seed=cfg.seed))
    for i, (x, row, s) in enumerate(zip(anchors, rows, seeds)):
        if m == "survbenim-local":
            res = fit_survbenim_local(model, dataset, x, replace(cfg.survbenim, seed=s))
        elif m == "survbenim-global":
            res = model_global.explain(x, seed=s)
        elif m == "survbex":
            res = fit_survbex(model, dataset, x, replace(cfg.survbex, seed=s))
        elif m == "survlime":
            res = fit_survlime(model, dataset, x, replace(cfg.survlime, seed=s))
        else:
            res = fit_survnam(model, dataset, x, replace(cfg.survnam, seed=s))
        res.diagnostics["anchor_row"] = row
        io.write_json(io.explanation_to_dict(res), out.path(f"explanation_{i:03d}.json"), io.EXPLANATION_SCHEMA)
        log.info("explained anchor %d with %s", i, m)
    print(f"explanations={len(anchors)} method={m}")


def _explanation_paths(out: Outputs, given) -> list[Path]:
    if given:
        return [_resolve(out.dir, p) for p in given]
    found = sorted(out.dir.glob("explanation_*.json"))
    if not found:
        raise UsageError(f"no explanation_*.json files in {out.dir}")
    return found


def cmd_evaluate(args, out: Outputs):
    cfg = _load_config(EvaluateConfig, args.config, args.seed, out.dir)
    model = _load_model(_resolve(out.dir, args.model or cfg.model))
    paths = _explanation_paths(out, cfg.explanations)
    results = [io.explanation_from_dict(io.read_json(p)) for p in paths]
    if cfg.b_true is not None:
        if len(cfg.b_true) != len(results):
            raise UsageError("b_true needs one vector per explanation")
        truths = [np.asarray(b, dtype=float) for b in cfg.b_true]
    else:
        gt = io.read_json(_resolve(out.dir, cfg.ground_truth), io.GROUND_TRUTH_SCHEMA)
        truths = []
        for p, r in zip(paths, results):
            row = r.diagnostics.get("anchor_row")
            if row is None:
                raise UsageError(f"{p.name} has no anchor_row; give b_true explicitly")
            truths.append(np.asarray(gt["b_true"][row], dtype=float))
    by_method: dict[str, MetricsReport] = {}
    h = hashlib.sha256(io.canonical_json(asdict(cfg)).encode()).hexdigest()[:16]
    for i, (r, b) in enumerate(zip(results, truths)):
        rep = by_method.setdefault(r.method, MetricsReport(r.method, h, []))
        row = InstanceRow(i, r.anchor.tolist(), b.tolist(), r.importance.tolist())
        try:
            bb = StepFunction(model.time_grid, model.predict_sf(r.anchor), 1.0)
            for k, v in instance_metrics(r.importance, b, r.fitted_sf, bb).items():
                setattr(row, k, v)
        except ValueError as exc:
            row.skipped = f"ValueError: {exc}"
        rep.rows.append(row)
    for rep in by_method.values():
        rep.aggregate()
    _write_reports(out, by_method, h, None)


def _write_reports(out: Outputs, reports, config_hash: str, config_doc):
    doc = {
        "format_version": 1,
        "kind": "evaluation",
        "config_hash": config_hash,
        "reports": {m: r.to_dict() for m, r in reports.items()},
    }
    if config_doc is not None:
        doc["config"] = config_doc
    io.write_json(doc, out.path("report.json"), io.REPORT_SCHEMA)
    io.write_table_csv(report_table(reports), out.path("report.csv"))
    print(format_table(reports))


def cmd_export_curves(args, out: Outputs):
    cfg = _load_config(ExportCurvesConfig, args.config, args.seed, out.dir)
    n = 0
    for p in _explanation_paths(out, cfg.explanations):
        res = io.explanation_from_dict(io.read_json(p))
        if res.curves is None:
            log.info("%s (%s) has no curves; skipped", p.name, res.method)
            continue
        io.write_curves_csv(res, out.path(p.stem.replace("explanation", "curves") + ".csv"))
        n += 1
    if n == 0:
        raise UsageError("none of the explanations carry curves (only survbenim and survnam do)")
    print(f"curve_files={n}")


def cmd_run_experiment(args, out: Outputs):
    cfg = _load_config(RunExperimentConfig, args.config, None, out.dir)
    exp = cfg.experiment
    if cfg.seed is not None:
        exp = replace(exp, seed=cfg.seed)
    if args.seed is not None:
        exp = replace(exp, seed=args.seed)
    exp = replace(exp, workers=args.workers)
    result = run_experiment(exp)
    _write_reports(out, result.reports, exp.hash(), exp.to_dict())


COMMANDS = {
    "generate": cmd_generate,
    "train-blackbox": cmd_train,
    "explain": cmd_explain,
    "evaluate": cmd_evaluate,
    "export-curves": cmd_export_curves,
    "run-experiment": cmd_run_experiment,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="survbenim", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", help="JSON config file")
        p.add_argument("--seed", type=int, help="overrides the config seed")
        p.add_argument("--workers", type=int, default=os.cpu_count() or 1)
        p.add_argument("--out", default=".", help="output directory; relative input paths resolve here too")
        if name == "generate":
            p.add_argument("--preset", help=f"one of {', '.join(PRESETS)}")
        if name in ("train-blackbox", "explain"):
            p.add_argument("--dataset")
        if name in ("explain", "evaluate"):
            p.add_argument("--model")
        if name == "explain":
            p.add_argument("--method", help=f"one of {', '.join(METHODS)}")
    return parser


def main(argv=None) -> int:
    logging.basicConfig(level=os.environ.get("SURVBENIM_LOG_LEVEL", "WARNING").upper(),
                        format="%(levelname)s %(message)s")
    args = build_parser().parse_args(argv)
    if args.workers < 1:
        print(f"error: {args.command}: --workers must be positive", file=sys.stderr)
        return 2
    out = Outputs(Path(args.out))
    try:
        out.dir.mkdir(parents=True, exist_ok=True)
        COMMANDS[args.command](args, out)
    except UsageError as exc:
        out.cleanup()
        print(f"error: {args.command}: {exc}".replace("\n", " "), file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001 - reported as a one-line error
        out.cleanup()
        print(f"error: {args.command}: {type(exc).__name__}: {exc}".replace("\n", " "), file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
