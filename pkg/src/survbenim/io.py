"""Files: dataset CSVs, JSON documents with schemas, curve tables, config parsing."""

from __future__ import annotations

import csv
import dataclasses
import json
import math
import os
import types
import typing
from pathlib import Path

import jsonschema
import numpy as np

from .core import StepFunction, SurvivalDataset
from .explainers.base import ExplanationResult

FORMAT_VERSION = 1


def fmt(x) -> str:
    """17 significant digits; round-trips every double."""
    return format(float(x), ".17g")


# -- datasets ---------------------------------------------------------------


def save_dataset_csv(dataset: SurvivalDataset, path) -> None:
    header = [f"f{j + 1}" for j in range(dataset.d)] + ["time", "event"]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for x, t, e in zip(dataset.X, dataset.times, dataset.events):
            w.writerow([fmt(v) for v in x] + [fmt(t), int(e)])


def load_dataset_csv(path) -> SurvivalDataset:
    """Read ``f1..fd, time, event``; errors name the 1-based data row and the column."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise ValueError(f"{path}: empty file") from None
        for col in ("time", "event"):
            if col not in header:
                raise ValueError(f"{path}: missing column {col}")
        feats = [h for h in header if h not in ("time", "event")]
        expected = [f"f{j + 1}" for j in range(len(feats))]
        if feats != expected or not feats:
            raise ValueError(f"{path}: feature columns must be f1..fd in order, got {feats}")
        idx = {h: i for i, h in enumerate(header)}
        X, times, events = [], [], []
        for r, cells in enumerate(reader, start=1):
            if not cells:
                continue
            if len(cells) != len(header):
                raise ValueError(f"row {r}: expected {len(header)} cells, got {len(cells)}")

            def num(col):
                try:
                    v = float(cells[idx[col]])
                except ValueError:
                    raise ValueError(f"row {r}, column {col}: not a number: {cells[idx[col]]!r}") from None
                if not math.isfinite(v):
                    raise ValueError(f"row {r}, column {col}: not finite")
                return v

            x = [num(c) for c in feats]
            t = num("time")
            if t < 0:
                raise ValueError(f"row {r}, column time: negative time {t}")
            e = cells[idx["event"]].strip()
            if e not in ("0", "1"):
                raise ValueError(f"row {r}, column event: must be 0 or 1, got {e!r}")
            X.append(x)
            times.append(t)
            events.append(int(e))
    if not X:
        raise ValueError(f"{path}: no data rows")
    return SurvivalDataset(np.array(X), np.array(events), np.array(times))


# -- JSON -------------------------------------------------------------------


def _plain(obj):
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else None
    return obj


def canonical_json(doc) -> str:
    """Sorted keys, fixed indentation, non-finite floats as null, trailing newline."""
    return json.dumps(_plain(doc), sort_keys=True, indent=2, allow_nan=False) + "\n"


def write_json(doc, path, schema: dict | None = None) -> None:
    doc = _plain(doc)
    if schema is not None:
        jsonschema.validate(doc, schema)
    Path(path).write_text(canonical_json(doc), encoding="utf-8")


def read_json(path, schema: dict | None = None):
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    if schema is not None:
        jsonschema.validate(doc, schema)
    return doc


_NUM = {"type": "number"}
_NUM_OR_NULL = {"type": ["number", "null"]}
_NUM_LIST = {"type": "array", "items": _NUM}

FOREST_SCHEMA = {
    "type": "object",
    "required": ["format_version", "kind", "d", "config", "time_grid", "trees"],
    "properties": {
        "format_version": {"const": FORMAT_VERSION},
        "kind": {"const": "random_survival_forest"},
        "d": {"type": "integer", "minimum": 1},
        "config": {"type": "object"},
        "time_grid": _NUM_LIST,
        "trees": {
            "type": "array",
            "minItems": 1,
            "items": {
                "type": "object",
                "required": ["feature", "threshold", "left", "right", "leaf", "leaf_chf"],
                "properties": {
                    "feature": {"type": "array", "items": {"type": "integer"}},
                    "threshold": {"type": "array", "items": _NUM_OR_NULL},  # null at leaves
                    "left": {"type": "array", "items": {"type": "integer"}},
                    "right": {"type": "array", "items": {"type": "integer"}},
                    "leaf": {"type": "array", "items": {"type": "integer"}},
                    "leaf_chf": {"type": "array", "items": _NUM_LIST},
                },
            },
        },
    },
}

EXPLANATION_SCHEMA = {
    "type": "object",
    "required": ["format_version", "kind", "method", "anchor", "importance", "normalized_importance", "fitted_sf",
                 "diagnostics"],
    "properties": {
        "format_version": {"const": FORMAT_VERSION},
        "kind": {"const": "explanation"},
        "method": {"enum": ["survbenim-local", "survbenim-global", "survbex", "survlime", "survnam"]},
        "anchor": _NUM_LIST,
        "importance": _NUM_LIST,
        "normalized_importance": {"type": "array", "items": {"type": "number", "minimum": 0}},
        "fitted_sf": {
            "type": "object",
            "required": ["times", "values", "initial_value"],
            "properties": {"times": _NUM_LIST, "values": _NUM_LIST, "initial_value": _NUM},
        },
        "curves": {
            "type": ["object", "null"],
            "required": ["grid", "values"],
            "properties": {
                "grid": {"type": "array", "items": _NUM_LIST},
                "values": {"type": "array", "items": _NUM_LIST},
            },
        },
        "diagnostics": {"type": "object"},
        "parameters": {"type": ["object", "null"]},
    },
}

_ROW = {
    "type": "object",
    "required": ["index", "anchor", "b_true", "D", "KL", "C", "sf_distance", "skipped"],
    "properties": {
        "index": {"type": "integer"},
        "anchor": _NUM_LIST,
        "b_true": _NUM_LIST,
        "importance": {"type": ["array", "null"], "items": _NUM},
        "D": _NUM_OR_NULL,
        "KL": _NUM_OR_NULL,
        "C": _NUM_OR_NULL,
        "sf_distance": _NUM_OR_NULL,
        "skipped": {"type": ["string", "null"]},
    },
}

REPORT_SCHEMA = {
    "type": "object",
    "required": ["format_version", "kind", "config_hash", "reports"],
    "properties": {
        "format_version": {"const": FORMAT_VERSION},
        "kind": {"const": "evaluation"},
        "config_hash": {"type": "string"},
        "config": {"type": "object"},
        "reports": {
            "type": "object",
            "additionalProperties": {
                "type": "object",
                "required": ["method", "config_hash", "aggregates", "rows"],
                "properties": {
                    "method": {"type": "string"},
                    "aggregates": {
                        "type": "object",
                        "required": ["MSD", "MKL", "MCI", "MSFD", "n_skipped"],
                    },
                    "rows": {"type": "array", "items": _ROW},
                },
            },
        },
    },
}

GROUND_TRUTH_SCHEMA = {
    "type": "object",
    "required": ["format_version", "kind", "generator", "cluster", "b_true"],
    "properties": {
        "format_version": {"const": FORMAT_VERSION},
        "kind": {"const": "ground_truth"},
        "generator": {"type": "object"},
        "cluster": {"type": "array", "items": {"type": "integer"}},
        "b_true": {"type": "array", "items": _NUM_LIST},
    },
}


def explanation_to_dict(result: ExplanationResult) -> dict:
    from .metrics import normalize_importance

    imp = np.asarray(result.importance, dtype=float)
    normalized = normalize_importance(imp).normalized if np.abs(imp).sum() > 0 else np.zeros_like(imp)
    return _plain({
        "format_version": FORMAT_VERSION,
        "kind": "explanation",
        "method": result.method,
        "anchor": result.anchor,
        "importance": imp,
        "normalized_importance": normalized,
        "fitted_sf": {
            "times": result.fitted_sf.times,
            "values": result.fitted_sf.values,
            "initial_value": result.fitted_sf.initial_value,
        },
        "curves": result.curves,
        "diagnostics": result.diagnostics,
        "parameters": result.parameters,
    })


def explanation_from_dict(doc: dict) -> ExplanationResult:
    jsonschema.validate(doc, EXPLANATION_SCHEMA)
    sf = doc["fitted_sf"]
    curves = doc.get("curves")
    if curves is not None:
        curves = {"grid": np.asarray(curves["grid"], dtype=float), "values": np.asarray(curves["values"], dtype=float)}
    return ExplanationResult(
        method=doc["method"],
        anchor=np.asarray(doc["anchor"], dtype=float),
        importance=np.asarray(doc["importance"], dtype=float),
        fitted_sf=StepFunction(np.asarray(sf["times"]), np.asarray(sf["values"]), sf["initial_value"]),
        curves=curves,
        diagnostics=doc["diagnostics"],
        parameters=doc.get("parameters"),
    )


# -- CSV tables -------------------------------------------------------------


def write_curves_csv(result: ExplanationResult, path) -> None:
    """Long table ``feature, grid_value, function_value`` (features are 1-based)."""
    if result.curves is None:
        raise ValueError(f"method {result.method} produces no curves")
    grid, values = result.curves["grid"], result.curves["values"]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["feature", "grid_value", "function_value"])
        for j in range(grid.shape[0]):
            for g, v in zip(grid[j], values[j]):
                w.writerow([j + 1, fmt(g), fmt(v)])


def write_table_csv(table: list[list], path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(table[0])
        for row in table[1:]:
            w.writerow(["" if v is None else (fmt(v) if isinstance(v, float) else v) for v in row])


# -- strict config parsing --------------------------------------------------


def _convert(tp, value, where: str):
    origin = typing.get_origin(tp)
    if dataclasses.is_dataclass(tp) and isinstance(value, dict):
        return from_dict(tp, value, where)
    if origin in (typing.Union, types.UnionType):
        args = [a for a in typing.get_args(tp) if a is not type(None)]
        if value is None:
            return None
        return _convert(args[0], value, where) if len(args) == 1 else value
    if origin is tuple and isinstance(value, list):
        args = typing.get_args(tp)
        inner = args[0] if args else None
        return tuple(_convert(inner, v, f"{where}[{i}]") if inner is not None else v for i, v in enumerate(value))
    return value


def from_dict(cls, data: dict, where: str = "config"):
    """Build a (nested) dataclass from a mapping, rejecting unknown keys."""
    if not isinstance(data, dict):
        raise ValueError(f"{where}: expected a mapping, got {type(data).__name__}")
    hints = typing.get_type_hints(cls)
    names = {f.name for f in dataclasses.fields(cls) if f.init}
    unknown = sorted(set(data) - names)
    if unknown:
        raise ValueError(f"{where}: unknown field(s) {unknown}; allowed {sorted(names)}")
    kwargs = {k: _convert(hints[k], v, f"{where}.{k}") for k, v in data.items()}
    try:
        return cls(**kwargs)
    except TypeError as exc:
        raise ValueError(f"{where}: {exc}") from None


def remove_quietly(paths) -> None:
    for p in paths:
        try:
            os.remove(p)
        except FileNotFoundError:
            pass
