"""Random survival forest with log-rank splitting.

Trees are stored as flat node arrays and predict Nelson-Aalen leaf CHFs on
the training set's distinct times. The ensemble averages CHFs and reports
``SF = exp(-CHF)``.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from .core import StepFunction, SurvivalDataset

FORMAT_VERSION = 1
LEAF = -1


@dataclass(frozen=True)
class ForestConfig:
    n_trees: int = 100
    max_depth: int = 8
    features_per_split: int | None = None  # None -> max(1, round(sqrt(d)))
    min_leaf_events: int = 3
    bootstrap: bool = True
    seed: int = 0

    def __post_init__(self):
        if self.n_trees < 1:
            raise ValueError("n_trees must be at least 1")
        if self.max_depth < 0:
            raise ValueError("max_depth must be nonnegative")
        if self.min_leaf_events < 1:
            raise ValueError("min_leaf_events must be positive")
        if self.features_per_split is not None and self.features_per_split < 1:
            raise ValueError("features_per_split must be positive")

    def resolve_features(self, d: int) -> int:
        k = self.features_per_split if self.features_per_split is not None else max(1, round(math.sqrt(d)))
        if k > d:
            raise ValueError(f"features_per_split={k} exceeds the number of features {d}")
        return k


@dataclass
class SurvivalTree:
    """Flat binary tree; leaves carry a row index into ``leaf_chf``."""

    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    leaf: np.ndarray
    leaf_chf: np.ndarray  # (n_leaves, m)

    @property
    def depth(self) -> int:
        depth = np.zeros(self.feature.size, dtype=int)
        for i in range(self.feature.size):
            if self.feature[i] != LEAF:
                depth[self.left[i]] = depth[self.right[i]] = depth[i] + 1
        return int(depth.max())

    def apply(self, X: np.ndarray) -> np.ndarray:
        """Leaf row for every point."""
        node = np.zeros(X.shape[0], dtype=int)
        while True:
            f = self.feature[node]
            inner = f != LEAF
            if not inner.any():
                break
            rows = np.flatnonzero(inner)
            go_left = X[rows, f[inner]] <= self.threshold[node[inner]]
            node[rows] = np.where(go_left, self.left[node[inner]], self.right[node[inner]])
        return self.leaf[node]

    def predict_chf(self, X) -> np.ndarray:
        return self.leaf_chf[self.apply(np.atleast_2d(np.asarray(X, dtype=float)))]

    def to_dict(self) -> dict:
        return {
            "feature": self.feature.tolist(),
            "threshold": self.threshold.tolist(),
            "left": self.left.tolist(),
            "right": self.right.tolist(),
            "leaf": self.leaf.tolist(),
            "leaf_chf": self.leaf_chf.tolist(),
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "SurvivalTree":
        return cls(
            np.asarray(doc["feature"], dtype=int),
            np.asarray(doc["threshold"], dtype=float),
            np.asarray(doc["left"], dtype=int),
            np.asarray(doc["right"], dtype=int),
            np.asarray(doc["leaf"], dtype=int),
            np.asarray(doc["leaf_chf"], dtype=float).reshape(len(doc["leaf_chf"]), -1),
        )

    @classmethod
    def constant(cls, chf_values) -> "SurvivalTree":
        """A single-leaf tree predicting ``chf_values`` everywhere."""
        return cls(
            np.array([LEAF]), np.array([np.nan]), np.array([LEAF]), np.array([LEAF]), np.array([0]),
            np.asarray(chf_values, dtype=float)[None, :],
        )


def _logrank_scan(times, events, at_risk, event_at, order):
    """Log-rank statistic for every left prefix of ``order``.

    ``at_risk`` and ``event_at`` are (samples x event-times) indicator
    matrices. Row ``k`` of the result describes the split "first k+1 samples
    of ``order`` vs the rest".
    """
    YL = np.cumsum(at_risk[order], axis=0)
    dL = np.cumsum(event_at[order], axis=0)
    Y = at_risk.sum(axis=0)
    D = event_at.sum(axis=0)
    frac = YL / Y
    num = (dL - frac * D).sum(axis=1)
    scale = np.where(Y > 1, D * (Y - D) / np.maximum(Y - 1, 1), 0.0)
    var = (frac * (1 - frac) * scale).sum(axis=1)
    stat = np.zeros_like(num)
    ok = var > 1e-12
    stat[ok] = num[ok] ** 2 / var[ok]
    return stat


def _event_matrices(times, events):
    ut = np.unique(times[events])
    at_risk = (times[:, None] >= ut[None, :]).astype(float)
    event_at = ((times[:, None] == ut[None, :]) & events[:, None]).astype(float)
    return at_risk, event_at


def _times_events(group):
    if isinstance(group, SurvivalDataset):
        return group.times, group.events
    times, events = group
    return np.asarray(times, dtype=float), np.asarray(events).astype(bool)


def logrank_statistic(left, right) -> float:
    """Squared standardized two-sample log-rank statistic (0 when variance vanishes).

    Groups are SurvivalDatasets or ``(times, events)`` pairs; the latter allow
    groups without any event.
    """
    (tl, el), (tr, er) = _times_events(left), _times_events(right)
    if tl.size == 0 or tr.size == 0:
        raise ValueError("both groups must be nonempty")
    times = np.concatenate([tl, tr])
    events = np.concatenate([el, er])
    at_risk, event_at = _event_matrices(times, events)
    if at_risk.shape[1] == 0:
        return 0.0
    order = np.arange(times.size)
    return float(_logrank_scan(times, events, at_risk, event_at, order)[tl.size - 1])


def _nelson_aalen_on(grid, times, events) -> np.ndarray:
    at_risk = (times[None, :] >= grid[:, None]).sum(axis=1)
    deaths = ((times[None, :] == grid[:, None]) & events[None, :]).sum(axis=1)
    hazard = np.divide(deaths, at_risk, out=np.zeros(grid.size), where=at_risk > 0)
    return np.cumsum(hazard)


def _best_split(X, times, events, features, min_leaf_events):
    at_risk, event_at = _event_matrices(times, events)
    best = (0.0, None, None)
    for f in features:
        order = np.argsort(X[:, f], kind="stable")
        xs = X[order, f]
        stat = _logrank_scan(times, events, at_risk, event_at, order)[:-1]
        left_events = np.cumsum(events[order])[:-1]
        valid = (
            (xs[:-1] < xs[1:])
            & (left_events >= min_leaf_events)
            & (events.sum() - left_events >= min_leaf_events)
        )
        if not valid.any():
            continue
        stat = np.where(valid, stat, -1.0)
        k = int(np.argmax(stat))
        if stat[k] > best[0]:
            best = (float(stat[k]), int(f), 0.5 * (xs[k] + xs[k + 1]))
    return best


def grow_tree(X, times, events, grid, max_depth, features_per_split, min_leaf_events, rng) -> SurvivalTree:
    feature, threshold, left, right, leaf, leaf_chf = [], [], [], [], [], []

    def new_node():
        for arr, v in ((feature, LEAF), (threshold, np.nan), (left, LEAF), (right, LEAF), (leaf, LEAF)):
            arr.append(v)
        return len(feature) - 1

    root = new_node()
    stack = [(root, np.arange(times.size), 0)]
    d = X.shape[1]
    while stack:
        node, idx, depth = stack.pop()
        split = None
        if depth < max_depth and events[idx].sum() >= 2 * min_leaf_events:
            feats = rng.choice(d, size=features_per_split, replace=False)
            _, f, thr = _best_split(X[idx], times[idx], events[idx], feats, min_leaf_events)
            if f is not None:
                split = (f, thr)
        if split is None:
            leaf[node] = len(leaf_chf)
            leaf_chf.append(_nelson_aalen_on(grid, times[idx], events[idx]))
            continue
        f, thr = split
        go_left = X[idx, f] <= thr
        lnode, rnode = new_node(), new_node()
        feature[node], threshold[node], left[node], right[node] = f, thr, lnode, rnode
        stack.append((rnode, idx[~go_left], depth + 1))
        stack.append((lnode, idx[go_left], depth + 1))

    return SurvivalTree(
        np.asarray(feature, dtype=int),
        np.asarray(threshold, dtype=float),
        np.asarray(left, dtype=int),
        np.asarray(right, dtype=int),
        np.asarray(leaf, dtype=int),
        np.vstack(leaf_chf),
    )


@dataclass
class RSFModel:
    trees: list[SurvivalTree]
    time_grid: np.ndarray
    config: ForestConfig
    d: int

    def predict_chf(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        single = X.ndim == 1
        X = np.atleast_2d(X)
        if X.shape[1] != self.d:
            raise ValueError(f"point has dimension {X.shape[1]}, model has {self.d}")
        total = np.zeros((X.shape[0], self.time_grid.size))
        for tree in self.trees:
            total += tree.predict_chf(X)
        chf = total / len(self.trees)
        return chf[0] if single else chf

    def predict_sf(self, X) -> np.ndarray:
        return np.exp(-self.predict_chf(X))

    def to_dict(self) -> dict:
        return {
            "format_version": FORMAT_VERSION,
            "kind": "random_survival_forest",
            "d": self.d,
            "config": asdict(self.config),
            "time_grid": self.time_grid.tolist(),
            "trees": [t.to_dict() for t in self.trees],
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "RSFModel":
        if doc.get("format_version") != FORMAT_VERSION:
            raise ValueError(f"unsupported forest format_version {doc.get('format_version')!r}")
        return cls(
            [SurvivalTree.from_dict(t) for t in doc["trees"]],
            np.asarray(doc["time_grid"], dtype=float),
            ForestConfig(**doc["config"]),
            int(doc["d"]),
        )


def _fit_one(dataset: SurvivalDataset, config: ForestConfig, k: int, seed_seq) -> SurvivalTree:
    rng = np.random.default_rng(seed_seq)
    n = dataset.n
    idx = rng.integers(0, n, size=n) if config.bootstrap else np.arange(n)
    return grow_tree(
        dataset.X[idx], dataset.times[idx], dataset.events[idx], dataset.grid,
        config.max_depth, k, config.min_leaf_events, rng,
    )


def fit_rsf(dataset: SurvivalDataset, config: ForestConfig = ForestConfig(), workers: int = 1) -> RSFModel:
    """Grow ``config.n_trees`` trees, each from its own spawned seed."""
    k = config.resolve_features(dataset.d)
    seeds = np.random.SeedSequence(config.seed).spawn(config.n_trees)
    if workers > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(workers) as pool:
            trees = list(pool.map(_fit_one, [dataset] * len(seeds), [config] * len(seeds), [k] * len(seeds), seeds))
    else:
        trees = [_fit_one(dataset, config, k, s) for s in seeds]
    return RSFModel(trees, dataset.grid.copy(), config, dataset.d)


def rsf_predict(model: RSFModel, x) -> tuple[StepFunction, StepFunction]:
    chf = model.predict_chf(np.asarray(x, dtype=float))
    return StepFunction(model.time_grid, np.exp(-chf), 1.0), StepFunction(model.time_grid, chf, 0.0)
