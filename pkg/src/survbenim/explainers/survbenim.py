"""Beran estimator with neural per-feature importance functions in its kernel.

Each feature ``k`` gets a subnetwork ``h_k``; a perturbation ``z`` weighs the
training point ``x_i`` by ``softmax_i(-sum_k h_k(z_k) (x_ik - z_k)^2 / tau)``.
The subnetworks are fitted so the resulting Beran SF at each ``z`` tracks the
black box. Local fits train one network per explained point; the global fit
trains a single network over the neighborhoods of many anchors.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .. import autodiff as ad
from ..core import StepFunction, SurvivalDataset, beran_sf_values, interval_values
from ..nn import ImportanceNetwork, MLPConfig, init_params
from .base import (
    BeranTerms,
    ExplanationResult,
    KernelConfig,
    NeighborhoodSample,
    check_grid,
    curve_grid,
    neighborhood_seeds,
    sample_neighborhood,
    sf_interval_loss,
    time_weights,
    train,
)


@dataclass(frozen=True)
class SurvBeNIMConfig:
    n_samples: int = 100
    sigma_sample: float = 0.2
    sigma_weight: float = 0.4
    kernel: KernelConfig = field(default_factory=KernelConfig)
    mlp: MLPConfig = field(default_factory=lambda: MLPConfig(output_transform="softplus"))
    epochs: int = 200
    learning_rate: float = 1e-2
    optimizer: str = "adam"
    seed: int = 0


def benim_kernel(X_train, z, h_values, tau: float):
    """Kernel exponent ``A`` (shape ``(k, n)``) and softmax weights over training points."""
    if not tau > 0:
        raise ValueError("tau must be positive")
    X_train = np.asarray(X_train, dtype=float)
    z = np.atleast_2d(np.asarray(z, dtype=float))
    h = np.atleast_2d(np.asarray(h_values, dtype=float))
    if h.shape != z.shape or z.shape[1] != X_train.shape[1]:
        raise ValueError("z, h_values and training points must share the feature dimension")
    A = (h[:, None, :] * (X_train[None, :, :] - z[:, None, :]) ** 2).sum(axis=2) / tau
    logits = -A
    logits -= logits.max(axis=1, keepdims=True)
    w = np.exp(logits)
    return A, w / w.sum(axis=1, keepdims=True)


class _Problem:
    """Constants of one SurvBeNIM objective: neighborhoods and black-box targets."""

    def __init__(self, blackbox, dataset: SurvivalDataset, samples: list[NeighborhoodSample], config: SurvBeNIMConfig):
        check_grid(blackbox, dataset)
        self.terms = BeranTerms(dataset)
        self.config = config
        self.samples = samples
        self.Z = np.vstack([s.points for s in samples])
        self.v = np.concatenate([s.weights for s in samples])
        bb_sf = np.atleast_2d(blackbox.predict_sf(self.Z))
        self.target = interval_values(bb_sf)
        self.p = None
        if config.kernel.use_time_weighting:
            varkappa = config.kernel.resolve_varkappa(dataset.grid)
            self.p = time_weights(bb_sf, dataset.grid, varkappa).weights.T

    def loss(self, net: ImportanceNetwork, rows=slice(None)):
        Z, v, target = self.Z[rows], self.v[rows], self.target[rows]
        p = None if self.p is None else self.p[rows]
        tau = self.config.kernel.tau
        terms = self.terms

        def f(W):
            h = net.forward(W, Z)
            logits = terms.sq_dist_weighted(h, Z) * (-1.0 / tau)
            return sf_interval_loss(terms.sf(logits), target, terms.widths, v, p)

        return f


def benim_surrogate_sf(dataset: SurvivalDataset, z, net: ImportanceNetwork, kernel: KernelConfig) -> StepFunction:
    """Beran SF at ``z`` with the kernel reweighted by the network's importances."""
    z = np.asarray(z, dtype=float)
    h = net(z[None, :])
    _, w = benim_kernel(dataset.X, z, h, kernel.tau)
    return StepFunction(dataset.grid, beran_sf_values(dataset, w[0]), 1.0)


def benim_local_loss(net: ImportanceNetwork, x, sample: NeighborhoodSample, blackbox_sfs, dataset: SurvivalDataset,
                     kernel: KernelConfig, W=None) -> float:
    """Weighted SF distance between the surrogate and given black-box SFs.

    ``blackbox_sfs`` holds one row per perturbation on ``dataset.grid``.
    """
    blackbox_sfs = np.atleast_2d(np.asarray(blackbox_sfs, dtype=float))
    if blackbox_sfs.shape != (sample.N, dataset.grid.size):
        raise ValueError(
            f"black-box SFs have shape {blackbox_sfs.shape}; expected ({sample.N}, {dataset.grid.size}) on the dataset grid"
        )
    terms = BeranTerms(dataset)
    p = None
    if kernel.use_time_weighting:
        p = time_weights(blackbox_sfs, dataset.grid, kernel.resolve_varkappa(dataset.grid)).weights.T
    W = net.W if W is None else W
    h = net.forward(ad.Tensor(W), sample.points)
    logits = terms.sq_dist_weighted(h, sample.points) * (-1.0 / kernel.tau)
    out = sf_interval_loss(terms.sf(logits), interval_values(blackbox_sfs), terms.widths, sample.weights, p)
    return float(out.data)


def _result(method, net, dataset, x, sample_points, config, log, extra=None) -> ExplanationResult:
    importance = net(sample_points).mean(axis=0)
    grid = curve_grid(dataset)
    diagnostics = {
        "initial_loss": log.initial_loss,
        "final_loss": log.final_loss,
        "best_epoch": log.best_epoch,
        "epochs": config.epochs,
        "seed": config.seed,
    }
    if extra:
        diagnostics.update(extra)
    return ExplanationResult(
        method=method,
        anchor=np.asarray(x, dtype=float),
        importance=importance,
        fitted_sf=benim_surrogate_sf(dataset, x, net, config.kernel),
        curves={"grid": grid.T.copy(), "values": net(grid).T.copy()},
        diagnostics=diagnostics,
        parameters=net.to_dict(),
    )


def _fit(blackbox, dataset, anchors, config: SurvBeNIMConfig, samples=None, init=None):
    anchors = np.atleast_2d(np.asarray(anchors, dtype=float))
    init_seed, sample_seeds = neighborhood_seeds(config.seed, anchors.shape[0])
    if samples is None:
        samples = [
            sample_neighborhood(a, config.n_samples, config.sigma_sample, config.sigma_weight, s)
            for a, s in zip(anchors, sample_seeds)
        ]
    problem = _Problem(blackbox, dataset, samples, config)
    if init is None:
        init = init_params(config.mlp, dataset.d, np.random.default_rng(init_seed))
    net = ImportanceNetwork(dataset.d, config.mlp, init)
    W, log = train(problem.loss(net), net.W, config.epochs, config.learning_rate, config.optimizer)
    net.W = W
    return net, samples, log


def fit_survbenim_local(blackbox, dataset: SurvivalDataset, x, config: SurvBeNIMConfig = SurvBeNIMConfig(),
                        sample: NeighborhoodSample | None = None, init=None) -> ExplanationResult:
    """Train one importance network around ``x``.

    ``sample`` and ``init`` replace the seeded neighborhood and initial parameters.
    """
    net, samples, log = _fit(blackbox, dataset, x, config, None if sample is None else [sample], init)
    return _result("survbenim-local", net, dataset, x, samples[0].points, config, log)


@dataclass
class GlobalSurvBeNIM:
    """A network trained once over many anchors; explains any point afterwards."""

    net: ImportanceNetwork
    dataset: SurvivalDataset
    config: SurvBeNIMConfig
    log: object
    anchors: np.ndarray

    def explain(self, x, seed=None) -> ExplanationResult:
        """Average importances over a fresh neighborhood of ``x`` (no retraining)."""
        c = self.config
        sample = sample_neighborhood(x, c.n_samples, c.sigma_sample, c.sigma_weight, c.seed if seed is None else seed)
        return _result("survbenim-global", self.net, self.dataset, x, sample.points, c, self.log,
                       {"n_anchors": int(self.anchors.shape[0])})


def fit_survbenim_global(blackbox, dataset: SurvivalDataset, anchors, config: SurvBeNIMConfig = SurvBeNIMConfig()) -> GlobalSurvBeNIM:
    """Minimise the sum of per-anchor local losses with one shared network."""
    net, _, log = _fit(blackbox, dataset, anchors, config)
    return GlobalSurvBeNIM(net, dataset, config, log, np.atleast_2d(np.asarray(anchors, dtype=float)))


def global_loss(blackbox, dataset, anchors, config: SurvBeNIMConfig, W=None, per_anchor: bool = False):
    """Objective of the global fit at ``W`` (initial parameters by default)."""
    anchors = np.atleast_2d(np.asarray(anchors, dtype=float))
    init_seed, sample_seeds = neighborhood_seeds(config.seed, anchors.shape[0])
    samples = [
        sample_neighborhood(a, config.n_samples, config.sigma_sample, config.sigma_weight, s)
        for a, s in zip(anchors, sample_seeds)
    ]
    problem = _Problem(blackbox, dataset, samples, config)
    net = ImportanceNetwork(dataset.d, config.mlp, init_params(config.mlp, dataset.d, np.random.default_rng(init_seed)))
    W = net.W if W is None else np.asarray(W, dtype=float)
    if not per_anchor:
        return float(problem.loss(net)(ad.Tensor(W)).data), samples
    N = config.n_samples
    parts = [float(problem.loss(net, slice(r * N, (r + 1) * N))(ad.Tensor(W)).data) for r in range(len(samples))]
    return parts, samples
