"""Cox model with a neural additive risk ``g(z) = sum_k g_k(z_k)``.

The shape subnetworks are fitted to the black box's CHFs, by default on the
log scale. A feature's importance is the spread (standard deviation) of its
shape function over the neighborhood.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .. import autodiff as ad
from ..core import StepFunction, SurvivalDataset, interval_values, nelson_aalen
from ..nn import ImportanceNetwork, MLPConfig, init_params
from .base import (
    ExplanationResult,
    NeighborhoodSample,
    check_grid,
    curve_grid,
    neighborhood_seeds,
    sample_neighborhood,
    train,
)
from .survlime import log_chf_targets

LOSS_FORMS = ("log", "chf")


@dataclass(frozen=True)
class SurvNAMConfig:
    n_samples: int = 100
    sigma_sample: float = 0.2
    sigma_weight: float = 0.4
    mlp: MLPConfig = field(default_factory=lambda: MLPConfig(output_transform="identity"))
    loss_form: str = "log"
    eps: float = 1e-6
    epochs: int = 200
    learning_rate: float = 1e-2
    optimizer: str = "adam"
    seed: int = 0

    def __post_init__(self):
        if self.loss_form not in LOSS_FORMS:
            raise ValueError(f"unknown loss_form {self.loss_form!r}; expected one of {LOSS_FORMS}")


def survnam_objective(net: ImportanceNetwork, points, weights, blackbox_chfs, baseline_chf_values, widths,
                      loss_form: str = "log", eps: float = 1e-6):
    """Loss as a function of the flat network parameters (a Tensor)."""
    points = np.atleast_2d(points)
    weights = np.asarray(weights, dtype=float)
    widths = np.asarray(widths, dtype=float)
    if loss_form == "log":
        y, mask = log_chf_targets(blackbox_chfs, baseline_chf_values, eps)
        cell = weights[:, None] * widths[None, :] * mask

        def f(W):
            g = net.forward(W, points).sum(axis=1, keepdims=True)
            diff = y - g
            return (diff * diff * cell).sum()

        return f
    H = interval_values(np.atleast_2d(blackbox_chfs), 0.0)
    H0 = interval_values(np.asarray(baseline_chf_values, dtype=float), 0.0)

    def f(W):
        g = net.forward(W, points).sum(axis=1, keepdims=True)
        diff = H - ad.exp(g) * H0
        return ((diff * diff * widths).sum(axis=1) * weights).sum()

    return f


@dataclass
class SurvNAMModel:
    net: ImportanceNetwork
    baseline: StepFunction
    dataset: SurvivalDataset
    config: SurvNAMConfig
    log: object

    def shape_values(self, X) -> np.ndarray:
        return self.net(np.atleast_2d(X))

    def explain(self, x, points=None, seed=None) -> ExplanationResult:
        c = self.config
        x = np.asarray(x, dtype=float)
        if points is None:
            points = sample_neighborhood(x, c.n_samples, c.sigma_sample, c.sigma_weight,
                                         c.seed if seed is None else seed).points
        g_x = self.shape_values(x).sum()
        grid = curve_grid(self.dataset)
        return ExplanationResult(
            method="survnam",
            anchor=x,
            importance=self.shape_values(points).std(axis=0),
            fitted_sf=StepFunction(self.dataset.grid, np.exp(-self.baseline.values * np.exp(g_x)), 1.0),
            curves={"grid": grid.T.copy(), "values": self.net(grid).T.copy()},
            diagnostics={
                "initial_loss": self.log.initial_loss,
                "final_loss": self.log.final_loss,
                "best_epoch": self.log.best_epoch,
                "epochs": c.epochs,
                "seed": c.seed,
                "loss_form": c.loss_form,
            },
            parameters=self.net.to_dict(),
        )


def _fit(blackbox, dataset: SurvivalDataset, anchors, config: SurvNAMConfig, samples=None, init=None):
    check_grid(blackbox, dataset)
    anchors = np.atleast_2d(np.asarray(anchors, dtype=float))
    init_seed, sample_seeds = neighborhood_seeds(config.seed, anchors.shape[0])
    if samples is None:
        samples = [
            sample_neighborhood(a, config.n_samples, config.sigma_sample, config.sigma_weight, s)
            for a, s in zip(anchors, sample_seeds)
        ]
    Z = np.vstack([s.points for s in samples])
    v = np.concatenate([s.weights for s in samples])
    baseline = nelson_aalen(dataset)
    if init is None:
        init = init_params(config.mlp, dataset.d, np.random.default_rng(init_seed))
    net = ImportanceNetwork(dataset.d, config.mlp, init)
    loss = survnam_objective(net, Z, v, blackbox.predict_chf(Z), baseline.values, dataset.interval_widths,
                             config.loss_form, config.eps)
    W, log = train(loss, net.W, config.epochs, config.learning_rate, config.optimizer)
    net.W = W
    return SurvNAMModel(net, baseline, dataset, config, log), samples


def fit_survnam(blackbox, dataset: SurvivalDataset, x, config: SurvNAMConfig = SurvNAMConfig(),
                sample: NeighborhoodSample | None = None, init=None) -> ExplanationResult:
    model, samples = _fit(blackbox, dataset, x, config, None if sample is None else [sample], init)
    return model.explain(x, points=samples[0].points)


def fit_survnam_global(blackbox, dataset: SurvivalDataset, anchors, config: SurvNAMConfig = SurvNAMConfig()) -> SurvNAMModel:
    return _fit(blackbox, dataset, anchors, config)[0]
