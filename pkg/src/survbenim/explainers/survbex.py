"""Beran surrogate with one learned scale per feature inside a Gaussian kernel."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import softmax

from ..core import StepFunction, SurvivalDataset, beran_sf_values, interval_values
from .base import (
    BeranTerms,
    ExplanationResult,
    NeighborhoodSample,
    check_grid,
    sample_neighborhood,
    sf_interval_loss,
    train,
)


@dataclass(frozen=True)
class SurvBeXConfig:
    n_samples: int = 100
    sigma_sample: float = 0.2
    sigma_weight: float = 0.4
    tau: float = 1.0
    epochs: int = 200
    learning_rate: float = 1e-2
    optimizer: str = "adam"
    init: float = 1.0
    seed: int = 0


def survbex_weights(dataset: SurvivalDataset, z, b, tau: float) -> np.ndarray:
    """``softmax(-||b * (z - x_i)||^2 / tau)`` over the training points."""
    if not tau > 0:
        raise ValueError("tau must be positive")
    b = np.asarray(b, dtype=float)
    sq = (((np.asarray(z, dtype=float)[..., None, :] - dataset.X) * b) ** 2).sum(axis=-1)
    return softmax(-sq / tau, axis=-1)


def survbex_sf(dataset: SurvivalDataset, z, b, tau: float) -> StepFunction:
    return StepFunction(dataset.grid, beran_sf_values(dataset, survbex_weights(dataset, z, b, tau)), 1.0)


def survbex_objective(dataset: SurvivalDataset, points, weights, blackbox_sfs, tau: float):
    """Loss as a function of ``b`` (a Tensor), for training and gradient checks."""
    terms = BeranTerms(dataset)
    target = interval_values(np.atleast_2d(blackbox_sfs))
    points = np.atleast_2d(points)

    def f(b):
        logits = terms.sq_dist_weighted(b * b, points) * (-1.0 / tau)
        return sf_interval_loss(terms.sf(logits), target, terms.widths, weights)

    return f


def fit_survbex(blackbox, dataset: SurvivalDataset, x, config: SurvBeXConfig = SurvBeXConfig(),
                sample: NeighborhoodSample | None = None) -> ExplanationResult:
    check_grid(blackbox, dataset)
    if sample is None:
        sample = sample_neighborhood(x, config.n_samples, config.sigma_sample, config.sigma_weight, config.seed)
    loss = survbex_objective(dataset, sample.points, sample.weights, blackbox.predict_sf(sample.points), config.tau)
    b0 = np.full(dataset.d, config.init)
    b, log = train(loss, b0, config.epochs, config.learning_rate, config.optimizer)
    return ExplanationResult(
        method="survbex",
        anchor=np.asarray(x, dtype=float),
        importance=b,
        fitted_sf=survbex_sf(dataset, x, b, config.tau),
        diagnostics={
            "initial_loss": log.initial_loss,
            "final_loss": log.final_loss,
            "best_epoch": log.best_epoch,
            "epochs": config.epochs,
            "seed": config.seed,
        },
        parameters={"b": b.tolist(), "tau": config.tau},
    )
