"""Local Cox approximation fitted on log-CHFs by weighted least squares."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..core import StepFunction, SurvivalDataset, interval_values, nelson_aalen
from .base import ExplanationResult, NeighborhoodSample, check_grid, sample_neighborhood


@dataclass(frozen=True)
class SurvLIMEConfig:
    n_samples: int = 100
    sigma_sample: float = 0.2
    sigma_weight: float = 0.4
    eps: float = 1e-6
    seed: int = 0


def log_chf_targets(blackbox_chfs, baseline_chf_values, eps: float):
    """``ln H(z_j) - ln H_0`` per interval and the mask of usable intervals."""
    H = interval_values(np.atleast_2d(blackbox_chfs), 0.0)
    H0 = interval_values(np.asarray(baseline_chf_values, dtype=float), 0.0)
    mask = (H > eps) & (H0 > eps)[None, :]
    with np.errstate(divide="ignore"):
        y = np.where(mask, np.log(np.where(mask, H, 1.0)) - np.log(np.where(mask, H0, 1.0)), 0.0)
    return y, mask


def solve_survlime(points, weights, y, mask, widths) -> np.ndarray:
    """Minimum-norm solution of
    ``sum_j v_j sum_i (y_ji - b.z_j)^2 (t_i - t_{i-1})`` over usable cells.

    Within one perturbation the target varies only through ``y``, so the
    problem collapses to one row per perturbation with the cell-weighted mean.
    """
    cell_w = np.asarray(weights)[:, None] * np.asarray(widths)[None, :] * mask
    row_w = cell_w.sum(axis=1)
    keep = row_w > 0
    if not keep.any():
        raise ValueError("every interval was excluded (CHF at or below eps); nothing to fit")
    y_bar = (cell_w[keep] * y[keep]).sum(axis=1) / row_w[keep]
    sw = np.sqrt(row_w[keep])
    b, *_ = np.linalg.lstsq(points[keep] * sw[:, None], y_bar * sw, rcond=None)
    return b


def fit_survlime(blackbox, dataset: SurvivalDataset, x, config: SurvLIMEConfig = SurvLIMEConfig(),
                 sample: NeighborhoodSample | None = None) -> ExplanationResult:
    check_grid(blackbox, dataset)
    if sample is None:
        sample = sample_neighborhood(x, config.n_samples, config.sigma_sample, config.sigma_weight, config.seed)
    h0 = nelson_aalen(dataset)
    y, mask = log_chf_targets(blackbox.predict_chf(sample.points), h0.values, config.eps)
    b = solve_survlime(sample.points, sample.weights, y, mask, dataset.interval_widths)
    x = np.asarray(x, dtype=float)
    sf = np.exp(-h0.values * np.exp(x @ b))
    return ExplanationResult(
        method="survlime",
        anchor=x,
        importance=b,
        fitted_sf=StepFunction(dataset.grid, sf, 1.0),
        diagnostics={"seed": config.seed, "usable_cells": int(mask.sum())},
        parameters={"b": b.tolist()},
    )
