"""Agreement measures between explanations and ground-truth coefficients."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import StepFunction

KL_EPS = 1e-6


@dataclass(frozen=True)
class ImportanceVector:
    raw: np.ndarray
    normalized: np.ndarray


def normalize_importance(raw) -> ImportanceVector:
    """``|raw| / sum |raw|``."""
    raw = np.asarray(raw, dtype=float)
    if not np.all(np.isfinite(raw)):
        raise ValueError("importance vector must be finite")
    total = np.abs(raw).sum()
    if total == 0:
        raise ValueError("cannot normalize an all-zero importance vector")
    return ImportanceVector(raw, np.abs(raw) / total)


def _pair(b_model, b_true):
    b_model = np.asarray(b_model, dtype=float)
    b_true = np.asarray(b_true, dtype=float)
    if b_model.shape != b_true.shape or b_model.ndim != 1:
        raise ValueError("importance vectors must be 1-D of equal length")
    return b_model, b_true


def dist_D(b_model, b_true) -> float:
    b_model, b_true = _pair(b_model, b_true)
    return float(((b_model - b_true) ** 2).sum())


def _smooth(p, eps):
    # entries below eps count as zero, so denormals cannot blow up the ratio
    p = np.where(p < eps, eps, p)
    return p / p.sum()


def dist_KL(b_model, b_true, eps: float = KL_EPS) -> float:
    """``sum b_true ln(b_true / b_model)`` after lifting zeros to ``eps`` and renormalizing."""
    b_model, b_true = _pair(b_model, b_true)
    p, q = _smooth(b_true, eps), _smooth(b_model, eps)
    return float((p * np.log(p / q)).sum())


def cindex_vec(b_model, b_true) -> float | None:
    """Share of pairs with ``b_true_i < b_true_j`` that also have ``b_model_i < b_model_j``.

    Returns ``None`` when ``b_true`` has no strictly ordered pair.
    """
    b_model, b_true = _pair(b_model, b_true)
    ordered = b_true[:, None] < b_true[None, :]
    total = ordered.sum()
    if total == 0:
        return None
    return float((ordered & (b_model[:, None] < b_model[None, :])).sum() / total)


def sf_distance(sf_surrogate: StepFunction, sf_blackbox: StepFunction, time_grid=None) -> float:
    """``sum_i (S_i - S_bb_i)^2 (t_i - t_{i-1})`` over the intervals of ``time_grid``."""
    grid = sf_blackbox.times if time_grid is None else np.asarray(time_grid, dtype=float)
    for f in (sf_surrogate, sf_blackbox):
        if f.times.shape != grid.shape or not np.array_equal(f.times, grid):
            raise ValueError("step functions must share the evaluation time grid")
    widths = np.diff(grid, prepend=0.0)
    diff = sf_surrogate.interval_values() - sf_blackbox.interval_values()
    return float((diff**2 * widths).sum())
