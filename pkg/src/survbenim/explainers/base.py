"""Pieces shared by every explainer: black-box access, neighborhoods,
the differentiable Beran estimator, time weighting and result containers."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Protocol

import numpy as np
from scipy.special import softmax as np_softmax

from .. import autodiff as ad
from ..core import DENOMINATOR_FLOOR, StepFunction, SurvivalDataset, interval_values
from ..nn import OptimizerState, optimizer_step

METHODS = ("survbenim-local", "survbenim-global", "survbex", "survlime", "survnam")
CURVE_POINTS = 64
# log floor for the vanishing numerator after the last record
_LOG_FLOOR = 1e-300


class BlackBox(Protocol):
    time_grid: np.ndarray

    def predict_sf(self, X) -> np.ndarray: ...

    def predict_chf(self, X) -> np.ndarray: ...


def check_grid(blackbox: BlackBox, dataset: SurvivalDataset) -> None:
    grid = np.asarray(blackbox.time_grid)
    if grid.shape != dataset.grid.shape or not np.array_equal(grid, dataset.grid):
        raise ValueError(
            "black-box time grid does not match the dataset's distinct times; "
            "explain with the dataset the black box was trained on"
        )


@dataclass(frozen=True)
class NeighborhoodSample:
    anchor: np.ndarray
    points: np.ndarray  # (N, d)
    weights: np.ndarray  # (N,)
    sigma_sample: float
    sigma_weight: float
    seed: int | None

    @property
    def N(self) -> int:
        return self.points.shape[0]


def sample_neighborhood(x, N: int = 100, sigma_sample: float = 0.2, sigma_weight: float = 0.4, seed=0) -> NeighborhoodSample:
    """Gaussian perturbations of ``x`` with unnormalized Gaussian proximity weights."""
    if not (sigma_sample > 0 and sigma_weight > 0):
        raise ValueError("sampling and weighting widths must be positive")
    if N < 1:
        raise ValueError("N must be at least 1")
    x = np.asarray(x, dtype=float)
    rng = np.random.default_rng(seed)
    z = x + sigma_sample * rng.standard_normal((N, x.size))
    v = np.exp(-((z - x) ** 2).sum(axis=1) / sigma_weight**2)
    return NeighborhoodSample(x, z, v, sigma_sample, sigma_weight, seed if isinstance(seed, (int, np.integer)) else None)


@dataclass(frozen=True)
class KernelConfig:
    tau: float = 1.0
    varkappa: float | None = None  # None -> (t_max / 4)**2
    use_time_weighting: bool = False

    def __post_init__(self):
        if not self.tau > 0:
            raise ValueError("tau must be positive")
        if self.varkappa is not None and not self.varkappa > 0:
            raise ValueError("varkappa must be positive")

    def resolve_varkappa(self, grid) -> float:
        return self.varkappa if self.varkappa is not None else (float(grid[-1]) / 4.0) ** 2


@dataclass(frozen=True)
class TimeWeighting:
    expectations: np.ndarray  # m_j, one per perturbation
    weights: np.ndarray  # (intervals, perturbations); each column sums to one


def time_weights(blackbox_sfs, time_grid, varkappa: float) -> TimeWeighting:
    """Emphasise intervals near each perturbation's expected event time."""
    if not varkappa > 0:
        raise ValueError("varkappa must be positive")
    grid = np.asarray(time_grid, dtype=float)
    widths = np.diff(grid, prepend=0.0)
    mids = grid - widths / 2
    s_int = interval_values(np.atleast_2d(blackbox_sfs))
    m = s_int @ widths
    p = np_softmax(-((m[None, :] - mids[:, None]) ** 2) / varkappa, axis=0)
    return TimeWeighting(m, p)


class BeranTerms:
    """Dataset constants for evaluating Beran SFs from kernel logits.

    Training points are held in sorted-time order so logits come out already
    aligned with the product.
    """

    def __init__(self, dataset: SurvivalDataset):
        self.dataset = dataset
        order = dataset.sorted_index
        self.X = dataset.X[order]
        self.X2 = self.X**2
        self.events = dataset.events[order]
        self.grid_pos = dataset._grid_pos
        self.widths = dataset.interval_widths

    def sq_dist_weighted(self, coef, z) -> ad.Tensor:
        """``sum_k coef_k (x_ik - z_k)^2`` for every row of ``z`` and training point i.

        ``coef`` is a ``(k, d)`` Tensor (per-row weights) or a ``(d,)`` Tensor.
        """
        z = np.asarray(z, dtype=float)
        coef = ad.as_tensor(coef)
        if coef.ndim == 1:
            coef = coef.reshape((1, coef.shape[0]))
        cross = (coef * z) @ (-2.0 * self.X.T)
        own = (coef * (z * z)).sum(axis=1, keepdims=True)
        return coef @ self.X2.T + cross + own

    def sf(self, logits: ad.Tensor) -> ad.Tensor:
        """Beran SF on the grid for each row of ``logits`` (shape ``(k, n)``)."""
        a = ad.exp(ad.log_softmax(logits, axis=1))
        den = ad.flip(ad.cumsum(ad.flip(a, 1), 1), 1)
        k = a.shape[0]
        num = ad.concatenate([den[:, 1:], np.zeros((k, 1))], axis=1)
        events = self.events & (a.data > 0)
        dead = events & (den.data < DENOMINATOR_FLOOR)
        live = events & ~dead
        term = ad.where(live, ad.log(ad.clip_min(num, _LOG_FLOOR)) - ad.log(ad.clip_min(den, _LOG_FLOOR)), 0.0)
        log_s = ad.cumsum(term, 1)
        alive = np.cumsum(dead, axis=1) == 0
        s = ad.exp(log_s) * alive
        return ad.take(s, self.grid_pos, axis=1, unique=True)

    def sf_numpy(self, logits) -> np.ndarray:
        return self.sf(ad.Tensor(np.atleast_2d(logits))).data


def sf_interval_loss(s_grid: ad.Tensor, target_int, widths, v, p=None) -> ad.Tensor:
    """``sum_j v_j sum_i [p_ij] (S_int - target_int)^2 (t_i - t_{i-1})``."""
    k = s_grid.shape[0]
    s_int = ad.concatenate([np.ones((k, 1)), s_grid[:, :-1]], axis=1)
    diff = s_int - target_int
    cell = diff * diff * widths
    if p is not None:
        cell = cell * p
    return (cell.sum(axis=1) * v).sum()


@dataclass
class TrainingLog:
    losses: list[float] = field(default_factory=list)
    initial_loss: float = float("nan")
    final_loss: float = float("nan")
    best_epoch: int = 0


def train(loss, W0, epochs: int, learning_rate: float, method: str = "adam"):
    """Full-batch first-order training; returns the best parameters seen."""
    state = OptimizerState(method=method, learning_rate=learning_rate)
    W = np.array(W0, dtype=float, copy=True)
    log = TrainingLog()
    best_W, best = W.copy(), np.inf
    for epoch in range(epochs + 1):
        value, grad = ad.value_and_grad(loss, W)
        if not np.isfinite(value):
            raise FloatingPointError(f"loss became non-finite at epoch {epoch} (value {value})")
        log.losses.append(value)
        if value < best:
            best, best_W, log.best_epoch = value, W.copy(), epoch
        if epoch == epochs:
            break
        W = optimizer_step(state, W, grad)
    log.initial_loss = log.losses[0]
    log.final_loss = best
    return best_W, log


@dataclass
class ExplanationResult:
    method: str
    anchor: np.ndarray
    importance: np.ndarray  # raw b^model
    fitted_sf: StepFunction
    curves: dict | None = None  # {"grid": (d, P), "values": (d, P)}
    diagnostics: dict = field(default_factory=dict)
    parameters: dict | None = None

    def __post_init__(self):
        self.importance = np.asarray(self.importance, dtype=float)
        if not np.all(np.isfinite(self.importance)):
            raise ValueError("importance vector must be finite")


def curve_grid(dataset: SurvivalDataset, points: int = CURVE_POINTS) -> np.ndarray:
    """``(points, d)`` evenly spaced feature values over each feature's range."""
    lo, hi = dataset.X.min(axis=0), dataset.X.max(axis=0)
    return np.linspace(lo, hi, points)


def neighborhood_seeds(seed: int, n_anchors: int):
    """Seed for network init followed by one seed per anchor neighborhood."""
    children = np.random.SeedSequence(seed).spawn(n_anchors + 1)
    return children[0], children[1:]
