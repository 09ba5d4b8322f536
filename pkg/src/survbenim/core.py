"""Survival data containers and the classic nonparametric estimators.

Everything here is plain numpy and side-effect free. Weighted (Beran)
estimators accept either a single weight vector or a stack of them, one per
row, so explainers can evaluate many conditional SFs at once.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.special import softmax

# uncensored factors with a smaller remaining mass send the SF to zero
DENOMINATOR_FLOOR = 1e-12
WEIGHT_SUM_TOL = 1e-9


@dataclass(frozen=True)
class SurvivalRecord:
    features: np.ndarray
    event: bool
    time: float


class SurvivalDataset:
    """Triplets ``(x_i, delta_i, T_i)`` stored column-wise.

    Records keep their input order. ``sorted_index`` orders them by ascending
    time with uncensored records ahead of censored ties, which is the order
    the product-limit estimators walk through.
    """

    def __init__(self, features, events, times):
        X = np.asarray(features, dtype=float)
        if X.ndim == 1:
            X = X[:, None]
        events = np.asarray(events)
        times = np.asarray(times, dtype=float)
        if X.ndim != 2 or X.shape[0] == 0:
            raise ValueError("dataset must contain at least one record")
        n = X.shape[0]
        if events.shape != (n,) or times.shape != (n,):
            raise ValueError(
                f"features, events and times disagree on length: "
                f"{X.shape[0]}, {events.shape}, {times.shape}"
            )
        if not np.all(np.isin(events, (0, 1))):
            raise ValueError("event indicators must be 0 or 1")
        if not np.all(np.isfinite(times)) or np.any(times < 0):
            raise ValueError("times must be finite and nonnegative")
        if not np.all(np.isfinite(X)):
            raise ValueError("features must be finite")
        events = events.astype(bool)
        if not events.any():
            raise ValueError("dataset has no uncensored record; estimators are degenerate")

        self.X = X
        self.events = events
        self.times = times
        self.X.setflags(write=False)
        self.events.setflags(write=False)
        self.times.setflags(write=False)
        # lexsort uses the last key as primary
        self.sorted_index = np.lexsort((~events, times))
        self.grid = np.unique(times)
        s_times = times[self.sorted_index]
        # position (in sorted order) of the last record with time <= grid[k]
        self._grid_pos = np.searchsorted(s_times, self.grid, side="right") - 1

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def d(self) -> int:
        return self.X.shape[1]

    def __len__(self) -> int:
        return self.n

    def record(self, i: int) -> SurvivalRecord:
        return SurvivalRecord(self.X[i].copy(), bool(self.events[i]), float(self.times[i]))

    @property
    def records(self) -> list[SurvivalRecord]:
        return [self.record(i) for i in range(self.n)]

    @classmethod
    def from_records(cls, records) -> "SurvivalDataset":
        records = list(records)
        if not records:
            raise ValueError("dataset must contain at least one record")
        return cls(
            np.stack([np.asarray(r.features, dtype=float) for r in records]),
            [int(r.event) for r in records],
            [r.time for r in records],
        )

    def subset(self, index) -> "SurvivalDataset":
        index = np.asarray(index)
        return SurvivalDataset(self.X[index], self.events[index], self.times[index])

    @property
    def interval_widths(self) -> np.ndarray:
        """Lengths ``t_i - t_{i-1}`` of the grid intervals, with ``t_0 = 0``."""
        return np.diff(self.grid, prepend=0.0)


@dataclass(frozen=True)
class StepFunction:
    """Right-continuous piecewise-constant function.

    ``values[k]`` holds on ``[times[k], times[k+1])``; ``initial_value`` on
    ``[0, times[0])``.
    """

    times: np.ndarray
    values: np.ndarray
    initial_value: float = 1.0

    def __post_init__(self):
        times = np.asarray(self.times, dtype=float)
        values = np.asarray(self.values, dtype=float)
        if times.ndim != 1 or values.shape != times.shape:
            raise ValueError("times and values must be 1-D arrays of equal length")
        if times.size and np.any(np.diff(times) <= 0):
            raise ValueError("step function times must be strictly increasing")
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "initial_value", float(self.initial_value))

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        pos = np.searchsorted(self.times, t, side="right") - 1
        out = np.where(pos >= 0, self.values[np.maximum(pos, 0)], self.initial_value)
        return out if out.ndim else float(out)

    def interval_values(self) -> np.ndarray:
        """Value on each ``[t_{i-1}, t_i)``, i = 1..m, with ``t_0 = 0``."""
        return np.concatenate([[self.initial_value], self.values[:-1]])

    def is_survival_function(self, atol: float = 1e-12) -> bool:
        v = self.values
        return (
            abs(self.initial_value - 1.0) <= atol
            and bool(np.all(v >= -atol))
            and bool(np.all(v <= 1.0 + atol))
            and bool(np.all(np.diff(np.concatenate([[1.0], v])) <= atol))
        )


def interval_values(grid_values: np.ndarray, initial: float = 1.0) -> np.ndarray:
    """Shift grid values right by one interval (last axis), prepending ``initial``."""
    grid_values = np.asarray(grid_values, dtype=float)
    head = np.full(grid_values.shape[:-1] + (1,), initial)
    return np.concatenate([head, grid_values[..., :-1]], axis=-1)


def check_weights(alpha, n: int) -> np.ndarray:
    alpha = np.asarray(alpha, dtype=float)
    if alpha.shape[-1] != n:
        raise ValueError(f"weight vector has length {alpha.shape[-1]}, dataset has {n} records")
    if np.any(alpha < 0) or not np.all(np.isfinite(alpha)):
        raise ValueError("weights must be finite and nonnegative")
    if np.any(np.abs(alpha.sum(axis=-1) - 1.0) > WEIGHT_SUM_TOL):
        raise ValueError("weights must sum to one")
    return alpha


def _beran_factors(dataset: SurvivalDataset, alpha: np.ndarray):
    """Per-record log-factors of the ratio-form Beran product (sorted order).

    Returns ``(num, den, live, dead)``; ``dead`` marks weighted uncensored
    records whose remaining mass fell below ``DENOMINATOR_FLOOR``.
    """
    a = alpha[..., dataset.sorted_index]
    # an event that carries no weight produces no drop, even once the mass is spent
    ev = dataset.events[dataset.sorted_index] & (a > 0)
    # remaining mass 1 - sum_{j<s} a_j as a suffix sum, which cannot go negative
    den = np.flip(np.cumsum(np.flip(a, -1), axis=-1), -1)
    num = np.concatenate([den[..., 1:], np.zeros(a.shape[:-1] + (1,))], axis=-1)
    dead = ev & (den < DENOMINATOR_FLOOR)
    live = ev & ~dead
    return num, den, live, dead


def beran_sf_values(dataset: SurvivalDataset, alpha) -> np.ndarray:
    """Beran SF at every grid time; ``alpha`` has shape ``(n,)`` or ``(k, n)``."""
    alpha = check_weights(alpha, dataset.n)
    num, den, live, dead = _beran_factors(dataset, alpha)
    ratio = np.ones_like(den)
    np.divide(num, den, out=ratio, where=live)
    ratio = np.where(dead, 0.0, ratio)
    sf = np.cumprod(ratio, axis=-1)
    return sf[..., dataset._grid_pos]


def beran_chf_values(dataset: SurvivalDataset, alpha) -> np.ndarray:
    """Beran CHF at every grid time, summed as log-differences.

    Past the point where the SF reaches zero the CHF is ``+inf``.
    """
    alpha = check_weights(alpha, dataset.n)
    num, den, live, dead = _beran_factors(dataset, alpha)
    with np.errstate(divide="ignore"):
        term = np.where(live, np.log(np.where(live, den, 1.0)) - np.log(np.where(live, num, 1.0)), 0.0)
    term = np.where(dead, np.inf, term)
    chf = np.cumsum(term, axis=-1)
    return chf[..., dataset._grid_pos]


def beran_sf(dataset: SurvivalDataset, alpha) -> StepFunction:
    return StepFunction(dataset.grid, beran_sf_values(dataset, alpha), 1.0)


def beran_chf(dataset: SurvivalDataset, alpha) -> StepFunction:
    return StepFunction(dataset.grid, beran_chf_values(dataset, alpha), 0.0)


def _risk_table(dataset: SurvivalDataset):
    """At-risk counts and event counts at each grid time."""
    t = dataset.times
    at_risk = (t[None, :] >= dataset.grid[:, None]).sum(axis=1)
    events = ((t[None, :] == dataset.grid[:, None]) & dataset.events[None, :]).sum(axis=1)
    return at_risk, events


def kaplan_meier(dataset: SurvivalDataset) -> StepFunction:
    """Product-limit SF from the risk table (independent of the Beran code path)."""
    at_risk, events = _risk_table(dataset)
    return StepFunction(dataset.grid, np.cumprod(1.0 - events / at_risk), 1.0)


def nelson_aalen(dataset: SurvivalDataset) -> StepFunction:
    at_risk, events = _risk_table(dataset)
    return StepFunction(dataset.grid, np.cumsum(events / at_risk), 0.0)


def gaussian_weights(x, dataset: SurvivalDataset, tau: float) -> np.ndarray:
    """``softmax(-||x - x_i||^2 / tau)`` over the training points.

    ``x`` may be a single point or a ``(k, d)`` stack.
    """
    if not tau > 0:
        raise ValueError(f"tau must be positive, got {tau}")
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != dataset.d:
        raise ValueError(f"point has dimension {x.shape[-1]}, dataset has {dataset.d}")
    sq = ((x[..., None, :] - dataset.X) ** 2).sum(axis=-1)
    return softmax(-sq / tau, axis=-1)


@dataclass(frozen=True)
class CoxModel:
    """Cox proportional hazards model with a fixed baseline and coefficients.

    Also satisfies the black-box interface (``time_grid``, ``predict_chf``,
    ``predict_sf``), which is how planted-model checks are run.
    """

    baseline_chf: StepFunction
    coefficients: np.ndarray
    baseline_sf: StepFunction = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "coefficients", np.asarray(self.coefficients, dtype=float))
        h0 = self.baseline_chf
        object.__setattr__(self, "baseline_sf", StepFunction(h0.times, np.exp(-h0.values), np.exp(-h0.initial_value)))

    @property
    def time_grid(self) -> np.ndarray:
        return self.baseline_chf.times

    def _risk(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        if X.shape[-1] != self.coefficients.size:
            raise ValueError(f"point has dimension {X.shape[-1]}, model has {self.coefficients.size}")
        return np.exp(X @ self.coefficients)

    def predict_chf(self, X) -> np.ndarray:
        return self.baseline_chf.values * self._risk(X)[..., None]

    def predict_sf(self, X) -> np.ndarray:
        return self.baseline_sf.values ** self._risk(X)[..., None]


def cox_chf(model: CoxModel, x) -> StepFunction:
    return StepFunction(model.time_grid, model.predict_chf(x), 0.0)


def cox_sf(model: CoxModel, x) -> StepFunction:
    return StepFunction(model.time_grid, model.predict_sf(x), 1.0)


def expected_time(sf_values, grid) -> np.ndarray:
    """Area under the SF up to the last grid time (restricted mean)."""
    widths = np.diff(np.asarray(grid, dtype=float), prepend=0.0)
    return interval_values(sf_values) @ widths


def cindex_times(true_times, predicted_times, events) -> float | None:
    """Concordance over pairs with ``T_i < T_j`` and ``delta_i = 1``.

    Pairs with tied predictions are left out of both counts. Returns ``None``
    when no comparable pair remains.
    """
    t = np.asarray(true_times, dtype=float)
    p = np.asarray(predicted_times, dtype=float)
    e = np.asarray(events).astype(bool)
    if not (t.shape == p.shape == e.shape) or t.ndim != 1:
        raise ValueError("true_times, predicted_times and events must be 1-D of equal length")
    comparable = (t[:, None] < t[None, :]) & e[:, None] & (p[:, None] != p[None, :])
    total = comparable.sum()
    if total == 0:
        return None
    return float((comparable & (p[:, None] < p[None, :])).sum() / total)
