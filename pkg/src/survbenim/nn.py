"""Per-feature MLP subnetworks and first-order optimizers.

All ``d`` subnetworks share one architecture, so the flat parameter vector is
laid out subnet by subnet: ``W.reshape(d, P)[j]`` is subnet ``j``'s slice.
The forward pass runs all subnets at once with batched matmuls.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import autodiff as ad

ACTIVATIONS = {"relu": ad.relu, "tanh": ad.tanh, "softplus": ad.softplus}
OUTPUT_TRANSFORMS = {"identity": lambda t: t, "softplus": ad.softplus, "abs": ad.tabs}


@dataclass(frozen=True)
class MLPConfig:
    hidden_layers: tuple[int, ...] = (16, 16)
    activation: str = "tanh"
    output_transform: str = "identity"
    init_scale: float = 0.5
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "hidden_layers", tuple(int(h) for h in self.hidden_layers))
        if any(h <= 0 for h in self.hidden_layers):
            raise ValueError("hidden layer sizes must be positive")
        if self.activation not in ACTIVATIONS:
            raise ValueError(f"unknown activation {self.activation!r}; expected one of {sorted(ACTIVATIONS)}")
        if self.output_transform not in OUTPUT_TRANSFORMS:
            raise ValueError(
                f"unknown output transform {self.output_transform!r}; expected one of {sorted(OUTPUT_TRANSFORMS)}"
            )
        if not self.init_scale > 0:
            raise ValueError("init_scale must be positive")

    @property
    def layer_sizes(self) -> list[int]:
        return [1, *self.hidden_layers, 1]

    @property
    def n_params(self) -> int:
        sizes = self.layer_sizes
        return sum(a * b + b for a, b in zip(sizes[:-1], sizes[1:]))

    def layer_slices(self):
        """``(weight_slice, weight_shape, bias_slice)`` per layer within one subnet."""
        out, offset = [], 0
        sizes = self.layer_sizes
        for a, b in zip(sizes[:-1], sizes[1:]):
            w = slice(offset, offset + a * b)
            offset += a * b
            bias = slice(offset, offset + b)
            offset += b
            out.append((w, (a, b), bias))
        return out


def _forward(config: MLPConfig, params, inputs):
    """Run ``k`` subnets on ``(batch, k)`` inputs; ``params`` is ``(k, P)``.

    Works for both ndarrays and Tensors (the former are wrapped as constants).
    """
    params = ad.as_tensor(params)
    k = params.shape[0]
    a = ad.as_tensor(np.asarray(inputs, dtype=float).T[:, :, None])
    layers = config.layer_slices()
    act = ACTIVATIONS[config.activation]
    for i, (ws, shape, bs) in enumerate(layers):
        w = params[:, ws].reshape((k, *shape))
        b = params[:, bs].reshape((k, 1, shape[1]))
        a = a @ w + b
        if i < len(layers) - 1:
            a = act(a)
    a = OUTPUT_TRANSFORMS[config.output_transform](a)
    return a.reshape((k, a.shape[1])).T


def init_params(config: MLPConfig, n_subnets: int, rng=None) -> np.ndarray:
    rng = np.random.default_rng(config.seed if rng is None else rng)
    return rng.uniform(-config.init_scale, config.init_scale, size=n_subnets * config.n_params)


@dataclass
class MLP:
    """A single scalar-input, scalar-output network."""

    config: MLPConfig
    params: np.ndarray = None

    def __post_init__(self):
        if self.params is None:
            self.params = init_params(self.config, 1)
        self.params = np.asarray(self.params, dtype=float)
        if self.params.shape != (self.config.n_params,):
            raise ValueError(f"expected {self.config.n_params} parameters, got {self.params.shape}")

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        out = _forward(self.config, self.params[None, :], x.reshape(-1, 1)).data[:, 0]
        return out.reshape(x.shape) if x.ndim else float(out[0])


def mlp_forward(net: MLP, x: float) -> float:
    if not np.isfinite(x):
        raise ValueError(f"non-finite network input: {x}")
    return net(float(x))


@dataclass
class ImportanceNetwork:
    """``d`` independent subnetworks, one per feature, over a flat ``W``."""

    d: int
    config: MLPConfig = field(default_factory=MLPConfig)
    W: np.ndarray = None

    def __post_init__(self):
        if self.W is None:
            self.W = init_params(self.config, self.d)
        self.W = np.asarray(self.W, dtype=float)
        if self.W.shape != (self.n_params,):
            raise ValueError(f"expected {self.n_params} parameters, got {self.W.shape}")

    @property
    def n_params(self) -> int:
        return self.d * self.config.n_params

    def slice(self, j: int) -> slice:
        P = self.config.n_params
        return slice(j * P, (j + 1) * P)

    def forward(self, W, X):
        """Evaluate all subnets: column ``j`` of ``X`` feeds subnet ``j``.

        ``W`` may be a Tensor (for gradients) or an ndarray; returns the same
        kind, shaped like ``X``.
        """
        X = np.asarray(X, dtype=float)
        if X.ndim != 2 or X.shape[1] != self.d:
            raise ValueError(f"expected inputs of shape (batch, {self.d}), got {X.shape}")
        if not np.all(np.isfinite(X)):
            raise ValueError("non-finite network input")
        if isinstance(W, ad.Tensor):
            return _forward(self.config, W.reshape((self.d, self.config.n_params)), X)
        W = np.asarray(W, dtype=float).reshape(self.d, self.config.n_params)
        return _forward(self.config, W, X).data

    def __call__(self, X) -> np.ndarray:
        return self.forward(self.W, X)

    def subnet(self, j: int) -> MLP:
        return MLP(self.config, self.W[self.slice(j)].copy())

    def to_dict(self) -> dict:
        c = self.config
        return {
            "d": self.d,
            "hidden_layers": list(c.hidden_layers),
            "activation": c.activation,
            "output_transform": c.output_transform,
            "init_scale": c.init_scale,
            "seed": c.seed,
            "W": self.W.tolist(),
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "ImportanceNetwork":
        config = MLPConfig(
            hidden_layers=tuple(doc["hidden_layers"]),
            activation=doc["activation"],
            output_transform=doc["output_transform"],
            init_scale=doc["init_scale"],
            seed=doc["seed"],
        )
        return cls(doc["d"], config, np.asarray(doc["W"], dtype=float))


@dataclass
class OptimizerState:
    method: str = "adam"
    learning_rate: float = 1e-2
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    m: np.ndarray | None = None
    v: np.ndarray | None = None
    step: int = 0

    def __post_init__(self):
        if self.method not in ("sgd", "adam"):
            raise ValueError(f"unknown optimizer {self.method!r}; expected 'sgd' or 'adam'")
        if not self.learning_rate > 0:
            raise ValueError("learning_rate must be positive")


def optimizer_step(state: OptimizerState, W, grad) -> np.ndarray:
    """Return updated parameters; ``state`` moments and counter advance in place."""
    W = np.asarray(W, dtype=float)
    grad = np.asarray(grad, dtype=float)
    if W.shape != grad.shape:
        raise ValueError(f"parameter shape {W.shape} does not match gradient shape {grad.shape}")
    bad = ~np.isfinite(grad)
    if bad.any():
        idx = np.flatnonzero(bad)
        raise FloatingPointError(
            f"non-finite gradient at step {state.step}: {idx.size} bad coordinates, first at {idx[:5].tolist()}"
        )
    state.step += 1
    if state.method == "sgd":
        return W - state.learning_rate * grad
    if state.m is None:
        state.m = np.zeros_like(W)
        state.v = np.zeros_like(W)
    state.m = state.beta1 * state.m + (1 - state.beta1) * grad
    state.v = state.beta2 * state.v + (1 - state.beta2) * grad * grad
    m_hat = state.m / (1 - state.beta1**state.step)
    v_hat = state.v / (1 - state.beta2**state.step)
    return W - state.learning_rate * m_hat / (np.sqrt(v_hat) + state.eps)
