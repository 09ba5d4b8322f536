import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from survbenim import autodiff as ad
from survbenim.nn import MLP, ImportanceNetwork, MLPConfig, OptimizerState, init_params, mlp_forward, optimizer_step

from .conftest import assert_gradient_matches, central_differences


def naive_forward(config: MLPConfig, params, x):
    """Layer by layer with explicit matrices."""
    a = np.array([[x]])
    off = 0
    sizes = config.layer_sizes
    for i, (m, n) in enumerate(zip(sizes[:-1], sizes[1:])):
        w = params[off:off + m * n].reshape(m, n)
        off += m * n
        b = params[off:off + n]
        off += n
        a = a @ w + b
        if i < len(sizes) - 2:
            a = {"tanh": np.tanh, "relu": lambda v: np.maximum(v, 0), "softplus": lambda v: np.logaddexp(0, v)}[
                config.activation](a)
    out = {"identity": lambda v: v, "softplus": lambda v: np.logaddexp(0, v), "abs": np.abs}[config.output_transform](a)
    return float(out[0, 0])


def test_zero_weights_identity():
    cfg = MLPConfig()
    assert mlp_forward(MLP(cfg, np.zeros(cfg.n_params)), 1.7) == 0.0


def test_zero_weights_softplus():
    cfg = MLPConfig(output_transform="softplus")
    assert mlp_forward(MLP(cfg, np.zeros(cfg.n_params)), -3.0) == pytest.approx(np.log(2.0), abs=1e-15)


@pytest.mark.parametrize("activation", ["tanh", "relu", "softplus"])
@pytest.mark.parametrize("transform", ["identity", "softplus", "abs"])
def test_matches_naive_forward(activation, transform):
    cfg = MLPConfig(hidden_layers=(5, 3), activation=activation, output_transform=transform)
    params = init_params(cfg, 1, np.random.default_rng(1))
    net = MLP(cfg, params)
    for x in (-1.3, 0.0, 0.4, 2.5):
        assert mlp_forward(net, x) == pytest.approx(naive_forward(cfg, params, x), abs=1e-12)


def test_non_finite_input():
    with pytest.raises(ValueError):
        mlp_forward(MLP(MLPConfig()), float("nan"))


def test_config_validation():
    with pytest.raises(ValueError):
        MLPConfig(activation="gelu")
    with pytest.raises(ValueError):
        MLPConfig(init_scale=0.0)


class TestImportanceNetwork:
    def net(self, d=3):
        cfg = MLPConfig(hidden_layers=(4,), output_transform="softplus")
        return ImportanceNetwork(d, cfg, init_params(cfg, d, np.random.default_rng(2)))

    def test_slices_partition(self):
        net = self.net()
        covered = np.concatenate([np.arange(net.n_params)[net.slice(j)] for j in range(net.d)])
        assert np.array_equal(covered, np.arange(net.n_params))

    def test_column_j_equals_subnet_j(self):
        net = self.net()
        X = np.random.default_rng(0).normal(size=(7, 3))
        out = net(X)
        for j in range(3):
            assert np.allclose(out[:, j], net.subnet(j)(X[:, j]), atol=1e-14)

    @given(st.integers(0, 2), st.integers(0, 10**6))
    def test_subnet_independence(self, k, seed):
        net = self.net()
        X = np.random.default_rng(seed).normal(size=(5, 3))
        before = net(X)
        W = net.W.copy()
        W[net.slice(k)] += 0.3
        after = net.forward(W, X)
        others = [j for j in range(3) if j != k]
        assert np.array_equal(before[:, others], after[:, others])

    def test_gradient(self):
        net = self.net()
        X = np.random.default_rng(0).normal(size=(6, 3))
        target = np.ones((6, 3))

        def loss(W):
            d = net.forward(W, X) - target
            return (d * d).sum()

        g = ad.grad_loss(loss, net.W)
        num = central_differences(lambda w: float(loss(ad.Tensor(w)).data), net.W)
        assert_gradient_matches(g, num)

    def test_round_trip(self):
        net = self.net()
        again = ImportanceNetwork.from_dict(net.to_dict())
        assert np.array_equal(again.W, net.W) and again.config == net.config

    def test_wrong_input_width(self):
        with pytest.raises(ValueError):
            self.net()(np.zeros((2, 4)))


class TestOptimizer:
    def test_sgd_step(self):
        W = optimizer_step(OptimizerState("sgd", 0.1), np.zeros(2), np.array([1.0, -2.0]))
        assert W == pytest.approx([-0.1, 0.2])

    def test_sgd_zero_gradient(self):
        W0 = np.array([0.5, -1.0])
        assert np.array_equal(optimizer_step(OptimizerState("sgd", 0.1), W0, np.zeros(2)), W0)

    def test_adam_first_step(self):
        g = np.array([0.3, -4.0, 1e-3])
        state = OptimizerState("adam", 0.01)
        W = optimizer_step(state, np.zeros(3), g)
        assert np.array_equal(np.sign(W), -np.sign(g))
        # bias-corrected first step has magnitude lr * |g| / (|g| + eps)
        assert np.allclose(np.abs(W), 0.01 * np.abs(g) / (np.abs(g) + 1e-8))

    def test_non_finite_gradient(self):
        with pytest.raises(FloatingPointError, match="non-finite"):
            optimizer_step(OptimizerState(), np.zeros(2), np.array([np.nan, 1.0]))

    def test_bad_learning_rate(self):
        with pytest.raises(ValueError):
            OptimizerState(learning_rate=0.0)

    def test_deterministic(self):
        g = np.array([0.2, -0.1])
        a = [optimizer_step(s, np.ones(2), g) for s in (OptimizerState(), OptimizerState())]
        assert np.array_equal(a[0], a[1])
