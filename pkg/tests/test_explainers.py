import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from survbenim import autodiff as ad
from survbenim.core import CoxModel, SurvivalDataset, beran_sf, beran_sf_values, gaussian_weights, nelson_aalen
from survbenim.explainers import (
    KernelConfig,
    SurvBeNIMConfig,
    SurvBeXConfig,
    SurvLIMEConfig,
    SurvNAMConfig,
    benim_kernel,
    benim_local_loss,
    benim_surrogate_sf,
    fit_survbenim_global,
    fit_survbenim_local,
    fit_survbex,
    fit_survlime,
    fit_survnam,
    sample_neighborhood,
    survbex_sf,
    time_weights,
)
from survbenim.explainers.base import BeranTerms, NeighborhoodSample, sf_interval_loss
from survbenim.explainers.survbenim import _Problem, global_loss
from survbenim.explainers.survbex import survbex_objective
from survbenim.explainers.survlime import log_chf_targets, solve_survlime
from survbenim.explainers.survnam import survnam_objective
from survbenim.nn import ImportanceNetwork, MLPConfig, init_params

from .conftest import assert_gradient_matches, central_differences

SMALL = MLPConfig(hidden_layers=(4,), output_transform="softplus")


def cox_blackbox(ds, b):
    return CoxModel(nelson_aalen(ds), np.asarray(b, dtype=float))


def constant_net(d, config=SMALL):
    """All parameters zero: every subnet outputs softplus(0) = ln 2."""
    return ImportanceNetwork(d, config, np.zeros(d * config.n_params))


@pytest.fixture
def small():
    rng = np.random.default_rng(11)
    X = rng.uniform(0, 1, size=(30, 3))
    times = np.exp(1.0 - X @ np.array([1.5, 0.5, 0.0]) + 0.2 * rng.normal(size=30))
    events = (rng.uniform(size=30) < 0.8).astype(int)
    events[0] = 1
    return SurvivalDataset(X, events, times)


class TestSampling:
    def test_degenerate_spread(self):
        x = np.array([0.3, -1.0])
        s = sample_neighborhood(x, 5, 1e-12, 0.4, 0)
        assert np.allclose(s.points, x, atol=1e-10) and np.allclose(s.weights, 1.0)

    def test_kernel_formula(self):
        x = np.array([0.3, -1.0, 2.0])
        s = sample_neighborhood(x, 20, 0.2, 0.4, 3)
        assert np.allclose(s.weights, np.exp(-((s.points - x) ** 2).sum(axis=1) / 0.4**2), rtol=1e-14, atol=0)

    def test_deterministic(self):
        a = sample_neighborhood(np.zeros(2), 3, 0.2, 0.4, 42)
        b = sample_neighborhood(np.zeros(2), 3, 0.2, 0.4, 42)
        assert np.array_equal(a.points, b.points) and np.array_equal(a.weights, b.weights)

    def test_bad_sigma(self):
        with pytest.raises(ValueError):
            sample_neighborhood(np.zeros(2), 3, 0.0, 0.4, 0)


class TestKernel:
    def test_constant_h_rescales_tau(self, toy6):
        z = np.array([0.4, 0.5, 0.6])
        _, w = benim_kernel(toy6.X, z, np.full(3, 2.5), 0.7)
        assert np.allclose(w[0], gaussian_weights(z, toy6, 0.7 / 2.5), atol=1e-15)

    def test_training_point_is_heaviest(self, toy6):
        _, w = benim_kernel(toy6.X, toy6.X[4], np.ones(3), 1.0)
        assert np.argmax(w[0]) == 4

    def test_direct_oracle(self):
        X = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])
        z = np.array([0.5, 0.5])
        A, w = benim_kernel(X, z, np.array([1.0, 4.0]), 2.0)
        expected_A = np.array([0.25 + 4 * 0.25, 0.25 + 4 * 0.25, 0.25 + 4 * 0.25]) / 2.0
        assert np.allclose(A[0], expected_A)
        z = np.array([0.2, 0.9])
        A, w = benim_kernel(X, z, np.array([1.0, 4.0]), 2.0)
        a = np.array([(0.04 + 4 * 0.81) / 2, (0.64 + 4 * 0.81) / 2, (0.04 + 4 * 0.01) / 2])
        assert np.allclose(A[0], a) and np.allclose(w[0], np.exp(-a) / np.exp(-a).sum())

    def test_bad_tau(self, toy6):
        with pytest.raises(ValueError):
            benim_kernel(toy6.X, np.zeros(3), np.ones(3), 0.0)


class TestSurrogate:
    def test_constant_net_reduces_to_gaussian_beran(self, toy6):
        z = np.array([0.3, 0.2, 0.9])
        sf = benim_surrogate_sf(toy6, z, constant_net(3), KernelConfig(tau=0.5))
        ref = beran_sf(toy6, gaussian_weights(z, toy6, 0.5 / np.log(2.0)))
        assert np.allclose(sf.values, ref.values, atol=1e-12)

    def test_differentiable_path_matches_core(self, toy6):
        net = ImportanceNetwork(3, SMALL, init_params(SMALL, 3, np.random.default_rng(0)))
        Z = np.random.default_rng(1).uniform(size=(4, 3))
        h = net(Z)
        _, w = benim_kernel(toy6.X, Z, h, 1.0)
        terms = BeranTerms(toy6)
        logits = terms.sq_dist_weighted(ad.Tensor(h), Z) * -1.0
        assert np.allclose(terms.sf(logits).data, beran_sf_values(toy6, w), atol=1e-12)

    @given(st.integers(0, 10**6))
    def test_valid_sf(self, seed):
        rng = np.random.default_rng(seed)
        ds = SurvivalDataset(rng.normal(size=(12, 2)), rng.integers(0, 2, 12) | (np.arange(12) == 0),
                             rng.integers(1, 6, 12).astype(float))
        net = ImportanceNetwork(2, SMALL, init_params(SMALL, 2, rng))
        assert benim_surrogate_sf(ds, rng.normal(size=2), net, KernelConfig(tau=0.3)).is_survival_function()


class TestLocalLoss:
    def setup_sample(self, ds):
        return sample_neighborhood(ds.X[0], 4, 0.2, 0.4, 0)

    def test_zero_when_surrogate_is_target(self, toy6):
        net = ImportanceNetwork(3, SMALL, init_params(SMALL, 3, np.random.default_rng(0)))
        s = self.setup_sample(toy6)
        target = np.vstack([benim_surrogate_sf(toy6, z, net, KernelConfig()).values for z in s.points])
        assert benim_local_loss(net, s.anchor, s, target, toy6, KernelConfig()) == pytest.approx(0.0, abs=1e-24)

    def test_linear_in_weights(self, toy6):
        net = ImportanceNetwork(3, SMALL, init_params(SMALL, 3, np.random.default_rng(0)))
        s = self.setup_sample(toy6)
        target = np.tile(np.linspace(1, 0, toy6.grid.size), (4, 1))
        s2 = NeighborhoodSample(s.anchor, s.points, 2 * s.weights, s.sigma_sample, s.sigma_weight, s.seed)
        a = benim_local_loss(net, s.anchor, s, target, toy6, KernelConfig())
        assert benim_local_loss(net, s.anchor, s2, target, toy6, KernelConfig()) == pytest.approx(2 * a, rel=1e-13)

    def test_matches_direct_sum(self, toy6):
        net = ImportanceNetwork(3, SMALL, init_params(SMALL, 3, np.random.default_rng(0)))
        s = self.setup_sample(toy6)
        target = np.tile(np.linspace(1, 0, toy6.grid.size), (4, 1))
        widths = np.diff(toy6.grid, prepend=0)
        expected = 0.0
        for j, z in enumerate(s.points):
            surr = np.concatenate([[1.0], benim_surrogate_sf(toy6, z, net, KernelConfig()).values[:-1]])
            bb = np.concatenate([[1.0], target[j, :-1]])
            expected += s.weights[j] * sum((a - b) ** 2 * w for a, b, w in zip(surr, bb, widths))
        assert benim_local_loss(net, s.anchor, s, target, toy6, KernelConfig()) == pytest.approx(expected, rel=1e-12)

    def test_hand_interval_sum(self):
        # 2 perturbations, 3 intervals of widths (1, 2, 3)
        s_grid = ad.Tensor(np.array([[0.9, 0.5, 0.1], [0.8, 0.8, 0.3]]))
        target = np.array([[1.0, 0.7, 0.4], [1.0, 0.6, 0.6]])
        v = np.array([0.5, 2.0])
        widths = np.array([1.0, 2.0, 3.0])
        # surrogate on intervals: (1, .9, .5) and (1, .8, .8)
        expected = 0.5 * (0 + 0.04 * 2 + 0.01 * 3) + 2.0 * (0 + 0.04 * 2 + 0.04 * 3)
        assert float(sf_interval_loss(s_grid, target, widths, v).data) == pytest.approx(expected, rel=1e-12)

    def test_grid_misalignment(self, toy6):
        s = self.setup_sample(toy6)
        with pytest.raises(ValueError):
            benim_local_loss(constant_net(3), s.anchor, s, np.ones((4, 3)), toy6, KernelConfig())


class TestTimeWeights:
    def test_certain_survival(self):
        grid = np.array([1.0, 3.0, 6.0])
        tw = time_weights(np.ones((2, 3)), grid, 1.0)
        assert np.allclose(tw.expectations, 6.0)

    def test_flat_limit(self):
        grid = np.array([1.0, 3.0, 6.0, 7.0])
        tw = time_weights(np.array([[0.9, 0.5, 0.2, 0.1]]), grid, 1e12)
        assert np.allclose(tw.weights, 0.25, atol=1e-9)

    def test_hand_case(self):
        grid = np.array([1.0, 3.0, 6.0])
        sf = np.array([[0.8, 0.5, 0.0]])
        m = 1 * 1.0 + 2 * 0.8 + 3 * 0.5
        mids = np.array([0.5, 2.0, 4.5])
        e = np.exp(-((m - mids) ** 2) / 4.0)
        tw = time_weights(sf, grid, 4.0)
        assert tw.expectations[0] == pytest.approx(m) and np.allclose(tw.weights[:, 0], e / e.sum())

    @given(st.integers(0, 10**6), st.floats(1e-2, 1e4))
    def test_columns_sum_to_one(self, seed, varkappa):
        rng = np.random.default_rng(seed)
        sf = np.sort(rng.uniform(size=(5, 6)), axis=1)[:, ::-1]
        tw = time_weights(sf, np.cumsum(rng.uniform(0.1, 2, 6)), varkappa)
        assert np.allclose(tw.weights.sum(axis=0), 1.0, atol=1e-9)

    def test_flat_limit_loss_is_scaled_unweighted(self, toy6):
        net = ImportanceNetwork(3, SMALL, init_params(SMALL, 3, np.random.default_rng(0)))
        s = sample_neighborhood(toy6.X[1], 4, 0.2, 0.4, 0)
        target = np.tile(np.linspace(1, 0, toy6.grid.size), (4, 1))
        plain = benim_local_loss(net, s.anchor, s, target, toy6, KernelConfig())
        weighted = benim_local_loss(net, s.anchor, s, target, toy6,
                                    KernelConfig(varkappa=1e12, use_time_weighting=True))
        assert weighted == pytest.approx(plain / toy6.grid.size, rel=1e-6)


class TestGradients:
    """Reverse mode against central differences on n = 6, N = 4, d = 3."""

    def test_survbenim_local(self, toy6):
        bb = cox_blackbox(toy6, [0.5, -0.3, 0.2])
        cfg = SurvBeNIMConfig(n_samples=4, mlp=SMALL)
        s = sample_neighborhood(toy6.X[2], 4, 0.2, 0.4, 1)
        problem = _Problem(bb, toy6, [s], cfg)
        net = ImportanceNetwork(3, SMALL, init_params(SMALL, 3, np.random.default_rng(3)))
        loss = problem.loss(net)
        g = ad.grad_loss(loss, net.W)
        assert_gradient_matches(g, central_differences(lambda w: float(loss(ad.Tensor(w)).data), net.W))

    def test_survbenim_time_weighted_and_global(self, toy6):
        bb = cox_blackbox(toy6, [0.5, -0.3, 0.2])
        cfg = SurvBeNIMConfig(n_samples=4, mlp=SMALL, kernel=KernelConfig(tau=0.5, use_time_weighting=True))
        samples = [sample_neighborhood(toy6.X[i], 4, 0.2, 0.4, i) for i in (0, 3)]
        problem = _Problem(bb, toy6, samples, cfg)
        net = ImportanceNetwork(3, SMALL, init_params(SMALL, 3, np.random.default_rng(4)))
        loss = problem.loss(net)
        g = ad.grad_loss(loss, net.W)
        assert_gradient_matches(g, central_differences(lambda w: float(loss(ad.Tensor(w)).data), net.W))

    def test_survbex(self, toy6):
        bb = cox_blackbox(toy6, [0.5, -0.3, 0.2])
        s = sample_neighborhood(toy6.X[2], 4, 0.2, 0.4, 1)
        loss = survbex_objective(toy6, s.points, s.weights, bb.predict_sf(s.points), 1.0)
        b = np.array([0.7, 1.3, -0.4])
        g = ad.grad_loss(loss, b)
        assert_gradient_matches(g, central_differences(lambda w: float(loss(ad.Tensor(w)).data), b))

    @pytest.mark.parametrize("form", ["log", "chf"])
    def test_survnam(self, toy6, form):
        bb = cox_blackbox(toy6, [0.5, -0.3, 0.2])
        s = sample_neighborhood(toy6.X[2], 4, 0.2, 0.4, 1)
        cfg = MLPConfig(hidden_layers=(4,))
        net = ImportanceNetwork(3, cfg, init_params(cfg, 3, np.random.default_rng(5)))
        loss = survnam_objective(net, s.points, s.weights, bb.predict_chf(s.points), nelson_aalen(toy6).values,
                                 toy6.interval_widths, form)
        g = ad.grad_loss(loss, net.W)
        assert_gradient_matches(g, central_differences(lambda w: float(loss(ad.Tensor(w)).data), net.W))


def test_reduction_chain(toy6):
    """Constant subnets == constant SurvBeX scale == plain Beran at tau / c."""
    z = np.array([0.45, 0.3, 0.65])
    tau, c = 0.8, np.log(2.0)
    benim = benim_surrogate_sf(toy6, z, constant_net(3), KernelConfig(tau=tau)).values
    bex = survbex_sf(toy6, z, np.full(3, np.sqrt(c)), tau).values
    plain = beran_sf(toy6, gaussian_weights(z, toy6, tau / c)).values
    assert np.max(np.abs(benim - bex)) < 1e-9 and np.max(np.abs(bex - plain)) < 1e-9


class TestSurvBeNIMFit:
    def test_loss_decreases_and_deterministic(self, small):
        bb = cox_blackbox(small, [1.0, 0.3, 0.0])
        cfg = SurvBeNIMConfig(n_samples=20, epochs=30, seed=3)
        a = fit_survbenim_local(bb, small, small.X[0], cfg)
        b = fit_survbenim_local(bb, small, small.X[0], cfg)
        assert a.diagnostics["final_loss"] <= a.diagnostics["initial_loss"]
        assert np.array_equal(a.importance, b.importance) and np.array_equal(a.fitted_sf.values, b.fitted_sf.values)
        assert a.fitted_sf.is_survival_function()
        assert a.curves["grid"].shape == (3, 64) and a.curves["values"].shape == (3, 64)
        assert np.all(a.importance > 0)

    def test_importance_is_mean_of_h(self, small):
        bb = cox_blackbox(small, [1.0, 0.3, 0.0])
        s = sample_neighborhood(small.X[0], 10, 0.2, 0.4, 0)
        r = fit_survbenim_local(bb, small, small.X[0], SurvBeNIMConfig(n_samples=10, epochs=5), sample=s)
        net = ImportanceNetwork.from_dict(r.parameters)
        assert np.allclose(r.importance, net(s.points).mean(axis=0), atol=1e-15)

    def test_global_single_anchor_equals_local(self, small):
        bb = cox_blackbox(small, [1.0, 0.3, 0.0])
        cfg = SurvBeNIMConfig(n_samples=8, epochs=15, seed=2)
        x = small.X[5]
        local = fit_survbenim_local(bb, small, x, cfg)
        glob = fit_survbenim_global(bb, small, x[None, :], cfg)
        assert glob.log.losses == pytest.approx([local.diagnostics["initial_loss"]] + glob.log.losses[1:])
        assert np.allclose(glob.net.W, ImportanceNetwork.from_dict(local.parameters).W, atol=0)
        single, _ = global_loss(bb, small, x[None, :], cfg)
        assert single == pytest.approx(local.diagnostics["initial_loss"], rel=1e-14)

    def test_global_loss_is_sum_over_anchors(self, small):
        bb = cox_blackbox(small, [1.0, 0.3, 0.0])
        cfg = SurvBeNIMConfig(n_samples=8)
        anchors = small.X[[1, 7]]
        total, _ = global_loss(bb, small, anchors, cfg)
        parts, _ = global_loss(bb, small, anchors, cfg, per_anchor=True)
        assert total == pytest.approx(sum(parts), rel=1e-13)

    def test_grid_mismatch(self, small, toy6):
        with pytest.raises(ValueError, match="time grid"):
            fit_survbenim_local(cox_blackbox(toy6, [0, 0, 0]), small, small.X[0], SurvBeNIMConfig(epochs=1))


class TestSurvBeX:
    def test_unit_b_is_gaussian_beran(self, toy6):
        z = np.array([0.1, 0.5, 0.2])
        assert np.allclose(survbex_sf(toy6, z, np.ones(3), 0.6).values,
                           beran_sf(toy6, gaussian_weights(z, toy6, 0.6)).values, atol=1e-15)

    def test_loss_decreases(self, small):
        bb = cox_blackbox(small, [1.0, 0.3, 0.0])
        r = fit_survbex(bb, small, small.X[3], SurvBeXConfig(n_samples=20, epochs=30))
        assert r.diagnostics["final_loss"] <= r.diagnostics["initial_loss"]
        assert r.curves is None and r.fitted_sf.is_survival_function()


class TestSurvLIME:
    def test_planted_cox_recovery(self, small):
        b_star = np.array([0.8, -0.4, 0.1])
        r = fit_survlime(cox_blackbox(small, b_star), small, small.X[2], SurvLIMEConfig())
        assert np.max(np.abs(r.importance - b_star)) < 1e-3

    def test_degenerate_design_gives_least_norm(self):
        rng = np.random.default_rng(0)
        points = np.tile(np.array([1.0, 2.0]), (5, 1))
        y = np.full((5, 3), 0.7)
        mask = np.ones((5, 3), bool)
        b = solve_survlime(points, np.ones(5), y, mask, np.array([1.0, 1.0, 2.0]))
        assert b == pytest.approx(np.linalg.pinv(points) @ np.full(5, 0.7))
        assert b == pytest.approx(np.array([1.0, 2.0]) * 0.7 / 5.0)
        del rng

    def test_excluded_cells(self):
        y, mask = log_chf_targets(np.array([[0.0, 0.5]]), np.array([0.1, 0.2]), 1e-6)
        # interval values: (0, 0) then (0, 0.1): the first interval has H = 0
        assert not mask[0, 0] and not mask[0, 1]
        with pytest.raises(ValueError, match="excluded"):
            solve_survlime(np.ones((1, 2)), np.ones(1), y, mask, np.ones(2))


class TestSurvNAM:
    def test_cox_slopes(self, small):
        b_star = np.array([1.5, -1.0, 0.0])
        s = sample_neighborhood(small.X[4], 100, 0.2, 0.4, 0)
        bb = cox_blackbox(small, b_star)
        r = fit_survnam(bb, small, small.X[4], SurvNAMConfig(epochs=300), sample=s)
        net = ImportanceNetwork.from_dict(r.parameters)
        lo, hi = small.X[4] - 0.2, small.X[4] + 0.2
        g_lo, g_hi = net(lo[None, :])[0], net(hi[None, :])[0]
        assert np.sign(g_hi[0] - g_lo[0]) == 1 and np.sign(g_hi[1] - g_lo[1]) == -1
        assert r.importance[2] < min(r.importance[0], r.importance[1])

    def test_constant_black_box(self, small):
        r = fit_survnam(cox_blackbox(small, np.zeros(3)), small, small.X[4], SurvNAMConfig(epochs=300))
        assert np.max(r.importance) < 0.05

    def test_deterministic(self, small):
        bb = cox_blackbox(small, [1.0, 0.0, 0.0])
        a = fit_survnam(bb, small, small.X[1], SurvNAMConfig(epochs=10, seed=4))
        b = fit_survnam(bb, small, small.X[1], SurvNAMConfig(epochs=10, seed=4))
        assert np.array_equal(a.importance, b.importance)


def _permute_sample(s, perm):
    return NeighborhoodSample(s.anchor[perm], s.points[:, perm], s.weights, s.sigma_sample, s.sigma_weight, s.seed)


@pytest.mark.parametrize("method", ["survbenim", "survbex", "survlime", "survnam"])
def test_permutation_equivariance(small, method):
    perm = np.array([2, 0, 1])
    b = np.array([1.0, 0.3, -0.5])
    bb, bb_p = cox_blackbox(small, b), None
    small_p = SurvivalDataset(small.X[:, perm], small.events.astype(int), small.times)
    bb_p = cox_blackbox(small_p, b[perm])
    x = small.X[6]
    s = sample_neighborhood(x, 15, 0.2, 0.4, 0)
    if method == "survbenim":
        cfg = SurvBeNIMConfig(n_samples=15, epochs=20, mlp=SMALL)
        W0 = init_params(SMALL, 3, np.random.default_rng(0))
        W0_p = W0.reshape(3, -1)[perm].ravel()
        r = fit_survbenim_local(bb, small, x, cfg, sample=s, init=W0)
        r_p = fit_survbenim_local(bb_p, small_p, x[perm], cfg, sample=_permute_sample(s, perm), init=W0_p)
    elif method == "survnam":
        cfg = SurvNAMConfig(n_samples=15, epochs=20, mlp=MLPConfig(hidden_layers=(4,)))
        W0 = init_params(cfg.mlp, 3, np.random.default_rng(0))
        W0_p = W0.reshape(3, -1)[perm].ravel()
        r = fit_survnam(bb, small, x, cfg, sample=s, init=W0)
        r_p = fit_survnam(bb_p, small_p, x[perm], cfg, sample=_permute_sample(s, perm), init=W0_p)
    elif method == "survbex":
        cfg = SurvBeXConfig(n_samples=15, epochs=20)
        r = fit_survbex(bb, small, x, cfg, sample=s)
        r_p = fit_survbex(bb_p, small_p, x[perm], cfg, sample=_permute_sample(s, perm))
    else:
        r = fit_survlime(bb, small, x, sample=s)
        r_p = fit_survlime(bb_p, small_p, x[perm], sample=_permute_sample(s, perm))
    assert np.allclose(r_p.importance, r.importance[perm], rtol=1e-6, atol=1e-9)


@pytest.mark.slow
def test_ignored_feature_ranks_low():
    """RSF trained where the last feature is noise: its importance is among the two smallest."""
    from survbenim.forest import ForestConfig, fit_rsf
    from survbenim.synth import ClusterSpec, GeneratorConfig, gen_clustered_dataset, gen_test_points

    gen = GeneratorConfig((ClusterSpec((0.0,) * 5, (1.0, 0.8, 0.6, 0.4, 0.0), radius=1.0, n_points=300),),
                          feature_distribution="uniform", seed=0)
    ds, _ = gen_clustered_dataset(gen)
    bb = fit_rsf(ds, ForestConfig(n_trees=50, seed=1))
    anchors, _ = gen_test_points(gen, 6, 2)
    ranks = [int(np.argsort(np.argsort(fit_survbenim_local(bb, ds, x).importance))[4]) for x in anchors]
    print("rank of the noise feature per anchor:", ranks)
    assert all(r <= 1 for r in ranks)


@pytest.mark.slow
def test_global_and_local_agree_on_top_two():
    from survbenim.forest import ForestConfig, fit_rsf
    from survbenim.synth import gen_clustered_dataset, gen_test_points, preset

    gen = preset("cox5")
    ds, _ = gen_clustered_dataset(gen)
    bb = fit_rsf(ds, ForestConfig(n_trees=50, seed=1))
    anchors, _ = gen_test_points(gen, 10, 3)
    model = fit_survbenim_global(bb, ds, anchors, SurvBeNIMConfig(epochs=500))
    agree = 0
    for i, x in enumerate(anchors):
        local = fit_survbenim_local(bb, ds, x, SurvBeNIMConfig(seed=i)).importance
        glob = model.explain(x, seed=i).importance
        agree += set(np.argsort(-local)[:2]) == set(np.argsort(-glob)[:2])
    print(f"top-2 agreement {agree}/{len(anchors)}")
    assert agree / len(anchors) >= 0.7
