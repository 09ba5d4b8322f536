import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from survbenim.core import SurvivalDataset

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@st.composite
def datasets(draw, max_n=30, d=2, ties=True):
    """Random censored datasets with at least one event."""
    n = draw(st.integers(1, max_n))
    seed = draw(st.integers(0, 2**32 - 1))
    rng = np.random.default_rng(seed)
    times = rng.integers(1, 8, size=n).astype(float) if ties and draw(st.booleans()) else rng.exponential(5.0, n)
    events = rng.integers(0, 2, size=n)
    events[rng.integers(n)] = 1
    X = rng.normal(size=(n, d))
    return SurvivalDataset(X, events, times)


@pytest.fixture
def toy6():
    """Six records, three features, one censored tie."""
    rng = np.random.default_rng(7)
    X = rng.uniform(0, 1, size=(6, 3))
    return SurvivalDataset(X, [1, 0, 1, 1, 0, 1], [2.0, 3.0, 3.0, 5.0, 6.5, 8.0])


def central_differences(f, W, step=1e-5):
    W = np.array(W, dtype=float)
    g = np.zeros_like(W)
    for k in range(W.size):
        e = np.zeros_like(W)
        e.flat[k] = step
        g.flat[k] = (f(W + e) - f(W - e)) / (2 * step)
    return g


def assert_gradient_matches(analytic, numeric, rel=1e-4, floor=1e-8):
    """Relative agreement on coordinates where either gradient is not negligible."""
    analytic, numeric = np.asarray(analytic), np.asarray(numeric)
    big = (np.abs(analytic) >= floor) | (np.abs(numeric) >= floor)
    err = np.abs(analytic - numeric)[big] / np.maximum(np.abs(analytic), np.abs(numeric))[big]
    assert err.size == 0 or err.max() < rel, f"max relative error {err.max():.3g}"


# -- shared experiment runs --------------------------------------------------

ACCEPTANCE_LINES: dict[int, str] = {}


def record_criterion(number: int, ok: bool, detail: str) -> None:
    ACCEPTANCE_LINES[number] = f"criterion {number:>2}: {'PASS' if ok else 'FAIL'}  {detail}"


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for n in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[n])


@pytest.fixture(scope="session")
def experiment_2c5f():
    """2 clusters x 200 points, 5 features; RSF(100 trees, depth 8); M = 20, N = 100."""
    from survbenim.experiment import ExperimentConfig, run_experiment

    return run_experiment(ExperimentConfig(preset="2c5f", n_test=20, seed=0))


@pytest.fixture(scope="session")
def experiment_5c10f():
    from survbenim.experiment import ExperimentConfig, run_experiment

    return run_experiment(ExperimentConfig(preset="5c10f", n_test=20, methods=("survbenim-local", "survbex"), seed=0))
