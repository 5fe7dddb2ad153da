import numpy as np
import pytest

from fpsa_snn.defaults import (
    context_for_task,
    default_calibration,
    default_params,
    targets_for_task,
)
from fpsa_snn.glyphs import task_patterns
from fpsa_snn.learning import train
from fpsa_snn.params import LaserParams


@pytest.fixture(scope="session")
def params():
    return default_params()


@pytest.fixture(scope="session")
def cal():
    return default_calibration()


@pytest.fixture(scope="session")
def bare_params():
    """Uncalibrated parameter set for unit tests that need no shipped data."""
    return LaserParams(
        gamma_a=0.06, gamma_s=0.05, g_a=2.9e-12, g_s=14.5e-12,
        n0_a=1.1e24, n0_s=0.89e24, tau_ph=4.8, tau_a=1.0, tau_s=0.1,
        beta=1e-5, B_r=1e-16, I_a=2.2e-3, I_s=0.0,
        e_charge=1.602176634e-19, V_a=2.4e-18, V_s=2.4e-18, k_inj=1.0,
    )


@pytest.fixture(scope="session")
def digits_ctx():
    return context_for_task("digits")


@pytest.fixture(scope="session")
def _digits_training(digits_ctx):
    import time

    from fpsa_snn.defaults import default_learning_config
    t0 = time.perf_counter()
    result = train(task_patterns("digits"), targets_for_task("digits"),
                   default_learning_config(task="digits"), digits_ctx)
    elapsed = time.perf_counter() - t0
    assert result.converged, "digit training must converge for downstream tests"
    return result, elapsed


@pytest.fixture(scope="session")
def trained_digits(_digits_training):
    """Converged digit-task weights, shared by the end-to-end tests."""
    return _digits_training[0]


@pytest.fixture(scope="session")
def digits_train_seconds(_digits_training):
    return _digits_training[1]


def _train_letter_task(task):
    import time

    from fpsa_snn.defaults import context_for_task, default_learning_config
    ctx = context_for_task(task)
    t0 = time.perf_counter()
    result = train(task_patterns(task), targets_for_task(task),
                   default_learning_config(task=task), ctx)
    elapsed = time.perf_counter() - t0
    assert result.converged, f"{task} training must converge"
    return ctx, result, elapsed


@pytest.fixture(scope="session")
def trained_xdu():
    return _train_letter_task("xdu")


@pytest.fixture(scope="session")
def trained_nju():
    return _train_letter_task("nju")


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    import sys

    results = None
    for name, mod in list(sys.modules.items()):
        if name.rsplit(".", 1)[-1] == "test_acceptance":
            results = getattr(mod, "RESULTS", None)
            if results is not None:
                break
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for name, ok, detail in results:
        terminalreporter.write_line(
            f"{'PASS' if ok else 'FAIL'}  {name}  ({detail})")


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(1234)
