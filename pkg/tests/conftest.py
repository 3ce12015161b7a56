import numpy as np
import pytest

from melfs.dataset import Dataset
from melfs.mel import MelConfig, run_mel, run_pso_baseline
from melfs.synthetic import make_planted

PLANTED_DATA_SEED = 0
PLANTED_RUN_SEEDS = range(10)

_acceptance_lines: list[str] = []


def record_criterion(number, passed: bool, detail: str) -> None:
    _acceptance_lines.append(f"criterion {number}: {'PASS' if passed else 'FAIL'}  {detail}")


def pytest_terminal_summary(terminalreporter):
    if _acceptance_lines:
        terminalreporter.section("acceptance criteria")
        for line in _acceptance_lines:
            terminalreporter.write_line(line)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def two_clusters():
    X = np.array([[0, 0]] * 3 + [[10, 10]] * 3, dtype=float)
    y = np.array([0, 0, 0, 1, 1, 1])
    return X, y


@pytest.fixture(scope="session")
def planted():
    return make_planted(200, 500, 5, seed=PLANTED_DATA_SEED)


@pytest.fixture(scope="session")
def planted_runs(planted):
    """Ten seeded MEL and PSO runs on the planted dataset, computed once."""
    ds, _ = planted
    runs = {"mel": [], "pso": []}
    for seed in PLANTED_RUN_SEEDS:
        cfg = MelConfig(seed=seed)
        runs["mel"].append(run_mel(ds, cfg))
        runs["pso"].append(run_pso_baseline(ds, cfg))
    return runs


def tiny_dataset(rng, n=12, d=4, classes=2):
    X = rng.normal(size=(n, d))
    y = np.arange(n) % classes
    return Dataset(X, y)
