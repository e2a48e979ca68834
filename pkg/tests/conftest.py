"""Pytest configuration and shared fixtures."""

import numpy as np
import pytest

from reservoir_ica.data.signals import SourceMatrix, generate_sources
from reservoir_ica.experiments.config import ExperimentSpec
from reservoir_ica.online.pipeline import RunConfig


def pytest_addoption(parser):
    parser.addoption(
        "--filter",
        action="store",
        default=None,
        help="Only run tests whose node id contains this pattern (case-insensitive).",
    )


def pytest_collection_modifyitems(config, items):
    pattern = config.getoption("--filter")
    if not pattern:
        return
    pattern = pattern.lower()
    selected = [item for item in items if pattern in item.nodeid.lower()]
    deselected = [item for item in items if pattern not in item.nodeid.lower()]
    if deselected:
        config.hook.pytest_deselected(items=deselected)
        items[:] = selected


@pytest.fixture
def rng():
    """Seeded generator for test data."""
    return np.random.default_rng(1234)


@pytest.fixture
def chaotic_sources():
    """Short chaotic source matrix."""
    return generate_sources(["lorenz", "mackey_glass", "chirp"], 4000, seed=7)


@pytest.fixture
def laplace_sources(rng):
    """Three standardized i.i.d. Laplace sources (easy ICA case)."""
    data = rng.laplace(size=(3, 6000))
    data = (data - data.mean(axis=1, keepdims=True)) / data.std(axis=1, keepdims=True)
    return SourceMatrix(data=data, kinds=["laplace"] * 3)


@pytest.fixture
def small_run_config():
    """Desk-scale run shrunk so a full pipeline pass takes well under a second."""

    def make(**kwargs) -> RunConfig:
        defaults = {
            "T": 3000,
            "N": 50,
            "d": 10,
            "warmup": 500,
            "ramp": 500,
            "seed": 3,
        }
        return RunConfig(**{**defaults, **kwargs})

    return make


@pytest.fixture
def small_spec(tmp_path):
    """Experiment spec small enough to run inside a unit test."""

    def make(**kwargs) -> ExperimentSpec:
        defaults = {
            "regimes": ["static"],
            "methods": ["reoica_base", "vanilla"],
            "seeds": [0, 1],
            "T": 3000,
            "output_dir": tmp_path / "results",
            "eval_window": 1500,
            "max_lag": 50,
            "curve_window": 500,
            "curve_stride": 250,
            "overlay_length": 200,
            "overrides": {"N": 50, "d": 10, "warmup": 500, "ramp": 500},
        }
        return ExperimentSpec(**{**defaults, **kwargs})

    return make
