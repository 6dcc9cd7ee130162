"""
Fixtures compartilhadas dos testes.
"""
import os

# Traces em arquivo não fazem parte dos testes
os.environ.setdefault("DVS_DISABLE_TRACING", "1")

import numpy as np
import pytest

from src.core.model import FrequencyMenu, TaskSet


@pytest.fixture
def menu_12():
    return FrequencyMenu((1.0, 2.0))


@pytest.fixture
def menu_1248():
    return FrequencyMenu((1.0, 2.0, 4.0, 8.0))


@pytest.fixture
def two_tasks():
    """D = 10, w = [4, 6]: z = [5, 7, 10] com f_M = 2."""
    return TaskSet.from_wcecs([4, 6], 10.0)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_menu(rng: np.random.Generator, max_m: int = 6) -> FrequencyMenu:
    m = int(rng.integers(1, max_m + 1))
    steps = rng.uniform(0.2, 1.5, size=m)
    return FrequencyMenu(tuple(float(f) for f in np.cumsum(steps)))


def random_taskset(rng: np.random.Generator, menu: FrequencyMenu, max_n: int = 10,
                   slack: tuple = (1.0, 3.0)) -> TaskSet:
    n = int(rng.integers(1, max_n + 1))
    wcecs = rng.integers(1, 100, size=n)
    deadline = float(wcecs.sum()) / menu.f_max * float(rng.uniform(*slack))
    return TaskSet.from_wcecs([int(w) for w in wcecs], deadline)
