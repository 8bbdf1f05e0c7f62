import numpy as np
import pytest

from hybridsched.model import Instance, Task, fix1, fix3, fix4, validate


@pytest.fixture
def f1():
    return fix1()


@pytest.fixture
def f3():
    return fix3()


@pytest.fixture
def f4():
    return fix4()


def assert_valid(schedule, instance, platform):
    v = validate(schedule, instance, platform)
    assert v is None, str(v)


def random_independent(rng: np.random.Generator, n: int) -> Instance:
    tasks = [
        Task(i + 1, float(rng.gamma(1.5, 4) + 0.05), float(rng.gamma(1.5, 1) + 0.05))
        for i in range(n)
    ]
    return Instance(tasks)


def random_dag(rng: np.random.Generator, n: int, p: float = 0.3) -> Instance:
    tasks = [
        Task(i + 1, float(rng.gamma(1.5, 4) + 0.05), float(rng.gamma(1.5, 1) + 0.05))
        for i in range(n)
    ]
    edges = [
        (i + 1, j + 1) for i in range(n) for j in range(i + 1, n) if rng.random() < p
    ]
    return Instance(tasks, edges)
