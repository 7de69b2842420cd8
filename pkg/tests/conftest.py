import numpy as np
import pytest

from thermolength import models
from thermolength.optimizer import CycleGeometry

ACCEPTANCE = []


def record(criterion, passed, detail):
    line = f"criterion {criterion}: {'PASS' if passed else 'FAIL'}  {detail}"
    ACCEPTANCE.append(line)
    print(line)
    return passed


@pytest.fixture
def acceptance():
    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE):
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def fig1_model():
    return models.coupled_oscillators(1.0, 0.4)


@pytest.fixture(scope="session")
def fig1_curve():
    return models.harmonic_protocol(4.0, 0.8, 1.0, 0.4)


@pytest.fixture(scope="session")
def fig1_geometry(fig1_model, fig1_curve):
    return CycleGeometry.build(fig1_model, fig1_curve)


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)
