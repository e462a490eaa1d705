import numpy as np
import pytest

from argmaxgauss import CriterionSpec, ParameterGrid


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def lad_grid():
    return ParameterGrid.linspace(0.0, 0.5, 21)


@pytest.fixture
def lad():
    return CriterionSpec.lad()


def pytest_terminal_summary(terminalreporter):
    from test_acceptance import RESULTS

    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(RESULTS, key=lambda k: (int(k.rstrip("ab")), k)):
        passed, detail = RESULTS[key]
        terminalreporter.write_line(f"criterion {key}: {'PASS' if passed else 'FAIL'}  {detail}")
