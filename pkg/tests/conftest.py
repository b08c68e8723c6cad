import numpy as np
import pytest

from infosell import model
from infosell.optimal_mechanism import Mechanism

CORPUS_SEED = 20240601


@pytest.fixture(scope="session")
def inst_d():
    return model.inst_d()


@pytest.fixture
def d_mechanism():
    """The recommendation/payment tables of the three-type worked example."""
    pi = np.array([[0, 0, 1], [1, 1, 1], [1, 1, 1]], dtype=float)
    return Mechanism(pi=pi, pay=[2 / 3, 2 / 3, 0.0])


@pytest.fixture(scope="session")
def corpus():
    return model.random_corpus(CORPUS_SEED, 200)


def pytest_terminal_summary(terminalreporter):
    import sys
    acceptance = sys.modules.get("test_acceptance")
    results = getattr(acceptance, "RESULTS", None)
    if results:
        terminalreporter.section("acceptance criteria")
        for num in sorted(results):
            terminalreporter.write_line(results[num])
