import numpy as np
import pytest

from pfaffgeom.forms import CovectorFieldSpec, MetricSpec


@pytest.fixture
def e3():
    return MetricSpec.preset("euclidean", 3)


@pytest.fixture
def sphere():
    return CovectorFieldSpec.catalog("exact_sphere")


@pytest.fixture
def contact():
    return CovectorFieldSpec.catalog("contact")


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def pytest_terminal_summary(terminalreporter):
    from test_acceptance import RESULTS

    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for cid in sorted(RESULTS):
        r = RESULTS[cid]
        terminalreporter.write_line(f"[{'PASS' if r['passed'] else 'FAIL'}] {cid:>2} {r['name']}")
