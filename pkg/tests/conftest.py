import json
import sys
import warnings
from pathlib import Path

import pytest

from lattice_rigidity import make_context
from lattice_rigidity.io import lattice_from, order_from

TESTDATA = Path(__file__).parent / "testdata"
sys.path.insert(0, str(Path(__file__).parent))


def load(name: str):
    with open(TESTDATA / name) as fh:
        return json.load(fh)


@pytest.fixture
def testdata():
    return load


@pytest.fixture(scope="session")
def c2_order():
    data = load("order_c2.json")
    return order_from(data, make_context(2, 1, 8))


@pytest.fixture(scope="session")
def c2_lattices(c2_order):
    names = {"reg": "lattice_c2_regular.json", "diag": "lattice_c2_diagonal.json",
             "plus": "lattice_c2_plus.json", "minus": "lattice_c2_minus.json"}
    return {k: lattice_from(load(v), c2_order) for k, v in names.items()}


@pytest.fixture(autouse=True)
def _quiet_separability():
    from lattice_rigidity.errors import SeparabilityUnverified

    with warnings.catch_warnings():
        warnings.simplefilter("ignore", SeparabilityUnverified)
        yield


ACCEPTANCE_RESULTS: dict = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE_RESULTS):
        ok, secs, note = ACCEPTANCE_RESULTS[k]
        terminalreporter.write_line(f"criterion {k}: {'PASS' if ok else 'FAIL'} ({secs:.2f}s){' ' + note if note else ''}")
