import json
from pathlib import Path

import numpy as np
import pytest

from udwgates.field import SmearingSpec, calibrate_gamma, coupling_for_s_phi

ORACLES = json.loads((Path(__file__).parent / "oracles" / "frozen_oracles.json").read_text())

# filled by tests/test_acceptance.py, printed once at the end of the session
ACCEPTANCE_LINES: dict[int, str] = {}


@pytest.fixture(scope="session")
def oracles():
    return ORACLES


@pytest.fixture(scope="session")
def spec():
    return SmearingSpec()


@pytest.fixture(scope="session", params=[0.25, 1.0, 4.0], ids=lambda s: f"s_phi={s}")
def cal_by_s_phi(request, spec):
    return calibrate_gamma(spec, coupling_for_s_phi(spec, request.param))


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[n])
