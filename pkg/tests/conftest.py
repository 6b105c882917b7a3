import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from cavity_spectra import build_box_mesh, gauss_rule

settings.register_profile(
    "default",
    deadline=None,
    max_examples=40,
    suppress_health_check=[HealthCheck.too_slow, HealthCheck.function_scoped_fixture],
)
settings.load_profile("default")

PI = np.pi
CUBE = (PI, PI, PI)
ANISO_BOX = (PI, 1.1 * PI, 1.3 * PI)


@pytest.fixture(scope="session")
def rule():
    return gauss_rule(5)


@pytest.fixture(scope="session")
def cube4():
    return build_box_mesh(CUBE, 4)


@pytest.fixture(scope="session")
def cube6():
    return build_box_mesh(CUBE, 6)


@pytest.fixture(scope="session")
def cube8():
    return build_box_mesh(CUBE, 8)


# acceptance criteria register their outcome here; printed after the run
ACCEPTANCE = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        parts = ACCEPTANCE[number]
        ok = all(p["ok"] for p in parts)
        detail = "; ".join(f"{p['name']}: {'pass' if p['ok'] else 'FAIL'} ({p['detail']})" for p in parts)
        terminalreporter.write_line(f"criterion {number:2d} {'PASS' if ok else 'FAIL'}  {detail}")
