from __future__ import annotations

import numpy as np
import pytest

from mtscluster import _backend

try:
    from mtscluster import _core  # noqa: F401

    BACKENDS = ["cython", "python"]
except ImportError:  # extension not built
    BACKENDS = ["python"]


@pytest.fixture(params=BACKENDS)
def backend(request):
    """Run the test once per available kernel backend."""
    previous = _backend.BACKEND
    _backend.use(request.param)
    yield request.param
    _backend.use(previous)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


ACCEPTANCE: dict[int, tuple[bool, str]] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[n]
        terminalreporter.write_line(f"criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}")
