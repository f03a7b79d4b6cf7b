import os

# Allow thread counts above the core count so determinism can be checked at 1/4/8 workers.
os.environ.setdefault("NUMBA_NUM_THREADS", "8")

import numpy as np  # noqa: E402
import pytest  # noqa: E402

from bcqd.kernels import kernel_make  # noqa: E402

KERNEL_NAMES = ["truncnormal", "rect", "epanechnikov"]

_acceptance_lines: list[str] = []


@pytest.fixture(params=KERNEL_NAMES)
def kernel(request):
    return kernel_make(request.param)


@pytest.fixture
def rng():
    return np.random.default_rng(20241015)


@pytest.fixture(scope="session")
def acceptance_log():
    return _acceptance_lines


def pytest_terminal_summary(terminalreporter):
    if _acceptance_lines:
        terminalreporter.section("acceptance criteria")
        for line in _acceptance_lines:
            terminalreporter.write_line(line)
