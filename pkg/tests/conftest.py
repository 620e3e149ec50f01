import numpy as np
import pytest

from lipslr import _kernels

KERNEL_BACKENDS = ["python"] + (["native"] if _kernels.native is not None else [])


@pytest.fixture(params=KERNEL_BACKENDS)
def kernel_backend(request):
    prev = _kernels.set_backend(request.param)
    yield request.param
    _kernels.set_backend(prev)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


ACCEPTANCE_LINES: dict = {}


class _Recorder:
    def __init__(self, number):
        self.number = number
        self.done = False

    def __call__(self, ok: bool, detail: str) -> bool:
        ACCEPTANCE_LINES[self.number] = f"criterion {self.number:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
        self.done = True
        return ok


@pytest.fixture
def criterion(request):
    """Recorder for the acceptance summary; the test's ``number`` marker names the criterion."""
    number = request.node.get_closest_marker("criterion").args[0]
    rec = _Recorder(number)
    yield rec
    if not rec.done:
        rec(False, "raised before reporting")


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n): acceptance criterion number")


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for k in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[k])
