import numpy as np
import pytest

from relrep import _kernels
from relrep.core import EmbeddingSpace


@pytest.fixture(params=_kernels.available_backends())
def backend(request, monkeypatch):
    monkeypatch.setenv("RELREP_BACKEND", request.param)
    return request.param


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def gaussian_space(n, d, seed=0, name="g"):
    X = np.random.default_rng(seed).standard_normal((n, d))
    return EmbeddingSpace(name, [f"s{i:05d}" for i in range(n)], X)


def pytest_terminal_summary(terminalreporter):
    mod = __import__("sys").modules.get("test_acceptance")
    lines = getattr(mod, "VERDICTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
