import numpy as np
import pytest

# criterion name -> (passed, detail), filled by test_acceptance.py
ACCEPTANCE = {}


def record(name, passed, detail=""):
    ACCEPTANCE[name] = (bool(passed), detail)
    return passed


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name, (passed, detail) in ACCEPTANCE.items():
        terminalreporter.write_line(f"{'PASS' if passed else 'FAIL'}  {name}  {detail}")


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def crandn(rng, *shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def random_hpd(rng, n, batch=(), loading=0.1):
    h = crandn(rng, *batch, n, n)
    return h @ np.conj(np.swapaxes(h, -1, -2)) / n + loading * np.eye(n)


def random_gamma(rng, n, batch=(), sel=0):
    g = crandn(rng, *batch, n) * 0.5
    g[..., sel] = 1.0
    return g
