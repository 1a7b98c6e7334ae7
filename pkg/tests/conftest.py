import numpy as np
import pytest

from wavefeas.constraints import ProblemSpec
from wavefeas.solvers import SolveConfig, two_stage_solve


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


@pytest.fixture(scope="session")
def spec_sym():
    return ProblemSpec.symmetric()


@pytest.fixture(scope="session")
def spec_card():
    return ProblemSpec.cardinal()


@pytest.fixture(scope="session")
def card_solution(spec_card):
    """A solved nearly-cardinal ensemble (M=6, D=1, gamma=0.5, P=1)."""
    rec = two_stage_solve(SolveConfig(spec=spec_card, algorithm="lt", seed=2))
    assert rec.solved
    return rec


def random_free(rng, M=6, scale=1.0):
    return scale * (rng.standard_normal((M // 2, 2, 2)) + 1j * rng.standard_normal((M // 2, 2, 2)))


def random_unitary(rng, n=None):
    """Haar-ish random unitary via QR of a complex Gaussian (independent of polar)."""
    shape = (2, 2) if n is None else (n, 2, 2)
    Z = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    Q, R = np.linalg.qr(Z)
    d = np.diagonal(R, axis1=-2, axis2=-1)
    return Q * (d / np.abs(d))[..., None, :]


# ---------------------------------------------------------------------------
# acceptance report: one line per criterion, printed at the end of the run

CRITERIA = []


def record_criterion(name, ok, detail):
    CRITERIA.append((name, bool(ok), detail))
    return ok


def pytest_terminal_summary(terminalreporter):
    if not CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for name, ok, detail in CRITERIA:
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {name}: {detail}")
