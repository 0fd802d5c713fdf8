import numpy as np
import pytest

from phononcool.model import ModelParams


@pytest.fixture
def fixture_params():
    """Canonical desk-scale instance, moderate coupling, rates in units of Omega."""
    return ModelParams(omega_ph=2.0, delta=1.0, rabi=1.0, g=0.3, gamma=0.05, gamma_c=0.01, kappa=0.5, nbar=1.0)


@pytest.fixture
def rng():
    return np.random.default_rng(20261016)


def random_density_matrix(rng, dim):
    a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    rho = a @ a.conj().T
    return rho / np.trace(rho).real


_ACCEPTANCE_LINES = []


@pytest.fixture
def report():
    """Record one acceptance verdict line; printed in the terminal summary."""

    def _report(name, passed, detail):
        _ACCEPTANCE_LINES.append(f"{'PASS' if passed else 'FAIL'}  {name}: {detail}")
        return passed

    return _report


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
