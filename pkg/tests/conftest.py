import numpy as np
import pytest

from rabipiston.config import SystemParams
from rabipiston.piston import StationarySurface, default_surface


@pytest.fixture(scope="session")
def coarse():
    """512-point grid: same physics, fast enough for many ground-state solves."""
    return SystemParams(n_points=512)


@pytest.fixture(scope="session")
def defaults():
    return SystemParams()


@pytest.fixture(scope="session")
def surface():
    return default_surface()


def synthetic_surface(na=12, nphi=10, a_range=(1.5, 1.95), phi_range=(-0.7, 2.3)):
    """Analytic stand-in for the stationary table with P = -dE/da exactly."""
    a = np.linspace(*a_range, na)
    phi = np.linspace(*phi_range, nphi)
    A, F = np.meshgrid(a, phi, indexing="ij")
    e = 4.0 / A**2 + 0.3 * A * np.cos(F) + 0.1 * np.sin(F)
    p = 8.0 / A**3 - 0.3 * np.cos(F)
    s = -np.cos(F) * A / 2
    return StationarySurface(a, phi, e, p, s)


# one line per acceptance criterion, printed after the run whatever the outcome
ACCEPTANCE_LINES: list[str] = []


def report(criterion: str, ok: bool, detail: str) -> bool:
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {criterion}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return ok


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
