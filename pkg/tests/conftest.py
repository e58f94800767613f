import numpy as np
import pytest

from gpflow import GridSpec, PhysicsParams, WaveField, l2_norm

CASE1 = dict(k11=100.0, k12=94.0, k22=97.0, beta=-5.0, omega1=0.5, omega2=0.5)
CASE2 = dict(k11=8.1, k12=-0.94, k22=7.9, beta=0.2, omega1=0.5, omega2=0.5)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def random_field(rng, g, normalized=False):
    shape = (2, g.n, g.n)
    f = WaveField(g, rng.standard_normal(shape) + 1j * rng.standard_normal(shape))
    return f / l2_norm(f) if normalized else f


def random_params(rng, nonneg=False, rotation=True):
    k = rng.uniform(0, 50, 3) if nonneg else rng.uniform(-20, 50, 3)
    om = rng.uniform(0, 0.9, 2) if rotation else (0.0, 0.0)
    return PhysicsParams(k11=k[0], k12=k[1], k22=k[2], beta=rng.uniform(-3, 3),
                         omega1=om[0], omega2=om[1])


def gaussian_start(g, vortex=False):
    X, Y = g.mesh()
    G = np.exp(-(X ** 2 + Y ** 2) / 2) / np.sqrt(2 * np.pi)
    if vortex:
        G = (X + 1j * Y) * G
    psi = WaveField.from_components(g, G, G)
    return psi / l2_norm(psi)


@pytest.fixture
def small_grid():
    return GridSpec(1.75, 0.25)  # 13 x 13 interior


@pytest.fixture
def tiny_grid():
    return GridSpec(1.0, 2.0 / 7.0)  # 6 x 6 interior


# one line per acceptance criterion, echoed in the terminal summary
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
