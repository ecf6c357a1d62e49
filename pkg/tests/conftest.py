import numpy as np
import pytest

from isomoment.curve import parse_spec, radial_profile, sample
from isomoment.offset import inradius

DISK = {"kind": "preset", "name": "disk", "R": 1}
ELLIPSE = {"kind": "preset", "name": "ellipse", "a": 2, "b": 1}
PEANUT = {"kind": "preset", "name": "peanut", "a0": 1, "c2": 0.7}

ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def disk():
    return sample(parse_spec(DISK))


@pytest.fixture(scope="session")
def ellipse():
    return sample(parse_spec(ELLIPSE))


@pytest.fixture(scope="session")
def peanut():
    return sample(parse_spec(PEANUT))


@pytest.fixture(scope="session")
def peanut_ri(peanut):
    return inradius(peanut)[0]


@pytest.fixture(scope="session")
def ellipse_ri(ellipse):
    return inradius(ellipse)[0]


def random_radial_spec(rng, modes=6, amplitude=0.35):
    """A random star-shaped Fourier curve; the radius stays above ``1 - amplitude``."""
    k = int(rng.integers(1, modes + 1))
    a = rng.normal(size=k)
    b = rng.normal(size=k)
    scale = amplitude / (np.abs(a).sum() + np.abs(b).sum())
    return parse_spec({"kind": "fourier_radial", "a0": 1.0, "cos_coeffs": list(a * scale),
                       "sin_coeffs": list(b * scale)})


def radial_func(a0, cos_coeffs, sin_coeffs):
    """``(pos, d1, d2)`` of the polar curve ``r(theta) (cos theta, sin theta)``."""
    def func(u):
        r, dr, ddr = radial_profile(a0, cos_coeffs, sin_coeffs, u)
        c, s = np.cos(u), np.sin(u)
        pos = np.stack((r * c, r * s), -1)
        d1 = np.stack((dr * c - r * s, dr * s + r * c), -1)
        d2 = np.stack((ddr * c - 2 * dr * s - r * c, ddr * s + 2 * dr * c - r * s), -1)
        return pos, d1, d2

    return func


def polar_curvature(r, dr, ddr):
    """Curvature of a polar curve, written out independently of the package."""
    return (r**2 + 2 * dr**2 - r * ddr) / (r**2 + dr**2) ** 1.5


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
