import numpy as np
import pytest

from sllg import Anisotropy, InitialDatum, ModelParams, NoiseChannel, build_basis

ACCEPTANCE_LINES = []


def two_channels():
    return (NoiseChannel("cosine", (1.0, 0.0, 0.0), 0.5, 1),
            NoiseChannel("constant", (0.0, 0.6, 0.8), 0.7))


def spherical_initial():
    return InitialDatum("spherical", azimuth=(0.3, 0.8), polar=(1.2, 0.4))


def full_model(n_modes=16, length=np.pi, lambda1=1.0, lambda2=0.5, strength=0.5):
    return ModelParams(build_basis(length, n_modes), lambda1, lambda2,
                       Anisotropy.uniaxial(strength), two_channels(), spherical_initial())


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def model16():
    return full_model()


@pytest.fixture
def acceptance_report():
    def report(number, passed, detail):
        ACCEPTANCE_LINES.append(f"criterion {number:2d}: {'PASS' if passed else 'FAIL'}  {detail}")
        return passed

    return report


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split(":")[0].split()[1])):
            terminalreporter.write_line(line)
