import numpy as np
import pytest

from sparserecovery.dictionaries import fourier
from sparserecovery.index_sets import full_cube
from sparserecovery.operator import SamplingOperator


def planted_fourier(seed, N_half=255, m=200, s=10, noise=0.0):
    """Fourier d=1 system with an s-sparse unit-magnitude planted vector."""
    rng = np.random.default_rng(seed)
    D = fourier(1)
    J = full_cube(N_half, 1)
    X = D.draw_samples(m, seed=rng.integers(2**32))
    A = SamplingOperator(D, J, X)
    z = np.zeros(len(J), complex)
    supp = rng.choice(len(J), s, replace=False)
    z[supp] = np.exp(2j * np.pi * rng.random(s))
    y = A.apply(z)
    if noise:
        y = y + noise * (rng.standard_normal(m) + 1j * rng.standard_normal(m)) / np.sqrt(2 * m)
    return A, y, z


@pytest.fixture
def planted():
    return planted_fourier


def pytest_terminal_summary(terminalreporter):
    from report import LINES

    if LINES:
        terminalreporter.section("acceptance criteria")
        for number in sorted(LINES):
            terminalreporter.write_line(LINES[number])
