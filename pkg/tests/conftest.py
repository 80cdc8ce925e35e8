"""Shared fixtures and random generators for the test suite."""
from __future__ import annotations

import sys

import numpy as np
import pytest

from specgeo import FactoredSpectrum, FrequencyGrid, ScalarFactor, ScalarRationalSpectrum, StateSpace
from specgeo.rational import zeros


# worked-example pair: phi1 = 4/(5 - 2z - 2z^-1), phi2 = 9/(3z + 10 + 3z^-1)
@pytest.fixture
def phi1():
    return ScalarRationalSpectrum([0.0, 4.0, 0.0], [-2.0, 5.0, -2.0])


@pytest.fixture
def phi2():
    return ScalarRationalSpectrum([0.0, 9.0, 0.0], [3.0, 10.0, 3.0])


@pytest.fixture
def grid():
    return FrequencyGrid(4096)


def random_stable(rng, n: int, p: int, m: int | None = None, radius: float = 0.9) -> StateSpace:
    """Random system with spectral radius at most ``radius``."""
    m = p if m is None else m
    if n == 0:
        return StateSpace.constant(rng.standard_normal((p, m)) + 2 * np.eye(p, m))
    A = rng.standard_normal((n, n))
    A *= rng.uniform(0.2, radius) / max(np.max(np.abs(np.linalg.eigvals(A))), 1e-12)
    B = rng.standard_normal((n, m))
    C = rng.standard_normal((p, n))
    D = rng.standard_normal((p, m)) + 2.0 * np.eye(p, m)
    return StateSpace(A, B, C, D)


def random_minimum_phase(rng, n: int, p: int, radius: float = 0.9, zero_radius: float = 0.9) -> StateSpace:
    """Square biproper system with poles and zeros inside ``radius``/``zero_radius``.

    Rejection sampling; ``C`` is shrunk on each failure, which pulls the
    zeros towards the poles.
    """
    while True:
        G = random_stable(rng, n, p, p, radius)
        scale = 1.0
        for _ in range(30):
            H = G.scaled(1.0) if scale == 1.0 else StateSpace(G.A, G.B, scale * G.C, G.D)
            if np.linalg.cond(H.D) < 1e3 and (n == 0 or np.max(np.abs(zeros(H))) < zero_radius):
                return H
            scale *= 0.7


def random_poly(rng, k: int, radius: float = 0.85) -> np.ndarray:
    """Monic real polynomial in ``z^{-1}`` with ``k`` roots inside ``radius``."""
    roots = []
    while len(roots) < k:
        if k - len(roots) >= 2 and rng.random() < 0.5:
            z = rng.uniform(0.1, radius) * np.exp(1j * rng.uniform(0.05, np.pi - 0.05))
            roots += [z, np.conj(z)]
        else:
            roots.append(rng.uniform(-radius, radius))
    return np.real(np.poly(roots)) if roots else np.array([1.0])


def random_scalar_factor(rng, max_num: int = 3, max_den: int = 3, radius: float = 0.85) -> FactoredSpectrum:
    b = rng.uniform(0.5, 2.0) * random_poly(rng, int(rng.integers(0, max_num + 1)), radius)
    a = random_poly(rng, int(rng.integers(1, max_den + 1)), radius)
    return FactoredSpectrum.from_scalar(ScalarFactor(b, a))


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(results):
        terminalreporter.write_line(mod._line(k))
