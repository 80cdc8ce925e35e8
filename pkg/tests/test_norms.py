import numpy as np
import pytest
from scipy.optimize import minimize_scalar

from conftest import random_stable
from specgeo import FrequencyGrid, StateSpace, h2_norm_sq, hinf_norm, linf_norm_grid
from specgeo.errors import PoleOnCircleError, UnstableSystemError
from specgeo.norms import solve_stein, unit_circle_crossings
from specgeo.rational import _freqresp, series

RATIO12 = StateSpace.from_tf([1.0, 1.0 / 3.0], [1.0, -0.5])  # (z + 1/3)/(z - 1/2)
RATIO21 = StateSpace.from_tf([1.0, -0.5], [1.0, 1.0 / 3.0])  # (z - 1/2)/(z + 1/3)


def _sigma(G, theta):
    return float(np.linalg.norm(_freqresp(G, np.exp(1j * np.atleast_1d(theta)))[0], 2))


def _local_peak(G, grid_size=8192):
    """Grid peak refined by bounded scalar maximization."""
    g = FrequencyGrid(grid_size)
    r = linf_norm_grid(G, g)
    h = 2 * np.pi / grid_size
    res = minimize_scalar(lambda t: -_sigma(G, t), bounds=(r.peak_frequency - h, r.peak_frequency + h),
                          method="bounded", options={"xatol": 1e-12})
    return max(r.value, -res.fun)


class TestGridNorm:
    def test_constant(self):
        assert linf_norm_grid(StateSpace.constant([[-3.0]]), FrequencyGrid(8)).value == pytest.approx(3.0)

    def test_worked_ratios(self):
        g = FrequencyGrid(4096)
        r12, r21 = linf_norm_grid(RATIO12, g), linf_norm_grid(RATIO21, g)
        assert r12.value == pytest.approx(8 / 3, rel=1e-12)
        assert r12.peak_frequency == pytest.approx(0.0)
        assert r21.value == pytest.approx(9 / 4, rel=1e-12)
        assert abs(r21.peak_frequency) == pytest.approx(np.pi)

    def test_pole_on_circle(self):
        with pytest.raises(PoleOnCircleError):
            linf_norm_grid(StateSpace.from_tf([1.0], [1.0, -1.0]), FrequencyGrid(16))


class TestHinf:
    def test_worked_ratios(self):
        assert hinf_norm(RATIO12, 1e-8).value == pytest.approx(8 / 3, rel=1e-8)
        assert hinf_norm(RATIO21, 1e-8).value == pytest.approx(9 / 4, rel=1e-8)

    def test_first_order_lowpass(self):
        # 1/(z - 1/2) = z^-1/(1 - 0.5 z^-1); peak 2 at theta = 0
        r = hinf_norm(StateSpace.from_tf([0.0, 1.0], [1.0, -0.5]))
        assert r.value == pytest.approx(2.0, rel=1e-8)
        assert r.peak_frequency == pytest.approx(0.0, abs=1e-6)

    def test_identity(self):
        assert hinf_norm(StateSpace.identity(3)).value == pytest.approx(1.0)

    def test_unstable(self):
        with pytest.raises(UnstableSystemError):
            hinf_norm(StateSpace.from_tf([1.0], [1.0, -1.2]))

    def test_interval_contains_value(self, rng):
        for _ in range(10):
            G = random_stable(rng, int(rng.integers(1, 8)), 2, 2)
            r = hinf_norm(G, 1e-8)
            lo, hi = r.certified_interval
            assert lo <= r.value <= hi
            assert hi - lo <= 1e-8 * max(1.0, lo)

    def test_agrees_with_dense_grid(self, rng):
        g = FrequencyGrid(2**16)
        for _ in range(20):
            G = random_stable(rng, int(rng.integers(1, 11)), int(rng.integers(1, 4)), int(rng.integers(1, 4)))
            assert hinf_norm(G).value == pytest.approx(linf_norm_grid(G, g).value, rel=1e-4)

    @pytest.mark.parametrize("radius", [0.98, 0.995, 0.999])
    def test_sharp_resonance(self, radius):
        # narrow peaks make the two crossings nearly coalesce; the level test
        # must still not certify an upper bound below the true peak
        w0 = 0.9
        res = StateSpace.from_tf([1.0], [1.0, -2 * radius * np.cos(w0), radius**2])
        G = series(res, StateSpace.from_tf([1.0, 0.4], [1.0, -0.3]))
        r = hinf_norm(G, 1e-8)
        peak = _local_peak(G)
        assert r.value == pytest.approx(peak, rel=1e-8)
        assert peak <= r.certified_interval[1] * (1 + 1e-8)

    def test_flat_peak_lower_bound_is_attained(self):
        # flat maximum at theta = 0: pencil eigenvalues sit within the unit-circle
        # tolerance just above the peak; 40-digit evaluation gives 13709.924897603093
        num = np.convolve([1.34586825], [1.0, -0.08279231, 0.1493565, -0.0620457])
        den = np.convolve([1.0, -1.87543487, 1.12139284, -0.21100706], [1.29728418, -0.99391442, 0.02698796])
        G = StateSpace.from_tf(num, den)
        peak = abs(np.polyval(num[::-1], 1.0) / np.polyval(den[::-1], 1.0))
        r = hinf_norm(G, 1e-11)
        assert r.value <= peak * (1 + 1e-12)
        assert r.value == pytest.approx(peak, rel=1e-11)
        lo, hi = r.certified_interval
        assert lo <= peak * (1 + 1e-12) and peak <= hi * (1 + 1e-12)

    def test_submultiplicative(self, rng):
        for _ in range(10):
            G1, G2 = random_stable(rng, 3, 2), random_stable(rng, 4, 2)
            lhs = hinf_norm(series(G1, G2)).value
            assert lhs <= hinf_norm(G1).value * hinf_norm(G2).value + 1e-8

    def test_crossings_below_and_above(self):
        assert unit_circle_crossings(RATIO12, 2.0).size > 0
        assert unit_circle_crossings(RATIO12, 3.0).size == 0


class TestH2:
    def test_identity(self):
        assert h2_norm_sq(StateSpace.identity(4)) == pytest.approx(4.0)

    def test_first_order(self):
        assert h2_norm_sq(StateSpace.from_tf([0.0, 1.0], [1.0, -0.5])) == pytest.approx(4 / 3, rel=1e-12)

    def test_worked_ratios(self):
        assert h2_norm_sq(RATIO12) == pytest.approx(52 / 27, rel=1e-12)
        assert h2_norm_sq(RATIO21) == pytest.approx(57 / 32, rel=1e-12)

    def test_matches_impulse_response_energy(self, rng):
        for _ in range(10):
            G = random_stable(rng, int(rng.integers(1, 6)), 2, 2, radius=0.9)
            # h_0 = D, h_k = C A^{k-1} B
            energy = np.sum(G.D**2)
            X = G.B.copy()
            for _ in range(10_000):
                energy += np.sum((G.C @ X) ** 2)
                X = G.A @ X
            assert h2_norm_sq(G) == pytest.approx(energy, rel=1e-8)

    def test_stein_solution(self, rng):
        G = random_stable(rng, 5, 1)
        P = solve_stein(G.A, G.B @ G.B.T)
        assert np.allclose(P, G.A @ P @ G.A.T + G.B @ G.B.T, atol=1e-12)
