import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import random_minimum_phase, random_stable
from specgeo import FrequencyGrid, LaurentPolynomial, SampledSpectrum, ScalarRationalSpectrum, StateSpace
from specgeo.errors import (
    DimensionError,
    InvalidInputError,
    NotPositiveDefiniteError,
    PoleOnCircleError,
    SingularFeedthroughError,
    SingularResolventError,
)
from specgeo.rational import (
    add,
    evaluate,
    inverse,
    laurent_add,
    laurent_eval,
    laurent_multiply,
    laurent_roots,
    poles,
    sample,
    series,
    zeros,
)

# w1(z) = z/(z - 1/2) = 1/(1 - 0.5 z^{-1})
W1 = StateSpace.from_tf([1.0], [1.0, -0.5])


class TestStateSpace:
    def test_constant_system_ignores_z(self):
        G = StateSpace.constant([[3.0]])
        assert evaluate(G, 1j) == pytest.approx(np.array([[3.0]]))

    def test_evaluate_hand_values(self):
        assert evaluate(W1, 1.0)[0, 0] == pytest.approx(2.0)
        assert evaluate(W1, -1.0)[0, 0] == pytest.approx(2.0 / 3.0)

    def test_evaluate_at_pole(self):
        with pytest.raises(SingularResolventError):
            evaluate(W1, 0.5)

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionError):
            StateSpace(np.eye(2), np.ones((3, 1)), np.ones((1, 2)), np.zeros((1, 1)))

    def test_arrays_are_read_only(self):
        with pytest.raises(ValueError):
            W1.A[0, 0] = 3.0

    def test_stability_flag(self):
        assert W1.is_stable()
        assert not StateSpace.from_tf([1.0], [1.0, -1.0]).is_stable()

    def test_from_tf_matches_polynomial_ratio(self):
        G = StateSpace.from_tf([1.0, 0.3, -0.2], [1.0, -0.4, 0.1])
        z = np.exp(0.7j)
        expected = (1 + 0.3 / z - 0.2 / z**2) / (1 - 0.4 / z + 0.1 / z**2)
        assert evaluate(G, z)[0, 0] == pytest.approx(expected, rel=1e-12)

    def test_to_dict_round_trip_shape(self):
        d = W1.to_dict()
        assert set(d) == {"a", "b", "c", "d"}
        assert np.array(d["d"]).shape == (1, 1)


class TestSampling:
    def test_identity_on_four_points(self):
        vals = sample(StateSpace.identity(2), FrequencyGrid(4))
        assert vals.shape == (4, 2, 2)
        assert np.allclose(vals, np.eye(2))

    def test_hand_values_on_grid(self):
        g = FrequencyGrid(8)
        vals = sample(W1, g)[:, 0, 0]
        assert vals[g.N // 2] == pytest.approx(2.0)  # theta = 0
        assert vals[0] == pytest.approx(2.0 / 3.0)  # theta = -pi

    def test_pole_on_circle(self):
        with pytest.raises(PoleOnCircleError):
            sample(StateSpace.from_tf([1.0], [1.0, 1.0]), FrequencyGrid(16))

    def test_grid_points(self):
        g = FrequencyGrid(8)
        assert g.theta[0] == pytest.approx(-np.pi)
        assert np.allclose(np.diff(g.theta), 2 * np.pi / 8)

    def test_batched_matches_pointwise(self, rng):
        G = random_stable(rng, 6, 2, 3)
        g = FrequencyGrid(32)
        vals = sample(G, g)
        for k in (0, 7, 19):
            assert np.allclose(vals[k], evaluate(G, g.z[k]), rtol=1e-12, atol=1e-12)


class TestArithmetic:
    def test_series_is_product(self, rng):
        G1, G2 = random_stable(rng, 4, 2, 3), random_stable(rng, 3, 3, 2)
        zs = np.exp(1j * rng.uniform(-np.pi, np.pi, 16)) * rng.uniform(1.05, 2.0, 16)
        for z in zs:
            lhs = evaluate(series(G1, G2), z)
            rhs = evaluate(G1, z) @ evaluate(G2, z)
            assert np.linalg.norm(lhs - rhs) <= 1e-9 * np.linalg.norm(rhs)

    def test_add_is_sum(self, rng):
        G1, G2 = random_stable(rng, 2, 2), random_stable(rng, 3, 2)
        z = 1.3 * np.exp(0.4j)
        assert np.allclose(evaluate(add(G1, G2), z), evaluate(G1, z) + evaluate(G2, z))

    def test_inverse_of_constant(self):
        assert evaluate(inverse(StateSpace.constant([[2.0]])), 1.0)[0, 0] == pytest.approx(0.5)

    def test_inverse_of_first_order(self):
        # 1/(1 - 0.5 z^-1) inverts to 1 - 0.5 z^-1
        inv = inverse(W1)
        for z in (1.0, -1.0, 1j, 2.0):
            assert evaluate(inv, z)[0, 0] == pytest.approx(1 - 0.5 / z)

    def test_inverse_product_is_identity(self, rng):
        G = random_minimum_phase(rng, 3, 2)
        GI = series(G, inverse(G))
        vals = sample(GI, FrequencyGrid(16))
        assert np.max(np.abs(vals - np.eye(2))) < 1e-9

    def test_singular_feedthrough(self):
        G = StateSpace(np.array([[0.5]]), np.array([[1.0]]), np.array([[1.0]]), np.array([[0.0]]))
        with pytest.raises(SingularFeedthroughError):
            inverse(G)

    def test_poles_and_zeros(self):
        assert np.allclose(poles(W1), [0.5])
        assert np.allclose(zeros(W1), [0.0])
        ratio = StateSpace.from_tf([1.0, 1.0 / 3.0], [1.0, -0.5])
        assert np.allclose(poles(ratio), [0.5])
        assert np.allclose(zeros(ratio), [-1.0 / 3.0])
        assert poles(StateSpace.constant([[1.0]])).size == 0
        assert zeros(StateSpace.constant([[1.0]])).size == 0


class TestLaurent:
    def test_multiply_by_hand(self):
        p = LaurentPolynomial.from_z_inverse([2.0, 1.0])  # 2 + z^-1
        q = LaurentPolynomial([0.0, 2.0, 1.0])  # 2 + z, coeffs ordered (z^-1, 1, z)
        r = laurent_multiply(p, q)
        assert np.allclose(r.coeffs, [2.0, 5.0, 2.0])
        assert r.symmetric

    def test_add_zero(self):
        p = LaurentPolynomial([2.0, 5.0, 2.0])
        assert np.allclose(laurent_add(p, LaurentPolynomial([0.0])).coeffs, p.coeffs)

    def test_roots_by_quadratic_formula(self):
        r = np.sort_complex(laurent_roots(LaurentPolynomial([2.0, 5.0, 2.0])))
        assert np.allclose(r, [-2.0, -0.5])

    def test_autocorrelation(self):
        assert np.allclose(LaurentPolynomial.autocorrelation([1.0, -0.5]).coeffs, [-0.5, 1.25, -0.5])

    @settings(max_examples=50, deadline=None)
    @given(st.lists(st.floats(-3, 3), min_size=1, max_size=6))
    def test_symmetric_evaluates_real(self, b):
        p = LaurentPolynomial.autocorrelation(b)
        vals = laurent_eval(p, FrequencyGrid(64).theta)
        assert np.all(np.abs(np.imag(vals)) < 1e-12)

    @settings(max_examples=50, deadline=None)
    # repeated roots are only resolved to ~sqrt(eps), so roots are kept apart
    @given(st.lists(st.floats(0.05, 0.95), min_size=1, max_size=5, unique_by=lambda r: round(r, 1)),
           st.floats(0.5, 2.0))
    def test_roots_pair_reciprocally(self, radii, gain):
        b = gain * np.real(np.poly(-np.array(radii)))
        roots = laurent_roots(LaurentPolynomial.autocorrelation(b))
        for r in roots:
            assert np.min(np.abs(roots - 1.0 / r)) <= 1e-8 * max(1.0, abs(1.0 / r))


class TestSpectra:
    def test_scalar_spectrum_positive(self):
        with pytest.raises(NotPositiveDefiniteError):
            ScalarRationalSpectrum([1.0, 2.0, 1.0], [1.0])  # |1 + z^-1|^2 vanishes at pi

    def test_scalar_spectrum_values(self, phi1):
        assert phi1(np.array([0.0]))[0] == pytest.approx(4.0)
        assert phi1(np.array([np.pi]))[0] == pytest.approx(4.0 / 9.0)

    def test_sampled_rejects_non_hermitian(self):
        vals = np.tile(np.array([[1.0, 0.5], [0.0, 1.0]]), (4, 1, 1))
        with pytest.raises(InvalidInputError):
            SampledSpectrum(FrequencyGrid(4), vals)

    def test_sampled_rejects_indefinite(self):
        with pytest.raises(NotPositiveDefiniteError):
            SampledSpectrum(FrequencyGrid(4), np.array([1.0, -1.0, 1.0, 1.0]))

    def test_trace_integral_of_constant(self):
        S = SampledSpectrum(FrequencyGrid(16), np.tile(np.eye(3), (16, 1, 1)))
        assert S.trace_integral() == pytest.approx(3.0)
