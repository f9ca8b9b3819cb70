"""Tests for the Pauli-basis algebra."""

import numpy as np
import pytest
from scipy.linalg import expm

from spinqdd.physics.pauli import PauliCoeffs, exp_spin, pauli_commutator, pauli_mul, pauli_trace_inner


def random_coeffs(rng, shape=(50,)):
    data = rng.normal(size=(4,) + shape) + 1j * rng.normal(size=(4,) + shape)
    return PauliCoeffs(data)


class TestPauliProduct:
    """Products in the Pauli basis agree with explicit 2x2 matrices."""

    def test_sigma1_sigma2_is_i_sigma3(self):
        product = pauli_mul(PauliCoeffs.sigma(1), PauliCoeffs.sigma(2))
        np.testing.assert_allclose(product.data, (1j * PauliCoeffs.sigma(3)).data)

    def test_matches_matrix_product(self, rng, tolerances):
        a, b = random_coeffs(rng), random_coeffs(rng)
        expected = a.to_matrix() @ b.to_matrix()
        assert np.max(np.abs(pauli_mul(a, b).to_matrix() - expected)) < tolerances.pauli * 100

    def test_associative(self, rng, tolerances):
        a, b, c = random_coeffs(rng), random_coeffs(rng), random_coeffs(rng)
        left = pauli_mul(pauli_mul(a, b), c)
        right = pauli_mul(a, pauli_mul(b, c))
        assert (left - right).max_abs() < tolerances.pauli * 1000

    def test_commutator_of_sigmas(self):
        comm = pauli_commutator(PauliCoeffs.sigma(1), PauliCoeffs.sigma(2))
        np.testing.assert_allclose(comm.data, (2j * PauliCoeffs.sigma(3)).data)

    def test_trace_inner(self, rng):
        a, b = random_coeffs(rng), random_coeffs(rng)
        expected = np.trace(a.to_matrix() @ b.to_matrix(), axis1=-2, axis2=-1)
        np.testing.assert_allclose(pauli_trace_inner(a, b), expected, rtol=1e-12)

    def test_matrix_conversion(self, rng):
        a = random_coeffs(rng)
        np.testing.assert_allclose(PauliCoeffs.from_matrix(a.to_matrix()).data, a.data, atol=1e-14)

    def test_rejects_wrong_leading_axis(self):
        with pytest.raises(ValueError):
            PauliCoeffs(np.zeros((3, 5)))


class TestSpinExponential:
    """exp(beta a.sigma) in closed form."""

    @pytest.mark.parametrize("beta", [0.3, 1.0, 2.5])
    def test_matches_expm(self, beta, tolerances):
        avec = np.array([0.3, -0.2, 0.5])
        expected = expm(beta * PauliCoeffs.from_parts(0.0, avec).to_matrix())
        got = exp_spin(beta, avec).to_matrix()
        assert np.max(np.abs(got - expected)) < tolerances.exp_spin

    def test_vectorized_over_grid(self, rng, tolerances):
        avec = rng.normal(size=(3, 4, 4))
        got = exp_spin(0.7, avec).to_matrix()
        for i in range(4):
            for j in range(4):
                expected = expm(0.7 * PauliCoeffs.from_parts(0.0, avec[:, i, j]).to_matrix())
                assert np.max(np.abs(got[i, j] - expected)) < tolerances.exp_spin

    def test_small_vector_uses_series(self):
        avec = np.array([1e-10, 0.0, 0.0])
        result = exp_spin(2.0, avec)
        assert result.s.real == pytest.approx(1.0)
        assert result.v[0].real == pytest.approx(2e-10, rel=1e-12)

    def test_zero_vector_is_identity(self):
        result = exp_spin(1.0, np.zeros(3))
        np.testing.assert_allclose(result.data, PauliCoeffs.identity().data)
