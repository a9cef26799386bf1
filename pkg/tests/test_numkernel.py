"""
Unit tests for the dense linear algebra kernel
"""

import math
import sys
import unittest
from pathlib import Path

import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

# Add src to path
sys.path.insert(0, str(Path(__file__).parent.parent))

from src.modules.numkernel import (
    NegativeEigenvalueError,
    NotHermitianError,
    NotUnitaryError,
    hermitian_eig,
    operator_norm,
    random_isometry,
    random_unitary,
    set_default_eig_method,
    get_default_eig_method,
    hermitian_defect,
    unitarity_defect,
    unitary_eig,
    von_neumann_entropy,
)


def random_hermitian(d, rng):
    Z = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    return (Z + Z.conj().T) / 2


class TestHermitianEig(unittest.TestCase):
    """Test cyclic Jacobi and LAPACK backends"""

    def test_matches_lapack(self):
        rng = np.random.default_rng(3)
        H = random_hermitian(24, rng)
        jacobi = hermitian_eig(H, method="jacobi")
        lapack = hermitian_eig(H, method="lapack")
        np.testing.assert_allclose(jacobi.eigenvalues, lapack.eigenvalues, atol=1e-10)
        np.testing.assert_allclose(jacobi.reconstruct(), H, atol=1e-10)

    def test_eigenvectors_orthonormal(self):
        H = random_hermitian(16, np.random.default_rng(5))
        V = hermitian_eig(H).eigenvectors
        np.testing.assert_allclose(V.conj().T @ V, np.eye(16), atol=1e-10)

    def test_rejects_non_hermitian(self):
        H = np.array([[1.0, 2.0], [0.0, 1.0]])
        with self.assertRaises(NotHermitianError):
            hermitian_eig(H)

    def test_rejects_non_square(self):
        with self.assertRaises(ValueError):
            hermitian_eig(np.zeros((2, 3)))

    def test_hermitian_defect(self):
        H = random_hermitian(5, np.random.default_rng(12))
        self.assertLess(hermitian_defect(H), 1e-14)
        H[0, 1] += 0.5
        self.assertAlmostEqual(hermitian_defect(H), 0.5, places=12)

    def test_one_by_one(self):
        decomp = hermitian_eig(np.array([[2.5]]))
        self.assertAlmostEqual(decomp.eigenvalues[0], 2.5)

    def test_degenerate_spectrum(self):
        Q = random_unitary(6, np.random.default_rng(11))
        H = Q @ np.diag([1.0, 1.0, 1.0, 2.0, 2.0, 3.0]) @ Q.conj().T
        decomp = hermitian_eig(H)
        np.testing.assert_allclose(decomp.eigenvalues, [1, 1, 1, 2, 2, 3], atol=1e-10)
        np.testing.assert_allclose(decomp.reconstruct(), H, atol=1e-10)

    def test_default_method_switch(self):
        previous = get_default_eig_method()
        try:
            set_default_eig_method("lapack")
            self.assertEqual(get_default_eig_method(), "lapack")
            with self.assertRaises(ValueError):
                set_default_eig_method("qr")
        finally:
            set_default_eig_method(previous)


class TestUnitaryEig(unittest.TestCase):
    """Test the unitary eigendecomposition through Hermitian combinations"""

    def test_residual_and_orthonormality(self):
        U = random_unitary(20, np.random.default_rng(1))
        decomp = unitary_eig(U, seed=0)
        V = decomp.eigenvectors
        np.testing.assert_allclose(U @ V, V * decomp.eigenvalues, atol=1e-8)
        np.testing.assert_allclose(V.conj().T @ V, np.eye(20), atol=1e-8)
        np.testing.assert_allclose(np.abs(decomp.eigenvalues), 1.0, atol=1e-10)

    def test_sorted_by_eigenphase(self):
        decomp = unitary_eig(random_unitary(12, np.random.default_rng(2)), seed=0)
        phases = decomp.eigenphases
        self.assertTrue(np.all(np.diff(phases) >= 0))

    def test_degenerate_clusters_resolved(self):
        Q = random_unitary(8, np.random.default_rng(4))
        phases = np.exp(1j * np.array([0.3, 0.3, 0.3, 1.1, 1.1, 2.0, 2.0, 2.0]))
        U = Q @ np.diag(phases) @ Q.conj().T
        decomp = unitary_eig(U, seed=7)
        V = decomp.eigenvectors
        np.testing.assert_allclose(U @ V, V * decomp.eigenvalues, atol=1e-8)

    def test_polynomial_in_U_is_diagonalized(self):
        U = random_unitary(10, np.random.default_rng(6))
        V = unitary_eig(U, seed=0).eigenvectors
        P = U @ U + 2 * U
        D = V.conj().T @ P @ V
        off = D - np.diag(np.diag(D))
        self.assertLess(np.abs(off).max(), 1e-8)

    def test_rejects_non_unitary(self):
        with self.assertRaises(NotUnitaryError):
            unitary_eig(2 * np.eye(3), seed=0)

    def test_same_seed_same_output(self):
        U = random_unitary(9, np.random.default_rng(8))
        a = unitary_eig(U, seed=3).eigenvectors
        b = unitary_eig(U, seed=3).eigenvectors
        np.testing.assert_array_equal(a, b)


class TestOperatorNorm(unittest.TestCase):
    """Test power-iteration operator norm"""

    def test_matches_svd(self):
        rng = np.random.default_rng(9)
        A = rng.standard_normal((12, 7)) + 1j * rng.standard_normal((12, 7))
        expected = np.linalg.svd(A, compute_uv=False)[0]
        self.assertAlmostEqual(operator_norm(A), expected, delta=1e-8 * expected)

    def test_zero_matrix(self):
        self.assertEqual(operator_norm(np.zeros((4, 4))), 0.0)

    def test_unitary_has_norm_one(self):
        U = random_unitary(15, np.random.default_rng(10))
        self.assertAlmostEqual(operator_norm(U), 1.0, places=9)

    def test_rejects_nonpositive_tol(self):
        with self.assertRaises(ValueError):
            operator_norm(np.eye(2), tol=0.0)


class TestVonNeumannEntropy(unittest.TestCase):
    """Test von Neumann entropy of density matrices"""

    def test_pure_state(self):
        psi = np.array([1.0, 1.0j]) / math.sqrt(2)
        rho = np.outer(psi, psi.conj())
        self.assertAlmostEqual(von_neumann_entropy(rho), 0.0, places=10)

    def test_maximally_mixed(self):
        self.assertAlmostEqual(von_neumann_entropy(np.eye(8) / 8), math.log(8), places=10)

    def test_rejects_bad_trace(self):
        with self.assertRaises(ValueError):
            von_neumann_entropy(np.eye(2))

    def test_rejects_negative_eigenvalue(self):
        with self.assertRaises(NegativeEigenvalueError):
            von_neumann_entropy(np.diag([1.1, -0.1]))


class TestRandomMatrices(unittest.TestCase):
    """Test Haar unitaries and isometries"""

    def test_isometry(self):
        V = random_isometry(9, 4, np.random.default_rng(0))
        np.testing.assert_allclose(V.conj().T @ V, np.eye(4), atol=1e-12)

    def test_isometry_shape_check(self):
        with self.assertRaises(ValueError):
            random_isometry(2, 3, np.random.default_rng(0))

    def test_unitary(self):
        self.assertLess(unitarity_defect(random_unitary(16, np.random.default_rng(1))), 1e-12)


@settings(max_examples=25, deadline=None)
@given(st.integers(min_value=1, max_value=12), st.integers(min_value=0, max_value=2**31 - 1))
def test_jacobi_reconstructs_random_hermitian(d, seed):
    H = random_hermitian(d, np.random.default_rng(seed))
    decomp = hermitian_eig(H, method="jacobi")
    assert np.allclose(decomp.reconstruct(), H, atol=1e-9)
    assert np.all(np.diff(decomp.eigenvalues) >= -1e-12)


@settings(max_examples=20, deadline=None)
@given(st.integers(min_value=1, max_value=10), st.integers(min_value=0, max_value=2**31 - 1))
def test_entropy_within_dimension_bound(d, seed):
    rng = np.random.default_rng(seed)
    Z = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    rho = Z @ Z.conj().T
    rho /= np.trace(rho).real
    S = von_neumann_entropy(rho)
    assert -1e-12 <= S <= math.log(d) + 1e-9


if __name__ == "__main__":
    unittest.main()
