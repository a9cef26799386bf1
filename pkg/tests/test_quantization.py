"""
Unit tests for the quantum torus: translations, propagator, Egorov checks
and Wigner elements
"""

import cmath
import math
import sys
import unittest
from pathlib import Path

import numpy as np

# Add src to path
sys.path.insert(0, str(Path(__file__).parent.parent))

from src.modules.classdyn import ToralAutomorphism
from src.modules.numkernel import unitarity_defect
from src.modules.quantization import (
    EGOROV_TOL,
    Observable,
    QuantumTorusSpace,
    apply_translation,
    cat_propagator,
    egorov_certificate,
    egorov_defect,
    ehrenfest_time,
    first_ehrenfest_time,
    intertwining_defect,
    propagator_power,
    quantize_observable,
    quantum_ergodicity_average,
    weyl_translation,
    wigner_element,
)

CAT = ToralAutomorphism.cat_map()


class TestQuantumTorusSpace(unittest.TestCase):

    def test_rejects_odd_dimension(self):
        with self.assertRaises(ValueError):
            QuantumTorusSpace(7)

    def test_hbar(self):
        self.assertAlmostEqual(QuantumTorusSpace(10).hbar, 1 / (20 * math.pi))


class TestTranslations(unittest.TestCase):
    """Test Weyl translations T(n, m)"""

    def setUp(self):
        self.space = QuantumTorusSpace(12)

    def test_unitary(self):
        for n, m in [(1, 0), (0, 1), (3, -2), (5, 7)]:
            self.assertLess(unitarity_defect(weyl_translation(self.space, n, m)), 1e-12)

    def test_commutation_relation(self):
        N = self.space.N
        for (n, m), (n2, m2) in [((1, 0), (0, 1)), ((2, 3), (-1, 4))]:
            T1 = weyl_translation(self.space, n, m)
            T2 = weyl_translation(self.space, n2, m2)
            phase = cmath.exp(2j * math.pi * (n2 * m - n * m2) / N)
            np.testing.assert_allclose(T1 @ T2, phase * T2 @ T1, atol=1e-12)

    def test_apply_matches_matrix(self):
        rng = np.random.default_rng(0)
        psi = self.space.random_state(rng)
        np.testing.assert_allclose(
            apply_translation(self.space, 3, 5, psi), weyl_translation(self.space, 3, 5) @ psi, atol=1e-13
        )

    def test_real_observable_is_hermitian(self):
        a = Observable({(1, 2): 0.3 + 0.1j, (-1, -2): 0.3 - 0.1j, (0, 0): 1.0})
        self.assertTrue(a.is_real())
        H = quantize_observable(self.space, a)
        np.testing.assert_allclose(H, H.conj().T, atol=1e-13)


class TestCatPropagator(unittest.TestCase):
    """Test the quantized cat map"""

    def test_unitary_for_even_N(self):
        for N in (8, 16, 64, 128):
            U = cat_propagator(QuantumTorusSpace(N), CAT)
            self.assertLess(unitarity_defect(U), 1e-10)

    def test_exact_intertwining(self):
        space = QuantumTorusSpace(32)
        U = cat_propagator(space, CAT)
        self.assertLess(egorov_certificate(space, CAT, U, max_index=3), 1e-9)

    def test_intertwining_of_powers(self):
        space = QuantumTorusSpace(16)
        U = cat_propagator(space, CAT)
        Ut = propagator_power(U, 3)
        self.assertLess(intertwining_defect(space, CAT, Ut, 1, 2, t=3), 1e-9)

    def test_wrong_map_fails_intertwining(self):
        space = QuantumTorusSpace(16)
        U = cat_propagator(space, CAT)
        self.assertGreater(intertwining_defect(space, CAT, U.conj().T, 1, 0), 1e-3)

    def test_negative_power(self):
        U = cat_propagator(QuantumTorusSpace(10), CAT)
        np.testing.assert_allclose(propagator_power(U, -2) @ propagator_power(U, 2), np.eye(10), atol=1e-12)


class TestEgorov(unittest.TestCase):
    """Test the observable-level Egorov defect"""

    def test_machine_exact_for_cat_map(self):
        space = QuantumTorusSpace(16)
        U = cat_propagator(space, CAT)
        for t in (1, 2, 3):
            self.assertLess(egorov_defect(space, U, CAT, Observable.cosine_position(), t), EGOROV_TOL)

    def test_machine_exact_at_ehrenfest_time(self):
        for N in (64, 128):
            space = QuantumTorusSpace(N)
            U = cat_propagator(space, CAT)
            t = ehrenfest_time(N, CAT)
            self.assertGreaterEqual(t, 5)
            self.assertLessEqual(egorov_defect(space, U, CAT, Observable.cosine_position(), t), EGOROV_TOL)

    def test_zero_time(self):
        space = QuantumTorusSpace(8)
        U = cat_propagator(space, CAT)
        self.assertEqual(egorov_defect(space, U, CAT, Observable.cosine_position(), 0), 0.0)

    def test_compose_moves_coefficients(self):
        a = Observable.translation(1, 0).compose(CAT, 1)
        self.assertEqual(a.coeffs, {(2, 1): 1.0})


class TestWignerElements(unittest.TestCase):

    def test_basis_state(self):
        space = QuantumTorusSpace(16)
        for k in (0, 3, 8):
            value = wigner_element(space.basis_state(k), Observable.cosine_position(), space)
            self.assertAlmostEqual(value.real, math.cos(2 * math.pi * k / 16), places=12)
            self.assertAlmostEqual(value.imag, 0.0, places=12)

    def test_constant_observable(self):
        psi = QuantumTorusSpace(8).random_state(np.random.default_rng(1))
        self.assertAlmostEqual(wigner_element(psi, Observable.constant(2.0)), 2.0)

    def test_rejects_unnormalized(self):
        with self.assertRaises(ValueError):
            wigner_element(np.ones(4), Observable.constant())

    def test_quantum_ergodicity_average_nonnegative(self):
        space = QuantumTorusSpace(16)
        U = cat_propagator(space, CAT)
        value = quantum_ergodicity_average(space, U, Observable.cosine_position())
        self.assertGreaterEqual(value, 0.0)
        self.assertLessEqual(value, 1.0)


class TestEhrenfestTime(unittest.TestCase):

    def test_known_values(self):
        self.assertEqual(ehrenfest_time(8, CAT), 3)
        self.assertEqual(ehrenfest_time(64, CAT), 5)
        self.assertEqual(ehrenfest_time(128, CAT), 6)
        self.assertEqual(ehrenfest_time(256, CAT), 7)

    def test_first_ehrenfest_time_dominates(self):
        for N in (16, 128, 1024):
            self.assertLessEqual(ehrenfest_time(N, CAT), first_ehrenfest_time(N, CAT))

    def test_rejects_bad_delta(self):
        with self.assertRaises(ValueError):
            ehrenfest_time(64, CAT, delta_prime=1.0)


if __name__ == "__main__":
    unittest.main()
