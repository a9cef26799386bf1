"""
Unit tests for the weighted entropic uncertainty principle
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

from src.modules.classdyn import ArcPartition, JacobianContext, ToralAutomorphism
from src.modules.eup import (
    EupInstance,
    basis_projectors,
    check_eup,
    contraction_coefficient,
    corollary_instance,
    dft_matrix,
    jacobian_weight_table,
    jacobian_weights,
    maassen_uffink_report,
    random_instance,
    random_partition_of_unity,
    subadditivity_check,
    tempered_exponent,
)
from src.modules.numkernel import random_unitary, unitary_eig
from src.modules.qpartitions import build_smooth_partition, quantize_partition
from src.modules.quantization import QuantumTorusSpace, cat_propagator

CAT = ToralAutomorphism.cat_map()


class TestEupInstance(unittest.TestCase):
    """Test instance validation"""

    def setUp(self):
        self.rng = np.random.default_rng(0)
        self.pi = random_partition_of_unity(3, 4, self.rng)
        self.U = random_unitary(4, self.rng)

    def test_rejects_non_partition(self):
        bad = [2 * p for p in self.pi]
        with self.assertRaises(ValueError):
            EupInstance.unweighted(bad, self.pi, self.U)

    def test_rejects_non_isometry(self):
        with self.assertRaises(ValueError):
            EupInstance.unweighted(self.pi, self.pi, 2 * self.U)

    def test_rejects_nonpositive_weights(self):
        with self.assertRaises(ValueError):
            EupInstance(tuple(self.pi), tuple(self.pi), self.U, np.eye(4), np.array([1.0, 0.0, 1.0]), np.ones(3))

    def test_rejects_weight_length_mismatch(self):
        with self.assertRaises(ValueError):
            EupInstance(tuple(self.pi), tuple(self.pi), self.U, np.eye(4), np.ones(2), np.ones(3))

    def test_rejects_negative_epsilon(self):
        with self.assertRaises(ValueError):
            EupInstance.unweighted(self.pi, self.pi, self.U, epsilon=-1.0)


class TestCheckEup(unittest.TestCase):
    """Test both sides of the inequality on dense instances"""

    def test_dft_basis_state_is_tight(self):
        N = 8
        F = dft_matrix(N)
        psi = np.zeros(N, dtype=np.complex128)
        psi[0] = 1.0
        report = maassen_uffink_report(F, psi)
        self.assertAlmostEqual(report.c, 1 / math.sqrt(N), places=12)
        self.assertAlmostEqual(report.rhs, math.log(N), places=12)
        self.assertAlmostEqual(report.slack, 0.0, places=10)
        self.assertTrue(report.passed)

    def test_fast_path_matches_instance(self):
        rng = np.random.default_rng(1)
        U = random_unitary(6, rng)
        psi = rng.standard_normal(6) + 1j * rng.standard_normal(6)
        psi /= np.linalg.norm(psi)
        fast = maassen_uffink_report(U, psi)
        inst = EupInstance.unweighted(basis_projectors(6), basis_projectors(6), U)
        full = check_eup(inst, psi)
        self.assertAlmostEqual(fast.c, full.c, places=8)
        self.assertAlmostEqual(fast.slack, full.slack, places=8)

    def test_random_weighted_instances(self):
        rng = np.random.default_rng(2)
        for _ in range(10):
            inst, psi = random_instance(5, 3, rng)
            self.assertTrue(check_eup(inst, psi).passed)

    def test_random_instances_with_contraction(self):
        rng = np.random.default_rng(3)
        for _ in range(10):
            inst, psi = random_instance(4, 2, rng, with_O=True)
            report = check_eup(inst, psi)
            self.assertTrue(report.hypothesis_holds)
            self.assertTrue(report.passed)

    def test_violated_hypothesis_is_flagged(self):
        rng = np.random.default_rng(4)
        pi = random_partition_of_unity(2, 3, rng)
        inst = EupInstance.unweighted(pi, pi, np.eye(3, dtype=np.complex128), O=np.zeros((3, 3)), epsilon=1e-6)
        psi = np.array([1.0, 0.0, 0.0], dtype=np.complex128)
        self.assertFalse(check_eup(inst, psi, c=1.0).hypothesis_holds)

    def test_threaded_contraction_matches_serial(self):
        inst, _ = random_instance(4, 4, np.random.default_rng(5))
        self.assertAlmostEqual(contraction_coefficient(inst, workers=4), contraction_coefficient(inst), places=12)

    def test_rejects_unnormalized_state(self):
        inst, psi = random_instance(3, 2, np.random.default_rng(6))
        with self.assertRaises(ValueError):
            check_eup(inst, 2 * psi)

    def test_summary_row(self):
        inst, psi = random_instance(3, 2, np.random.default_rng(7))
        row = check_eup(inst, psi).summary_row()
        self.assertIn("slack", row)
        self.assertTrue(row["c_exhaustive"])


class TestJacobianWeights(unittest.TestCase):
    """Test the weights v_alpha = J^u_n(alpha)^{-1/2}"""

    def setUp(self):
        self.context = JacobianContext(CAT, ArcPartition.uniform_arcs(4))

    def test_single_symbol(self):
        np.testing.assert_allclose(jacobian_weights([(0,), (3,)], self.context), [1.0, 1.0])

    def test_constant_on_full_circle(self):
        table = jacobian_weight_table(self.context, 3)
        np.testing.assert_allclose(table, CAT.lambda_plus, rtol=1e-12)
        self.assertAlmostEqual(jacobian_weights([(1, 2, 0)], self.context)[0], table[0], places=12)

    def test_depth_zero(self):
        np.testing.assert_array_equal(jacobian_weight_table(self.context, 0), [1.0])

    def test_mixed_lengths_rejected(self):
        with self.assertRaises(ValueError):
            jacobian_weights([(0,), (0, 1)], self.context)

    def test_tempered_exponent(self):
        self.assertAlmostEqual(tempered_exponent(np.array([1.0, 2 * math.pi * 10]), 10), 1.0)


class TestCorollary(unittest.TestCase):
    """Test the instance built from refined quantum partitions"""

    def setUp(self):
        self.space = QuantumTorusSpace(8)
        self.U = cat_propagator(self.space, CAT)
        self.qp = quantize_partition(self.space, build_smooth_partition(2, None, 1 / 16))
        self.eigvecs = unitary_eig(self.U, seed=0).eigenvectors
        self.context = JacobianContext(CAT, ArcPartition.uniform_arcs(2))

    def test_unit_weights(self):
        for k in range(self.space.N):
            report = corollary_instance(self.eigvecs[:, k], self.qp, self.U, 2)
            self.assertTrue(report.c_exhaustive)
            self.assertTrue(report.passed)

    def test_jacobian_weights(self):
        report = corollary_instance(self.eigvecs[:, 0], self.qp, self.U, 2, "jacobian", self.context)
        self.assertTrue(report.passed)

    def test_jacobian_weights_need_context(self):
        with self.assertRaises(ValueError):
            corollary_instance(self.eigvecs[:, 0], self.qp, self.U, 2, "jacobian")

    def test_rejects_non_eigenvector(self):
        psi = self.space.random_state(np.random.default_rng(0))
        with self.assertRaises(ValueError):
            corollary_instance(psi, self.qp, self.U, 2)

    def test_sampled_mode_keeps_exact_pressures(self):
        psi = self.eigvecs[:, 1]
        exact = corollary_instance(psi, self.qp, self.U, 2)
        sampled = corollary_instance(psi, self.qp, self.U, 2, pair_cap=1, samples=64)
        self.assertFalse(sampled.c_exhaustive)
        self.assertAlmostEqual(sampled.pressure_pi, exact.pressure_pi, places=10)
        self.assertAlmostEqual(sampled.pressure_tau_of_Upsi, exact.pressure_tau_of_Upsi, places=10)
        self.assertLessEqual(sampled.c, exact.c + 1e-10)


class TestSubadditivity(unittest.TestCase):
    """Test pressure defects of refined weights"""

    def setUp(self):
        self.space = QuantumTorusSpace(16)
        self.U = cat_propagator(self.space, CAT)
        self.qp = quantize_partition(self.space, build_smooth_partition(4, None, 1 / 16))
        self.psi = self.space.random_state(np.random.default_rng(8))

    def test_zero_block(self):
        self.assertEqual(subadditivity_check(self.psi, self.qp, self.U, 2, 0), 0.0)

    def test_ehrenfest_limit(self):
        with self.assertRaises(ValueError):
            subadditivity_check(self.psi, self.qp, self.U, 2, 2, n_E=3)

    def test_unit_weights_bounded(self):
        R = subadditivity_check(self.psi, self.qp, self.U, 1, 1)
        self.assertLessEqual(abs(R), 2 * math.log(4) + 1e-9)

    def test_single_cell_has_no_defect(self):
        qp = quantize_partition(self.space, build_smooth_partition(1, 1.0, 0.0))
        self.assertAlmostEqual(subadditivity_check(self.psi, qp, self.U, 1, 2), 0.0, places=10)


@settings(max_examples=25, deadline=None)
@given(
    st.integers(min_value=2, max_value=5),
    st.integers(min_value=1, max_value=3),
    st.integers(min_value=0, max_value=2**31 - 1),
    st.booleans(),
)
def test_random_instances_never_violate(d, cardinality, seed, with_O):
    inst, psi = random_instance(d, cardinality, np.random.default_rng(seed), with_O=with_O)
    report = check_eup(inst, psi)
    assert report.slack >= -1e-9


if __name__ == "__main__":
    unittest.main()
