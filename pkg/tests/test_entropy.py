"""
Unit tests for entropy and pressure functionals
"""

import math
import sys
import unittest
from pathlib import Path

import numpy as np
import pandas as pd
from hypothesis import given, settings
from hypothesis import strategies as st

# Add src to path
sys.path.insert(0, str(Path(__file__).parent.parent))

from src.modules.classdyn import (
    ArcPartition,
    JacobianContext,
    Lebesgue,
    PeriodicOrbit,
    ToralAutomorphism,
    periodic_orbit_measure,
)
from src.modules.entropy import (
    af_density_matrix,
    af_entropy,
    classical_pressure,
    classical_refined_entropy,
    decay_exponent,
    eta,
    fit_linear,
    fit_lower_hn,
    ks_entropy_estimate,
    pressure,
    quantum_entropy,
    quantum_pressure,
    semiclassical_bounds,
    shannon_entropy,
    smoothed_lebesgue_weights,
    sz_instrument_weights,
)
from src.modules.numkernel import CapExceededError
from src.modules.qpartitions import build_smooth_partition, quantize_partition, refined_weights
from src.modules.quantization import QuantumTorusSpace, cat_propagator

CAT = ToralAutomorphism.cat_map()
LOG_LAMBDA = CAT.log_lambda


class TestShannon(unittest.TestCase):
    """Test eta, Shannon entropy and weighted pressure"""

    def test_eta(self):
        self.assertEqual(eta(0.0), 0.0)
        self.assertEqual(eta(1.0), 0.0)
        self.assertAlmostEqual(eta(1 / math.e), 1 / math.e)
        with self.assertRaises(ValueError):
            eta(-0.1)

    def test_uniform(self):
        self.assertAlmostEqual(shannon_entropy(np.full(8, 1 / 8)), math.log(8), places=12)

    def test_subprobability_allowed(self):
        self.assertAlmostEqual(shannon_entropy([0.5]), 0.5 * math.log(2))

    def test_rejects_excess_mass(self):
        with self.assertRaises(ValueError):
            shannon_entropy([0.7, 0.7])

    def test_unit_pressure_weights_give_entropy(self):
        w = np.array([0.1, 0.2, 0.7])
        self.assertAlmostEqual(pressure(w, np.ones(3)), shannon_entropy(w), places=14)

    def test_pressure_weight_term(self):
        w = np.array([0.5, 0.5])
        v = np.array([math.e ** -1, math.e ** -1])
        self.assertAlmostEqual(pressure(w, v), math.log(2) + 2.0, places=12)

    def test_pressure_aligns_labels(self):
        w = pd.Series({"1.1": 0.25, "1.2": 0.75})
        v = pd.Series({"1.2": 1.0, "1.1": 0.5})
        expected = shannon_entropy([0.25, 0.75]) - 2 * 0.25 * math.log(0.5)
        self.assertAlmostEqual(pressure(w, v), expected, places=12)

    def test_pressure_label_mismatch(self):
        with self.assertRaises(ValueError):
            pressure(pd.Series({"1": 1.0}), pd.Series({"2": 1.0}))
        with self.assertRaises(ValueError):
            pressure([0.5, 0.5], [1.0])

    def test_pressure_rejects_nonpositive_weights(self):
        with self.assertRaises(ValueError):
            pressure([0.5, 0.5], [1.0, 0.0])

    def test_decay_exponent(self):
        self.assertAlmostEqual(decay_exponent([0.25] * 4, 2), math.log(2))
        self.assertEqual(decay_exponent([0.0, 0.0], 3), math.inf)


class TestClassicalEntropy(unittest.TestCase):
    """Test refined entropies and KS estimates of invariant measures"""

    def test_origin_has_zero_entropy(self):
        est = ks_entropy_estimate(PeriodicOrbit.fixed_origin(), CAT, ArcPartition.uniform_arcs(4), 6)
        self.assertTrue(all(h == 0.0 for h in est.entropies))
        self.assertEqual(est.difference_estimate, 0.0)
        self.assertEqual(est.max_weight, 1.0)

    def test_periodic_orbit_entropy_saturates(self):
        orbit = periodic_orbit_measure(CAT, 5)
        est = ks_entropy_estimate(orbit, CAT, ArcPartition.uniform_arcs(8), 12)
        self.assertLessEqual(max(est.entropies), math.log(len(orbit.points)) + 1e-12)
        self.assertLessEqual(abs(est.difference_estimate), 1e-12)

    def test_lebesgue_first_step(self):
        h1 = classical_refined_entropy(Lebesgue(), CAT, ArcPartition.uniform_arcs(4), 1, grid_size=64)
        self.assertAlmostEqual(h1, math.log(4), places=10)

    def test_lebesgue_difference_near_exponent(self):
        est = ks_entropy_estimate(Lebesgue(), CAT, ArcPartition.uniform_arcs(4), 6, grid_size=512, tol=1e-3)
        self.assertAlmostEqual(est.difference_estimate, LOG_LAMBDA, delta=0.1)
        self.assertLessEqual(est.subadditivity_violation, 1e-3)
        self.assertTrue(est.ratio_monotone)
        self.assertGreaterEqual(est.inf_ratio, est.difference_estimate - 0.1)

    def test_rejects_depth_zero(self):
        with self.assertRaises(ValueError):
            classical_refined_entropy(Lebesgue(), CAT, ArcPartition.uniform_arcs(2), 0)

    def test_origin_pressure(self):
        context = JacobianContext(CAT, ArcPartition.uniform_arcs(4))
        for n in (1, 3, 5):
            self.assertAlmostEqual(
                classical_pressure(PeriodicOrbit.fixed_origin(), context, n), -(n - 1) * LOG_LAMBDA, places=12
            )

    def test_semiclassical_bounds(self):
        bounds = semiclassical_bounds(Lebesgue(), CAT)
        self.assertAlmostEqual(bounds["ruelle"], LOG_LAMBDA)
        self.assertAlmostEqual(bounds["main_bound"], 0.5 * LOG_LAMBDA)
        self.assertAlmostEqual(bounds["earlier_bound"], 0.5 * LOG_LAMBDA)
        self.assertAlmostEqual(bounds["conjectured_bound"], 0.5 * LOG_LAMBDA)

    def test_smoothed_weights_are_probabilities(self):
        sp = build_smooth_partition(4, None, 1 / 32)
        w = smoothed_lebesgue_weights(sp, CAT, 3, grid_size=128)
        self.assertAlmostEqual(w.sum(), 1.0, places=10)
        self.assertTrue(np.all(w >= 0.0))

    def test_smoothed_weights_cap(self):
        sp = build_smooth_partition(4, 0.25, 0.0)
        with self.assertRaises(CapExceededError):
            smoothed_lebesgue_weights(sp, CAT, 4, cap=100)


class TestQuantumEntropy(unittest.TestCase):
    """Test refined quantum entropies and the history density matrix"""

    def setUp(self):
        self.space = QuantumTorusSpace(16)
        self.U = cat_propagator(self.space, CAT)
        self.qp = quantize_partition(self.space, build_smooth_partition(4, None, 1 / 16))
        self.psi = self.space.random_state(np.random.default_rng(3))

    def test_single_cell_has_zero_entropy(self):
        qp = quantize_partition(self.space, build_smooth_partition(1, 1.0, 0.0))
        self.assertAlmostEqual(quantum_entropy(self.psi, qp, self.U, 3), 0.0, places=10)

    def test_entropy_bounded_by_sequence_count(self):
        h = quantum_entropy(self.psi, self.qp, self.U, 3)
        self.assertGreaterEqual(h, 0.0)
        self.assertLessEqual(h, 3 * math.log(4) + 1e-12)

    def test_unit_pressure_is_entropy(self):
        self.assertAlmostEqual(
            quantum_pressure(self.psi, self.qp, self.U, 2),
            quantum_entropy(self.psi, self.qp, self.U, 2),
            places=14,
        )

    def test_instrument_weights_of_pure_state(self):
        np.testing.assert_allclose(
            sz_instrument_weights(self.psi, self.qp, self.U, 2),
            refined_weights(self.psi, self.qp, self.U, 2).weights,
            atol=1e-14,
        )

    def test_instrument_weights_of_mixed_state(self):
        rho = np.eye(16) / 16
        w = sz_instrument_weights(rho, self.qp, self.U, 2)
        self.assertAlmostEqual(w.sum(), 1.0, places=10)

    def test_history_matrix(self):
        rho_n = af_density_matrix(self.psi, self.qp, self.U, 2)
        self.assertEqual(rho_n.shape, (16, 16))
        np.testing.assert_allclose(rho_n, rho_n.conj().T, atol=1e-13)
        self.assertAlmostEqual(np.trace(rho_n).real, 1.0, places=12)
        self.assertGreaterEqual(np.linalg.eigvalsh(rho_n).min(), -1e-12)
        np.testing.assert_allclose(
            np.diag(rho_n).real, refined_weights(self.psi, self.qp, self.U, 2).weights, atol=1e-13
        )

    def test_history_matrix_cap(self):
        with self.assertRaises(CapExceededError):
            af_density_matrix(self.psi, self.qp, self.U, 3, cap=16)

    def test_dual_gram_matches_direct(self):
        direct = af_entropy(self.psi, self.qp, self.U, 2)
        dual = af_entropy(self.psi, self.qp, self.U, 2, cap=1)
        self.assertAlmostEqual(direct, dual, places=9)

    def test_pure_state_capped_by_dimension(self):
        self.assertLessEqual(af_entropy(self.psi, self.qp, self.U, 4), math.log(16) + 1e-9)

    def test_diagonal_entropy_dominates(self):
        h_af = af_entropy(self.psi, self.qp, self.U, 2)
        self.assertLessEqual(h_af, quantum_entropy(self.psi, self.qp, self.U, 2) + 1e-9)


class TestFits(unittest.TestCase):

    def test_fit_linear(self):
        slope, intercept = fit_linear([1, 2, 3, 4], [2.5, 4.0, 5.5, 7.0])
        self.assertAlmostEqual(slope, 1.5)
        self.assertAlmostEqual(intercept, 1.0)

    def test_shifted_intercept(self):
        fit = fit_lower_hn([1, 2, 3], [1.0, 2.0, 3.0], 64)
        self.assertAlmostEqual(fit["slope"], 1.0)
        self.assertAlmostEqual(fit["shifted_intercept"], fit["intercept"] + 0.5 * math.log(2 * math.pi * 64))


@settings(max_examples=40, deadline=None)
@given(st.lists(st.floats(min_value=0.0, max_value=1.0), min_size=1, max_size=30))
def test_entropy_bounded_by_log_support(raw):
    total = sum(raw)
    if total == 0.0:
        return
    w = np.asarray(raw) / total
    h = shannon_entropy(w)
    assert -1e-12 <= h <= math.log(len(raw)) + 1e-9
