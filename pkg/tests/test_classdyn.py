"""
Unit tests for classical torus dynamics: automorphisms, partitions,
measures, cylinder weights and coarse Jacobians
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

from src.modules.classdyn import (
    ArcPartition,
    InvariantMeasure,
    JacobianContext,
    Lebesgue,
    Mixture,
    PeriodicOrbit,
    ToralAutomorphism,
    apply_map,
    coarse_jacobian_1,
    coarse_jacobian_n,
    coarse_ruelle_bound,
    cylinder_table,
    cylinder_tables,
    cylinder_weight,
    decode_symbols,
    encode_symbols,
    find_periodic_orbit,
    half_lebesgue_half_origin,
    periodic_orbit_measure,
    periodic_orbits,
    polygon_cylinder_weight,
    ruelle_bound,
    symbol_label,
)

CAT = ToralAutomorphism.cat_map()
LOG_LAMBDA = math.log((3 + math.sqrt(5)) / 2)


class TestToralAutomorphism(unittest.TestCase):
    """Test hyperbolic automorphisms"""

    def test_cat_map_exponent(self):
        self.assertAlmostEqual(CAT.log_lambda, LOG_LAMBDA, places=12)
        self.assertAlmostEqual(CAT.log_lambda, 0.9624236501, places=9)

    def test_rejects_non_unimodular(self):
        with self.assertRaises(ValueError):
            ToralAutomorphism(2, 1, 1, 2)

    def test_rejects_non_hyperbolic(self):
        with self.assertRaises(ValueError):
            ToralAutomorphism(1, 1, 0, 1)

    def test_matrix_power_inverse(self):
        M = CAT.matrix_power(3) @ CAT.matrix_power(-3)
        np.testing.assert_array_equal(M, np.eye(2, dtype=np.int64))

    def test_apply_map(self):
        x = apply_map(CAT, (0.25, 0.5))
        self.assertAlmostEqual(x[0], 0.0)
        self.assertAlmostEqual(x[1], 0.75)

    def test_apply_map_rejects_outside_torus(self):
        with self.assertRaises(ValueError):
            apply_map(CAT, (1.0, 0.0))


class TestSymbols(unittest.TestCase):
    """Test 0-based codes and 1-based labels"""

    def test_first_symbol_most_significant(self):
        self.assertEqual(encode_symbols((1, 0, 2), 3), 1 * 9 + 0 * 3 + 2)
        self.assertEqual(decode_symbols(11, 3, 3), (1, 0, 2))

    def test_rejects_out_of_range_symbol(self):
        with self.assertRaises(ValueError):
            encode_symbols((0, 4), 4)

    def test_label(self):
        self.assertEqual(symbol_label((0, 2, 1)), "1.3.2")


class TestArcPartition(unittest.TestCase):
    """Test arc partitions of the position circle"""

    def test_uniform(self):
        P = ArcPartition.uniform_arcs(4)
        self.assertEqual(P.K, 4)
        self.assertAlmostEqual(P.dia, 0.25)
        np.testing.assert_array_equal(P.index(np.array([0.0, 0.26, 0.5, 0.999])), [0, 1, 2, 3])

    def test_exact_index_on_boundaries(self):
        P = ArcPartition.uniform_arcs(8)
        np.testing.assert_array_equal(P.index_exact(np.arange(8), 8), np.arange(8))

    def test_rejects_bad_boundaries(self):
        with self.assertRaises(ValueError):
            ArcPartition((0.0, 0.5, 0.4, 1.0))
        with self.assertRaises(ValueError):
            ArcPartition((0.1, 1.0))

    def test_from_boundaries(self):
        P = ArcPartition.from_boundaries([0.7, 0.2])
        self.assertEqual(P.boundaries, (0.0, 0.2, 0.7, 1.0))
        np.testing.assert_array_equal(P.index(np.array([0.1, 0.2, 0.9])), [0, 1, 2])


class TestMeasures(unittest.TestCase):
    """Test invariant measures and their JSON form"""

    def test_periodic_orbit_is_invariant(self):
        orbit = periodic_orbit_measure(CAT, 5)
        self.assertTrue(orbit.is_invariant(CAT))
        self.assertEqual(len(find_periodic_orbit(CAT, 5)), len(orbit.points))

    def test_orbits_partition_the_lattice(self):
        orbits = periodic_orbits(CAT, 7)
        self.assertEqual(sum(len(o.points) for o in orbits), 49)
        self.assertIn(((0, 0),), [o.points for o in orbits])

    def test_orbit_denominator_cap(self):
        with self.assertRaises(ValueError):
            periodic_orbits(CAT, 65)

    def test_mixture_weights_must_sum_to_one(self):
        with self.assertRaises(ValueError):
            Mixture(((0.5, Lebesgue()), (0.4, PeriodicOrbit.fixed_origin())))

    def test_dict_round_trip(self):
        mu = half_lebesgue_half_origin()
        self.assertEqual(InvariantMeasure.from_dict(mu.to_dict()), mu)


class TestCylinderWeights(unittest.TestCase):
    """Test cylinder tables of atomic and Lebesgue measures"""

    def test_origin_sits_in_the_zero_cylinder(self):
        P = ArcPartition.uniform_arcs(4)
        tables = cylinder_tables(PeriodicOrbit.fixed_origin(), CAT, P, 5)
        for n, table in enumerate(tables, start=1):
            self.assertEqual(table.weight((0,) * n), 1.0)

    def test_periodic_tables_are_exact(self):
        P = ArcPartition.uniform_arcs(8)
        orbit = periodic_orbit_measure(CAT, 5)
        for table in cylinder_tables(orbit, CAT, P, 6):
            self.assertAlmostEqual(table.total(), 1.0, places=14)
            self.assertLessEqual(len(table.codes), len(orbit.points))

    def test_lebesgue_one_step_is_uniform(self):
        P = ArcPartition.uniform_arcs(4)
        table = cylinder_table(Lebesgue(), CAT, P, 1, grid_size=64)
        np.testing.assert_allclose(table.weights, 0.25, atol=1e-12)

    def test_lebesgue_matches_polygon_oracle(self):
        P = ArcPartition.uniform_arcs(4)
        table = cylinder_table(Lebesgue(), CAT, P, 3, grid_size=512, seed=1)
        for alpha in [(0, 0, 0), (1, 2, 3), (3, 1, 0), (2, 2, 1)]:
            self.assertAlmostEqual(table.weight(alpha), polygon_cylinder_weight(CAT, P, alpha), delta=2e-3)

    def test_polygon_oracle_sums_to_one(self):
        P = ArcPartition.uniform_arcs(3)
        total = sum(
            polygon_cylinder_weight(CAT, P, (a, b)) for a in range(3) for b in range(3)
        )
        self.assertAlmostEqual(total, 1.0, places=12)

    def test_marginals_are_shift_invariant(self):
        P = ArcPartition.uniform_arcs(4)
        table = cylinder_table(periodic_orbit_measure(CAT, 7), CAT, P, 4)
        np.testing.assert_allclose(table.drop_first().dense(), table.drop_last().dense(), atol=1e-14)

    def test_cylinder_weight_single_sequence(self):
        P = ArcPartition.uniform_arcs(2)
        w = cylinder_weight(half_lebesgue_half_origin(), CAT, P, (0, 0), samples=256 ** 2)
        self.assertGreater(w, 0.5)

    def test_same_seed_same_table(self):
        P = ArcPartition.uniform_arcs(4)
        a = cylinder_table(Lebesgue(), CAT, P, 4, grid_size=128, seed=3)
        b = cylinder_table(Lebesgue(), CAT, P, 4, grid_size=128, seed=3)
        np.testing.assert_array_equal(a.codes, b.codes)
        np.testing.assert_array_equal(a.weights, b.weights)


class TestJacobians(unittest.TestCase):
    """Test coarse unstable Jacobians and Ruelle bounds"""

    def test_all_transitions_allowed_on_full_circle(self):
        P = ArcPartition.uniform_arcs(4)
        for a0 in range(4):
            for a1 in range(4):
                self.assertAlmostEqual(coarse_jacobian_1(CAT, P, a0, a1), 1 / CAT.lambda_plus)

    def test_forbidden_transition_uses_fallback(self):
        P = ArcPartition.uniform_arcs(8)
        context = JacobianContext(CAT, P, R=5.0, momentum_window=(0.0, 0.05))
        values = [context.j1(0, a1) for a1 in range(8)]
        self.assertIn(math.exp(-5.0), values)

    def test_single_symbol_has_unit_jacobian(self):
        context = JacobianContext(CAT, ArcPartition.uniform_arcs(4))
        self.assertEqual(coarse_jacobian_n((2,), context), 1.0)

    def test_multiplicative(self):
        context = JacobianContext(CAT, ArcPartition.uniform_arcs(4))
        self.assertAlmostEqual(
            coarse_jacobian_n((0, 1, 2, 3), context),
            coarse_jacobian_n((0, 1), context) * coarse_jacobian_n((1, 2, 3), context),
            places=14,
        )

    def test_default_R(self):
        context = JacobianContext(CAT, ArcPartition.uniform_arcs(4))
        self.assertAlmostEqual(context.R, 20 * LOG_LAMBDA)

    def test_ruelle_bound(self):
        self.assertAlmostEqual(ruelle_bound(Lebesgue(), CAT), LOG_LAMBDA)
        self.assertAlmostEqual(ruelle_bound(PeriodicOrbit.fixed_origin(), CAT), LOG_LAMBDA)

    def test_coarse_ruelle_bound(self):
        context = JacobianContext(CAT, ArcPartition.uniform_arcs(4))
        value = coarse_ruelle_bound(PeriodicOrbit.fixed_origin(), context, n_o=4)
        self.assertAlmostEqual(value, 0.75 * LOG_LAMBDA, places=12)
        self.assertEqual(coarse_ruelle_bound(Lebesgue(), context, n_o=1, grid_size=32), 0.0)


@settings(max_examples=30, deadline=None)
@given(st.lists(st.integers(min_value=0, max_value=4), min_size=1, max_size=8))
def test_symbol_codes_invert(alpha):
    code = encode_symbols(alpha, 5)
    assert decode_symbols(code, len(alpha), 5) == tuple(alpha)


@settings(max_examples=20, deadline=None)
@given(st.integers(min_value=2, max_value=40))
def test_every_orbit_is_invariant(q):
    for orbit in periodic_orbits(CAT, q):
        assert orbit.is_invariant(CAT)


if __name__ == "__main__":
    unittest.main()
