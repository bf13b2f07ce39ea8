import math

import numpy as np
from django.test import SimpleTestCase
from hypothesis import assume, given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from fock.states import make_number_state
from lab_project.exceptions import NormalizationError, OutOfRangeError, ParameterError, TruncationError

from .ladder import (
    ANNIHILATION,
    CREATION,
    HoleState,
    apply_annihilation_hole,
    apply_creation_hole,
    bec_state,
    creation_residual_bound,
    dual_coherent_state,
    dual_displacement_apply,
    eigen_residual,
    from_particle,
    hole_number_expectation,
    hole_number_state,
    hole_sweep,
    ladder_from_bec,
    to_particle,
)


class HoleBasisTests(SimpleTestCase):

    def test_bec_is_hole_vacuum(self):
        np.testing.assert_array_equal(bec_state(5).coefficients, [1, 0, 0, 0, 0, 0])

    def test_bec_in_particle_basis(self):
        particle = to_particle(bec_state(5), dim=8)
        np.testing.assert_array_equal(particle.coefficients, make_number_state(5, 8).coefficients)

    def test_occupancy_must_be_positive(self):
        with self.assertRaises(ParameterError):
            bec_state(0)

    def test_hole_state_in_particle_basis(self):
        self.assertEqual(hole_number_state(0, 4).coefficients.tolist(), bec_state(4).coefficients.tolist())
        particle = to_particle(hole_number_state(2, 4))
        np.testing.assert_array_equal(particle.coefficients, make_number_state(2, 5).coefficients)

    def test_more_holes_than_quanta(self):
        with self.assertRaises(OutOfRangeError):
            hole_number_state(5, 4)

    def test_round_trip_representation(self):
        n_f = 9
        for j in range(n_f + 1):
            state = hole_number_state(j, n_f)
            back = from_particle(to_particle(state, dim=n_f + 3), n_f)
            np.testing.assert_array_equal(back.coefficients, state.coefficients)

    def test_from_particle_rejects_overfull_state(self):
        with self.assertRaises(OutOfRangeError):
            from_particle(make_number_state(6, 8), 5)

    def test_ladder_from_bec_lands_on_hole_state(self):
        n_f = 6
        for j in range(n_f + 1):
            particle, norm = ladder_from_bec(j, n_f)
            self.assertAlmostEqual(norm, math.sqrt(math.comb(n_f, j)), delta=1e-12)
            hole = from_particle(particle.normalized(), n_f)
            np.testing.assert_allclose(hole.coefficients, hole_number_state(j, n_f).coefficients, atol=1e-14)

    def test_mode_label_is_carried(self):
        state = bec_state(3, mode=(0.0, 0.0, 1.5))
        self.assertEqual(apply_annihilation_hole(state).mode, (0.0, 0.0, 1.5))


class SwappedLadderTests(SimpleTestCase):

    def test_annihilation_adds_a_hole(self):
        result = apply_annihilation_hole(bec_state(4))
        np.testing.assert_array_equal(result.coefficients, hole_number_state(1, 4).coefficients)

    def test_annihilation_factor(self):
        result = apply_annihilation_hole(hole_number_state(2, 5))
        np.testing.assert_allclose(result.coefficients, math.sqrt(3) * hole_number_state(3, 5).coefficients)

    def test_annihilation_at_ladder_bottom_leaks(self):
        n_f = 6
        result = apply_annihilation_hole(hole_number_state(n_f, n_f))
        self.assertEqual(result.norm(), 0.0)
        self.assertAlmostEqual(result.leakage, n_f + 1, delta=1e-12)

    def test_creation_on_bec_vanishes(self):
        result = apply_creation_hole(bec_state(5))
        self.assertEqual(result.norm(), 0.0)
        self.assertTrue(result.constrained)

    def test_creation_removes_a_hole(self):
        np.testing.assert_array_equal(apply_creation_hole(hole_number_state(1, 3)).coefficients,
                                      bec_state(3).coefficients)
        np.testing.assert_allclose(apply_creation_hole(hole_number_state(3, 4)).coefficients,
                                   math.sqrt(3) * hole_number_state(2, 4).coefficients)
        self.assertFalse(apply_creation_hole(hole_number_state(3, 4)).constrained)

    def test_ladder_relations_exact(self):
        for n_f in (1, 7, 64):
            for j in range(n_f + 1):
                state = hole_number_state(j, n_f)
                up = apply_annihilation_hole(state)
                down = apply_creation_hole(state)
                if j < n_f:
                    expected_up = math.sqrt(j + 1) * hole_number_state(j + 1, n_f).coefficients
                    np.testing.assert_allclose(up.coefficients, expected_up, rtol=0, atol=1e-14)
                    round_trip = apply_creation_hole(up)
                    np.testing.assert_allclose(round_trip.coefficients, (j + 1) * state.coefficients,
                                               rtol=0, atol=1e-14)
                if j > 0:
                    expected_down = math.sqrt(j) * hole_number_state(j - 1, n_f).coefficients
                    np.testing.assert_allclose(down.coefficients, expected_down, rtol=0, atol=1e-14)

    @given(arrays(np.complex128, 19, elements=st.complex_numbers(max_magnitude=10.0, allow_nan=False,
                                                                 allow_infinity=False)))
    def test_dual_commutator(self, inner):
        assume(np.linalg.norm(inner) > 1e-6)
        n_f = 20
        raw = np.zeros(n_f + 1, dtype=complex)
        raw[1:n_f] = inner
        psi = HoleState(n_f, raw / np.linalg.norm(raw))
        a_adag = np.linalg.norm(apply_creation_hole(psi).coefficients) ** 2
        adag_a = np.linalg.norm(apply_annihilation_hole(psi).coefficients) ** 2
        self.assertAlmostEqual(a_adag - adag_a, -1.0, delta=1e-12)


class HoleNumberTests(SimpleTestCase):

    def test_bec_has_no_holes(self):
        self.assertEqual(hole_number_expectation(bec_state(8)), 0.0)

    def test_counts_holes(self):
        self.assertAlmostEqual(hole_number_expectation(hole_number_state(3, 8)), 3.0, delta=1e-14)
        self.assertAlmostEqual(hole_number_expectation(hole_number_state(8, 8)), 8.0, delta=1e-14)

    def test_dual_coherent_mean_holes(self):
        alpha = 1.3 - 0.4j
        state = dual_coherent_state(alpha, 64)
        self.assertAlmostEqual(hole_number_expectation(state), abs(alpha) ** 2, delta=1e-12)

    def test_unnormalized_rejected(self):
        with self.assertRaises(NormalizationError):
            hole_number_expectation(HoleState(2, [1.0, 1.0, 0.0]))


class DualCoherentTests(SimpleTestCase):

    def test_zero_alpha_is_bec(self):
        np.testing.assert_array_equal(dual_coherent_state(0, 6).coefficients, bec_state(6).coefficients)

    def test_creation_eigenstate(self):
        state = dual_coherent_state(1.0, 64)
        self.assertLessEqual(eigen_residual(state, CREATION, 1.0), 1e-10)
        complex_alpha = 0.8 + 0.9j
        state = dual_coherent_state(complex_alpha, 64)
        self.assertLessEqual(eigen_residual(state, CREATION, complex_alpha.conjugate()), 1e-10)

    def test_residual_within_tail_bound_and_decreasing(self):
        for alpha in (2.0, 1.0 + 1.0j, 0.5j):
            rows = hole_sweep(alpha, [8, 16, 32, 64], precision=120)
            for row in rows:
                self.assertLessEqual(row['residual'], row['bound'] * (1 + 1e-10))
            residuals = [row['residual'] for row in rows]
            tails = [row['tail'] for row in rows]
            for earlier, later in zip(residuals, residuals[1:]):
                self.assertLess(later, earlier)
            for earlier, later in zip(tails, tails[1:]):
                self.assertLessEqual(later, earlier)

    def test_super_exponential_decay(self):
        residuals = [row['residual'] for row in hole_sweep(2.0, [8, 16, 32])]
        ratios = [later / earlier for earlier, later in zip(residuals, residuals[1:])]
        self.assertLess(ratios[1], ratios[0])

    def test_bound_matches_formula(self):
        alpha, n_f = 2.0, 8
        expected = math.exp(-2.0) * 2.0 ** 9 * math.sqrt(9) / math.sqrt(math.factorial(9))
        self.assertAlmostEqual(creation_residual_bound(alpha, n_f), expected, delta=1e-13)

    def test_residual_of_truncated_series(self):
        state = dual_coherent_state(2.0, 8)
        self.assertGreater(state.tail, 1e-3)
        residual = eigen_residual(state, CREATION, 2.0)
        self.assertAlmostEqual(residual, creation_residual_bound(2.0, 8), delta=1e-12)
        self.assertAlmostEqual(residual, 0.345, delta=1e-3)
        complex_alpha = 1.1 - 0.9j
        state = dual_coherent_state(complex_alpha, 6)
        self.assertAlmostEqual(eigen_residual(state, CREATION, complex_alpha.conjugate()),
                               creation_residual_bound(complex_alpha, 6), delta=1e-12)

    def test_tail_must_account_for_missing_weight(self):
        with self.assertRaises(NormalizationError):
            eigen_residual(HoleState(2, [0.5, 0.0, 0.0], tail=0.1), CREATION, 0.0)

    def test_bec_residual(self):
        self.assertEqual(eigen_residual(bec_state(10), CREATION, 0.0), 0.0)

    def test_number_states_are_not_eigenstates(self):
        self.assertAlmostEqual(eigen_residual(hole_number_state(1, 4), CREATION, 1.0), math.sqrt(2), delta=1e-15)

    def test_annihilation_residual(self):
        residual = eigen_residual(bec_state(3), ANNIHILATION, 0.0)
        self.assertAlmostEqual(residual, 1.0, delta=1e-15)

    def test_unknown_operator(self):
        with self.assertRaises(ParameterError):
            eigen_residual(bec_state(3), 'number', 0.0)


class DualDisplacementTests(SimpleTestCase):

    def test_zero_displacement_is_bec(self):
        np.testing.assert_allclose(dual_displacement_apply(0, 4).coefficients, bec_state(4).coefficients)

    def test_matches_series(self):
        for alpha in (1.0, -0.6 + 1.1j):
            displaced = dual_displacement_apply(alpha, 64)
            series = dual_coherent_state(alpha, 64)
            self.assertLessEqual(np.max(np.abs(displaced.coefficients - series.coefficients)), 1e-10)

    def test_imaginary_displacement_normalized(self):
        self.assertAlmostEqual(dual_displacement_apply(1.5j, 64).norm(), 1.0, delta=1e-12)

    def test_tolerance_unachievable(self):
        with self.assertRaises(TruncationError):
            dual_displacement_apply(2.0, 4)

    def test_finite_size_artifacts_shrink(self):
        deficits = [1 - dual_coherent_state(1.5, n_f).norm() ** 2 for n_f in (8, 16, 32, 64)]
        for earlier, later in zip(deficits, deficits[1:]):
            self.assertLessEqual(later, earlier)


class ExtendedPrecisionTests(SimpleTestCase):

    def test_matches_double_precision_state(self):
        alpha = 1.2 - 0.7j
        exact = dual_coherent_state(alpha, 24, precision=60)
        approx = dual_coherent_state(alpha, 24)
        np.testing.assert_allclose(exact.coefficients.astype(complex), approx.coefficients, atol=1e-15)

    def test_ladder_keeps_precision(self):
        state = dual_coherent_state(0.5, 10, precision=50)
        self.assertEqual(apply_creation_hole(state).precision, 50)
        self.assertEqual(apply_annihilation_hole(state).precision, 50)

    def test_residual_resolves_below_rounding(self):
        row = hole_sweep(2.0, [64], precision=80)[0]
        self.assertLess(row['residual'], 1e-20)
        self.assertAlmostEqual(row['residual'] / row['bound'], 1.0, delta=1e-10)
