import math

import numpy as np
from django.test import SimpleTestCase
from hypothesis import assume, given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays
from scipy.integrate import trapezoid

from lab_project.exceptions import NormalizationError, OutOfRangeError, ParameterError, TruncationError

from .ladder import apply_annihilation, apply_creation, displacement_apply
from .oscillator import (
    alpha_from_phase_space,
    classical_trajectory,
    coordinate_wavefunction,
    evolve_oscillator,
    phase_space_from_alpha,
    quadrature_moments,
)
from .states import (
    OscillatorParams,
    StateVector,
    fidelity,
    make_coherent_state,
    make_number_state,
    poisson_tail,
)

UNIT = OscillatorParams(mass=1.0, omega=1.0)

amplitudes = st.complex_numbers(max_magnitude=10.0, allow_nan=False, allow_infinity=False)


def explicit_tail(mean, cutoff, terms=200):
    term = math.exp(-mean)
    for n in range(1, cutoff + 1):
        term *= mean / n
    total = 0.0
    for n in range(cutoff, cutoff + terms):
        total += term
        term *= mean / (n + 1)
    return total


class StateConstructionTests(SimpleTestCase):

    def test_number_state_basis_vectors(self):
        np.testing.assert_array_equal(make_number_state(0, 4).coefficients, [1, 0, 0, 0])
        np.testing.assert_array_equal(make_number_state(2, 4).coefficients, [0, 0, 1, 0])
        self.assertTrue(make_number_state(3, 4).is_normalized())

    def test_number_state_at_cutoff_is_rejected(self):
        with self.assertRaises(OutOfRangeError):
            make_number_state(4, 4)
        with self.assertRaises(OutOfRangeError):
            make_number_state(-1, 4)

    def test_state_is_immutable(self):
        state = make_number_state(1, 3)
        with self.assertRaises(ValueError):
            state.coefficients[0] = 1.0

    def test_empty_state_rejected(self):
        with self.assertRaises(ParameterError):
            StateVector(np.zeros(0))

    def test_zero_alpha_is_vacuum(self):
        state = make_coherent_state(0, 8)
        np.testing.assert_array_equal(state.coefficients, make_number_state(0, 8).coefficients)
        self.assertEqual(state.tail, 0.0)

    def test_coherent_mean_occupation(self):
        state = make_coherent_state(1, 64)
        self.assertAlmostEqual(state.mean_occupation(), 1.0, delta=1e-12)

    def test_truncation_deficit_is_poisson_tail(self):
        state = make_coherent_state(2, 8)
        expected = explicit_tail(4.0, 8)
        self.assertAlmostEqual(state.tail, expected, delta=1e-14)
        self.assertAlmostEqual(1.0 - np.sum(state.probabilities), expected, delta=1e-13)

    def test_poisson_tail_edges(self):
        self.assertEqual(poisson_tail(0.0, 3), 0.0)
        self.assertEqual(poisson_tail(2.0, 0), 1.0)
        self.assertAlmostEqual(poisson_tail(1.0, 5), explicit_tail(1.0, 5), delta=1e-15)

    def test_fidelity_pads_cutoffs(self):
        small = make_number_state(1, 2)
        large = make_number_state(1, 6)
        self.assertEqual(fidelity(small, large), 1.0)


class LadderTests(SimpleTestCase):

    def test_annihilation_kills_vacuum(self):
        result = apply_annihilation(make_number_state(0, 5))
        self.assertEqual(result.norm(), 0.0)

    def test_annihilation_lowers(self):
        result = apply_annihilation(make_number_state(3, 6))
        expected = math.sqrt(3) * make_number_state(2, 6).coefficients
        np.testing.assert_allclose(result.coefficients, expected, atol=1e-15)

    def test_creation_raises(self):
        result = apply_creation(make_number_state(0, 4))
        np.testing.assert_allclose(result.coefficients, make_number_state(1, 4).coefficients)
        self.assertEqual(result.leakage, 0.0)

    def test_creation_at_cutoff_leaks(self):
        dim = 7
        result = apply_creation(make_number_state(dim - 1, dim))
        self.assertEqual(result.norm(), 0.0)
        self.assertAlmostEqual(result.leakage, dim, delta=1e-12)

    def test_ladder_consistency(self):
        dim = 12
        for n in range(dim - 1):
            state = make_number_state(n, dim)
            result = apply_annihilation(apply_creation(state))
            np.testing.assert_allclose(result.coefficients, (n + 1) * state.coefficients, atol=1e-13)

    @given(arrays(np.complex128, 15, elements=amplitudes))
    def test_canonical_commutator(self, raw):
        assume(np.linalg.norm(raw) > 1e-6)
        dim = 16
        psi = StateVector(np.append(raw, 0) / np.linalg.norm(raw))

        a_adag = apply_annihilation(apply_creation(psi)).coefficients
        adag_a = apply_creation(apply_annihilation(psi)).coefficients
        commutator = a_adag - adag_a
        np.testing.assert_allclose(commutator[:dim - 1], psi.coefficients[:dim - 1], atol=1e-12)
        self.assertAlmostEqual(np.vdot(psi.coefficients, commutator).real, 1.0, delta=1e-12)

    def test_coherent_state_is_annihilation_eigenstate(self):
        for alpha in (0.5, 1.0, 1.5j, 2.0, -1.2 + 1.4j):
            state = make_coherent_state(alpha, 64)
            residual = apply_annihilation(state).coefficients - alpha * state.coefficients
            self.assertLessEqual(np.linalg.norm(residual[:-1]), 1e-10, msg=str(alpha))


class DisplacementTests(SimpleTestCase):

    def test_zero_displacement_is_identity(self):
        np.testing.assert_allclose(displacement_apply(0, 5).coefficients, make_number_state(0, 5).coefficients)

    def test_matches_series(self):
        for alpha in (1.0, 0.3 - 0.8j, 2.0, 1.5j):
            displaced = displacement_apply(alpha, 64)
            series = make_coherent_state(alpha, 64)
            self.assertLessEqual(np.max(np.abs(displaced.coefficients - series.coefficients)), 1e-10)

    def test_imaginary_displacement_is_normalized(self):
        state = displacement_apply(2j, 64)
        self.assertAlmostEqual(state.norm(), 1.0, delta=1e-12)

    def test_unachievable_tolerance(self):
        with self.assertRaises(TruncationError) as ctx:
            displacement_apply(3.0, 6)
        self.assertAlmostEqual(ctx.exception.tail, poisson_tail(9.0, 6), delta=1e-15)


class QuadratureTests(SimpleTestCase):

    def test_vacuum_moments(self):
        moments = quadrature_moments(make_number_state(0, 8), UNIT)
        self.assertAlmostEqual(moments.mean_x, 0.0)
        self.assertAlmostEqual(moments.mean_p, 0.0)
        self.assertAlmostEqual(moments.var_x, 0.5, delta=1e-15)
        self.assertAlmostEqual(moments.var_p, 0.5, delta=1e-15)
        self.assertAlmostEqual(moments.product, 0.25, delta=1e-15)

    def test_coherent_from_phase_space(self):
        params = OscillatorParams(mass=1.0, omega=1.0, x0=1.0, p0=0.0)
        moments = quadrature_moments(make_coherent_state(alpha_from_phase_space(params), 64), params)
        self.assertAlmostEqual(moments.mean_x, 1.0, delta=1e-12)
        self.assertAlmostEqual(moments.mean_p, 0.0, delta=1e-12)
        self.assertAlmostEqual(moments.product, 0.25, delta=1e-12)

    def test_number_state_product(self):
        moments = quadrature_moments(make_number_state(1, 8), UNIT)
        self.assertAlmostEqual(moments.product, 9 / 4, delta=1e-14)

    def test_minimum_uncertainty_grid(self):
        for mass in (0.5, 1.0, 2.0):
            for omega in (0.5, 1.0, 2.0):
                params = OscillatorParams(mass=mass, omega=omega)
                for magnitude in (0.0, 0.5, 1.0, 2.0):
                    alpha = magnitude * np.exp(0.7j)
                    moments = quadrature_moments(make_coherent_state(alpha, 64), params)
                    self.assertAlmostEqual(moments.product, 0.25, delta=1e-10)

    def test_unnormalized_rejected(self):
        with self.assertRaises(NormalizationError):
            quadrature_moments(StateVector([1.0, 1.0]), UNIT)


class PhaseSpaceTests(SimpleTestCase):

    def test_alpha_substitution(self):
        self.assertEqual(alpha_from_phase_space(UNIT), 0j)
        self.assertAlmostEqual(alpha_from_phase_space(OscillatorParams(1.0, 2.0, x0=1.0)), 1.0)
        alpha = alpha_from_phase_space(OscillatorParams(2.0, 1.0, p0=2.0))
        self.assertAlmostEqual(alpha.real, 0.0)
        self.assertAlmostEqual(alpha.imag, 1.0)

    def test_inverse(self):
        params = OscillatorParams(mass=0.7, omega=1.9, x0=-0.4, p0=1.3)
        x0, p0 = phase_space_from_alpha(alpha_from_phase_space(params), params.mass, params.omega)
        self.assertAlmostEqual(x0, params.x0, delta=1e-14)
        self.assertAlmostEqual(p0, params.p0, delta=1e-14)

    def test_invalid_params(self):
        with self.assertRaises(ParameterError):
            OscillatorParams(mass=0.0, omega=1.0)
        with self.assertRaises(ParameterError):
            OscillatorParams(mass=1.0, omega=-2.0)

    def test_ground_state_peak(self):
        self.assertAlmostEqual(coordinate_wavefunction(0, UNIT, 0.0), math.pi ** -0.25, delta=1e-15)

    def test_wavefunction_normalized_and_peaked(self):
        x = np.linspace(-12, 14, 2 ** 14)
        density = np.abs(coordinate_wavefunction(1 / math.sqrt(2), UNIT, x)) ** 2
        self.assertAlmostEqual(trapezoid(density, x), 1.0, delta=1e-8)
        self.assertAlmostEqual(x[np.argmax(density)], 1.0, delta=x[1] - x[0])


class EvolutionTests(SimpleTestCase):

    def test_zero_time_is_identity(self):
        state = make_coherent_state(0.8 + 0.2j, 40)
        evolved = evolve_oscillator(state, UNIT, 0.0)
        np.testing.assert_array_equal(evolved.coefficients, state.coefficients)

    @given(arrays(np.complex128, 20, elements=amplitudes), st.floats(min_value=0.0, max_value=50.0))
    def test_norm_preserved(self, raw, t):
        assume(np.linalg.norm(raw) > 1e-6)
        state = StateVector(raw / np.linalg.norm(raw))
        self.assertAlmostEqual(evolve_oscillator(state, UNIT, t).norm(), 1.0, delta=1e-14)

    def test_full_period(self):
        params = OscillatorParams(mass=1.0, omega=2.0)
        state = make_coherent_state(1.0, 64)
        start = quadrature_moments(state, params)
        end = quadrature_moments(evolve_oscillator(state, params, 2 * math.pi / params.omega), params)
        self.assertAlmostEqual(start.mean_x, end.mean_x, delta=1e-10)
        self.assertAlmostEqual(start.mean_p, end.mean_p, delta=1e-10)

    def test_quarter_period(self):
        moments = quadrature_moments(evolve_oscillator(make_coherent_state(1.0, 64), UNIT, math.pi / 2), UNIT)
        self.assertAlmostEqual(moments.mean_x, 0.0, delta=1e-10)
        self.assertAlmostEqual(moments.mean_p, -math.sqrt(2), delta=1e-10)

    def test_follows_classical_trajectory(self):
        for mass, omega, alpha in ((1.0, 1.0, 1.0), (0.5, 2.0, 0.4 + 1.1j), (2.0, 0.5, -1.5j)):
            x0, p0 = phase_space_from_alpha(alpha, mass, omega)
            params = OscillatorParams(mass, omega, x0=x0, p0=p0)
            state = make_coherent_state(alpha, 64)
            for t in np.linspace(0, 4 * math.pi / omega, 9):
                moments = quadrature_moments(evolve_oscillator(state, params, t), params)
                x, p = classical_trajectory(params, t)
                self.assertAlmostEqual(moments.mean_x, float(x), delta=1e-10)
                self.assertAlmostEqual(moments.mean_p, float(p), delta=1e-10)
                self.assertAlmostEqual(moments.product, 0.25, delta=1e-10)
