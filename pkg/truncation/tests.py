import math

import numpy as np
from django.test import SimpleTestCase

from fock.states import fidelity, make_coherent_state, make_number_state
from lab_project.exceptions import ParameterError, UnboundedCapacityError

from .energy import (
    EnergyBudget,
    ModeSpec,
    mode_capacity,
    truncated_coherent,
    truncated_coherent_for_budget,
    truncation_deficit,
    truncation_fidelity,
)


def poisson_cdf(mean, n_f):
    term = math.exp(-mean)
    total = term
    for n in range(1, n_f + 1):
        term *= mean / n
        total += term
    return total


def poisson_tail_sum(mean, n_f, terms=300):
    term = math.exp(-mean)
    for n in range(1, n_f + 2):
        term *= mean / n
    total = 0.0
    for n in range(n_f + 1, n_f + 1 + terms):
        total += term
        term *= mean / (n + 1)
    return total


class ModeCapacityTests(SimpleTestCase):

    def test_rest_mass_mode(self):
        self.assertEqual(mode_capacity(EnergyBudget(10), ModeSpec(mass=1, momentum=0)), 10)

    def test_moving_mode(self):
        self.assertEqual(mode_capacity(EnergyBudget(10), ModeSpec(mass=1, momentum=math.sqrt(3))), 5)

    def test_soft_massless_mode_is_unbounded(self):
        with self.assertRaises(UnboundedCapacityError):
            mode_capacity(EnergyBudget(10), ModeSpec(mass=0, momentum=0))

    def test_massless_dispersion(self):
        mode = ModeSpec(mass=0, momentum=2.5)
        self.assertEqual(mode.omega, 2.5)
        self.assertEqual(mode_capacity(EnergyBudget(10), mode), 4)

    def test_vector_momentum(self):
        mode = ModeSpec.from_vector(1.0, [1.0, 1.0, 1.0])
        self.assertAlmostEqual(mode.omega, 2.0, delta=1e-15)

    def test_budget_just_below_an_integer(self):
        self.assertEqual(mode_capacity(EnergyBudget(5 - 5e-10), ModeSpec(mass=1.0)), 4)
        self.assertEqual(mode_capacity(EnergyBudget(5.0), ModeSpec(mass=1.0)), 5)
        self.assertEqual(mode_capacity(EnergyBudget(0.3), ModeSpec(mass=0.1)), 3)

    def test_capacity_never_exceeds_budget(self):
        for e_max in (0.3, 0.7, 1 - 1e-12, 2.9999999999, 47.5):
            for mass in (0.1, 0.3, 1.0, 7.0):
                for k in (0.0, 0.2, math.sqrt(3)):
                    mode = ModeSpec(mass, k)
                    capacity = mode_capacity(EnergyBudget(e_max), mode)
                    self.assertLessEqual(capacity * mode.omega, e_max)
                    self.assertGreater((capacity + 1) * mode.omega, e_max)

    def test_invalid_inputs(self):
        with self.assertRaises(ParameterError):
            EnergyBudget(0)
        with self.assertRaises(ParameterError):
            EnergyBudget(math.inf)
        with self.assertRaises(ParameterError):
            EnergyBudget(math.nan)
        with self.assertRaises(ParameterError):
            ModeSpec(mass=-1)

    def test_monotonicity_and_massive_bound(self):
        for e_max in (0.5, 3.0, 10.0, 47.5):
            for mass in (0.25, 1.0, 2.0):
                previous = None
                for k in np.linspace(0, 6, 25):
                    capacity = mode_capacity(EnergyBudget(e_max), ModeSpec(mass, k))
                    self.assertLessEqual(capacity, math.floor(e_max / mass))
                    self.assertGreaterEqual(capacity, 0)
                    if previous is not None:
                        self.assertLessEqual(capacity, previous)
                    previous = capacity
        mode = ModeSpec(1.0, 0.5)
        capacities = [mode_capacity(EnergyBudget(e), mode) for e in np.linspace(0.5, 20, 40)]
        self.assertEqual(capacities, sorted(capacities))
        by_mass = [mode_capacity(EnergyBudget(12), ModeSpec(m, 1.0)) for m in np.linspace(0.1, 5, 30)]
        self.assertEqual(by_mass, sorted(by_mass, reverse=True))


class TruncatedCoherentTests(SimpleTestCase):

    def test_zero_capacity_is_vacuum(self):
        for alpha in (0, 1.5, -2j):
            result = truncated_coherent(alpha, 0)
            np.testing.assert_array_equal(result.normalized().coefficients, make_number_state(0, 1).coefficients)

    def test_squared_norm_finite_sum(self):
        result = truncated_coherent(2, 4)
        self.assertEqual(result.raw.dim, 5)
        self.assertAlmostEqual(result.norm ** 2, 103 / 3, delta=1e-12)
        self.assertAlmostEqual(result.norm ** 2, sum(4 ** n / math.factorial(n) for n in range(5)), delta=1e-12)

    def test_raw_series_coefficients(self):
        alpha = 0.6 + 0.3j
        result = truncated_coherent(alpha, 6)
        expected = [alpha ** n / math.sqrt(math.factorial(n)) for n in range(7)]
        np.testing.assert_allclose(result.raw.coefficients, expected, rtol=1e-14)

    def test_large_capacity_matches_ideal(self):
        normalized = truncated_coherent(1, 64).normalized()
        ideal = make_coherent_state(1, 65).normalized()
        np.testing.assert_allclose(normalized.coefficients, ideal.coefficients, atol=1e-12)
        self.assertAlmostEqual(fidelity(make_coherent_state(1, 65), normalized), 1.0, delta=1e-12)

    def test_negative_capacity_rejected(self):
        with self.assertRaises(ParameterError):
            truncated_coherent(1, -1)

    def test_budget_shortcut(self):
        n_f, state = truncated_coherent_for_budget(1.0, EnergyBudget(10), ModeSpec(1.0, math.sqrt(3)))
        self.assertEqual(n_f, 5)
        self.assertEqual(state.raw.dim, 6)


class TruncationFidelityTests(SimpleTestCase):

    def test_vacuum_untruncated(self):
        for n_f in (0, 3, 20):
            self.assertAlmostEqual(truncation_fidelity(0, n_f), 1.0, delta=1e-15)

    def test_poisson_cdf(self):
        self.assertAlmostEqual(truncation_fidelity(1, 8), poisson_cdf(1.0, 8), delta=1e-14)

    def test_monotone_in_capacity(self):
        values = [truncation_fidelity(2, n_f) for n_f in (4, 8, 16)]
        self.assertLess(values[0], values[1])
        self.assertLess(values[1], values[2])
        self.assertLessEqual(values[2], 1.0)

    def test_deficit_equals_poisson_tail(self):
        for magnitude in (0.0, 0.5, 1.0, 2.0, 3.0):
            alpha = magnitude * np.exp(1.1j)
            for n_f in (0, 1, 4, 8, 16, 32, 64):
                expected = poisson_tail_sum(magnitude ** 2, n_f)
                self.assertAlmostEqual(1 - truncation_fidelity(alpha, n_f), expected, delta=1e-12)
                self.assertAlmostEqual(truncation_deficit(alpha, n_f), expected, delta=1e-12)
