import math
import tempfile
from pathlib import Path

import numpy as np
from django.test import SimpleTestCase
from scipy.integrate import quad, trapezoid
from scipy.stats import norm, poisson

from lab_project.exceptions import ConfigError, ParameterError, UndefinedRatioError
from wavepackets.packets import WavePacket, momentum_amplitude

from .condensate import condensate_density, condensate_for_energy
from .config import ModelConfig, load_config
from .observables import (
    condensed_limit_check,
    correlation_grid,
    grid_densities,
    inclusive_correlation,
    multiplicity_distribution,
    multiplicity_scan,
    normalization_constant,
    one_particle_spectrum,
    pair_overlap_moment,
    two_particle_correlation,
)
from .sampling import (
    condensate_packets,
    event_rng,
    fixed_ensemble,
    sample_ensemble,
    sample_event,
    sample_single_packet,
)


def model(**changes):
    values = dict(radius=1.0, temperature=1.0, mass=1.0, sigma=1.0, n0=1.0, seed=7)
    values.update(changes)
    return ModelConfig(**values)


DILUTE = model(radius=30.0, temperature=0.1)
MIDDLE = model(radius=0.5, temperature=0.5)
COLLAPSED = model(radius=1e-3, temperature=1e-3)

TWO_PACKETS = [WavePacket(xi=0.6, pi=-0.4), WavePacket(xi=-0.3, pi=0.7)]
THREE_PACKETS = TWO_PACKETS + [WavePacket(xi=0.1, pi=0.2)]


class ConfigFileTests(SimpleTestCase):

    def write(self, text):
        directory = tempfile.TemporaryDirectory()
        self.addCleanup(directory.cleanup)
        path = Path(directory.name) / 'source.cfg'
        path.write_text(text)
        return path

    def test_load_with_defaults(self):
        path = self.write("# dilute source\nradius = 3\ntemperature = 0.5\nmass = 1\nsigma = 1.5\nn0 = 2\nseed = 11\n")
        config = load_config(path)
        self.assertEqual(config, ModelConfig(radius=3.0, temperature=0.5, mass=1.0, sigma=1.5, n0=2.0, seed=11))
        self.assertEqual(config.dimension, 1)
        self.assertTrue(config.symmetrize)
        self.assertEqual(config.t0, 0.0)

    def test_all_keys(self):
        path = self.write("radius=1\ntemperature=1\nmass=0.14\nsigma=0.3\nn0=4\nt0=2.5\n"
                          "dimension=3\nseed=5\nsymmetrize=false\n")
        config = load_config(path)
        self.assertEqual(config.dimension, 3)
        self.assertFalse(config.symmetrize)
        self.assertEqual(config.t0, 2.5)
        self.assertAlmostEqual(config.momentum_variance, 0.14)

    def test_every_bad_key_reported(self):
        path = self.write("radius = -1\ntemperature = 1\nmass = abc\nsigma = 1\nn0 = 1\ndimension = 2\ncolour = red\n")
        with self.assertRaises(ConfigError) as ctx:
            load_config(path)
        self.assertEqual(set(ctx.exception.errors), {'radius', 'mass', 'dimension', 'colour'})

    def test_missing_keys(self):
        with self.assertRaises(ConfigError) as ctx:
            load_config(self.write("radius = 1\n"))
        self.assertEqual(set(ctx.exception.errors), {'temperature', 'mass', 'sigma', 'n0'})

    def test_overrides(self):
        path = self.write("radius=1\ntemperature=1\nmass=1\nsigma=1\nn0=1\n")
        self.assertIsNone(load_config(path).seed)
        self.assertEqual(load_config(path, seed=99).seed, 99)
        self.assertIsNone(load_config(path, seed=None).seed)

    def test_missing_file(self):
        with self.assertRaises(ParameterError):
            load_config('/nonexistent/source.cfg')

    def test_seed_required_for_sampling(self):
        with self.assertRaises(ConfigError):
            sample_ensemble(model(seed=None), 2, 10)

    def test_direct_validation(self):
        with self.assertRaises(ParameterError):
            model(radius=0.0)
        with self.assertRaises(ParameterError):
            model(dimension=2)


class SamplingTests(SimpleTestCase):

    def test_source_moments(self):
        config = model(radius=2.0, temperature=1.5, mass=0.8)
        rng = np.random.default_rng(1)
        packets = [sample_single_packet(config, rng) for _ in range(100000)]
        xi = np.array([packet.xi[0] for packet in packets])
        pi = np.array([packet.pi[0] for packet in packets])
        self.assertLessEqual(abs(xi.mean()), 5 * config.radius / math.sqrt(xi.size))
        variance = config.momentum_variance
        self.assertLessEqual(abs(pi.var(ddof=1) - variance), 3 * variance * math.sqrt(2 / (pi.size - 1)))
        self.assertTrue(all(packet.sigma == config.sigma for packet in packets[:100]))

    def test_three_dimensional_packets(self):
        packet = sample_single_packet(model(dimension=3), np.random.default_rng(0))
        self.assertEqual(packet.dimension, 3)

    def test_single_packet_weight_is_one(self):
        for index in range(20):
            self.assertEqual(sample_event(model(), 1, event_rng(3, 1, index)).weight, 1.0)

    def test_remote_regime_weights_near_one(self):
        ensemble = sample_ensemble(model(radius=50.0, temperature=50.0), 2, 200)
        self.assertLess(abs(ensemble.weights.mean() - 1.0), 0.01)
        self.assertTrue(np.all(ensemble.weights >= 1.0 - 1e-12))

    def test_weights_are_permanents(self):
        event = sample_event(model(radius=0.3, temperature=0.3), 3, event_rng(1, 3, 0))
        g = event.gram.matrix
        expected = sum(np.prod([g[i, s[i]] for i in range(3)])
                       for s in [(0, 1, 2), (0, 2, 1), (1, 0, 2), (1, 2, 0), (2, 0, 1), (2, 1, 0)])
        self.assertAlmostEqual(event.weight, expected.real, delta=1e-10 * expected.real)
        self.assertGreater(event.importance, 0.0)

    def test_same_seed_same_stream(self):
        first = sample_ensemble(model(seed=123), 3, 50)
        second = sample_ensemble(model(seed=123), 3, 50)
        np.testing.assert_array_equal(first.weights, second.weights)
        self.assertEqual([e.packets for e in first.events], [e.packets for e in second.events])
        other = sample_ensemble(model(seed=124), 3, 50)
        self.assertFalse(np.array_equal(first.weights, other.weights))

    def test_workers_preserve_order(self):
        serial = sample_ensemble(model(seed=5), 2, 40, workers=1)
        parallel = sample_ensemble(model(seed=5), 2, 40, workers=2)
        np.testing.assert_array_equal(serial.weights, parallel.weights)
        self.assertEqual([e.packets for e in serial.events], [e.packets for e in parallel.events])

    def test_prefix_stability(self):
        short = sample_ensemble(model(seed=9), 2, 10)
        long = sample_ensemble(model(seed=9), 2, 30)
        np.testing.assert_array_equal(short.weights, long.weights[:10])

    def test_event_size_bounds(self):
        with self.assertRaises(ParameterError):
            sample_event(model(), 0, np.random.default_rng(0))
        with self.assertRaises(ParameterError):
            sample_event(model(), 21, np.random.default_rng(0))

    def test_switched_off_symmetrization(self):
        ensemble = sample_ensemble(model(radius=0.1, temperature=0.1, symmetrize=False), 4, 30)
        np.testing.assert_array_equal(ensemble.weights, np.ones(30))
        np.testing.assert_array_equal(ensemble.events[0].gram.matrix, np.eye(4))
        self.assertFalse(ensemble.events[0].symmetrized)
        self.assertTrue(sample_event(model(), 2, np.random.default_rng(0)).symmetrized)

    def test_condensate_packets(self):
        packets = condensate_packets(model(sigma=0.5, dimension=3), 4)
        self.assertEqual(len(packets), 4)
        self.assertEqual(packets[0], WavePacket((0, 0, 0), (0, 0, 0), sigma=0.5))
        self.assertAlmostEqual(fixed_ensemble(model(sigma=0.5, dimension=3), [packets]).weights[0], 24.0,
                               delta=1e-10)


class NormalizationConstantTests(SimpleTestCase):

    def test_trivial_multiplicities(self):
        for n in (0, 1):
            self.assertEqual(tuple(normalization_constant(model(), n)), (1.0, 0.0))
        self.assertEqual(tuple(normalization_constant(model(symmetrize=False), 5)), (1.0, 0.0))

    def test_pair_moment_closed_form(self):
        self.assertAlmostEqual(pair_overlap_moment(model()), 1 / 3, delta=1e-15)
        self.assertAlmostEqual(pair_overlap_moment(model(dimension=3)), 1 / 27, delta=1e-15)

    def test_pair_moment_against_quadrature(self):
        for config in (model(), model(radius=0.4, temperature=2.0, mass=0.5, sigma=1.3)):
            momentum_scale = math.sqrt(2 * config.momentum_variance)
            coordinate_scale = math.sqrt(2) * config.radius
            momentum, _ = quad(lambda x: norm.pdf(x, scale=momentum_scale)
                               * math.exp(-x ** 2 / (2 * config.sigma ** 2)), -np.inf, np.inf)
            coordinate, _ = quad(lambda x: norm.pdf(x, scale=coordinate_scale)
                                 * math.exp(-config.sigma ** 2 * x ** 2 / 2), -np.inf, np.inf)
            self.assertAlmostEqual(pair_overlap_moment(config), momentum * coordinate, delta=1e-10)

    def test_two_packet_constant(self):
        estimate = normalization_constant(model(), 2, samples=4000)
        self.assertLessEqual(abs(estimate.value - 4 / 3), 4 * estimate.error)
        self.assertGreater(estimate.error, 0.0)

    def test_bosonic_enhancement(self):
        config = model(radius=0.6, temperature=0.6)
        constants = [normalization_constant(config, n, samples=1000) for n in range(1, 5)]
        for earlier, later in zip(constants, constants[1:]):
            self.assertGreaterEqual(later.value, earlier.value - 3 * (earlier.error + later.error))

    def test_too_few_samples(self):
        with self.assertRaises(ParameterError):
            normalization_constant(model(), 2, samples=100)


class MultiplicityTests(SimpleTestCase):

    def test_switched_off_is_poisson(self):
        distribution = multiplicity_distribution(model(n0=2.5, symmetrize=False), 8)
        expected = poisson.pmf(np.arange(9), 2.5)
        np.testing.assert_allclose(distribution.probabilities, expected / expected.sum(), rtol=0, atol=1e-12)
        np.testing.assert_array_equal(distribution.errors, np.zeros(9))
        self.assertAlmostEqual(distribution.probabilities.sum(), 1.0, delta=1e-12)

    def test_dilute_limit(self):
        distribution = multiplicity_distribution(model(n0=0.5, radius=50.0, temperature=50.0), 4, samples=1000)
        for p, prior, error in zip(distribution.probabilities, distribution.prior, distribution.errors):
            self.assertLessEqual(abs(p - prior), 3 * error + 1e-3)

    def test_stimulated_emission(self):
        config = model(n0=1.0, radius=0.5, temperature=0.5)
        distribution = multiplicity_distribution(config, 6, samples=1000)
        self.assertAlmostEqual(distribution.probabilities.sum(), 1.0, delta=1e-12)
        self.assertGreater(distribution.mean.value - 3 * distribution.mean.error, config.n0)
        self.assertTrue(np.all(distribution.errors >= 0))

    def test_scan_without_symmetrization(self):
        n0_values = [0.5, 1.0, 2.0, 4.0, 8.0]
        scan = multiplicity_scan(model(symmetrize=False), n0_values, 6)
        for n0, mean in zip(n0_values, scan.mean):
            prior = poisson.pmf(np.arange(7), n0)
            self.assertAlmostEqual(mean, np.arange(7) @ prior / prior.sum(), delta=1e-12)
        self.assertTrue(np.all(np.diff(scan.mean) > 0))
        self.assertIn(scan.knee, n0_values[1:-1])

    def test_scan_with_symmetrization(self):
        scan = multiplicity_scan(model(radius=0.5, temperature=0.5), [0.25, 0.5, 1.0, 2.0], 4, samples=1000)
        self.assertEqual(scan.mean.shape, (4,))
        self.assertTrue(np.all(np.diff(scan.mean) > 0))
        self.assertIsNotNone(scan.knee)

    def test_bad_arguments(self):
        with self.assertRaises(ParameterError):
            multiplicity_distribution(model(), 0)
        with self.assertRaises(ParameterError):
            multiplicity_scan(model(), [], 4)


class SpectrumTests(SimpleTestCase):

    def test_single_packets(self):
        ensemble = sample_ensemble(model(), 1, 50)
        k = np.linspace(-4, 4, 17)
        spectrum = one_particle_spectrum(ensemble, k)
        expected = np.mean([np.abs(momentum_amplitude(e.packets[0], k)) ** 2 for e in ensemble.events], axis=0)
        np.testing.assert_allclose(spectrum.value, expected, rtol=1e-12)

    def test_two_packets_against_grid(self):
        k = np.linspace(-9, 9, 601)
        oracle = grid_densities(TWO_PACKETS, k)
        spectrum = one_particle_spectrum(fixed_ensemble(model(), [TWO_PACKETS]), k)
        np.testing.assert_allclose(spectrum.value, oracle.n1, rtol=0, atol=1e-6)

    def test_three_packets_against_grid(self):
        k = np.linspace(-8, 8, 121)
        oracle = grid_densities(THREE_PACKETS, k)
        spectrum = one_particle_spectrum(fixed_ensemble(model(), [THREE_PACKETS]), k)
        np.testing.assert_allclose(spectrum.value, oracle.n1, rtol=0, atol=1e-6)

    def test_sum_rule(self):
        k = np.linspace(-15, 15, 1201)
        for n in (1, 2, 3):
            spectrum = one_particle_spectrum(sample_ensemble(model(), n, 100), k)
            self.assertAlmostEqual(trapezoid(spectrum.value, k), n, delta=1e-4)
            self.assertTrue(np.all(spectrum.value >= 0))

    def test_exchange_symmetry(self):
        k = np.linspace(-3, 3, 13)
        forward = one_particle_spectrum(fixed_ensemble(model(), [THREE_PACKETS]), k)
        backward = one_particle_spectrum(fixed_ensemble(model(), [THREE_PACKETS[::-1]]), k)
        np.testing.assert_allclose(forward.value, backward.value, rtol=1e-12)

    def test_product_spectra_when_switched_off(self):
        k = np.linspace(-3, 3, 13)
        spectrum = one_particle_spectrum(fixed_ensemble(model(symmetrize=False), [THREE_PACKETS]), k)
        expected = sum(np.abs(momentum_amplitude(packet, k)) ** 2 for packet in THREE_PACKETS)
        np.testing.assert_allclose(spectrum.value, expected, rtol=1e-12)

    def test_three_dimensional_spectrum(self):
        config = model(dimension=3)
        packets = [WavePacket((0.2, 0.0, -0.1), (0.3, -0.2, 0.0)), WavePacket((0.0, 0.4, 0.0), (0.0, 0.1, 0.5))]
        k = np.array([[0.0, 0.0, 0.0], [0.5, 0.5, 0.5]])
        spectrum = one_particle_spectrum(fixed_ensemble(config, [packets]), k)
        self.assertEqual(spectrum.value.shape, (2,))
        with self.assertRaises(ParameterError):
            one_particle_spectrum(fixed_ensemble(config, [packets]), [0.0, 1.0])

    def test_empty_grid(self):
        with self.assertRaises(ParameterError):
            one_particle_spectrum(fixed_ensemble(model(), [TWO_PACKETS]), [])


class CorrelationTests(SimpleTestCase):

    def test_remote_packets_bunch_fully(self):
        packets = [WavePacket(xi=10.0, pi=0.0), WavePacket(xi=-10.0, pi=0.0)]
        estimate = two_particle_correlation(fixed_ensemble(model(), [packets]), 0.3, 0.3)
        self.assertAlmostEqual(estimate.value, 2.0, delta=1e-6)
        k = np.linspace(-9, 9, 361)
        oracle = grid_densities(packets, k)
        i = int(np.argmin(np.abs(k - 0.3)))
        self.assertAlmostEqual(2 * oracle.n2[i, i] / oracle.n1[i] ** 2, 2.0, delta=1e-6)

    def test_against_grid_oracle(self):
        k = np.linspace(-8, 8, 121)
        for packets in (TWO_PACKETS, THREE_PACKETS):
            n = len(packets)
            oracle = grid_densities(packets, k)
            window = slice(45, 76, 5)
            grid = correlation_grid(fixed_ensemble(model(), [packets]), k[window])
            expected = n / (n - 1) * oracle.n2[window, window] / np.outer(oracle.n1[window], oracle.n1[window])
            np.testing.assert_allclose(grid.c2, expected, rtol=1e-6)
            self.assertEqual(grid.label, 'fixed-n')

    def test_condensed_configuration_is_flat(self):
        for n in (2, 3, 4):
            ensemble = fixed_ensemble(model(), [condensate_packets(model(), n)])
            grid = correlation_grid(ensemble, np.linspace(-2, 2, 9))
            np.testing.assert_allclose(grid.c2, np.ones((9, 9)), rtol=0, atol=1e-12)

    def test_decorrelates_at_large_separation(self):
        ensemble = sample_ensemble(DILUTE, 2, 2000)
        estimate = two_particle_correlation(ensemble, -1.5, 1.5)
        self.assertLessEqual(abs(estimate.value - 1.0), 0.1 + 3 * estimate.error)
        bump = two_particle_correlation(ensemble, 0.0, 0.0)
        self.assertGreater(bump.value, 1.8)

    def test_exchange_symmetry(self):
        k = np.linspace(-2, 2, 5)
        forward = correlation_grid(fixed_ensemble(model(), [THREE_PACKETS]), k)
        backward = correlation_grid(fixed_ensemble(model(), [THREE_PACKETS[::-1]]), k)
        np.testing.assert_allclose(forward.c2, backward.c2, rtol=1e-12)

    def test_undefined_far_from_source(self):
        with self.assertRaises(UndefinedRatioError):
            two_particle_correlation(fixed_ensemble(model(), [TWO_PACKETS]), 0.0, 60.0)

    def test_needs_two_packets(self):
        with self.assertRaises(ParameterError):
            correlation_grid(sample_ensemble(model(), 1, 10), [0.0])

    def test_jackknife_errors(self):
        grid = correlation_grid(sample_ensemble(MIDDLE, 2, 400), np.linspace(-1, 1, 3))
        self.assertTrue(np.all(grid.error > 0))
        self.assertTrue(np.all(np.isfinite(grid.error)))

    def test_inclusive_correlation(self):
        config = DILUTE.evolve(symmetrize=False)
        apart = inclusive_correlation(config, 6, 1000, -1.5, 1.5)
        self.assertEqual(apart.label, 'inclusive')
        self.assertLessEqual(abs(apart.value - 1.0), 0.1 + 3 * apart.error)
        together = inclusive_correlation(config, 6, 1000, 0.0, 0.0)
        self.assertLessEqual(abs(together.value - 1.0), 0.1 + 3 * together.error)
        bunched = inclusive_correlation(DILUTE, 4, 1000, 0.0, 0.0)
        self.assertGreater(bunched.value, 1.7)
        with self.assertRaises(ParameterError):
            inclusive_correlation(config, 1, 1000, 0.0, 0.0)

    def test_remote_packets_without_symmetrization(self):
        packets = [WavePacket(xi=10.0, pi=0.0), WavePacket(xi=-10.0, pi=0.0)]
        ensemble = fixed_ensemble(model(symmetrize=False), [packets])
        for k1, k2 in ((0.3, 0.3), (0.0, 0.0), (-0.4, 0.5)):
            self.assertAlmostEqual(two_particle_correlation(ensemble, k1, k2).value, 1.0, delta=1e-12)
        self.assertAlmostEqual(two_particle_correlation(fixed_ensemble(model(), [packets]), 0.3, 0.3).value,
                               2.0, delta=1e-6)

    def test_no_bump_without_symmetrization(self):
        ensemble = sample_ensemble(DILUTE.evolve(symmetrize=False), 2, 2000)
        estimate = two_particle_correlation(ensemble, 0.0, 0.0)
        self.assertLessEqual(abs(estimate.value - 1.0), 0.1 + 3 * estimate.error)
        k = np.linspace(-2, 2, 5)
        grid = correlation_grid(fixed_ensemble(model(symmetrize=False), [THREE_PACKETS]), k)
        density = np.array([np.abs(momentum_amplitude(packet, k)) ** 2 for packet in THREE_PACKETS])
        n1 = density.sum(axis=0)
        expected = 1.5 * (np.outer(n1, n1) - density.T @ density) / np.outer(n1, n1)
        np.testing.assert_allclose(grid.c2, expected, rtol=1e-12)


class CondensedLimitTests(SimpleTestCase):

    def test_flattening_along_sequence(self):
        rows = condensed_limit_check([DILUTE, MIDDLE, COLLAPSED], 2, 1000, np.linspace(-1, 1, 5))
        deviations = [row.max_deviation for row in rows]
        self.assertEqual([row.r2t for row in rows], sorted([row.r2t for row in rows], reverse=True))
        for earlier, later in zip(rows, rows[1:]):
            self.assertGreater(earlier.max_deviation - 3 * earlier.error, later.max_deviation + 3 * later.error)
        self.assertLessEqual(deviations[-1], 0.02)
        self.assertGreater(rows[-1].mean_overlap, 0.99)
        self.assertLess(rows[0].mean_overlap, 0.1)

    def test_flattening_for_larger_events(self):
        for n in (3, 4):
            with self.subTest(n=n):
                rows = condensed_limit_check([DILUTE, MIDDLE, COLLAPSED], n, 600, np.linspace(-1, 1, 5))
                for earlier, later in zip(rows, rows[1:]):
                    self.assertGreater(earlier.max_deviation - 3 * earlier.error,
                                       later.max_deviation + 3 * later.error)
                self.assertLessEqual(rows[-1].max_deviation, 0.02)
                self.assertGreater(rows[-1].mean_overlap, 0.99)
                self.assertLess(rows[0].mean_overlap, 0.1)


class CondensateTests(SimpleTestCase):

    def test_identities(self):
        for n_f in (1, 5, 50):
            density = condensate_density(n_f)
            self.assertAlmostEqual(density.trace(), 1.0, delta=1e-12)
            self.assertLessEqual(density.idempotency_defect(), 1e-12)
            self.assertAlmostEqual(density.purity(), 1.0, delta=1e-12)
            self.assertEqual(density.matrix.shape, (n_f + 1, n_f + 1))
            self.assertAlmostEqual(density.matrix[n_f, n_f], 1.0, delta=1e-12)

    def test_from_energy(self):
        self.assertEqual(condensate_for_energy(5.5, 1.0).n_f, 5)
        self.assertEqual(condensate_for_energy(1.4, 0.14).n_f, 10)
        with self.assertRaises(ParameterError):
            condensate_for_energy(0.5, 1.0)

    def test_invalid_occupancy(self):
        with self.assertRaises(ParameterError):
            condensate_density(0)
