import math
from itertools import permutations

import numpy as np
from django.test import SimpleTestCase
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad, trapezoid

from lab_project.exceptions import (
    GridResolutionError,
    NumericalFailure,
    PacketMismatchError,
    ParameterError,
    PermanentBoundError,
)

from .packets import (
    GramMatrix,
    GridSpec,
    WavePacket,
    gram_matrix,
    momentum_amplitude,
    overlap,
    overlap_quadrature,
)
from .permanents import (
    gram_permanent,
    nboson_norm,
    permanent,
    permanent_bruteforce,
    permanent_ryser,
)


def random_packets(rng, n, sigma=1.0, spread=1.5, dimension=1):
    return [
        WavePacket(xi=rng.normal(0, spread, dimension), pi=rng.normal(0, spread, dimension), sigma=sigma)
        for _ in range(n)
    ]


coordinates = st.floats(min_value=-4.0, max_value=4.0, allow_nan=False)
widths = st.floats(min_value=0.5, max_value=2.0)


@st.composite
def packet_lists(draw, min_size=1, max_size=6, sigma=None, dimension=1):
    sigma = draw(widths) if sigma is None else sigma
    size = draw(st.integers(min_value=min_size, max_value=max_size))
    vectors = st.lists(coordinates, min_size=dimension, max_size=dimension)
    return [WavePacket(xi=draw(vectors), pi=draw(vectors), sigma=sigma) for _ in range(size)]


def naive_permanent(matrix):
    n = len(matrix)
    return sum(math.prod(matrix[i][s[i]] for i in range(n)) for s in permutations(range(n)))


class WavePacketTests(SimpleTestCase):

    def test_rejects_bad_parameters(self):
        with self.assertRaises(ParameterError):
            WavePacket(xi=0.0, pi=0.0, sigma=0.0)
        with self.assertRaises(ParameterError):
            WavePacket(xi=(0.0, 0.0), pi=(0.0, 0.0))
        with self.assertRaises(ParameterError):
            WavePacket(xi=(0.0,), pi=(0.0, 1.0, 2.0))
        with self.assertRaises(ParameterError):
            WavePacket(xi=float('nan'), pi=0.0)

    def test_scalar_centers_are_one_dimensional(self):
        packet = WavePacket(xi=0.5, pi=-1.0, sigma=2.0)
        self.assertEqual(packet.dimension, 1)
        self.assertEqual(packet.xi, (0.5,))

    def test_peak_amplitude(self):
        self.assertAlmostEqual(momentum_amplitude(WavePacket(0.0, 2.0), 2.0), math.pi ** -0.25, delta=1e-15)
        packet = WavePacket(xi=(1.0, 2.0, 3.0), pi=(0.5, 0.5, 0.5), sigma=0.7)
        value = momentum_amplitude(packet, [0.5, 0.5, 0.5])
        self.assertAlmostEqual(value, (math.pi * 0.49) ** -0.75, delta=1e-14)

    def test_amplitude_substitution(self):
        value = momentum_amplitude(WavePacket(0.0, 0.0), 1.0)
        self.assertAlmostEqual(value, math.pi ** -0.25 * math.exp(-0.5), delta=1e-15)

    def test_amplitude_normalized(self):
        packet = WavePacket(xi=1.3, pi=-0.4, sigma=0.8)
        p = np.linspace(-12, 12, 2 ** 13)
        density = np.abs(momentum_amplitude(packet, p)) ** 2
        self.assertAlmostEqual(trapezoid(density, p), 1.0, delta=1e-8)


class OverlapTests(SimpleTestCase):

    def test_identical_packets(self):
        packet = WavePacket(xi=(0.3, -1.0, 2.0), pi=(1.0, 0.0, -0.5), sigma=1.2)
        self.assertEqual(overlap(packet, packet), 1.0)
        self.assertAlmostEqual(overlap_quadrature(packet, packet).value, 1.0, delta=1e-8)

    def test_remote_packets(self):
        self.assertLessEqual(abs(overlap(WavePacket(0.0, 0.0), WavePacket(0.0, 10.0))), 1e-10)

    def test_unit_shift_matches_quadrature(self):
        first, second = WavePacket(0.0, 0.0), WavePacket(0.0, 1.0)
        self.assertAlmostEqual(overlap(first, second), math.exp(-0.25), delta=1e-15)
        self.assertLessEqual(abs(overlap(first, second) - overlap_quadrature(first, second).value), 1e-8)

    def test_closed_form_against_quad(self):
        first = WavePacket(xi=0.7, pi=-0.3, sigma=1.1)
        second = WavePacket(xi=-0.2, pi=0.9, sigma=1.1)

        def integrand(p, part):
            value = np.conj(momentum_amplitude(first, p)) * momentum_amplitude(second, p)
            return getattr(value, part)

        real, _ = quad(integrand, -np.inf, np.inf, args=('real',), epsabs=1e-13)
        imag, _ = quad(integrand, -np.inf, np.inf, args=('imag',), epsabs=1e-13)
        self.assertLessEqual(abs(overlap(first, second) - complex(real, imag)), 1e-9)

    @settings(max_examples=60, deadline=None)
    @given(packet_lists(min_size=2, max_size=2))
    def test_closed_form_against_quadrature_random_pairs(self, packets):
        first, second = packets
        result = overlap_quadrature(first, second)
        self.assertLessEqual(abs(overlap(first, second) - result.value), 1e-8)
        self.assertLessEqual(result.error, 1e-8)

    @settings(max_examples=20, deadline=None)
    @given(packet_lists(min_size=2, max_size=2, sigma=1.0))
    def test_quadrature_conjugate_symmetry(self, packets):
        first, second = packets
        forward = overlap_quadrature(first, second).value
        backward = overlap_quadrature(second, first).value
        self.assertLessEqual(abs(forward - backward.conjugate()), 1e-10)

    def test_three_dimensional_quadrature(self):
        rng = np.random.default_rng(13)
        first, second = random_packets(rng, 2, dimension=3, spread=0.8)
        result = overlap_quadrature(first, second, GridSpec(points=2049))
        self.assertLessEqual(abs(overlap(first, second) - result.value), 1e-8)

    def test_coarse_grid_refused(self):
        first, second = WavePacket(xi=0.0, pi=0.0), WavePacket(xi=400.0, pi=0.5)
        with self.assertRaises(GridResolutionError) as ctx:
            overlap_quadrature(first, second, GridSpec(points=1025))
        self.assertGreater(ctx.exception.required_points, 1025)
        with self.assertRaises(GridResolutionError):
            overlap_quadrature(WavePacket(0.0, 0.0), WavePacket(0.0, 1.0), GridSpec(points=512))

    def test_narrow_grid_refused(self):
        with self.assertRaises(GridResolutionError):
            overlap_quadrature(WavePacket(0.0, 0.0), WavePacket(0.0, 3.0), GridSpec(margin=4.0))

    def test_decays_with_momentum_separation(self):
        reference = WavePacket(xi=0.4, pi=0.0, sigma=0.9)
        magnitudes = [abs(overlap(reference, WavePacket(xi=-0.3, pi=shift, sigma=0.9)))
                      for shift in np.linspace(0, 8, 30)]
        for earlier, later in zip(magnitudes, magnitudes[1:]):
            self.assertLess(later, earlier)

    def test_mismatched_packets(self):
        with self.assertRaises(PacketMismatchError):
            overlap(WavePacket(0.0, 0.0, sigma=1.0), WavePacket(0.0, 0.0, sigma=2.0))
        with self.assertRaises(PacketMismatchError):
            overlap(WavePacket(0.0, 0.0), WavePacket((0.0, 0.0, 0.0), (0.0, 0.0, 0.0)))


class GramMatrixTests(SimpleTestCase):

    def test_identical_packets_give_ones(self):
        packet = WavePacket(xi=0.2, pi=0.7)
        np.testing.assert_allclose(gram_matrix([packet] * 4).matrix, np.ones((4, 4)), atol=1e-15)

    def test_remote_packets_give_identity(self):
        packets = [WavePacket(xi=0.0, pi=15.0 * i) for i in range(5)]
        np.testing.assert_allclose(gram_matrix(packets).matrix, np.eye(5), atol=1e-10)

    def test_line_of_packets_is_positive(self):
        packets = [WavePacket(xi=0.0, pi=float(i), sigma=1.0) for i in range(3)]
        gram = gram_matrix(packets).check()
        self.assertGreaterEqual(np.linalg.eigvalsh(gram.matrix)[0], -1e-10)

    def test_entries_match_pairwise_overlaps(self):
        packets = random_packets(np.random.default_rng(4), 6, dimension=3)
        gram = gram_matrix(packets).check()
        for i, first in enumerate(packets):
            for j, second in enumerate(packets):
                self.assertAlmostEqual(gram.matrix[i, j], overlap(first, second), delta=1e-15)

    @given(packet_lists(max_size=12))
    def test_random_gram_invariants(self, packets):
        gram_matrix(packets).check()

    def test_check_flags_violations(self):
        with self.assertRaises(NumericalFailure):
            GramMatrix([[1.0, 0.5], [0.4, 1.0]]).check()
        with self.assertRaises(NumericalFailure):
            GramMatrix([[1.0, 0.0], [0.0, 0.9]]).check()
        with self.assertRaises(NumericalFailure):
            GramMatrix([[1.0, 1.0, -1.0], [1.0, 1.0, 1.0], [-1.0, 1.0, 1.0]]).check()

    def test_too_many_packets(self):
        with self.assertRaises(ParameterError):
            gram_matrix([WavePacket(0.0, 0.0)] * 31)


class PermanentTests(SimpleTestCase):

    def test_small_examples(self):
        self.assertEqual(permanent_bruteforce(np.eye(5)), 1)
        self.assertEqual(permanent_bruteforce(np.ones((3, 3))), 6)
        self.assertAlmostEqual(permanent_bruteforce([[1, 0.5], [0.5, 1]]), 1.25, delta=1e-15)
        self.assertAlmostEqual(permanent_ryser(np.eye(8)), 1.0, delta=1e-14)
        self.assertAlmostEqual(permanent_ryser(np.ones((4, 4))), 24.0, delta=1e-12)
        self.assertAlmostEqual(permanent_ryser([[3.0]]), 3.0)

    def test_bruteforce_matches_definition(self):
        rng = np.random.default_rng(1)
        for n in range(1, 7):
            matrix = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
            self.assertAlmostEqual(permanent_bruteforce(matrix), naive_permanent(matrix.tolist()), delta=1e-10)

    def test_bruteforce_expansion_beyond_table(self):
        self.assertAlmostEqual(permanent_bruteforce(np.ones((9, 9))), math.factorial(9), delta=1e-6)
        rng = np.random.default_rng(3)
        matrix = rng.uniform(-1, 1, size=(10, 10))
        value = permanent_bruteforce(matrix)
        self.assertLessEqual(abs(value - permanent_ryser(matrix)), 1e-10 * max(1.0, abs(value)))

    def test_bounds(self):
        with self.assertRaises(PermanentBoundError):
            permanent_bruteforce(np.eye(11))
        with self.assertRaises(PermanentBoundError):
            permanent_ryser(np.eye(31))
        with self.assertRaises(ParameterError):
            permanent(np.ones((2, 3)))

    @settings(max_examples=300, deadline=None)
    @given(packet_lists(min_size=2, max_size=8))
    def test_ryser_agrees_with_bruteforce_on_gram_matrices(self, packets):
        gram = gram_matrix(packets)
        exact = permanent_bruteforce(gram.matrix)
        fast = permanent_ryser(gram.matrix)
        self.assertLessEqual(abs(fast - exact), 1e-10 * abs(exact))
        self.assertLessEqual(abs(exact.imag), 1e-10 * abs(exact))
        self.assertGreaterEqual(exact.real, 1 - 1e-8)

    def test_dispatcher(self):
        self.assertAlmostEqual(permanent(np.ones((9, 9))), math.factorial(9), delta=1e-6)
        self.assertEqual(permanent(np.eye(3)), 1)

    def test_gram_permanent_rejects_negative(self):
        with self.assertRaises(NumericalFailure):
            gram_permanent(np.array([[1.0, 2.0], [-1.0, -1.0]]))
        with self.assertRaises(NumericalFailure):
            gram_permanent(np.array([[1.0, 1j], [1.0, 1.0]]))


class NBosonNormTests(SimpleTestCase):

    def test_remote_packets(self):
        packets = [WavePacket(xi=0.0, pi=20.0 * i) for i in range(4)]
        self.assertAlmostEqual(nboson_norm(packets), 1.0, delta=1e-12)

    def test_identical_packets(self):
        for n in (1, 2, 3, 5, 9):
            packets = [WavePacket(xi=(0.1, 0.2, 0.3), pi=(0.0, 1.0, 0.0))] * n
            self.assertAlmostEqual(nboson_norm(packets), math.sqrt(math.factorial(n)),
                                   delta=1e-9 * math.sqrt(math.factorial(n)))

    def test_partial_overlap(self):
        packets = [WavePacket(xi=0.0, pi=0.0), WavePacket(xi=0.5, pi=0.8), WavePacket(xi=-0.4, pi=1.5)]
        expected = math.sqrt(permanent_bruteforce(gram_matrix(packets).matrix).real)
        self.assertAlmostEqual(nboson_norm(packets), expected, delta=1e-14)

    @given(packet_lists(min_size=6, max_size=6, sigma=1.0), st.permutations(range(6)))
    def test_permutation_invariance(self, packets, order):
        reference = nboson_norm(packets)
        shuffled = [packets[i] for i in order]
        self.assertAlmostEqual(nboson_norm(shuffled), reference, delta=1e-12 * reference)
