"""
Observables of the symmetrized wave-packet ensemble.

For an event with packets alpha_1..alpha_n, amplitudes phi_i(k) = <k|alpha_i>
and Gram matrix G, the normalized symmetrized state gives

    N1(k)      = sum_ij conj(phi_i(k)) phi_j(k) perm(G without row i, column j) / perm(G)
    N2(k1, k2) = sum_IJ conj(S_I) S_J perm(G without rows I, columns J) / perm(G)

where I, J run over unordered pairs {a, b} and
S_{ab}(k1, k2) = phi_a(k1) phi_b(k2) + phi_b(k1) phi_a(k2).

Event weights are perm(G), so the ensemble average of an event observable is
sum_e numerator_e / sum_e perm(G_e).

Events drawn with symmetrization switched off are independent emissions:
unit weights and product densities, so fixed-n C2 averages to 1.
"""

import logging
from dataclasses import dataclass, field
from functools import reduce
from itertools import combinations, permutations

import numpy as np
from django.conf import settings
from scipy.integrate import trapezoid
from scipy.stats import poisson

from lab_project.exceptions import ParameterError, UndefinedRatioError
from wavepackets.packets import amplitude_table
from wavepackets.permanents import permanent

from .estimators import Estimate, block_sums, jackknife, mean_with_error
from .sampling import EVENT_LIMIT, sample_ensemble

logger = logging.getLogger(__name__)

GRID_ORACLE_LIMIT = 3
FIXED_N = 'fixed-n'
INCLUSIVE = 'inclusive'


def spectrum_floor():
    return settings.BOSONLAB['SPECTRUM_FLOOR']


def minimum_samples():
    return settings.BOSONLAB['MIN_SAMPLES']


def _minor_permanent(matrix):
    return 1.0 + 0j if matrix.shape[0] == 0 else permanent(matrix)


def _is_identity(matrix):
    return np.array_equal(matrix, np.eye(matrix.shape[0]))


def one_body_minors(gram):
    """P1[i, j] = perm(G with row i and column j removed)."""
    g = gram.matrix
    n = g.shape[0]
    if _is_identity(g):
        return np.eye(n, dtype=complex)
    minors = np.empty((n, n), dtype=complex)
    for i in range(n):
        rows = np.delete(g, i, axis=0)
        for j in range(n):
            minors[i, j] = _minor_permanent(np.delete(rows, j, axis=1))
    return minors


def two_body_minors(gram):
    """P2[I, J] = perm(G with the rows of pair I and the columns of pair J removed)."""
    g = gram.matrix
    n = g.shape[0]
    pairs = list(combinations(range(n), 2))
    if _is_identity(g):
        return np.eye(len(pairs), dtype=complex)
    rest = [[index for index in range(n) if index not in pair] for pair in pairs]
    minors = np.empty((len(pairs), len(pairs)), dtype=complex)
    for a, rows in enumerate(rest):
        for b, columns in enumerate(rest):
            minors[a, b] = _minor_permanent(g[np.ix_(rows, columns)])
    return minors


def _momentum_grid(k_grid, dimension):
    k = np.asarray(k_grid, dtype=float)
    if k.size == 0:
        raise ParameterError("the momentum grid is empty")
    if dimension == 1:
        return k.reshape(-1)
    if k.ndim != 2 or k.shape[1] != dimension:
        raise ParameterError(f"momenta for d={dimension} must have shape (K, {dimension})")
    return k


def _independent_densities(phi, pairs):
    """Product densities: N2(k1, k2) = sum over a != b of |phi_a(k1)|^2 |phi_b(k2)|^2."""
    density = np.abs(phi) ** 2
    n1 = density.sum(axis=0)
    if not pairs:
        return n1, None
    return n1, np.outer(n1, n1) - density.T @ density


def event_densities(event, k, pairs=True):
    """Unnormalized one- and two-body numerators of a single event on the momenta ``k``."""
    phi = amplitude_table(event.packets, k)
    if not event.symmetrized:
        return _independent_densities(phi, pairs)
    n1 = np.einsum('ik,ij,jk->k', phi.conj(), one_body_minors(event.gram), phi).real
    if not pairs:
        return n1, None
    index = list(combinations(range(event.n), 2))
    if not index:
        return n1, np.zeros((k.shape[0], k.shape[0]))
    a, b = np.array(index).T
    amplitudes = phi[a, :, None] * phi[b, None, :] + phi[b, :, None] * phi[a, None, :]
    n2 = np.einsum('pkl,pq,qkl->kl', amplitudes.conj(), two_body_minors(event.gram), amplitudes).real
    return n1, n2


def _ensemble_moments(ensemble, k, pairs=True):
    weights = ensemble.weights
    densities = [event_densities(event, k, pairs=pairs) for event in ensemble.events]
    n1 = np.stack([one for one, _ in densities])
    n2 = np.stack([two for _, two in densities]) if pairs else None
    return weights, n1, n2


def _require_resolved(n1, k):
    floor = spectrum_floor()
    low = np.flatnonzero(np.asarray(n1) < floor)
    if low.size:
        logger.error("one-body density below %.1e at %d grid points", floor, low.size)
        raise UndefinedRatioError(
            f"one-body density {np.asarray(n1)[low[0]]:.3e} at k={k[low[0]]} is below the floor {floor:.1e}"
        )


@dataclass(frozen=True, eq=False)
class Spectrum:
    k: np.ndarray
    value: np.ndarray
    error: np.ndarray


@dataclass(frozen=True, eq=False)
class CorrelationGrid:
    k: np.ndarray
    c2: np.ndarray
    error: np.ndarray
    n: int
    label: str = FIXED_N


@dataclass(frozen=True)
class InclusiveCorrelation:
    value: float
    error: float
    n_max: int
    label: str = INCLUSIVE


@dataclass(frozen=True, eq=False)
class MultiplicityDistribution:
    n0: float
    probabilities: np.ndarray
    errors: np.ndarray
    prior: np.ndarray
    constants: tuple
    mean: Estimate

    @property
    def multiplicities(self):
        return np.arange(self.probabilities.size)


@dataclass(frozen=True, eq=False)
class MultiplicityScan:
    n0: np.ndarray
    mean: np.ndarray
    error: np.ndarray
    knee: float = None


@dataclass(frozen=True)
class LimitRow:
    r2t: float
    max_deviation: float
    error: float
    mean_overlap: float
    at: tuple = field(default=())


@dataclass(frozen=True, eq=False)
class GridDensities:
    k: np.ndarray
    n1: np.ndarray
    n2: np.ndarray


def normalization_constant(config, n, samples=None, workers=None):
    """
    N(n) = E[perm(G)] over n packets drawn from the source, with its standard error.

    N(0) = N(1) = 1 exactly, and so is every N(n) when symmetrization is off.
    """
    if int(n) != n or n < 0:
        raise ParameterError(f"multiplicity must be a non-negative integer, got {n!r}")
    if n <= 1 or not config.symmetrize:
        return Estimate(1.0, 0.0)
    samples = samples or minimum_samples()
    if samples < minimum_samples():
        raise ParameterError(f"N(n) needs at least {minimum_samples()} samples, got {samples}")
    ensemble = sample_ensemble(config, n, samples, workers=workers)
    estimate = mean_with_error(ensemble.weights)
    logger.debug("N(%d) = %.6g +- %.2g from %d events", n, estimate.value, estimate.error, samples)
    return Estimate(float(estimate.value), float(estimate.error))


def pair_overlap_moment(config):
    """E|<alpha_1|alpha_2>|^2 for two independent source packets, so N(2) = 1 + this."""
    sigma2 = config.sigma ** 2
    base = (1 + 2 * config.momentum_variance / sigma2) * (1 + 2 * sigma2 * config.radius ** 2)
    return base ** (-config.dimension / 2)


def _distribution(n0, constants):
    """p_n proportional to Poisson(n0) N(n), with linear error propagation."""
    multiplicities = np.arange(len(constants))
    prior = poisson.pmf(multiplicities, n0)
    values = np.array([constant.value for constant in constants], dtype=float)
    errors = np.array([constant.error for constant in constants], dtype=float)

    weighted = prior * values
    total = weighted.sum()
    probabilities = weighted / total
    spread = prior * errors
    jacobian = (np.eye(len(constants)) * total - weighted[:, None]) / total ** 2
    probability_errors = np.sqrt((jacobian ** 2) @ spread ** 2)

    mean = float(multiplicities @ probabilities)
    mean_error = float(np.sqrt(np.sum(((multiplicities - mean) / total * spread) ** 2)))
    return MultiplicityDistribution(
        n0=n0,
        probabilities=probabilities,
        errors=probability_errors,
        prior=prior / prior.sum(),
        constants=tuple(constants),
        mean=Estimate(mean, mean_error),
    )


def _constants(config, n_max, samples, workers):
    if int(n_max) != n_max or not 1 <= n_max <= EVENT_LIMIT:
        raise ParameterError(f"n_max must lie in 1..{EVENT_LIMIT}, got {n_max!r}")
    return [normalization_constant(config, n, samples, workers) for n in range(int(n_max) + 1)]


def multiplicity_distribution(config, n_max, samples=None, workers=None):
    """
    Multiplicities 0..n_max after symmetrization.

    p_n is taken proportional to p_n^(0) N(n), the independent-emission
    Poisson weight times the normalization of the symmetrized n-boson
    density matrix. With symmetrization off this is the renormalized Poisson.
    """
    return _distribution(config.n0, _constants(config, n_max, samples, workers))


def _knee(x, y):
    """x at the largest curvature of y(x), interior points only."""
    if x.size < 3:
        return None
    slope = np.gradient(y, x)
    curvature = np.abs(np.gradient(slope, x)) / (1 + slope ** 2) ** 1.5
    return float(x[1 + int(np.argmax(curvature[1:-1]))])


def multiplicity_scan(config, n0_values, n_max, samples=None, workers=None):
    """
    Mean multiplicity against n0, reusing one set of N(n).

    The knee of the curve serves as an empirical critical n0.
    """
    n0_values = np.sort(np.asarray(n0_values, dtype=float))
    if n0_values.size == 0 or np.any(n0_values <= 0):
        raise ParameterError("n0 values must be positive")
    constants = _constants(config, n_max, samples, workers)
    means = [_distribution(n0, constants).mean for n0 in n0_values]
    mean = np.array([estimate.value for estimate in means])
    return MultiplicityScan(
        n0=n0_values,
        mean=mean,
        error=np.array([estimate.error for estimate in means]),
        knee=_knee(n0_values, mean),
    )


def one_particle_spectrum(ensemble, k_grid):
    """Ensemble-averaged N1(k); integrates to n over momentum space."""
    k = _momentum_grid(k_grid, ensemble.config.dimension)
    weights, n1, _ = _ensemble_moments(ensemble, k, pairs=False)
    estimate = jackknife(lambda w, one: one / w, block_sums(weights), block_sums(n1))
    return Spectrum(k=k, value=estimate.value, error=estimate.error)


def _fixed_n_statistic(n):
    factor = n / (n - 1)

    def statistic(w, one, two):
        density = one / w
        return factor * (two / w) / np.outer(density, density)

    return statistic


def correlation_grid(ensemble, k_grid):
    """
    Fixed-n C2 on every pair of grid momenta.

    C2 = [n / (n - 1)] N2 / (N1 N1), which is 1 for uncorrelated emission of
    exactly n bosons.
    """
    if ensemble.n < 2:
        raise ParameterError("two-particle correlations need at least two packets per event")
    k = _momentum_grid(k_grid, ensemble.config.dimension)
    weights, n1, n2 = _ensemble_moments(ensemble, k)
    _require_resolved(n1.sum(axis=0) / weights.sum(), k)
    estimate = jackknife(
        _fixed_n_statistic(ensemble.n), block_sums(weights), block_sums(n1), block_sums(n2),
    )
    return CorrelationGrid(k=k, c2=estimate.value, error=estimate.error, n=ensemble.n)


def two_particle_correlation(ensemble, k1, k2):
    grid = correlation_grid(ensemble, [k1, k2])
    return Estimate(float(grid.c2[0, 1]), float(grid.error[0, 1]))


def inclusive_correlation(config, n_max, samples, k1, k2, workers=None):
    """
    C2 = N2 / (N1 N1) with N1 and N2 summed over multiplicities 1..n_max with p_n.

    p_n uses the N(n) of the same ensembles, and block b is removed from every
    multiplicity at once in the jackknife.
    """
    if int(n_max) != n_max or not 2 <= n_max <= EVENT_LIMIT:
        raise ParameterError(f"n_max must lie in 2..{EVENT_LIMIT}, got {n_max!r}")
    n_max = int(n_max)
    k = _momentum_grid([k1, k2], config.dimension)
    prior = poisson.pmf(np.arange(n_max + 1), config.n0)

    sums = []
    for n in range(1, n_max + 1):
        ensemble = sample_ensemble(config, n, samples, workers=workers)
        weights, n1, n2 = _ensemble_moments(ensemble, k)
        sums += [block_sums(np.ones_like(weights)), block_sums(weights), block_sums(n1), block_sums(n2)]

    def statistic(*totals):
        grouped = [totals[index:index + 4] for index in range(0, len(totals), 4)]
        weighted = np.concatenate([[prior[0]], [prior[n] * w / count for n, (count, w, _, _) in
                                                enumerate(grouped, start=1)]])
        probabilities = weighted / weighted.sum()
        one = sum(p * n1 / w for p, (_, w, n1, _) in zip(probabilities[1:], grouped))
        two = sum(p * n2 / w for p, (_, w, _, n2) in zip(probabilities[1:], grouped))
        return np.array([two[0, 1] / (one[0] * one[1]), one[0], one[1]])

    estimate = jackknife(statistic, *sums)
    _require_resolved(estimate.value[1:], k)
    return InclusiveCorrelation(value=float(estimate.value[0]), error=float(estimate.error[0]), n_max=n_max)


def grid_densities(packets, k_grid):
    """
    N1 and N2 of a fixed set of d = 1 packets by brute force on a grid.

    The symmetrized product wavefunction is tabulated on the full n-fold grid,
    normalized by quadrature and integrated down to its marginals; no
    permanents are involved.
    """
    packets = list(packets)
    n = len(packets)
    if not 1 <= n <= GRID_ORACLE_LIMIT:
        raise ParameterError(f"the grid oracle handles 1..{GRID_ORACLE_LIMIT} packets, got {n}")
    if packets[0].dimension != 1:
        raise ParameterError("the grid oracle works in one dimension only")
    k = _momentum_grid(k_grid, 1)
    phi = amplitude_table(packets, k)

    wavefunction = sum(reduce(np.multiply.outer, [phi[index] for index in order])
                       for order in permutations(range(n)))
    density = np.abs(wavefunction) ** 2
    total = density
    for _ in range(n):
        total = trapezoid(total, k, axis=-1)
    density = density / total

    one = density
    for _ in range(n - 1):
        one = trapezoid(one, k, axis=-1)
    if n < 2:
        return GridDensities(k=k, n1=n * one, n2=np.zeros((k.size, k.size)))
    two = density
    for _ in range(n - 2):
        two = trapezoid(two, k, axis=-1)
    return GridDensities(k=k, n1=n * one, n2=n * (n - 1) * two)


def mean_pair_overlap(ensemble):
    """Weighted mean of |G_ij|^2 over distinct packet pairs."""
    if ensemble.n < 2:
        return 0.0
    upper = np.triu_indices(ensemble.n, k=1)
    values = [np.mean(np.abs(event.gram.matrix[upper]) ** 2) for event in ensemble.events]
    weights = ensemble.weights
    return float(weights @ np.array(values) / weights.sum())


def condensed_limit_check(configs, n, samples, k_grid, workers=None):
    """
    max |C2 - 1| over the grid for each config.

    Along a sequence with R^2 T shrinking the packets collapse onto
    alpha_0 = (0, 0) and the correlation flattens to 1.
    """
    rows = []
    for config in configs:
        ensemble = sample_ensemble(config, n, samples, workers=workers)
        grid = correlation_grid(ensemble, k_grid)
        deviation = np.abs(grid.c2 - 1.0)
        i, j = np.unravel_index(int(np.argmax(deviation)), deviation.shape)
        rows.append(LimitRow(
            r2t=config.radius ** 2 * config.temperature,
            max_deviation=float(deviation[i, j]),
            error=float(grid.error[i, j]),
            mean_overlap=mean_pair_overlap(ensemble),
            at=(grid.k[i].tolist(), grid.k[j].tolist()),
        ))
        logger.info("R^2 T = %.3g: max |C2 - 1| = %.4f", rows[-1].r2t, rows[-1].max_deviation)
    return rows
