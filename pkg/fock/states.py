"""
State vectors of a single bosonic mode in a truncated number basis.

Everything here is an immutable value: constructors return fresh arrays
flagged read-only, so states can be shared freely between threads.
"""

import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy.stats import poisson

from lab_project.exceptions import NormalizationError, OutOfRangeError, ParameterError

logger = logging.getLogger(__name__)

NORM_TOLERANCE = 1e-12


def _frozen(values):
    array = np.array(values, dtype=complex)
    array.setflags(write=False)
    return array


@dataclass(frozen=True, eq=False)
class StateVector:
    """
    Complex amplitudes c_n over occupation numbers n = 0..dim-1.

    ``leakage`` is the squared magnitude an operator pushed past the cutoff
    when it produced this state; ``tail`` is the probability mass the
    truncated basis could not hold when the state was constructed from an
    infinite series.
    """

    coefficients: np.ndarray
    leakage: float = 0.0
    tail: float = 0.0

    def __post_init__(self):
        coefficients = np.asarray(self.coefficients, dtype=complex)
        if coefficients.ndim != 1 or coefficients.size < 1:
            raise ParameterError("a state needs a one-dimensional coefficient array with dim >= 1")
        if not np.all(np.isfinite(coefficients)):
            raise ParameterError("state coefficients must be finite")
        object.__setattr__(self, 'coefficients', _frozen(coefficients))

    @property
    def dim(self):
        return self.coefficients.size

    @property
    def probabilities(self):
        return np.abs(self.coefficients) ** 2

    def norm(self):
        return float(np.linalg.norm(self.coefficients))

    def is_normalized(self, tolerance=NORM_TOLERANCE):
        return abs(self.norm() - 1.0) <= tolerance

    def require_normalized(self, tolerance=NORM_TOLERANCE):
        """Raise NormalizationError unless |norm - 1| <= tolerance."""
        norm = self.norm()
        if abs(norm - 1.0) > tolerance:
            raise NormalizationError(norm, tolerance)
        return self

    def normalized(self):
        norm = self.norm()
        if norm == 0.0:
            raise NormalizationError(norm, NORM_TOLERANCE)
        return StateVector(self.coefficients / norm, leakage=self.leakage, tail=self.tail)

    def mean_occupation(self):
        n = np.arange(self.dim)
        return float(np.sum(n * self.probabilities))

    def padded(self, dim):
        """Return the same amplitudes embedded in a larger cutoff."""
        if dim < self.dim:
            raise OutOfRangeError(f"cannot shrink a dim={self.dim} state to dim={dim}")
        coefficients = np.zeros(dim, dtype=complex)
        coefficients[:self.dim] = self.coefficients
        return StateVector(coefficients, leakage=self.leakage, tail=self.tail)


@dataclass(frozen=True)
class OscillatorParams:
    """Classical phase-space data of a harmonic oscillator (hbar = 1)."""

    mass: float
    omega: float
    x0: float = 0.0
    p0: float = 0.0

    def __post_init__(self):
        for name in ('mass', 'omega', 'x0', 'p0'):
            if not math.isfinite(getattr(self, name)):
                raise ParameterError(f"{name} must be finite")
        if self.mass <= 0:
            raise ParameterError("mass must be positive")
        if self.omega <= 0:
            raise ParameterError("omega must be positive")


@dataclass(frozen=True)
class QuadratureMoments:
    mean_x: float
    mean_p: float
    var_x: float
    var_p: float

    @property
    def product(self):
        return self.var_x * self.var_p


def poisson_tail(mean, cutoff):
    """Probability that a Poisson(mean) variable is >= cutoff."""
    if mean < 0:
        raise ParameterError("Poisson mean must be non-negative")
    if cutoff <= 0:
        return 1.0
    if mean == 0:
        return 0.0
    return float(poisson.sf(cutoff - 1, mean))


def make_number_state(n, dim):
    """Basis vector |n> in a dim-dimensional Fock space."""
    if dim < 1:
        raise ParameterError("dim must be at least 1")
    if not 0 <= n < dim:
        raise OutOfRangeError(f"occupation {n} outside 0..{dim - 1}")
    coefficients = np.zeros(dim, dtype=complex)
    coefficients[n] = 1.0
    return StateVector(coefficients)


def coherent_amplitudes(alpha, size):
    """e^{-|alpha|^2/2} alpha^n / sqrt(n!) for n < size, by stable recursion."""
    alpha = complex(alpha)
    ratios = np.empty(size, dtype=complex)
    ratios[0] = 1.0
    if size > 1:
        ratios[1:] = alpha / np.sqrt(np.arange(1, size))
    return math.exp(-abs(alpha) ** 2 / 2) * np.cumprod(ratios)


def make_coherent_state(alpha, dim):
    """
    Truncated series of the coherent state |alpha>.

    The returned state carries ``tail``, the Poisson mass beyond the cutoff,
    which equals 1 - sum_{n<dim} |c_n|^2.
    """
    if dim < 1:
        raise ParameterError("dim must be at least 1")
    alpha = complex(alpha)
    if not (math.isfinite(alpha.real) and math.isfinite(alpha.imag)):
        raise ParameterError("alpha must be finite")
    tail = poisson_tail(abs(alpha) ** 2, dim)
    logger.debug("coherent state alpha=%s dim=%d tail=%.3e", alpha, dim, tail)
    return StateVector(coherent_amplitudes(alpha, dim), tail=tail)


def fidelity(first, second):
    """|<first|second>|^2, padding the smaller cutoff with zeros."""
    dim = max(first.dim, second.dim)
    overlap = np.vdot(first.padded(dim).coefficients, second.padded(dim).coefficients)
    return float(abs(overlap) ** 2)
