"""
Hole states of a fully developed condensate of n_f quanta.

The condensate |BEC> = (a^dagger)^{n_f}|0>/sqrt(n_f!) plays the role of a
vacuum for the creation operator. Removing j quanta gives the hole state
|j>_dagger = |n_f - j>. On this ladder a raises the hole number and
a^dagger lowers it:

    a |j>_dagger        = sqrt(j + 1) |j + 1>_dagger
    a^dagger |j>_dagger = sqrt(j) |j - 1>_dagger
    a^dagger |BEC>      = 0

The ladder ends at j = n_f (the particle vacuum). What a pushes past that
end is reported as ``leakage``; nothing is dropped silently.

States may carry ``precision`` (decimal digits). Their amplitudes are then
mpmath numbers bound to a private context and every ladder operation keeps
that precision, so residuals far below double-precision rounding (the
Poisson tail beyond a large n_f) stay measurable.
"""

import logging
import math
from dataclasses import dataclass
from functools import lru_cache

import mpmath
import numpy as np

from fock.ladder import apply_annihilation, nilpotent_exp
from fock.states import NORM_TOLERANCE, StateVector, coherent_amplitudes, make_number_state, poisson_tail
from lab_project.exceptions import NormalizationError, OutOfRangeError, ParameterError, TruncationError

logger = logging.getLogger(__name__)

ANNIHILATION = 'annihilation'
CREATION = 'creation'


@lru_cache(maxsize=None)
def _context(precision):
    ctx = mpmath.MPContext()
    ctx.dps = precision
    return ctx


def _check_occupancy(n_f):
    if int(n_f) != n_f or n_f < 1:
        raise ParameterError(f"condensate occupancy must be a positive integer, got {n_f!r}")
    return int(n_f)


def _sqrt_range(start, stop, precision):
    if precision is None:
        return np.sqrt(np.arange(start, stop, dtype=float))
    ctx = _context(precision)
    return np.array([ctx.sqrt(k) for k in range(start, stop)], dtype=object)


def _zeros(size, precision):
    if precision is None:
        return np.zeros(size, dtype=complex)
    ctx = _context(precision)
    return np.array([ctx.mpc(0) for _ in range(size)], dtype=object)


def _norm(coefficients, precision):
    if precision is None:
        return float(np.linalg.norm(coefficients))
    ctx = _context(precision)
    return float(ctx.sqrt(ctx.fsum(abs(c) ** 2 for c in coefficients)))


@dataclass(frozen=True, eq=False)
class HoleState:
    """
    Amplitudes c_j over hole numbers j = 0..n_f.

    ``constrained`` is set when a^dagger met weight on |BEC> and had to
    annihilate it under the energy constraint. ``mode`` is an opaque label
    (e.g. the momentum k of a moving condensate); no physics depends on it.
    """

    n_f: int
    coefficients: np.ndarray
    leakage: float = 0.0
    tail: float = 0.0
    constrained: bool = False
    mode: tuple = None
    precision: int = None

    def __post_init__(self):
        n_f = _check_occupancy(self.n_f)
        if self.precision is None:
            coefficients = np.array(self.coefficients, dtype=complex)
        else:
            ctx = _context(self.precision)
            coefficients = np.array([ctx.mpc(c) for c in self.coefficients], dtype=object)
        if coefficients.shape != (n_f + 1,):
            raise ParameterError(f"hole state over n_f={n_f} needs {n_f + 1} coefficients")
        coefficients.setflags(write=False)
        object.__setattr__(self, 'n_f', n_f)
        object.__setattr__(self, 'coefficients', coefficients)

    def replace(self, coefficients, **changes):
        fields = {
            'leakage': 0.0,
            'tail': self.tail,
            'constrained': False,
            'mode': self.mode,
            'precision': self.precision,
        }
        fields.update(changes)
        return HoleState(self.n_f, coefficients, **fields)

    @property
    def probabilities(self):
        return np.array([float(abs(c) ** 2) for c in self.coefficients])

    def norm(self):
        return _norm(self.coefficients, self.precision)

    def require_normalized(self, tolerance=NORM_TOLERANCE):
        norm = self.norm()
        if abs(norm - 1.0) > tolerance:
            raise NormalizationError(norm, tolerance)
        return self


def bec_state(n_f, mode=None):
    """The condensate itself, |0>_dagger."""
    return hole_number_state(0, n_f, mode=mode)


def hole_number_state(j, n_f, mode=None):
    """|j>_dagger: the condensate with j quanta removed."""
    n_f = _check_occupancy(n_f)
    if not 0 <= j <= n_f:
        raise OutOfRangeError(f"{j} holes requested but the condensate holds only {n_f} quanta")
    coefficients = np.zeros(n_f + 1, dtype=complex)
    coefficients[j] = 1.0
    return HoleState(n_f, coefficients, mode=mode)


def to_particle(state, dim=None):
    """Map hole amplitudes onto the number basis (hole j -> particle n_f - j)."""
    dim = state.n_f + 1 if dim is None else dim
    if dim < state.n_f + 1:
        raise OutOfRangeError(f"a dim={dim} Fock space cannot hold {state.n_f} quanta")
    coefficients = np.zeros(dim, dtype=complex)
    coefficients[:state.n_f + 1] = np.asarray(state.coefficients, dtype=complex)[::-1]
    return StateVector(coefficients)


def from_particle(state, n_f, mode=None):
    """Inverse of to_particle; the particle state must live on occupations <= n_f."""
    n_f = _check_occupancy(n_f)
    if state.dim < n_f + 1:
        coefficients = state.padded(n_f + 1).coefficients
    else:
        coefficients = state.coefficients
        if np.any(coefficients[n_f + 1:]):
            raise OutOfRangeError(f"particle state has weight above the {n_f}-quanta condensate")
    return HoleState(n_f, coefficients[:n_f + 1][::-1], mode=mode)


def ladder_from_bec(j, n_f):
    """
    a^j |BEC> / sqrt(j!) built with the particle-space annihilator.

    Returns the particle state (not renormalized) and its norm. At finite n_f
    the norm is sqrt(n_f! / ((n_f - j)! j!)), not 1; the hole-basis ladder
    relations hold exactly only as n_f grows.
    """
    n_f = _check_occupancy(n_f)
    if not 0 <= j <= n_f:
        raise OutOfRangeError(f"{j} holes requested but the condensate holds only {n_f} quanta")
    state = make_number_state(n_f, n_f + 1)
    for _ in range(j):
        state = apply_annihilation(state)
    state = StateVector(state.coefficients / math.sqrt(math.factorial(j)))
    return state, state.norm()


def apply_annihilation_hole(state):
    """a on the hole ladder: c_j -> sqrt(j + 1) c_j moved to hole j + 1."""
    c = state.coefficients
    n_f = state.n_f
    out = _zeros(n_f + 1, state.precision)
    out[1:] = _sqrt_range(1, n_f + 1, state.precision) * c[:-1]
    # a|n_f>_dagger = a|0> in the particle picture
    leakage = float((n_f + 1) * abs(c[-1]) ** 2)
    return state.replace(out, leakage=leakage)


def apply_creation_hole(state):
    """a^dagger on the hole ladder: c_j -> sqrt(j) c_j moved to hole j - 1; a^dagger|BEC> = 0."""
    c = state.coefficients
    n_f = state.n_f
    out = _zeros(n_f + 1, state.precision)
    out[:-1] = _sqrt_range(1, n_f + 1, state.precision) * c[1:]
    return state.replace(out, constrained=bool(c[0] != 0))


def hole_number_expectation(state):
    """<N_dagger> = <a a^dagger> = ||a^dagger s||^2."""
    state.require_normalized()
    return apply_creation_hole(state).norm() ** 2


def dual_coherent_state(alpha, n_f, mode=None, precision=None):
    """
    Coherent state of the creation operator truncated at n_f holes.

    c_j = e^{-|alpha|^2/2} (alpha*)^j / sqrt(j!); the eigenvalue of a^dagger
    is alpha*. ``tail`` is the Poisson mass beyond j = n_f.
    """
    n_f = _check_occupancy(n_f)
    alpha = complex(alpha)
    tail = poisson_tail(abs(alpha) ** 2, n_f + 1)
    if precision is None:
        coefficients = coherent_amplitudes(alpha.conjugate(), n_f + 1)
    else:
        ctx = _context(precision)
        conj = ctx.mpc(alpha.conjugate())
        term = ctx.exp(-abs(conj) ** 2 / 2)
        coefficients = [term]
        for j in range(1, n_f + 1):
            term = term * conj / ctx.sqrt(j)
            coefficients.append(term)
    return HoleState(n_f, coefficients, tail=tail, mode=mode, precision=precision)


def hole_raising_matrix(n_f):
    """Matrix of a in the hole basis |0>_dagger..|n_f>_dagger (raises the hole number)."""
    return np.diag(np.sqrt(np.arange(1, n_f + 1, dtype=float)), k=-1).astype(complex)


def dual_displacement_apply(alpha, n_f, tolerance=1e-12, mode=None):
    """
    D^dagger(alpha)|BEC> = exp(alpha* a - alpha a^dagger)|0>_dagger.

    With the roles of a and a^dagger swapped on the hole ladder this is the
    ordinary displacement by alpha*; it is evaluated in normal order with
    respect to |BEC>: e^{-|alpha|^2/2} e^{alpha* a} e^{-alpha a^dagger}.
    """
    n_f = _check_occupancy(n_f)
    alpha = complex(alpha)
    tail = poisson_tail(abs(alpha) ** 2, n_f + 1)
    if tail > tolerance:
        raise TruncationError(tail, tolerance, n_f)

    raising = hole_raising_matrix(n_f)
    operator = nilpotent_exp(alpha.conjugate() * raising) @ nilpotent_exp(-alpha * raising.T)
    operator *= math.exp(-abs(alpha) ** 2 / 2)
    coefficients = operator @ bec_state(n_f).coefficients
    return HoleState(n_f, coefficients, tail=tail, mode=mode)


def _residual(state, which, eigenvalue):
    if which == ANNIHILATION:
        image = apply_annihilation_hole(state)
    elif which == CREATION:
        image = apply_creation_hole(state)
    else:
        raise ParameterError(f"unknown operator {which!r}; use {ANNIHILATION!r} or {CREATION!r}")
    return _norm(image.coefficients - complex(eigenvalue) * state.coefficients, state.precision)


def _require_accounted(state):
    """Unit norm, or a cut series whose missing weight is exactly its recorded tail."""
    if not state.tail:
        return state.require_normalized()
    total = state.norm() ** 2 + state.tail
    if abs(total - 1.0) > NORM_TOLERANCE:
        raise NormalizationError(math.sqrt(total), NORM_TOLERANCE)
    return state


def eigen_residual(state, which, eigenvalue):
    """
    ||Op s - lambda s|| with Op = a or a^dagger acting on the hole ladder.

    A truncated series such as dual_coherent_state(alpha, n_f) is taken as
    it is, unrenormalized, provided its norm plus its tail accounts for the
    whole state; the residual is then the tail-driven
    creation_residual_bound(alpha, n_f).
    """
    _require_accounted(state)
    return _residual(state, which, eigenvalue)



def creation_residual_bound(alpha, n_f):
    """e^{-|alpha|^2/2} |alpha|^{n_f+1} / sqrt(n_f!): the residual left by cutting the series at n_f."""
    magnitude = abs(complex(alpha))
    if magnitude == 0:
        return 0.0
    log_bound = -magnitude ** 2 / 2 + (n_f + 1) * math.log(magnitude) - math.lgamma(n_f + 1) / 2
    return math.exp(log_bound)


def hole_sweep(alpha, occupancies, precision=None):
    """
    Finite-n_f artifacts of the truncated (unrenormalized) dual coherent state.

    Without ``precision`` the residual bottoms out at double-precision
    rounding (~1e-16) once the true tail drops below it.
    """
    alpha = complex(alpha)
    rows = []
    for n_f in occupancies:
        state = dual_coherent_state(alpha, n_f, precision=precision)
        residual = _residual(state, CREATION, alpha.conjugate())
        probabilities = state.probabilities
        rows.append({
            'n_f': n_f,
            'residual': residual,
            'bound': creation_residual_bound(alpha, n_f),
            'tail': state.tail,
            'n_dagger': float(np.sum(np.arange(n_f + 1) * probabilities) / np.sum(probabilities)),
        })
        logger.debug("hole sweep n_f=%d residual=%.3e tail=%.3e", n_f, residual, state.tail)
    return rows
