"""
Ladder operators and the displacement operator on a truncated Fock space.

The cutoff is never hidden: whatever an operator pushes past index dim-1 is
dropped and its squared magnitude returned as ``leakage`` on the result.
"""

import logging
import math

import numpy as np

from lab_project.exceptions import ParameterError, TruncationError

from .states import StateVector, make_number_state, poisson_tail

logger = logging.getLogger(__name__)

DISPLACEMENT_TOLERANCE = 1e-12


def annihilation_matrix(dim):
    """Matrix of a in the basis |0>..|dim-1>."""
    return np.diag(np.sqrt(np.arange(1, dim, dtype=float)), k=1).astype(complex)


def creation_matrix(dim):
    """Matrix of a^dagger; the column of |dim-1> is empty (leaks past the cutoff)."""
    return annihilation_matrix(dim).T.copy()


def apply_annihilation(state):
    """
    (a s)_n = sqrt(n+1) s_{n+1}.

    The top output component would need s_dim, which lies beyond the cutoff,
    so it is always zero and must be treated as truncation-affected.
    """
    c = state.coefficients
    out = np.zeros(state.dim, dtype=complex)
    out[:-1] = np.sqrt(np.arange(1, state.dim)) * c[1:]
    return StateVector(out)


def apply_creation(state):
    """(a^dagger s)_n = sqrt(n) s_{n-1}; the amplitude sent to index dim is reported as leakage."""
    c = state.coefficients
    out = np.zeros(state.dim, dtype=complex)
    out[1:] = np.sqrt(np.arange(1, state.dim)) * c[:-1]
    leakage = state.dim * abs(c[-1]) ** 2
    return StateVector(out, leakage=float(leakage))


def nilpotent_exp(matrix):
    """exp(M) for a strictly triangular M, summed exactly as a finite series."""
    dim = matrix.shape[0]
    result = np.eye(dim, dtype=complex)
    term = np.eye(dim, dtype=complex)
    for k in range(1, dim):
        term = term @ matrix / k
        if not np.any(term):
            break
        result += term
    return result


def normal_ordered_displacement(alpha, dim):
    """e^{-|alpha|^2/2} e^{alpha a^dagger} e^{-alpha* a} as a dim x dim matrix."""
    alpha = complex(alpha)
    raising = nilpotent_exp(alpha * creation_matrix(dim))
    lowering = nilpotent_exp(-alpha.conjugate() * annihilation_matrix(dim))
    return math.exp(-abs(alpha) ** 2 / 2) * (raising @ lowering)


def displacement_apply(alpha, dim, tolerance=DISPLACEMENT_TOLERANCE):
    """
    D(alpha)|0> from the normal-ordered factorization.

    Raises TruncationError when the Poisson tail beyond the cutoff exceeds
    ``tolerance``; the result is then not a faithful coherent state.
    """
    if dim < 1:
        raise ParameterError("dim must be at least 1")
    alpha = complex(alpha)
    tail = poisson_tail(abs(alpha) ** 2, dim)
    if tail > tolerance:
        raise TruncationError(tail, tolerance, dim)

    vacuum = make_number_state(0, dim).coefficients
    coefficients = normal_ordered_displacement(alpha, dim) @ vacuum
    logger.debug("displaced vacuum alpha=%s dim=%d tail=%.3e", alpha, dim, tail)
    return StateVector(coefficients, tail=tail)
