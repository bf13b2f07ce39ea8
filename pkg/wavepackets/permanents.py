"""
Matrix permanents.

perm(M) = sum over permutations s of prod_i M[i, s(i)], the determinant
without signs. Two evaluations are kept so each can check the other:

* ``permanent_bruteforce`` sums the n! products directly (n <= 10).
* ``permanent_ryser`` uses Ryser's inclusion-exclusion formula in the
  balanced form of Nijenhuis and Wilf, visiting the 2^(n-1) column subsets
  in Gray-code order so each step updates the row sums by one column.
"""

import logging
import math
from functools import lru_cache
from itertools import permutations

import numpy as np

from lab_project.exceptions import NumericalFailure, ParameterError, PermanentBoundError

from .packets import gram_matrix

logger = logging.getLogger(__name__)

BRUTEFORCE_LIMIT = 10
TABLE_LIMIT = 8
RYSER_LIMIT = 30
DISPATCH_CUTOFF = 8
IMAGINARY_TOLERANCE = 1e-10

# row sums are recomputed from scratch this often to stop rounding drift
REANCHOR_STEPS = 1024
FLUSH_TERMS = 4096


def _square(matrix):
    m = np.asarray(matrix, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ParameterError(f"permanent needs a square matrix, got shape {m.shape}")
    if m.shape[0] == 0:
        raise ParameterError("permanent of an empty matrix is not defined here")
    return m


def _fsum_complex(values):
    values = np.asarray(values)
    return complex(math.fsum(values.real), math.fsum(values.imag))


@lru_cache(maxsize=None)
def _permutation_table(n):
    table = np.array(list(permutations(range(n))), dtype=np.intp)
    table.setflags(write=False)
    return table


def _bruteforce(m):
    n = m.shape[0]
    if n <= TABLE_LIMIT:
        products = np.prod(m[np.arange(n), _permutation_table(n)], axis=1)
        return _fsum_complex(products)
    # expand along the first row until the minors fit the table
    terms = [
        m[0, j] * _bruteforce(np.delete(m[1:], j, axis=1))
        for j in range(n) if m[0, j] != 0
    ]
    return _fsum_complex(terms) if terms else 0j


def permanent_bruteforce(matrix):
    m = _square(matrix)
    if m.shape[0] > BRUTEFORCE_LIMIT:
        raise PermanentBoundError(
            f"brute-force permanent is limited to n <= {BRUTEFORCE_LIMIT}, got {m.shape[0]}"
        )
    return _bruteforce(m)


class _ComplexAccumulator:
    """Correctly rounded running sum of complex terms."""

    def __init__(self):
        self.real = []
        self.imag = []

    def add(self, value):
        self.real.append(value.real)
        self.imag.append(value.imag)
        if len(self.real) >= FLUSH_TERMS:
            self.real = [math.fsum(self.real)]
            self.imag = [math.fsum(self.imag)]

    def total(self):
        return complex(math.fsum(self.real), math.fsum(self.imag))


def permanent_ryser(matrix):
    """
    perm(M) = (-1)^(n-1) 2 sum_{S in [n-1]} (-1)^|S| prod_i (x_i + sum_{j in S} M_ij)

    with x_i = M_{i,n} - (sum_j M_ij) / 2. Cost is O(2^(n-1) n).
    """
    m = _square(matrix)
    n = m.shape[0]
    if n > RYSER_LIMIT:
        raise PermanentBoundError(f"Ryser permanent is limited to n <= {RYSER_LIMIT}, got {n}")
    if n == 1:
        return complex(m[0, 0])

    base = m[:, -1] - m.sum(axis=1) / 2
    row_sums = base.copy()
    accumulator = _ComplexAccumulator()
    accumulator.add(np.prod(row_sums))

    gray, size = 0, 0
    for step in range(1, 1 << (n - 1)):
        column = (step & -step).bit_length() - 1
        gray ^= 1 << column
        if gray >> column & 1:
            row_sums += m[:, column]
            size += 1
        else:
            row_sums -= m[:, column]
            size -= 1
        if step % REANCHOR_STEPS == 0:
            chosen = [j for j in range(n - 1) if gray >> j & 1]
            row_sums = base + m[:, chosen].sum(axis=1)
        term = np.prod(row_sums)
        accumulator.add(-term if size & 1 else term)

    total = 2 * accumulator.total()
    return -total if n % 2 == 0 else total


def permanent(matrix):
    """Brute force up to n = 8, Ryser above."""
    m = _square(matrix)
    if m.shape[0] <= DISPATCH_CUTOFF:
        return permanent_bruteforce(m)
    return permanent_ryser(m)


def gram_permanent(gram, tolerance=IMAGINARY_TOLERANCE):
    """
    perm(G) of a Gram matrix as a real number.

    The permanent of a Hermitian positive semidefinite matrix is real and
    non-negative; an imaginary part above ``tolerance * |perm|`` or a
    negative value is reported as NumericalFailure.
    """
    value = permanent(getattr(gram, 'matrix', gram))
    scale = max(abs(value), 1.0)
    if abs(value.imag) > tolerance * scale:
        logger.error("complex Gram permanent %r", value)
        raise NumericalFailure(f"Gram permanent has imaginary part {value.imag:.3e}")
    if value.real < -tolerance * scale:
        logger.error("negative Gram permanent %r", value)
        raise NumericalFailure(f"Gram permanent is negative ({value.real:.3e})")
    return max(value.real, 0.0)


def nboson_norm(packets):
    """sqrt(perm(G)): the norm of the symmetrized n-packet state."""
    return math.sqrt(gram_permanent(gram_matrix(packets)))
