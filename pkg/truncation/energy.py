"""
Coherent states under an energy budget.

A mode of frequency w holds at most n_f = floor(E_max / w) quanta, so only
the first n_f + 1 terms of the coherent-state series survive:

    D_{n_f}(alpha)|0> = sum_{n <= n_f} alpha^n (a^dagger)^n / n! |0>
                      = sum_{n <= n_f} alpha^n / sqrt(n!) |n>

The budget is a single parameter whether it is called E_max or E_tot.
"""

import logging
import math
from dataclasses import dataclass

import numpy as np

from fock.states import StateVector, fidelity, make_coherent_state, poisson_tail
from lab_project.exceptions import ParameterError, UnboundedCapacityError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ModeSpec:
    """A free-field mode: mass m and momentum magnitude |k| (energy units)."""

    mass: float = 0.0
    momentum: float = 0.0

    def __post_init__(self):
        if self.mass < 0 or self.momentum < 0:
            raise ParameterError("mode mass and momentum magnitude must be non-negative")

    @classmethod
    def from_vector(cls, mass, k):
        return cls(mass=mass, momentum=float(np.linalg.norm(np.atleast_1d(k))))

    @property
    def omega(self):
        return math.sqrt(self.mass ** 2 + self.momentum ** 2)


@dataclass(frozen=True)
class EnergyBudget:
    e_max: float

    def __post_init__(self):
        if not (self.e_max > 0 and math.isfinite(self.e_max)):
            raise ParameterError(f"the energy budget E_max must be positive and finite, got {self.e_max!r}")


@dataclass(frozen=True, eq=False)
class TruncatedCoherent:
    """The raw truncated series and its norm, kept apart."""

    alpha: complex
    n_f: int
    raw: StateVector
    norm: float

    def normalized(self):
        return StateVector(self.raw.coefficients / self.norm)


def mode_capacity(budget, mode):
    """floor(E_max / w_k); a massless mode at k = 0 has no finite capacity."""
    omega = mode.omega
    if omega == 0:
        raise UnboundedCapacityError(
            "massless mode at zero momentum: any number of quanta fits the budget"
        )
    ratio = budget.e_max / omega
    if not math.isfinite(ratio):
        raise UnboundedCapacityError(
            f"w = {omega!r} is too soft for a finite capacity under E_max = {budget.e_max!r}"
        )
    n_f = int(math.floor(ratio))
    # the quotient is rounded; settle on the largest n_f with n_f * w <= E_max
    while n_f > 0 and n_f * omega > budget.e_max:
        n_f -= 1
    while (n_f + 1) * omega <= budget.e_max:
        n_f += 1
    return n_f


def truncated_coherent(alpha, n_f):
    """Unnormalized D_{n_f}(alpha)|0> on dim = n_f + 1, with its norm."""
    if int(n_f) != n_f or n_f < 0:
        raise ParameterError(f"capacity must be a non-negative integer, got {n_f!r}")
    n_f = int(n_f)
    alpha = complex(alpha)
    coefficients = np.empty(n_f + 1, dtype=complex)
    coefficients[0] = 1.0
    for n in range(1, n_f + 1):
        coefficients[n] = coefficients[n - 1] * alpha / math.sqrt(n)
    raw = StateVector(coefficients)
    return TruncatedCoherent(alpha=alpha, n_f=n_f, raw=raw, norm=raw.norm())


def truncation_deficit(alpha, n_f):
    """Poisson(|alpha|^2) mass beyond n_f."""
    return poisson_tail(abs(complex(alpha)) ** 2, n_f + 1)


def truncation_fidelity(alpha, n_f):
    """|<alpha|alpha>_m|^2 between the ideal and the normalized truncated state."""
    truncated = truncated_coherent(alpha, n_f).normalized()
    ideal = make_coherent_state(alpha, n_f + 1)
    # components beyond n_f have no overlap with the truncated state
    return fidelity(ideal, truncated)


def truncated_coherent_for_budget(alpha, budget, mode):
    """Capacity of ``mode`` under ``budget`` and the coherent state it allows."""
    n_f = mode_capacity(budget, mode)
    logger.debug("mode w=%.6g holds n_f=%d under E_max=%.6g", mode.omega, n_f, budget.e_max)
    return n_f, truncated_coherent(alpha, n_f)
