import logging
from dataclasses import dataclass

import numpy as np

from fock.ladder import apply_creation
from fock.states import make_number_state
from lab_project.exceptions import ParameterError
from truncation.energy import EnergyBudget, ModeSpec, mode_capacity

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class CondensateDensity:
    """rho_c = |n_f><n_f| for the mode alpha_0 = (0, 0), on the basis |0>..|n_f>."""

    n_f: int
    matrix: np.ndarray

    def trace(self):
        return complex(np.trace(self.matrix))

    def purity(self):
        return complex(np.trace(self.matrix @ self.matrix)).real

    def idempotency_defect(self):
        return float(np.max(np.abs(self.matrix @ self.matrix - self.matrix)))


def condensate_density(n_f):
    """Projector onto (a_0^dagger)^{n_f}|0> / sqrt(n_f!)."""
    if int(n_f) != n_f or n_f < 1:
        raise ParameterError(f"condensate occupancy must be a positive integer, got {n_f!r}")
    n_f = int(n_f)
    state = make_number_state(0, n_f + 1)
    for _ in range(n_f):
        state = apply_creation(state).normalized()
    vector = state.coefficients
    return CondensateDensity(n_f=n_f, matrix=np.outer(vector, vector.conj()))


def condensate_for_energy(e_tot, mass):
    """The condensate holding every quantum the energy allows at rest: n_f = floor(E_tot / m)."""
    n_f = mode_capacity(EnergyBudget(e_tot), ModeSpec(mass=mass, momentum=0.0))
    if n_f < 1:
        raise ParameterError(f"E_tot={e_tot} cannot hold a single boson of mass {mass}")
    logger.debug("condensate of %d quanta for E_tot=%g, m=%g", n_f, e_tot, mass)
    return condensate_density(n_f)
