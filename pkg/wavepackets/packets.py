"""
Gaussian wave packets in momentum space.

A packet alpha = (xi, pi) of width sigma has the kernel

    <p|alpha> = (pi sigma^2)^{-d/4} exp(-|p - pi|^2 / (2 sigma^2) - i xi.(p - pi))

and two packets of the same width overlap as

    <alpha_i|alpha_j> = exp(-|pi_i - pi_j|^2 / (4 sigma^2)
                            - sigma^2 |xi_i - xi_j|^2 / 4
                            + i (xi_i + xi_j).(pi_j - pi_i) / 2)

All packets of one computation share sigma and the emission time, so time
never enters an overlap.
"""

import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import trapezoid

from lab_project.exceptions import (
    GridResolutionError,
    NumericalFailure,
    PacketMismatchError,
    ParameterError,
)

logger = logging.getLogger(__name__)

DIMENSIONS = (1, 3)
MAX_PACKETS = 30
GRAM_TOLERANCE = 1e-12
PSD_TOLERANCE = 1e-10

# quadrature grid requirements
MIN_GRID_POINTS = 1024
MIN_COVERAGE = 8.0
ALIASING_MARGIN = 10.0


@dataclass(frozen=True)
class WavePacket:
    xi: tuple
    pi: tuple
    sigma: float = 1.0

    def __post_init__(self):
        xi = tuple(float(v) for v in np.atleast_1d(self.xi))
        pi = tuple(float(v) for v in np.atleast_1d(self.pi))
        if len(xi) != len(pi):
            raise ParameterError("xi and pi must have the same number of components")
        if len(xi) not in DIMENSIONS:
            raise ParameterError(f"dimension must be one of {DIMENSIONS}, got {len(xi)}")
        if not all(math.isfinite(v) for v in xi + pi):
            raise ParameterError("packet centers must be finite")
        if not (math.isfinite(self.sigma) and self.sigma > 0):
            raise ParameterError("packet width sigma must be positive")
        object.__setattr__(self, 'xi', xi)
        object.__setattr__(self, 'pi', pi)
        object.__setattr__(self, 'sigma', float(self.sigma))

    @property
    def dimension(self):
        return len(self.xi)

    @classmethod
    def at_rest(cls, sigma=1.0, dimension=1):
        """The minimal-energy packet alpha_0 = (0, 0)."""
        zeros = (0.0,) * dimension
        return cls(xi=zeros, pi=zeros, sigma=sigma)


def _common_shape(packets):
    if not packets:
        raise ParameterError("at least one packet is required")
    first = packets[0]
    for packet in packets[1:]:
        if packet.sigma != first.sigma:
            raise PacketMismatchError(
                f"packets must share one width, got sigma={first.sigma} and {packet.sigma}"
            )
        if packet.dimension != first.dimension:
            raise PacketMismatchError(
                f"packets must share one dimension, got d={first.dimension} and {packet.dimension}"
            )
    return first.sigma, first.dimension


def _momenta(p, dimension):
    """Shape a momentum argument as (..., d)."""
    p = np.asarray(p, dtype=float)
    if dimension == 1:
        return p[..., np.newaxis]
    if p.shape[-1:] != (dimension,):
        raise ParameterError(f"momenta must have a trailing axis of length {dimension}")
    return p


def momentum_amplitude(packet, p):
    """<p|alpha> on a point or array of momenta (trailing axis d when d = 3)."""
    p = _momenta(p, packet.dimension)
    shift = p - np.asarray(packet.pi)
    exponent = -np.sum(shift ** 2, axis=-1) / (2 * packet.sigma ** 2) - 1j * (shift @ np.asarray(packet.xi))
    prefactor = (math.pi * packet.sigma ** 2) ** (-packet.dimension / 4)
    return prefactor * np.exp(exponent)


def amplitude_table(packets, k):
    """Rows of <k|alpha_i> for each packet, columns over the momenta ``k``."""
    return np.stack([momentum_amplitude(packet, k) for packet in packets])


def overlap(first, second):
    _common_shape([first, second])
    return complex(_overlap_matrix(
        np.array([first.xi]), np.array([first.pi]),
        np.array([second.xi]), np.array([second.pi]), first.sigma,
    )[0, 0])


def _overlap_matrix(xi_rows, pi_rows, xi_cols, pi_cols, sigma):
    d_xi = xi_rows[:, None, :] - xi_cols[None, :, :]
    d_pi = pi_rows[:, None, :] - pi_cols[None, :, :]
    phase = np.sum((xi_rows[:, None, :] + xi_cols[None, :, :]) * -d_pi, axis=-1) / 2
    magnitude = (-np.sum(d_pi ** 2, axis=-1) / (4 * sigma ** 2)
                 - sigma ** 2 * np.sum(d_xi ** 2, axis=-1) / 4)
    return np.exp(magnitude + 1j * phase)


@dataclass(frozen=True)
class GridSpec:
    """
    A uniform momentum grid per axis.

    ``half_width`` and ``center`` default to a window reaching
    ``margin`` widths past both packet centers.
    """

    points: int = 4097
    half_width: float = None
    center: float = None
    margin: float = 10.0

    def axis(self, low_center, high_center, sigma):
        center = (low_center + high_center) / 2 if self.center is None else self.center
        half_width = (high_center - low_center) / 2 + self.margin * sigma \
            if self.half_width is None else self.half_width
        return np.linspace(center - half_width, center + half_width, self.points)


@dataclass(frozen=True)
class QuadratureResult:
    value: complex
    error: float


def _required_points(span, d_xi, sigma):
    step = 2 * math.pi / (abs(d_xi) + ALIASING_MARGIN / sigma)
    return max(MIN_GRID_POINTS, int(math.ceil(span / step)) + 1)


def _axis_integral(spec, xi_i, pi_i, xi_j, pi_j, sigma):
    low, high = min(pi_i, pi_j), max(pi_i, pi_j)
    axis = spec.axis(low, high, sigma)
    required_half_width = (high - low) / 2 + MIN_COVERAGE * sigma
    if axis[0] > low - MIN_COVERAGE * sigma or axis[-1] < high + MIN_COVERAGE * sigma:
        raise GridResolutionError(
            "grid does not cover both packet centers", MIN_GRID_POINTS, required_half_width,
        )
    span = axis[-1] - axis[0]
    needed = _required_points(span, xi_i - xi_j, sigma)
    if spec.points < needed:
        raise GridResolutionError("grid too coarse for this pair", needed, span / 2)

    norm = (math.pi * sigma ** 2) ** -0.5
    integrand = norm * np.exp(
        -((axis - pi_i) ** 2 + (axis - pi_j) ** 2) / (2 * sigma ** 2)
        + 1j * xi_i * (axis - pi_i) - 1j * xi_j * (axis - pi_j)
    )
    fine = trapezoid(integrand, axis)
    coarse = trapezoid(integrand[::2], axis[::2])
    return fine, abs(fine - coarse)


def overlap_quadrature(first, second, grid=None):
    """
    Numerical <alpha_i|alpha_j> with an error estimate.

    The Gaussian factorizes over axes, so d = 3 is the product of three 1-d
    trapezoid integrals. The error is |I_h - I_2h| propagated through the
    product. Grids narrower than 8 widths around either center, with fewer
    than 1024 points or too coarse for the relative phase are refused.
    """
    sigma, dimension = _common_shape([first, second])
    grid = grid or GridSpec()
    value, relative_error = 1.0 + 0j, 0.0
    for axis_index in range(dimension):
        part, error = _axis_integral(
            grid,
            first.xi[axis_index], first.pi[axis_index],
            second.xi[axis_index], second.pi[axis_index],
            sigma,
        )
        value *= part
        relative_error += error / max(abs(part), np.finfo(float).tiny)
    return QuadratureResult(value=complex(value), error=float(abs(value) * relative_error))


class GramMatrix:
    """The n x n matrix of overlaps <alpha_i|alpha_j>."""

    def __init__(self, matrix):
        matrix = np.array(matrix, dtype=complex)
        if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
            raise ParameterError("a Gram matrix must be square")
        matrix.setflags(write=False)
        self.matrix = matrix

    @property
    def size(self):
        return self.matrix.shape[0]

    @classmethod
    def identity(cls, size):
        return cls(np.eye(size))

    def check(self, tolerance=GRAM_TOLERANCE, psd_tolerance=PSD_TOLERANCE):
        """Raise NumericalFailure unless Hermitian, unit-diagonal, PSD and bounded by 1."""
        g = self.matrix
        if np.max(np.abs(g - g.conj().T), initial=0.0) > tolerance:
            raise NumericalFailure("Gram matrix is not Hermitian")
        if np.max(np.abs(np.diag(g) - 1.0), initial=0.0) > tolerance:
            raise NumericalFailure("Gram matrix diagonal differs from 1")
        if np.max(np.abs(g)) > 1.0 + tolerance:
            raise NumericalFailure("Gram matrix has an entry larger than 1 in modulus")
        smallest = float(np.linalg.eigvalsh((g + g.conj().T) / 2)[0])
        if smallest < -psd_tolerance:
            raise NumericalFailure(f"Gram matrix is not positive semidefinite (eigenvalue {smallest:.3e})")
        return self

    def __repr__(self):
        return f"GramMatrix(size={self.size})"


def gram_matrix(packets):
    packets = list(packets)
    sigma, _ = _common_shape(packets)
    if len(packets) > MAX_PACKETS:
        raise ParameterError(f"at most {MAX_PACKETS} packets per Gram matrix, got {len(packets)}")
    xi = np.array([packet.xi for packet in packets])
    pi = np.array([packet.pi for packet in packets])
    return GramMatrix(_overlap_matrix(xi, pi, xi, pi, sigma))
