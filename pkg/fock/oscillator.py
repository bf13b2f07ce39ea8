"""Harmonic-oscillator observables: quadratures, wavefunctions, time evolution."""

import math

import numpy as np

from .states import OscillatorParams, QuadratureMoments, StateVector


def alpha_from_phase_space(params):
    """alpha = sqrt(m w / 2) x0 + i p0 / sqrt(2 m w)."""
    mw = params.mass * params.omega
    return complex(math.sqrt(mw / 2) * params.x0, params.p0 / math.sqrt(2 * mw))


def phase_space_from_alpha(alpha, mass, omega):
    """Inverse of alpha_from_phase_space: (x0, p0)."""
    alpha = complex(alpha)
    mw = mass * omega
    return math.sqrt(2 / mw) * alpha.real, math.sqrt(2 * mw) * alpha.imag


def _ladder_moments(state):
    c = state.coefficients
    n = np.arange(state.dim)
    mean_a = np.vdot(c[:-1], np.sqrt(n[1:]) * c[1:])
    mean_a2 = np.vdot(c[:-2], np.sqrt(n[1:-1] * n[2:]) * c[2:]) if state.dim > 2 else 0j
    mean_n = float(np.sum(n * np.abs(c) ** 2))
    return complex(mean_a), complex(mean_a2), mean_n


def quadrature_moments(state, params):
    """
    Means and variances of x = (a + a^dagger)/sqrt(2mw) and p = -i sqrt(mw/2)(a - a^dagger).

    The second moments use a a^dagger = a^dagger a + 1.
    """
    state.require_normalized()
    mw = params.mass * params.omega
    mean_a, mean_a2, mean_n = _ladder_moments(state)

    mean_x = math.sqrt(2 / mw) * mean_a.real
    mean_p = math.sqrt(2 * mw) * mean_a.imag
    mean_x2 = (2 * mean_a2.real + 2 * mean_n + 1) / (2 * mw)
    mean_p2 = mw * (2 * mean_n + 1 - 2 * mean_a2.real) / 2
    return QuadratureMoments(
        mean_x=mean_x,
        mean_p=mean_p,
        var_x=mean_x2 - mean_x ** 2,
        var_p=mean_p2 - mean_p ** 2,
    )


def coordinate_wavefunction(alpha, params, x):
    """
    <x|alpha> = (mw/pi)^{1/4} exp[-mw (x - x0)^2 / 2 + i p0 x].

    (x0, p0) come from alpha; the x0/p0 stored on ``params`` are ignored.
    Accepts a scalar or an array of positions.
    """
    mw = params.mass * params.omega
    x0, p0 = phase_space_from_alpha(alpha, params.mass, params.omega)
    x = np.asarray(x, dtype=float)
    values = (mw / math.pi) ** 0.25 * np.exp(-mw * (x - x0) ** 2 / 2 + 1j * p0 * x)
    return complex(values) if values.ndim == 0 else values


def evolve_oscillator(state, params, t):
    """Multiply each |n> component by e^{-i w t (n + 1/2)}, zero-point phase included."""
    state.require_normalized()
    n = np.arange(state.dim)
    phases = np.exp(-1j * params.omega * t * (n + 0.5))
    return StateVector(state.coefficients * phases, tail=state.tail)


def classical_trajectory(params, t):
    """Phase-space point (x(t), p(t)) of the classical oscillator started at (x0, p0)."""
    wt = params.omega * np.asarray(t, dtype=float)
    mw = params.mass * params.omega
    x = params.x0 * np.cos(wt) + params.p0 / mw * np.sin(wt)
    p = params.p0 * np.cos(wt) - mw * params.x0 * np.sin(wt)
    return x, p
