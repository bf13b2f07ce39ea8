import math

import numpy as np

from fock.ladder import DISPLACEMENT_TOLERANCE, displacement_apply
from fock.oscillator import (
    alpha_from_phase_space,
    classical_trajectory,
    evolve_oscillator,
    phase_space_from_alpha,
    quadrature_moments,
)
from fock.states import OscillatorParams
from lab_project.exceptions import ParameterError
from runs.management.base import LabCommand, parse_complex
from runs.output import RunOutput, Table


class Command(LabCommand):
    help = 'Coherent state D(alpha)|0> on a truncated Fock space: coefficients, moments and one period of motion'
    command_name = 'coherent'

    def add_run_arguments(self, parser):
        parser.add_argument('--alpha', help='Complex amplitude, e.g. 1+0.5i')
        parser.add_argument('--x0', type=float, help='Initial position (alternative to --alpha)')
        parser.add_argument('--p0', type=float, help='Initial momentum (alternative to --alpha)')
        parser.add_argument('--mass', type=float, default=1.0)
        parser.add_argument('--omega', type=float, default=1.0)
        parser.add_argument('--dim', type=int, default=64, help='Fock-space cutoff (default: 64)')
        parser.add_argument('--steps', type=int, default=16, help='Trajectory samples per period (default: 16)')
        parser.add_argument('--tolerance', type=float, default=DISPLACEMENT_TOLERANCE,
                            help='Largest Poisson tail allowed beyond the cutoff')

    def resolve(self, options):
        phase_space = options['x0'] is not None or options['p0'] is not None
        if options['alpha'] is not None and phase_space:
            raise ParameterError('give either --alpha or --x0/--p0, not both')
        if options['dim'] < 1:
            raise ParameterError('--dim must be at least 1')
        if options['steps'] < 1:
            raise ParameterError('--steps must be at least 1')

        mass, omega = options['mass'], options['omega']
        if phase_space:
            params = OscillatorParams(mass, omega, x0=options['x0'] or 0.0, p0=options['p0'] or 0.0)
            alpha = alpha_from_phase_space(params)
        else:
            alpha = parse_complex(options['alpha'] if options['alpha'] is not None else 0)
            OscillatorParams(mass, omega)
            x0, p0 = phase_space_from_alpha(alpha, mass, omega)
            params = OscillatorParams(mass, omega, x0=x0, p0=p0)
        return {**options, 'alpha': alpha, 'x0': params.x0, 'p0': params.p0, 'params': params}

    def compute(self, parameters):
        params = parameters['params']
        state = displacement_apply(parameters['alpha'], parameters['dim'], parameters['tolerance'])

        coefficients = Table('coefficients', ('n', 're', 'im', 'probability'))
        for n, (c, probability) in enumerate(zip(state.coefficients, state.probabilities)):
            coefficients.add(n, c.real, c.imag, probability)

        trajectory = Table('trajectory', ('t', 'mean_x', 'mean_p', 'var_x', 'var_p', 'product',
                                          'x_classical', 'p_classical'))
        period = 2 * math.pi / params.omega
        for t in np.linspace(0.0, period, parameters['steps'] + 1):
            moments = quadrature_moments(evolve_oscillator(state, params, t), params)
            x, p = classical_trajectory(params, t)
            trajectory.add(t, moments.mean_x, moments.mean_p, moments.var_x, moments.var_p,
                           moments.product, float(x), float(p))

        return RunOutput(
            tables=[coefficients, trajectory],
            data={'alpha': parameters['alpha'], 'tail': state.tail, 'period': period},
        )
