import numpy as np

from holes.ladder import apply_creation_hole, bec_state, dual_coherent_state, hole_sweep
from lab_project.exceptions import ParameterError
from runs.management.base import LabCommand, parse_complex
from runs.output import RunOutput, Table


class Command(LabCommand):
    help = 'Coherent state of the creation operator over a condensate of n_f quanta, with a cutoff sweep'
    command_name = 'holes'

    def add_run_arguments(self, parser):
        parser.add_argument('--alpha', default='0', help='Complex eigenvalue parameter, e.g. 1-1i')
        parser.add_argument('--n-f', type=int, default=32, help='Condensate occupancy (default: 32)')
        parser.add_argument('--sweep', type=int, nargs='+', default=[8, 16, 32, 64],
                            help='Occupancies for the residual table')
        parser.add_argument('--precision', type=int, default=60,
                            help='Decimal digits for the sweep; 0 uses double precision')

    def resolve(self, options):
        if options['n_f'] < 1 or min(options['sweep']) < 1:
            raise ParameterError('occupancies must be at least 1')
        if options['precision'] < 0:
            raise ParameterError('--precision must be non-negative')
        return {**options, 'alpha': parse_complex(options['alpha']), 'sweep': sorted(set(options['sweep']))}

    def compute(self, parameters):
        alpha, n_f = parameters['alpha'], parameters['n_f']
        state = dual_coherent_state(alpha, n_f)

        coefficients = Table('coefficients', ('j', 're', 'im', 'probability'))
        nonzero = np.flatnonzero(state.coefficients)
        last = int(nonzero[-1]) if nonzero.size else 0
        for j in range(last + 1):
            c = complex(state.coefficients[j])
            coefficients.add(j, c.real, c.imag, abs(c) ** 2)

        sweep = Table('sweep', ('n_f', 'residual', 'bound', 'tail', 'n_dagger'))
        for row in hole_sweep(alpha, parameters['sweep'], precision=parameters['precision'] or None):
            sweep.add(row['n_f'], row['residual'], row['bound'], row['tail'], row['n_dagger'])

        current = hole_sweep(alpha, [n_f])[0]
        summary = Table('summary', ('quantity', 'value'))
        summary.add('creation_on_bec_norm', apply_creation_hole(bec_state(n_f)).norm())
        summary.add('n_dagger', current['n_dagger'])
        summary.add('residual', current['residual'])
        summary.add('tail', current['tail'])

        return RunOutput(tables=[coefficients, sweep, summary], data={'alpha': alpha, 'n_f': n_f})
