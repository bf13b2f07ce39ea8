from lab_project.exceptions import ParameterError
from runs.management.base import LabCommand, parse_complex
from runs.output import RunOutput, Table
from truncation.energy import (
    EnergyBudget,
    ModeSpec,
    mode_capacity,
    truncated_coherent,
    truncation_deficit,
    truncation_fidelity,
)


class Command(LabCommand):
    help = 'Fidelity of the energy-truncated coherent state against the ideal one, per capacity n_f'
    command_name = 'truncate'

    def add_run_arguments(self, parser):
        parser.add_argument('--alpha', default='1', help='Complex amplitude (default: 1)')
        parser.add_argument('--n-f', type=int, nargs='+', default=[0, 1, 2, 4, 8, 16, 32, 64],
                            help='Mode capacities to tabulate')
        parser.add_argument('--e-max', type=float, help='Energy budget; adds the capacity it allows')
        parser.add_argument('--mass', type=float, default=0.0)
        parser.add_argument('--momentum', type=float, default=0.0)

    def resolve(self, options):
        capacities = list(options['n_f'])
        if not capacities or min(capacities) < 0:
            raise ParameterError('--n-f needs non-negative capacities')
        budget_capacity = None
        if options['e_max'] is not None:
            budget = EnergyBudget(options['e_max'])
            budget_capacity = mode_capacity(budget, ModeSpec(options['mass'], options['momentum']))
            capacities.append(budget_capacity)
        return {**options, 'alpha': parse_complex(options['alpha']), 'n_f': sorted(set(capacities)),
                'budget_capacity': budget_capacity}

    def compute(self, parameters):
        alpha = parameters['alpha']
        table = Table('fidelity', ('n_f', 'fidelity', 'one_minus_fidelity', 'poisson_tail', 'raw_norm'))
        for n_f in parameters['n_f']:
            value = truncation_fidelity(alpha, n_f)
            table.add(n_f, value, 1.0 - value, truncation_deficit(alpha, n_f), truncated_coherent(alpha, n_f).norm)
        return RunOutput(tables=[table], data={'alpha': alpha, 'budget_capacity': parameters['budget_capacity']})
