import numpy as np
from django.conf import settings

from lab_project.exceptions import ParameterError
from plaser.config import load_config
from plaser.observables import (
    condensed_limit_check,
    correlation_grid,
    inclusive_correlation,
    multiplicity_distribution,
    multiplicity_scan,
    normalization_constant,
    one_particle_spectrum,
    pair_overlap_moment,
)
from plaser.sampling import condensate_packets, fixed_ensemble, sample_ensemble
from runs.management.base import LabCommand
from runs.output import RunOutput, Table

SUBCOMMANDS = ('norm', 'mult', 'spectrum', 'c2', 'limit')


def add_shared_arguments(parser):
    parser.add_argument('--config', required=True, help='Model config file (key = value lines)')
    parser.add_argument('--seed', type=int, help='Overrides the seed of the config file')
    parser.add_argument('--samples', type=int, help='Events per ensemble (default: BOSONLAB MIN_SAMPLES)')
    parser.add_argument('--workers', type=int, help='Worker processes for event sampling')


def add_grid_arguments(parser):
    parser.add_argument('--n', type=int, default=2, help='Packets per event (default: 2)')
    parser.add_argument('--k-min', type=float, default=-3.0)
    parser.add_argument('--k-max', type=float, default=3.0)
    parser.add_argument('--k-points', type=int, default=25)


class Command(LabCommand):
    help = 'Wave-packet pion-laser model: normalization, multiplicities, spectra and correlations'
    command_name = 'plaser'
    volatile_options = ('workers', 'config_path')

    def add_run_arguments(self, parser):
        subparsers = parser.add_subparsers(dest='subcommand', required=True)

        norm = subparsers.add_parser('norm', help='N(n) = E[perm G] for n = 0..n_max')
        add_shared_arguments(norm)
        norm.add_argument('--n-max', type=int, default=6)

        mult = subparsers.add_parser('mult', help='Multiplicity distribution after symmetrization')
        add_shared_arguments(mult)
        mult.add_argument('--n-max', type=int, default=8)
        mult.add_argument('--scan', type=float, nargs='+', help='n0 values for a mean-multiplicity scan')

        spectrum = subparsers.add_parser('spectrum', help='One-particle spectrum N1(k) at fixed n')
        add_shared_arguments(spectrum)
        add_grid_arguments(spectrum)

        c2 = subparsers.add_parser('c2', help='Two-particle correlation C2(k1, k2)')
        add_shared_arguments(c2)
        add_grid_arguments(c2)
        c2.add_argument('--condensed', action='store_true',
                        help='Put every packet on alpha_0 = (0, 0) instead of sampling')
        c2.add_argument('--inclusive', action='store_true',
                        help='Single inclusive C2(k1, k2) summed over multiplicities')
        c2.add_argument('--k1', type=float, default=0.0)
        c2.add_argument('--k2', type=float, default=0.0)
        c2.add_argument('--n-max', type=int, default=6)

        limit = subparsers.add_parser('limit', help='max |C2 - 1| as R = T = scale shrinks')
        add_shared_arguments(limit)
        add_grid_arguments(limit)
        limit.add_argument('--scales', type=float, nargs='+', default=[3.0, 1.0, 0.3, 0.1, 0.01, 0.001])

    def resolve(self, options):
        options = dict(options)
        config_path = options.pop('config')
        config = load_config(config_path, seed=options.pop('seed'))
        if options.get('samples') is not None and options['samples'] < 1:
            raise ParameterError('--samples must be positive')
        if 'k_points' in options and options['k_points'] < 1:
            raise ParameterError('--k-points must be positive')
        return {**options, 'config_path': str(config_path), 'config': config}

    def compute(self, parameters):
        return getattr(self, f"compute_{parameters['subcommand']}")(parameters)

    def samples(self, parameters):
        return parameters['samples'] or settings.BOSONLAB['MIN_SAMPLES']

    def k_grid(self, parameters, dimension):
        k = np.linspace(parameters['k_min'], parameters['k_max'], parameters['k_points'])
        if dimension == 1:
            return k
        # three-dimensional momenta run along the x axis
        return np.column_stack([k, np.zeros_like(k), np.zeros_like(k)])

    def compute_norm(self, parameters):
        config = parameters['config']
        table = Table('norm', ('n', 'constant', 'error', 'closed_form'))
        constants = []
        for n in range(parameters['n_max'] + 1):
            estimate = normalization_constant(config, n, self.samples(parameters), parameters['workers'])
            closed_form = 1.0 + pair_overlap_moment(config) if n == 2 and config.symmetrize else None
            table.add(n, estimate.value, estimate.error, closed_form)
            constants.append(estimate)
        return RunOutput(tables=[table], data={'config': config, 'constants': constants}, seed=config.seed)

    def compute_mult(self, parameters):
        config = parameters['config']
        samples, workers = self.samples(parameters), parameters['workers']
        distribution = multiplicity_distribution(config, parameters['n_max'], samples, workers)
        table = Table('distribution', ('n', 'probability', 'error', 'poisson', 'constant', 'constant_error'))
        for n, (p, error, prior, constant) in enumerate(zip(distribution.probabilities, distribution.errors,
                                                            distribution.prior, distribution.constants)):
            table.add(n, p, error, prior, constant.value, constant.error)
        tables = [table]
        data = {'config': config, 'mean': distribution.mean}

        if parameters['scan']:
            scan = multiplicity_scan(config, parameters['scan'], parameters['n_max'], samples, workers)
            scan_table = Table('scan', ('n0', 'mean', 'error'))
            for row in zip(scan.n0, scan.mean, scan.error):
                scan_table.add(*row)
            tables.append(scan_table)
            data['knee'] = scan.knee
        return RunOutput(tables=tables, data=data, seed=config.seed)

    def compute_spectrum(self, parameters):
        config = parameters['config']
        ensemble = sample_ensemble(config, parameters['n'], self.samples(parameters), parameters['workers'])
        spectrum = one_particle_spectrum(ensemble, self.k_grid(parameters, config.dimension))
        table = Table('spectrum', ('k', 'n1', 'error'))
        for k, value, error in zip(self._axis(spectrum.k), spectrum.value, spectrum.error):
            table.add(k, value, error)
        return RunOutput(tables=[table], data={'config': config, 'n': parameters['n']}, seed=config.seed)

    def compute_c2(self, parameters):
        config = parameters['config']
        if parameters['inclusive']:
            k1, k2 = parameters['k1'], parameters['k2']
            if config.dimension == 3:
                k1, k2 = [k1, 0.0, 0.0], [k2, 0.0, 0.0]
            result = inclusive_correlation(config, parameters['n_max'], self.samples(parameters), k1, k2,
                                           workers=parameters['workers'])
            table = Table('inclusive', ('k1', 'k2', 'c2', 'error', 'n_max'))
            table.add(parameters['k1'], parameters['k2'], result.value, result.error, result.n_max)
            return RunOutput(tables=[table], data={'config': config, 'label': result.label}, seed=config.seed)

        if parameters['condensed']:
            ensemble = fixed_ensemble(config, [condensate_packets(config, parameters['n'])])
        else:
            ensemble = sample_ensemble(config, parameters['n'], self.samples(parameters), parameters['workers'])
        grid = correlation_grid(ensemble, self.k_grid(parameters, config.dimension))
        axis = self._axis(grid.k)
        table = Table('c2', ('k1', 'k2', 'c2', 'error'))
        for i, k1 in enumerate(axis):
            for j, k2 in enumerate(axis):
                table.add(k1, k2, grid.c2[i, j], grid.error[i, j])
        return RunOutput(tables=[table], data={'config': config, 'label': grid.label, 'n': grid.n},
                         seed=config.seed)

    def compute_limit(self, parameters):
        config = parameters['config']
        scales = parameters['scales']
        if min(scales) <= 0:
            raise ParameterError('--scales must be positive')
        configs = [config.evolve(radius=scale, temperature=scale) for scale in scales]
        rows = condensed_limit_check(configs, parameters['n'], self.samples(parameters),
                                     self.k_grid(parameters, config.dimension), parameters['workers'])
        table = Table('limit', ('scale', 'r2t', 'max_deviation', 'error', 'mean_overlap'))
        for scale, row in zip(scales, rows):
            table.add(scale, row.r2t, row.max_deviation, row.error, row.mean_overlap)
        return RunOutput(tables=[table], data={'config': config, 'at': [row.at for row in rows]},
                         seed=config.seed)

    @staticmethod
    def _axis(k):
        return k if k.ndim == 1 else k[:, 0]
