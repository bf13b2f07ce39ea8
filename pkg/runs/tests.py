import csv
import json
import tempfile
from io import StringIO
from pathlib import Path
from unittest import mock

from django.conf import settings
from django.core.management import call_command
from django.core.management.base import CommandError
from django.db import OperationalError
from django.test import SimpleTestCase, TestCase, override_settings
from rest_framework.test import APIClient
from scipy.stats import poisson

from lab_project.exceptions import ParameterError

from .management.base import parse_complex
from .models import RunManifest
from .output import compute_digest


class LabCommandTestCase(TestCase):

    def setUp(self):
        directory = tempfile.TemporaryDirectory()
        self.addCleanup(directory.cleanup)
        self.workdir = Path(directory.name)
        overrides = override_settings(BOSONLAB={**settings.BOSONLAB, 'OUTPUT_DIR': self.workdir / 'out'})
        overrides.enable()
        self.addCleanup(overrides.disable)

    def run_command(self, *args):
        stdout, stderr = StringIO(), StringIO()
        call_command(*args, stdout=stdout, stderr=stderr)
        return [Path(line) for line in stdout.getvalue().split()]

    def failing_command(self, *args):
        stderr = StringIO()
        with self.assertRaises(CommandError) as ctx:
            call_command(*args, stdout=StringIO(), stderr=stderr)
        return ctx.exception, stderr.getvalue()

    def table(self, paths, name):
        path = next(path for path in paths if path.name.endswith(f".{name}.csv"))
        with open(path, newline='') as handle:
            return list(csv.DictReader(handle))

    def column(self, rows, name):
        return [float(row[name]) for row in rows]

    def write_config(self, **changes):
        values = dict(radius=1.0, temperature=1.0, mass=1.0, sigma=1.0, n0=2.0, seed=11)
        values.update(changes)
        path = self.workdir / 'source.cfg'
        path.write_text('# test source\n' + ''.join(f"{key} = {value}\n" for key, value in values.items()))
        return str(path)


class ParseComplexTests(SimpleTestCase):

    def test_accepted_spellings(self):
        self.assertEqual(parse_complex('1+2i'), 1 + 2j)
        self.assertEqual(parse_complex('1+2j'), 1 + 2j)
        self.assertEqual(parse_complex(' -0.5i '), -0.5j)
        self.assertEqual(parse_complex('3'), 3 + 0j)

    def test_malformed(self):
        for text in ('one', '1+', '1+2k', 'nan'):
            with self.assertRaises(ParameterError, msg=text):
                parse_complex(text)


class CoherentCommandTests(LabCommandTestCase):

    def test_vacuum_table(self):
        paths = self.run_command('coherent', '--alpha', '0', '--dim', '8')
        rows = self.table(paths, 'coefficients')
        self.assertEqual(len(rows), 8)
        self.assertEqual(rows[0]['probability'], '1.0')
        self.assertTrue(all(float(row['probability']) == 0.0 for row in rows[1:]))
        for product in self.column(self.table(paths, 'trajectory'), 'product'):
            self.assertAlmostEqual(product, 0.25, delta=1e-12)

    def test_uncertainty_product_constant(self):
        paths = self.run_command('coherent', '--alpha', '1', '--steps', '8')
        trajectory = self.table(paths, 'trajectory')
        self.assertEqual(len(trajectory), 9)
        for row in trajectory:
            self.assertAlmostEqual(float(row['product']), 0.25, delta=1e-10)
            self.assertAlmostEqual(float(row['mean_x']), float(row['x_classical']), delta=1e-10)
            self.assertAlmostEqual(float(row['mean_p']), float(row['p_classical']), delta=1e-10)

    def test_phase_space_input(self):
        paths = self.run_command('coherent', '--x0', '1', '--p0', '0.5', '--mass', '2', '--omega', '0.5')
        first = self.table(paths, 'trajectory')[0]
        self.assertAlmostEqual(float(first['mean_x']), 1.0, delta=1e-10)
        self.assertAlmostEqual(float(first['mean_p']), 0.5, delta=1e-10)

    def test_malformed_alpha_exits_with_argument_error(self):
        error, _ = self.failing_command('coherent', '--alpha', '1+2k')
        self.assertEqual(error.returncode, 2)
        manifest = RunManifest.objects.get()
        self.assertEqual(manifest.status, 'failed')
        self.assertEqual(manifest.output_paths, [])

    def test_conflicting_inputs(self):
        error, _ = self.failing_command('coherent', '--alpha', '1', '--x0', '1')
        self.assertEqual(error.returncode, 2)

    def test_truncation_failure_exits_with_numerical_error(self):
        error, _ = self.failing_command('coherent', '--alpha', '3', '--dim', '6')
        self.assertEqual(error.returncode, 3)

    def test_failed_manifest_write_keeps_original_error(self):
        locked = OperationalError('database is locked')
        with mock.patch.object(RunManifest.objects, 'create', side_effect=locked), \
                self.assertLogs('runs.management.base', level='ERROR') as logs:
            error, _ = self.failing_command('coherent', '--alpha', '3', '--dim', '6')
        self.assertEqual(error.returncode, 3)
        self.assertNotIsInstance(error.__cause__, OperationalError)
        self.assertTrue(any('could not record the failed run' in line for line in logs.output))

    def test_outputs_share_the_manifest_stem(self):
        paths = self.run_command('coherent', '--alpha', '0.5-0.5i')
        manifest = RunManifest.objects.get()
        self.assertEqual(manifest.status, 'ok')
        self.assertEqual(sorted(manifest.output_paths), sorted(str(path) for path in paths))
        for path in paths:
            self.assertTrue(path.name.startswith(manifest.stem + '.'))
        mirror = json.loads(next(path for path in paths if path.suffix == '.json').read_text())
        self.assertEqual(mirror['manifest']['digest'], manifest.digest)
        self.assertEqual(mirror['data']['alpha'], {'re': 0.5, 'im': -0.5})
        self.assertEqual(len(mirror['tables']['coefficients']['rows']), 64)

    def test_rerun_is_byte_identical(self):
        first = self.run_command('coherent', '--alpha', '1+1i')
        bodies = {path.name: path.read_bytes() for path in first if path.suffix == '.csv'}
        second = self.run_command('coherent', '--alpha', '1+1j')
        self.assertEqual({path.name: path.read_bytes() for path in second if path.suffix == '.csv'}, bodies)
        digests = set(RunManifest.objects.values_list('digest', flat=True))
        self.assertEqual(len(digests), 1)


class HolesCommandTests(LabCommandTestCase):

    def test_zero_alpha_is_single_row(self):
        paths = self.run_command('holes', '--alpha', '0', '--n-f', '12')
        rows = self.table(paths, 'coefficients')
        self.assertEqual(len(rows), 1)
        self.assertEqual(rows[0]['probability'], '1.0')

    def test_creation_annihilates_bec(self):
        paths = self.run_command('holes', '--alpha', '1', '--n-f', '16')
        summary = {row['quantity']: float(row['value']) for row in self.table(paths, 'summary')}
        self.assertEqual(summary['creation_on_bec_norm'], 0.0)
        self.assertAlmostEqual(summary['n_dagger'], 1.0, delta=1e-10)

    def test_residual_decreases_along_sweep(self):
        paths = self.run_command('holes', '--alpha', '1+1i', '--sweep', '8', '16', '32', '64')
        rows = self.table(paths, 'sweep')
        self.assertEqual([int(row['n_f']) for row in rows], [8, 16, 32, 64])
        residuals = self.column(rows, 'residual')
        for earlier, later in zip(residuals, residuals[1:]):
            self.assertLess(later, earlier)
        for row in rows:
            self.assertLessEqual(float(row['residual']), float(row['bound']) * (1 + 1e-10))

    def test_empty_condensate_rejected(self):
        error, _ = self.failing_command('holes', '--alpha', '1', '--n-f', '0')
        self.assertEqual(error.returncode, 2)


class TruncateCommandTests(LabCommandTestCase):

    def test_zero_alpha_has_unit_fidelity(self):
        paths = self.run_command('truncate', '--alpha', '0', '--n-f', '0', '1', '8')
        for fidelity in self.column(self.table(paths, 'fidelity'), 'fidelity'):
            self.assertAlmostEqual(fidelity, 1.0, delta=1e-15)

    def test_deficit_is_poisson_tail(self):
        paths = self.run_command('truncate', '--alpha', '1', '--n-f', '2', '8', '16')
        rows = self.table(paths, 'fidelity')
        for row in rows:
            self.assertAlmostEqual(float(row['one_minus_fidelity']), float(row['poisson_tail']), delta=1e-12)
        at_eight = next(row for row in rows if row['n_f'] == '8')
        self.assertAlmostEqual(float(at_eight['poisson_tail']), 1 - poisson.cdf(8, 1.0), delta=1e-14)

    def test_fidelity_monotone(self):
        paths = self.run_command('truncate', '--alpha', '1.5i', '--n-f', '16', '1', '4', '2', '8')
        fidelities = self.column(self.table(paths, 'fidelity'), 'fidelity')
        for earlier, later in zip(fidelities, fidelities[1:]):
            self.assertLessEqual(earlier, later + 1e-15)

    def test_energy_budget_adds_capacity(self):
        paths = self.run_command('truncate', '--alpha', '1', '--n-f', '1', '--e-max', '10', '--mass', '2')
        self.assertEqual([row['n_f'] for row in self.table(paths, 'fidelity')], ['1', '5'])
        mirror = json.loads(paths[-1].read_text())
        self.assertEqual(mirror['data']['budget_capacity'], 5)

    def test_massless_soft_mode_rejected(self):
        error, _ = self.failing_command('truncate', '--alpha', '1', '--e-max', '1')
        self.assertEqual(error.returncode, 2)


class PlaserCommandTests(LabCommandTestCase):

    def test_switched_off_multiplicities_are_poisson(self):
        config = self.write_config(symmetrize='false')
        paths = self.run_command('plaser', 'mult', '--config', config, '--n-max', '8')
        rows = self.table(paths, 'distribution')
        expected = poisson.pmf(range(9), 2.0)
        expected = expected / expected.sum()
        for row, probability in zip(rows, expected):
            self.assertAlmostEqual(float(row['probability']), probability, delta=1e-12)
            self.assertEqual(float(row['error']), 0.0)
            self.assertEqual(float(row['constant']), 1.0)

    def test_condensed_correlation_is_flat(self):
        config = self.write_config()
        paths = self.run_command('plaser', 'c2', '--config', config, '--condensed', '--n', '3', '--k-points', '7')
        rows = self.table(paths, 'c2')
        self.assertEqual(len(rows), 49)
        for value in self.column(rows, 'c2'):
            self.assertAlmostEqual(value, 1.0, delta=1e-12)

    def test_fixed_seed_rerun_is_byte_identical(self):
        config = self.write_config(seed=5)
        args = ('plaser', 'spectrum', '--config', config, '--samples', '200', '--k-points', '9')
        first = self.run_command(*args)
        body = next(path for path in first if path.suffix == '.csv').read_bytes()
        second = self.run_command(*args)
        self.assertEqual(next(path for path in second if path.suffix == '.csv').read_bytes(), body)

    def test_seed_option_changes_the_run(self):
        config = self.write_config(seed=5)
        args = ('plaser', 'spectrum', '--config', config, '--samples', '200', '--k-points', '9')
        first = self.run_command(*args)
        second = self.run_command(*args, '--seed', '6')
        self.assertNotEqual(first[0].name, second[0].name)
        self.assertEqual(RunManifest.objects.filter(seed=6).count(), 1)

    def test_every_bad_key_listed(self):
        config = self.write_config(radius=-1, temperature='hot', colour='red')
        error, stderr = self.failing_command('plaser', 'norm', '--config', config)
        self.assertEqual(error.returncode, 2)
        for key in ('radius', 'temperature', 'colour'):
            self.assertIn(key, str(error))
            self.assertIn(key, stderr)

    def test_seed_required_for_sampling(self):
        path = self.workdir / 'unseeded.cfg'
        path.write_text('radius = 1\ntemperature = 1\nmass = 1\nsigma = 1\nn0 = 1\n')
        error, _ = self.failing_command('plaser', 'spectrum', '--config', str(path), '--samples', '50')
        self.assertEqual(error.returncode, 2)

    def test_norm_reports_closed_form(self):
        config = self.write_config()
        paths = self.run_command('plaser', 'norm', '--config', config, '--n-max', '2', '--samples', '4000')
        rows = self.table(paths, 'norm')
        self.assertEqual([float(row['constant']) for row in rows[:2]], [1.0, 1.0])
        self.assertEqual(rows[0]['closed_form'], '')
        two = rows[2]
        self.assertLessEqual(abs(float(two['constant']) - float(two['closed_form'])), 4 * float(two['error']))

    def test_limit_flattens(self):
        config = self.write_config()
        paths = self.run_command('plaser', 'limit', '--config', config, '--scales', '0.5', '0.001',
                                 '--samples', '400', '--k-min', '-1', '--k-max', '1', '--k-points', '5')
        rows = self.table(paths, 'limit')
        self.assertEqual(self.column(rows, 'scale'), [0.5, 0.001])
        deviations = self.column(rows, 'max_deviation')
        self.assertLess(deviations[1], deviations[0])
        self.assertLessEqual(deviations[1], 0.02)

    def test_unknown_subcommand(self):
        with self.assertRaises(CommandError):
            call_command('plaser', 'fit', stdout=StringIO(), stderr=StringIO())


class RunManifestApiTests(LabCommandTestCase):

    def setUp(self):
        super().setUp()
        self.client = APIClient()

    def test_list_and_detail(self):
        self.run_command('truncate', '--alpha', '1', '--n-f', '4')
        self.run_command('holes', '--alpha', '0')

        response = self.client.get('/api/runs/')
        self.assertEqual(response.status_code, 200)
        self.assertEqual(response.data['count'], 2)

        response = self.client.get('/api/runs/', {'command': 'truncate'})
        self.assertEqual(response.data['count'], 1)
        run = response.data['results'][0]
        self.assertTrue(run['stem'].startswith('truncate-'))

        detail = self.client.get(f"/api/runs/{run['id']}/")
        self.assertEqual(detail.status_code, 200)
        self.assertEqual(len(detail.data['output_paths']), 2)
        self.assertEqual(detail.data['status'], 'ok')

    def test_missing_run(self):
        self.assertEqual(self.client.get('/api/runs/999/').status_code, 404)

    def test_digest_ignores_key_order(self):
        self.assertEqual(compute_digest('holes', {'a': 1, 'b': [1, 2]}),
                         compute_digest('holes', {'b': [1, 2], 'a': 1}))
        self.assertNotEqual(compute_digest('holes', {'a': 1}), compute_digest('truncate', {'a': 1}))
        self.assertEqual(len(compute_digest('holes', {})), 64)
