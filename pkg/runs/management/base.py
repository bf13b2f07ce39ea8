"""
Shared plumbing of the lab management commands.

A command turns its options into parameters, computes a RunOutput and hands
it to ``publish``, which writes ``<command>-<digest12>.<table>.csv`` files, a
``<command>-<digest12>.json`` mirror and a RunManifest row. Lab errors become
CommandError with exit code 2 (bad arguments) or 3 (numerical failure).
"""

import cmath
import logging
import time
from pathlib import Path

from django.conf import settings
from django.core.management.base import BaseCommand, CommandError
from django.db import DatabaseError

from lab_project.exceptions import ConfigError, LabError, ParameterError, UnboundedCapacityError
from runs.models import RunManifest
from runs.output import compute_digest, to_jsonable, write_csv, write_json
from runs.serializers import RunManifestSerializer

logger = logging.getLogger(__name__)

ARGUMENT_ERROR = 2
NUMERICAL_FAILURE = 3

# options every BaseCommand carries; they never reach the manifest
DJANGO_OPTIONS = frozenset({
    'verbosity', 'settings', 'pythonpath', 'traceback', 'no_color', 'force_color', 'skip_checks',
    'stdout', 'stderr',
})


def parse_complex(text, name='alpha'):
    """Parse ``1+2i``, ``1+2j``, ``-0.5i`` or a plain real number."""
    if isinstance(text, (int, float, complex)):
        value = complex(text)
    else:
        cleaned = str(text).strip().replace(' ', '').replace('i', 'j')
        try:
            value = complex(cleaned)
        except ValueError:
            raise ParameterError(f"--{name}: cannot read {text!r} as a complex number") from None
    if not cmath.isfinite(value):
        raise ParameterError(f"--{name} must be finite, got {text!r}")
    return value


def exit_code(exc):
    if isinstance(exc, (ParameterError, UnboundedCapacityError)):
        return ARGUMENT_ERROR
    return NUMERICAL_FAILURE


class LabCommand(BaseCommand):
    """Base class for commands that publish reproducible runs."""

    command_name = None
    # options that do not change the output and stay out of the digest
    volatile_options = ('workers',)

    def add_arguments(self, parser):
        parser.add_argument(
            '--output-dir',
            help='Directory for CSV/JSON outputs (default: BOSONLAB OUTPUT_DIR)',
        )
        self.add_run_arguments(parser)

    def add_run_arguments(self, parser):
        pass

    def resolve(self, options):
        """Typed parameters for ``compute``; raise ParameterError on bad input."""
        return dict(options)

    def compute(self, parameters):
        raise NotImplementedError('subclasses of LabCommand must provide a compute() method')

    def handle(self, *args, **options):
        output_dir = Path(options.pop('output_dir', None) or settings.BOSONLAB['OUTPUT_DIR'])
        options = {key: value for key, value in options.items() if key not in DJANGO_OPTIONS}
        started = time.perf_counter()
        logger.info("%s: starting with %s", self.command_name, options)

        parameters = options
        try:
            parameters = self.resolve(options)
            output = self.compute(parameters)
        except LabError as exc:
            self._record_failure(parameters, exc, started)
            if isinstance(exc, ConfigError):
                for key, messages in sorted(exc.errors.items()):
                    self.stderr.write(f"{key}: {' '.join(messages)}")
            raise CommandError(str(exc), returncode=exit_code(exc)) from exc

        paths = self.publish(parameters, output, output_dir, started)
        for path in paths:
            self.stdout.write(str(path))

    def _digest_parameters(self, parameters):
        values = {key: value for key, value in parameters.items() if key not in self.volatile_options}
        return to_jsonable(values)

    def _record_failure(self, parameters, exc, started):
        code = exit_code(exc)
        if code == NUMERICAL_FAILURE:
            logger.error("%s: numerical failure: %s", self.command_name, exc)
        else:
            logger.info("%s: rejected arguments: %s", self.command_name, exc)
        values = self._digest_parameters(parameters)
        try:
            RunManifest.objects.create(
                command=self.command_name,
                parameters=values,
                seed=parameters.get('seed') if isinstance(parameters.get('seed'), int) else None,
                version=settings.BOSONLAB['VERSION'],
                digest=compute_digest(self.command_name, values),
                wall_clock=time.perf_counter() - started,
                status='failed',
            )
        except DatabaseError:
            logger.exception("%s: could not record the failed run", self.command_name)

    def publish(self, parameters, output, output_dir, started):
        values = self._digest_parameters(parameters)
        digest = compute_digest(self.command_name, values)
        stem = f"{self.command_name}-{digest[:12]}"
        output_dir.mkdir(parents=True, exist_ok=True)

        paths = [write_csv(output_dir / f"{stem}.{table.name}.csv", table) for table in output.tables]
        json_path = output_dir / f"{stem}.json"
        manifest = RunManifest.objects.create(
            command=self.command_name,
            parameters=to_jsonable(parameters),
            seed=output.seed,
            version=settings.BOSONLAB['VERSION'],
            digest=digest,
            output_paths=[str(path) for path in paths + [json_path]],
            wall_clock=time.perf_counter() - started,
        )
        write_json(json_path, {
            'manifest': RunManifestSerializer(manifest).data,
            'tables': {table.name: table.as_dict() for table in output.tables},
            'data': output.data,
        })
        logger.info("%s: finished in %.2fs, outputs under %s", self.command_name, manifest.wall_clock, stem)
        return paths + [json_path]
