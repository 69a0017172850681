from django.core.management.base import BaseCommand, CommandError

from fields.emit import FORMATS, emit
from fields.exceptions import GffxError
from fields.experiments import EXPERIMENT_RUNNERS, load_config
from fields.models import ExperimentRun


class ExperimentCommand(BaseCommand):
    """Shared CLI surface: config loading, overrides, emission and exit codes.

    Exit code 1 signals a runtime or config error, 2 a failed check.
    """

    experiment = None

    def add_arguments(self, parser):
        parser.add_argument('--config', help='JSON experiment config')
        parser.add_argument('--seed', type=int, help='Master seed overriding the config')
        parser.add_argument('--workers', type=int, help='Worker processes for replicates')
        parser.add_argument('--out', help='Output directory')
        parser.add_argument(
            '--format',
            nargs='+',
            choices=FORMATS,
            default=list(FORMATS),
            dest='formats',
            help='Artifacts to write',
        )
        self.add_experiment_arguments(parser)

    def add_experiment_arguments(self, parser):
        pass

    def run(self, config, options):
        return EXPERIMENT_RUNNERS[self.experiment](config)

    def handle(self, *args, **options):
        try:
            config = load_config(
                options['config'],
                name=self.experiment,
                master_seed=options['seed'],
                workers=options['workers'],
                output_dir=options['out'],
            )
        except GffxError as e:
            raise CommandError(str(e), returncode=1) from e

        self.stdout.write(f'Running {config.name} (seed {config.master_seed}, {config.workers} worker(s))')
        try:
            result = self.run(config, options)
        except GffxError as e:
            raise CommandError(str(e), returncode=1) from e

        try:
            written = emit(result, options['formats'], config.output_dir)
        except (OSError, ValueError) as e:
            raise CommandError(f'Could not write results: {e}', returncode=1) from e
        for path in written:
            self.stdout.write(f'  wrote {path}')
        ExperimentRun.record(result, config.output_dir)

        if result.partial:
            raise CommandError(f'{config.name} aborted with partial results: {result.error}', returncode=1)
        failed = result.failed_checks
        if failed:
            for name in failed:
                self.stdout.write(self.style.WARNING(f'  check failed: {name}'))
            raise CommandError(f'{len(failed)} check(s) failed', returncode=2)
        self.stdout.write(
            self.style.SUCCESS(f'{config.name}: {len(result.checks)} check(s) passed in {result.wall_clock:.1f}s')
        )
