from django.core.management.base import BaseCommand, CommandError

from toeplitz_lab.apps.experiments.config import load_config
from toeplitz_lab.apps.experiments.runner import run_experiments
from toeplitz_lab.exceptions import ConfigError, NumericalError


class Command(BaseCommand):
    help = 'Runs the experiments of a YAML/JSON config and writes one CSV per experiment plus summary.json'

    def add_arguments(self, parser):
        parser.add_argument('--config', required=True, help='Path of the experiment config (.yaml or .json)')
        parser.add_argument('--out', default=None, help='Output directory; beats TOEPLITZ_LAB_OUTPUT_DIR')
        parser.add_argument('--threads', type=int, default=None, help='Parallel per-k jobs')
        parser.add_argument('--seed', type=int, default=None, help='Recorded seed of randomized checks')

    def handle(self, *args, **options):
        try:
            config = load_config(options['config'])
        except ConfigError as exc:
            raise CommandError(f'Invalid config: {exc.errors}', returncode=2)

        self.stdout.write(f'Running {", ".join(config.experiments) or "no experiments"} on {config.geom.label}...')
        try:
            result = run_experiments(config, options['out'], options['threads'], options['seed'])
        except NumericalError as exc:
            raise CommandError(f'Numerical failure: {exc}', returncode=3)

        for name, entry in result.summary['experiments'].items():
            for band in entry['bands']:
                style = self.style.SUCCESS if band['passed'] else self.style.ERROR
                self.stdout.write(style(f'{name}: {band["name"]} {"passed" if band["passed"] else "FAILED"} '
                                        f'({band["value"]} against {band["limit"]})'))
        if not result.passed:
            raise CommandError(f'{len(result.failed_bands)} acceptance band(s) failed; artifacts in {result.out_dir}',
                               returncode=1)
        self.stdout.write(self.style.SUCCESS(f'All bands passed; artifacts in {result.out_dir}'))
