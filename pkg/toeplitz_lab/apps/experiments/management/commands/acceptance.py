from django.conf import settings
from django.core.management.base import BaseCommand, CommandError

from toeplitz_lab.apps.experiments.acceptance import run_acceptance
from toeplitz_lab.exceptions import NumericalError


class Command(BaseCommand):
    help = 'Runs the full acceptance suite; exits 0 only if every band passes'

    def add_arguments(self, parser):
        parser.add_argument('--out', default=None, help='Output directory (default: <OUTPUT_DIR>/acceptance)')
        parser.add_argument('--threads', type=int, default=None, help='Parallel per-k jobs')
        parser.add_argument('--seed', type=int, default=None, help='Recorded seed of randomized checks')
        parser.add_argument('--quick', action='store_true', help='Exact oracles only, at small k')

    def handle(self, *args, **options):
        out = options['out'] or settings.OUTPUT_DIR_OVERRIDE or settings.OUTPUT_DIR / 'acceptance'
        self.stdout.write(f'Running the {"quick " if options["quick"] else ""}acceptance suite into {out}...')
        try:
            report = run_acceptance(out, options['threads'], options['seed'], options['quick'])
        except NumericalError as exc:
            raise CommandError(f'Numerical failure: {exc}', returncode=3)

        for label, entry in report['entries'].items():
            if entry['passed']:
                self.stdout.write(self.style.SUCCESS(f'{label}: passed'))
                continue
            self.stdout.write(self.style.ERROR(f'{label}: FAILED'))
            for band in entry['failed_bands']:
                self.stdout.write(self.style.WARNING(f'  {band["name"]}: {band["value"]} against {band["limit"]}'))
        if not report['passed']:
            raise CommandError('Acceptance suite failed', returncode=1)
        self.stdout.write(self.style.SUCCESS('Acceptance suite passed'))
