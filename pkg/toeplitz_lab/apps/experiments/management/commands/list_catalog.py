import json

from django.core.management.base import BaseCommand

from toeplitz_lab.apps.experiments.registry import EXPERIMENTS
from toeplitz_lab.apps.geometry.catalog import CatalogName
from toeplitz_lab.apps.spaces.sections import SUPPORTED_DEGREE

CATALOG = {
    CatalogName.FS_CP1: {
        'params': {'d': 'integer ≥ 0'},
        'dimension': 'dim = d·k+1',
        'bergman': 'B ≡ (d·k+1)/π',
    },
    CatalogName.PERTURBED_CP1: {
        'params': {'d': 'integer ≥ 1', 't': "0 ≤ t ≤ t_max(d), or 'max'"},
        'dimension': 'dim = d·k+1',
        'bergman': 'no closed form; L1 error decays like 1/k',
    },
    CatalogName.NEG_CP1: {
        'params': {'m': 'integer ≥ 1'},
        'dimension': 'dim = max(m·k−1, 0)',
        'bergman': 'B ≡ (m·k−1)/π',
    },
    CatalogName.PRODUCT_CP1xCP1: {
        'params': {'a': 'integer ≥ 1', 'b': 'integer ≥ 1'},
        'dimension': 'dim = (a·k+1)(b·k−1)',
        'bergman': 'B ≡ (a·k+1)(b·k−1)/π²',
    },
}


def catalog() -> dict:
    geometries = []
    for name, entry in CATALOG.items():
        q = SUPPORTED_DEGREE[name]
        geometries.append({
            'name': str(name),
            'description': name.label,
            'q': q,
            'q_range': f'q={q} only',
            'k_range': 'k ≥ 1',
            **entry,
        })
    experiments = {name: list(experiment.columns) for name, experiment in EXPERIMENTS.items()}
    return {'geometries': geometries, 'experiments': experiments}


class Command(BaseCommand):
    help = 'Lists catalog geometries, supported (q, k), dimension oracles and experiment CSV columns'

    def add_arguments(self, parser):
        parser.add_argument('--json', action='store_true', help='Machine-readable output')

    def handle(self, *args, **options):
        data = catalog()
        if options['json']:
            self.stdout.write(json.dumps(data, indent=2, ensure_ascii=False))
            return

        self.stdout.write(self.style.SUCCESS('Geometries'))
        for entry in data['geometries']:
            params = ', '.join(f'{key}: {rule}' for key, rule in entry['params'].items())
            self.stdout.write(f'  {entry["name"]}  {entry["description"]}')
            self.stdout.write(f'    params {params}; {entry["q_range"]}, {entry["k_range"]}')
            self.stdout.write(f'    {entry["dimension"]}; {entry["bergman"]}')
        self.stdout.write(self.style.SUCCESS('Experiments'))
        for name, columns in data['experiments'].items():
            self.stdout.write(f'  {name}: {", ".join(columns)}')
