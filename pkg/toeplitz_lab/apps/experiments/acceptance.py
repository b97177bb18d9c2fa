"""The acceptance suite: fixed configs whose bands must all pass."""
import json
import logging
from pathlib import Path

import numpy as np

from toeplitz_lab.apps.experiments.config import validate_config
from toeplitz_lab.apps.geometry.catalog import perturbation_limit
from toeplitz_lab.apps.experiments.runner import json_safe, run_experiments

logger = logging.getLogger(__name__)

HEIGHT = {'scalar': [{'kind': 'height'}]}
HEMISPHERE = {'scalar': [{'kind': 'cap', 'center': [0.0, 0.0], 'radius': float(np.pi / 2)}]}
SMOOTH = {'f': HEIGHT, 'g': HEMISPHERE}

# Bump amplitude for the L¹ slope band, as a fraction of t_max. The bump's curvature
# spike is narrower than k^(-1/2) for every swept k, so its share of the L¹ error
# only decays slowly; at this amplitude the 1/k term dominates.
SLOPE_AMPLITUDE = 0.02

SUITE = {
    'fs_cp1': {
        'geometry': {'name': 'FS_CP1', 'params': {'d': 1}}, 'q': 0,
        'ks': list(range(4, 41, 4)),
        'symbols': SMOOTH,
        'experiments': ['bergman', 'dimension', 'trace', 'product_trace', 'pushforward', 'offdiagonal', 'morse',
                        'super_reduction'],
    },
    'fs_cp1_counting': {
        'geometry': {'name': 'FS_CP1', 'params': {'d': 1}}, 'q': 0,
        'ks': list(range(6, 61, 6)),
        'symbols': {'f': HEMISPHERE},
        'experiments': ['spectrum', 'pushforward'],
    },
    'perturbed_cp1': {
        'geometry': {'name': 'PERTURBED_CP1', 'params': {'d': 1, 't': SLOPE_AMPLITUDE * perturbation_limit(1)}},
        'q': 0,
        'ks': list(range(8, 41, 4)),
        'symbols': SMOOTH,
        'experiments': ['bergman', 'dimension', 'trace'],
    },
    'neg_cp1': {
        'geometry': {'name': 'NEG_CP1', 'params': {'m': 1}}, 'q': 1,
        'ks': list(range(2, 41, 4)),
        'symbols': SMOOTH,
        'experiments': ['bergman', 'dimension', 'trace', 'product_trace', 'morse', 'super_reduction'],
    },
    'product_cp1xcp1': {
        'geometry': {'name': 'PRODUCT_CP1xCP1', 'params': {'a': 1, 'b': 1}}, 'q': 1,
        'ks': [4, 8, 12],
        'symbols': SMOOTH,
        'experiments': ['bergman', 'dimension', 'trace', 'pushforward', 'morse', 'super_reduction'],
    },
    'fs_cp1_sampling': {
        'geometry': {'name': 'FS_CP1', 'params': {'d': 1}}, 'q': 0,
        'ks': [10, 20, 30, 40],
        'experiments': ['sampling'],
        'sampling': {'families': [{'kind': 'CAP_DEFICIENT', 'c': 2.0}, {'kind': 'QUADRATURE_NODES'},
                                  {'kind': 'FIBONACCI_UNIFORM', 'c': 1.5}]},
    },
}

# exact oracles only, at small k
QUICK_SUITE = {
    'fs_cp1': {
        'geometry': {'name': 'FS_CP1', 'params': {'d': 1}}, 'q': 0,
        'ks': [2, 4, 6, 8],
        'symbols': SMOOTH,
        'experiments': ['bergman', 'dimension', 'trace', 'offdiagonal', 'super_reduction'],
    },
    'neg_cp1': {
        'geometry': {'name': 'NEG_CP1', 'params': {'m': 1}}, 'q': 1,
        'ks': [2, 4, 6],
        'symbols': SMOOTH,
        'experiments': ['bergman', 'dimension', 'super_reduction'],
    },
    'product_cp1xcp1': {
        'geometry': {'name': 'PRODUCT_CP1xCP1', 'params': {'a': 1, 'b': 1}}, 'q': 1,
        'ks': [2, 3],
        'symbols': SMOOTH,
        'experiments': ['bergman', 'dimension', 'super_reduction'],
    },
}


def run_acceptance(out, threads: int | None = None, seed: int | None = None, quick: bool = False) -> dict:
    """Run the suite into one subdirectory per entry and write acceptance.json."""
    out = Path(out)
    suite = QUICK_SUITE if quick else SUITE
    entries = {}
    for label, data in suite.items():
        result = run_experiments(validate_config(data), out / label, threads, seed)
        entries[label] = {'passed': result.passed, 'failed_bands': result.failed_bands}
        logger.info(f'Acceptance {label}: {"passed" if result.passed else "FAILED"}')
    report = {'quick': quick, 'entries': entries, 'passed': all(entry['passed'] for entry in entries.values())}
    out.mkdir(parents=True, exist_ok=True)
    with open(out / 'acceptance.json', 'w', encoding='utf-8') as handle:
        json.dump(json_safe(report), handle, indent=2, allow_nan=False)
    return report
