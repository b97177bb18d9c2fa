"""Run an ExperimentConfig: per-k jobs in parallel, one CSV per experiment and summary.json.

joblib returns per-k results in input order and every file is written from the
calling thread, so the output does not depend on the thread count.
"""
import csv
import json
import logging
import math
import time
from dataclasses import dataclass
from importlib import metadata
from pathlib import Path

import numpy as np
from django.conf import settings
from joblib import Parallel, delayed

from toeplitz_lab.apps.asymptotics.diagnostics import limit_law
from toeplitz_lab.apps.experiments.config import ExperimentConfig
from toeplitz_lab.apps.experiments.registry import (
    EXPERIMENTS, ExperimentContext, sampling_bands, sampling_report, sampling_rows,
)
from toeplitz_lab.apps.geometry.curvature import curvature_field
from toeplitz_lab.apps.geometry.quadrature import build_grid
from toeplitz_lab.apps.spaces.sections import build_space

logger = logging.getLogger(__name__)

PACKAGES = ('super-toeplitz-lab', 'numpy', 'scipy', 'joblib', 'Django', 'djangorestframework', 'PyYAML')
# experiments comparing spectra with the f_χ pushforward
NEEDS_LIMIT = ('spectrum', 'pushforward')


@dataclass(frozen=True)
class RunResult:
    out_dir: Path
    summary: dict

    @property
    def passed(self) -> bool:
        return self.summary['passed']

    @property
    def failed_bands(self) -> list:
        return [band for entry in self.summary['experiments'].values() for band in entry['bands']
                if not band['passed']]


def resolve_output_dir(config: ExperimentConfig, out=None) -> Path:
    """--out, then TOEPLITZ_LAB_OUTPUT_DIR, then the config, then settings.OUTPUT_DIR."""
    for candidate in (out, settings.OUTPUT_DIR_OVERRIDE, config.output_dir):
        if candidate:
            return Path(candidate)
    return Path(settings.OUTPUT_DIR)


def package_versions() -> dict:
    versions = {}
    for name in PACKAGES:
        try:
            versions[name] = metadata.version(name)
        except metadata.PackageNotFoundError:
            versions[name] = 'unknown'
    return versions


def format_value(value):
    """CSV cell: floats with 17 significant digits, lowercase booleans."""
    if isinstance(value, (bool, np.bool_)):
        return 'true' if value else 'false'
    if isinstance(value, (float, np.floating)):
        return format(float(value), '.17g')
    if isinstance(value, np.integer):
        return int(value)
    return value


def write_csv(path: Path, rows: list, columns=()) -> list:
    """RFC 4180 file; the header is `columns` followed by any other row keys in first-seen order."""
    header = list(dict.fromkeys([*columns, *(name for row in rows for name in row)]))
    header = [name for name in header if any(name in row for row in rows)] or list(columns)
    with open(path, 'w', newline='', encoding='utf-8') as handle:
        writer = csv.DictWriter(handle, fieldnames=header, restval='', lineterminator='\r\n')
        writer.writeheader()
        for row in rows:
            writer.writerow({name: format_value(value) for name, value in row.items()})
    return header


def json_safe(value):
    if isinstance(value, dict):
        return {str(key): json_safe(item) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [json_safe(item) for item in value]
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        return value if math.isfinite(value) else str(value)
    if isinstance(value, np.integer):
        return int(value)
    return value


def measure(ctx: ExperimentContext, k: int, names: tuple) -> tuple:
    """Rows and timings of every per-k experiment at one k, sharing one harmonic space."""
    config = ctx.config
    started = time.perf_counter()
    space = build_space(config.geom, k, config.q, ctx.grid)
    build_time = time.perf_counter() - started
    rows, timings = {}, {}
    for name in names:
        experiment = EXPERIMENTS[name]
        started = time.perf_counter()
        if experiment.spectral and space.dim == 0:
            logger.warning(f'{name} skipped at k={k}: {space} is empty')
            rows[name] = []
        else:
            rows[name] = experiment.measure(ctx, space)
        timings[name] = time.perf_counter() - started + build_time / len(names)
    logger.info(f'{config.geom.label} k={k}: {", ".join(names)} done')
    return rows, timings


def build_context(config: ExperimentConfig) -> ExperimentContext:
    grid = build_grid(config.geom, config.grid_resolution)
    field = curvature_field(config.geom, grid)
    f, g = config.symbol('f'), config.symbol('g')
    ctx = ExperimentContext(config=config, grid=grid, field=field, f=f, g=g)
    if any(name in NEEDS_LIMIT for name in config.experiments):
        ctx.limit = limit_law(config.geom, config.q, grid, f, field)
    return ctx


def run_experiments(config: ExperimentConfig, out=None, threads: int | None = None,
                    seed: int | None = None) -> RunResult:
    """Run every experiment of `config` and write its artifacts; bands decide `passed`."""
    out_dir = resolve_output_dir(config, out)
    out_dir.mkdir(parents=True, exist_ok=True)
    threads = threads or settings.THREADS
    seed = settings.SEED if seed is None else seed
    started = time.perf_counter()

    results = {}
    if config.experiments:
        ctx = build_context(config)
        per_k = tuple(name for name in config.experiments if EXPERIMENTS[name].needs_space)
        collected = {name: [] for name in per_k}
        timings = {name: 0.0 for name in config.experiments}
        if per_k:
            outputs = Parallel(n_jobs=threads, prefer='threads')(
                delayed(measure)(ctx, k, per_k) for k in config.ks
            )
            for rows, elapsed in outputs:
                for name in per_k:
                    collected[name].extend(rows[name])
                    timings[name] += elapsed[name]

        for name in config.experiments:
            experiment = EXPERIMENTS[name]
            extra = {}
            if experiment.needs_space:
                rows = collected[name]
                bands = experiment.bands(ctx, rows)
            else:
                begun = time.perf_counter()
                rows, report = sampling_rows(ctx)
                bands = sampling_bands(ctx, rows, report)
                extra = sampling_report(ctx, report)
                timings[name] = time.perf_counter() - begun
            filename = f'{name}.csv'
            columns = write_csv(out_dir / filename, rows, experiment.columns)
            for band in bands:
                if not band.passed:
                    logger.warning(f'Band {band.name} failed on {config.geom.label}: '
                                   f'{band.value:.6g} against {band.limit:.6g} ({band.detail})')
            results[name] = {'csv': filename, 'columns': columns, 'seconds': timings[name],
                             'bands': [band.to_dict() for band in bands], **extra}

    passed = all(band['passed'] for entry in results.values() for band in entry['bands'])
    summary = {
        'config': config.to_dict(),
        'versions': package_versions(),
        'threads': threads,
        'seed': seed,
        'seconds': time.perf_counter() - started,
        'experiments': results,
        'passed': passed,
    }
    with open(out_dir / 'summary.json', 'w', encoding='utf-8') as handle:
        json.dump(json_safe(summary), handle, indent=2, allow_nan=False)
    logger.info(f'Run on {config.geom.label} finished in {summary["seconds"]:.1f}s, '
                f'{"all bands passed" if passed else "some bands failed"}; artifacts in {out_dir}')
    return RunResult(out_dir=out_dir, summary=summary)
