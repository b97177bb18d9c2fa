"""Experiments available to the runner: per-k measurements and their acceptance bands.

A per-k experiment maps (context, space) to CSV rows; its band function turns
the collected rows into pass/fail verdicts. `sampling` sweeps the whole k list
at once and is handled by `sampling_rows`.
"""
import itertools
import logging
import math
from dataclasses import dataclass

import numpy as np
from django.conf import settings

from toeplitz_lab.apps.asymptotics import diagnostics
from toeplitz_lab.apps.asymptotics.fits import fit_exponential, fit_rate
from toeplitz_lab.apps.experiments.config import ExperimentConfig
from toeplitz_lab.apps.geometry.catalog import CatalogName
from toeplitz_lab.apps.geometry.curvature import CurvatureField
from toeplitz_lab.apps.geometry.quadrature import QuadratureGrid
from toeplitz_lab.apps.sampling.families import FamilyKind
from toeplitz_lab.apps.sampling.frames import lattice_density_condition, necessary_condition_experiment
from toeplitz_lab.apps.spaces.bergman import bergman_function, local_morse_ratio
from toeplitz_lab.apps.spaces.sections import HarmonicSpace, expected_dimension
from toeplitz_lab.apps.superform.symbols import ScalarField, SuperSymbol
from toeplitz_lab.apps.toeplitz.measures import DiscreteMeasure
from toeplitz_lab.apps.toeplitz.operators import assemble, assemble_super, super_weights, trace
from toeplitz_lab.apps.toeplitz.spectra import counting, safe_level, spectrum
from toeplitz_lab.exceptions import RateFitError

logger = logging.getLogger(__name__)

# geometries whose Bergman function is the constant dim/π^n
ORACLE_GEOMETRIES = (CatalogName.FS_CP1, CatalogName.NEG_CP1, CatalogName.PRODUCT_CP1xCP1)
# Morse inequalities are asserted where the curvature never degenerates
MORSE_GEOMETRIES = ORACLE_GEOMETRIES
# nonincreasing checks allow this much round-off
MONOTONE_SLACK = 1e-12


@dataclass
class ExperimentContext:
    """Objects shared by every k of one run."""

    config: ExperimentConfig
    grid: QuadratureGrid
    field: CurvatureField
    f: SuperSymbol
    g: SuperSymbol
    limit: DiscreteMeasure | None = None

    @property
    def geom(self):
        return self.config.geom


@dataclass(frozen=True)
class Band:
    name: str
    value: float
    limit: float
    passed: bool
    detail: str = ''

    def to_dict(self) -> dict:
        return {'name': self.name, 'value': self.value, 'limit': self.limit, 'passed': self.passed,
                'detail': self.detail}


@dataclass(frozen=True)
class Experiment:
    name: str
    columns: tuple
    measure: object = None
    bands: object = None
    needs_space: bool = True
    # no rows on the empty space
    spectral: bool = True


def _upper_band(name: str, values, limits, detail: str = '') -> Band:
    """Passes when every value is at most its limit; reports the worst ratio."""
    values, limits = np.asarray(values, dtype=np.float64), np.asarray(limits, dtype=np.float64)
    if len(values) == 0:
        return Band(name, math.nan, math.nan, True, 'no rows')
    worst = int(np.argmax(values - limits))
    passed = bool(np.all(values <= limits * (1 + 1e-12)))
    return Band(name, float(values[worst]), float(limits[worst]), passed, detail)


def _nonincreasing(values) -> bool:
    values = np.asarray(values, dtype=np.float64)
    return bool(np.all(np.diff(values) <= MONOTONE_SLACK))


def bergman_oracle(geom, k: int) -> float:
    """dim/π^n, the constant Bergman function of a homogeneous catalog geometry."""
    return expected_dimension(geom, k) / np.pi ** geom.n


# bergman

def bergman_rows(ctx: ExperimentContext, space: HarmonicSpace) -> list:
    geom, k = space.geom, space.k
    b = bergman_function(space, ctx.grid)
    density = diagnostics.limit_density(ctx.field, space.q)
    if geom.name in ORACLE_GEOMETRIES:
        oracle = bergman_oracle(geom, k)
        oracle_dev = float(np.max(np.abs(b - oracle))) / oracle if oracle > 0 else float(np.max(np.abs(b)))
    else:
        oracle_dev = math.nan
    return [{
        'k': k,
        'dim': space.dim,
        'l1_error': diagnostics.l1_bergman_error(space, ctx.grid, ctx.field),
        'max_dev': float(np.max(np.abs(b / k ** space.n - density))),
        'dim_error': diagnostics.dimension_error(space, ctx.grid, ctx.field),
        'oracle_dev': oracle_dev,
    }]


def bergman_bands(ctx: ExperimentContext, rows: list) -> list:
    config = ctx.config
    ks = [row['k'] for row in rows]
    l1 = [row['l1_error'] for row in rows]
    if ctx.geom.name in ORACLE_GEOMETRIES:
        tol = config.tolerance('bergman_oracle')
        return [
            _upper_band('bergman_oracle', [row['oracle_dev'] for row in rows], [tol] * len(rows),
                        'relative deviation of B from dim/π^n'),
            _upper_band('bergman_l1_exact', [abs(row['l1_error'] - row['dim_error']) for row in rows],
                        [tol] * len(rows), 'L1 error of a constant B equals the dimension error'),
        ]
    bands = [Band('bergman_l1_decreasing', l1[-1], l1[0], _nonincreasing(l1))]
    tol = config.tolerance('l1_slope')
    try:
        fit = fit_rate(ks, l1)
        bands.append(Band('bergman_l1_slope', fit.slope, -1.0, abs(fit.slope + 1.0) <= tol,
                          f'slope −1 ± {tol:g}, R²={fit.r_squared:.4f}'))
    except RateFitError as exc:
        bands.append(Band('bergman_l1_slope', math.nan, -1.0, False, str(exc)))
    return bands


# dimension

def dimension_rows(ctx: ExperimentContext, space: HarmonicSpace) -> list:
    return [{
        'k': space.k,
        'dim': space.dim,
        'dim_oracle': expected_dimension(space.geom, space.k),
        'dim_error': diagnostics.dimension_error(space, ctx.grid, ctx.field),
    }]


def dimension_bands(ctx: ExperimentContext, rows: list) -> list:
    mismatches = [row['k'] for row in rows if row['dim'] != row['dim_oracle']]
    detail = f'mismatch at k={mismatches}' if mismatches else 'dim equals the Riemann-Roch/Serre/Künneth oracle'
    return [Band('dimension_oracle', float(len(mismatches)), 0.0, not mismatches, detail)]


# spectrum (counting)

def spectrum_rows(ctx: ExperimentContext, space: HarmonicSpace) -> list:
    sm = spectrum(assemble_super(space, ctx.f, ctx.grid))
    rows = []
    for gamma in ctx.config.gammas:
        level = safe_level(sm, gamma)
        above, _ = counting(sm, level)
        limit_mass = ctx.limit.mass_above(level)
        rows.append({
            'k': space.k,
            'gamma': gamma,
            'n_above': above,
            'normalized_count': sm.weight * above,
            'limit_mass': limit_mass,
            'error': abs(sm.weight * above - limit_mass),
        })
    return rows


def spectrum_bands(ctx: ExperimentContext, rows: list) -> list:
    # the median level converges at 1/k; other levels only at k^(-1/2)
    tol = ctx.config.tolerance('counting')
    limits = [tol / row['k'] if row['gamma'] == 0.5 else tol * row['k'] ** -0.5 for row in rows]
    return [_upper_band('counting', [row['error'] for row in rows], limits,
                        f'error ≤ {tol:g}/k at γ = 1/2, {tol:g}·k^(-1/2) otherwise')]


# trace

def trace_rows(ctx: ExperimentContext, space: HarmonicSpace) -> list:
    tf = assemble_super(space, ctx.f, ctx.grid)
    eigen_route = tf.normalization * float(np.sum(spectrum(tf).eigs))
    weights = super_weights(space, ctx.f, ctx.grid)
    kernel_route = tf.normalization * ctx.grid.integrate(weights * bergman_function(space, ctx.grid))
    return [{
        'k': space.k,
        'trace_error': diagnostics.trace_error(space, ctx.grid, ctx.f, ctx.field),
        'normalized_trace': tf.normalization * trace(tf),
        'route_gap': abs(eigen_route - kernel_route),
    }]


def trace_bands(ctx: ExperimentContext, rows: list) -> list:
    tol = ctx.config.tolerance('trace')
    return [
        _upper_band('trace', [row['trace_error'] for row in rows], [tol / row['k'] for row in rows],
                    f'error ≤ {tol:g}/k'),
        _upper_band('trace_routes', [row['route_gap'] for row in rows],
                    [ctx.config.tolerance('trace_routes')] * len(rows), 'eigenvalue sum against ∫h·B'),
    ]


# product_trace

def product_trace_rows(ctx: ExperimentContext, space: HarmonicSpace) -> list:
    return [{
        'k': space.k,
        'product_trace_defect': diagnostics.product_trace_defect(space, ctx.grid, ctx.f, ctx.g, ctx.field),
        'kernel_pairing_error': diagnostics.kernel_pairing_error(space, ctx.grid, ctx.f, ctx.g, ctx.field),
    }]


def product_trace_bands(ctx: ExperimentContext, rows: list) -> list:
    trace_tol, kernel_tol = ctx.config.tolerance('trace'), ctx.config.tolerance('kernel_pairing')
    return [
        _upper_band('product_trace', [row['product_trace_defect'] for row in rows],
                    [trace_tol / row['k'] for row in rows], f'defect ≤ {trace_tol:g}/k'),
        _upper_band('kernel_pairing', [row['kernel_pairing_error'] for row in rows],
                    [kernel_tol / row['k'] for row in rows], f'error ≤ {kernel_tol:g}/k'),
    ]


# pushforward

def pushforward_rows(ctx: ExperimentContext, space: HarmonicSpace) -> list:
    sm = spectrum(assemble_super(space, ctx.f, ctx.grid))
    distances = diagnostics.spectral_pushforward_test(sm, ctx.limit)
    return [{
        'k': space.k,
        'ks': distances.ks,
        'levy': distances.levy,
        'has_atoms': distances.has_atoms,
        'band_distance': distances.band_distance,
    }]


def pushforward_bands(ctx: ExperimentContext, rows: list) -> list:
    if not rows:
        return []
    tol = ctx.config.tolerance('pushforward')
    series = [row['band_distance'] for row in rows]
    metric = 'Lévy' if rows[-1]['has_atoms'] else 'Kolmogorov'
    return [
        Band('pushforward', series[-1], tol, series[-1] <= tol, f'{metric} distance at k={rows[-1]["k"]}'),
        Band('pushforward_trend', series[-1], series[max(len(series) - 3, 0)], _nonincreasing(series[-3:]),
             'nonincreasing over the last three k'),
    ]


# offdiagonal

def offdiagonal_oracle(geom, k: int, delta: float) -> float:
    """cos^{2(kd+1)}(δ/2), the exact far-field fraction on FS_CP1(d)."""
    d, = geom.degrees
    return float(np.cos(0.5 * delta) ** (2 * (k * d + 1)))


def offdiagonal_rows(ctx: ExperimentContext, space: HarmonicSpace) -> list:
    delta = ctx.config.delta
    oracle = offdiagonal_oracle(space.geom, space.k, delta) if space.geom.name == CatalogName.FS_CP1 else math.nan
    return [{'k': space.k, 'delta': delta, 'offdiag': diagnostics.offdiagonal_mass(space, delta),
             'offdiag_oracle': oracle}]


def offdiagonal_bands(ctx: ExperimentContext, rows: list) -> list:
    ks, series = [row['k'] for row in rows], [row['offdiag'] for row in rows]
    r2 = ctx.config.tolerance('offdiag_r2')
    try:
        fit = fit_exponential(ks, series)
        bands = [Band('offdiag_decay', fit.slope, 0.0, fit.slope < 0 and fit.r_squared >= r2,
                      f'exp fit rate {-fit.slope:.4g}, R²={fit.r_squared:.4f} (≥ {r2:g})')]
    except RateFitError as exc:
        bands = [Band('offdiag_decay', math.nan, 0.0, False, str(exc))]
    if ctx.geom.name == CatalogName.FS_CP1:
        tol = ctx.config.tolerance('offdiag_oracle')
        bands.append(_upper_band('offdiag_oracle', [abs(row['offdiag'] - row['offdiag_oracle']) for row in rows],
                                 [tol] * len(rows), 'cos^(2(kd+1))(δ/2)'))
    return bands


# morse

def morse_direction(space: HarmonicSpace) -> np.ndarray:
    """Unit θ on the component ē^{J₀} carrying every harmonic form."""
    subsets = list(itertools.combinations(range(space.n), space.q))
    theta = np.zeros(len(subsets))
    theta[subsets.index(space.component)] = 1.0
    return theta


def morse_rows(ctx: ExperimentContext, space: HarmonicSpace) -> list:
    return [{'k': space.k,
             'local_morse_ratio': local_morse_ratio(space, ctx.grid, morse_direction(space), ctx.field)}]


def morse_bands(ctx: ExperimentContext, rows: list) -> list:
    if ctx.geom.name not in MORSE_GEOMETRIES:
        return []
    tol = ctx.config.tolerance('morse')
    return [_upper_band('morse', [row['local_morse_ratio'] for row in rows], [tol] * len(rows),
                        'k^(-n)B_θ against (1+5/k)π^(-n)⟨χ,θ∧θ†⟩|det|')]


# super_reduction

INVARIANCE_BLOCKS = {(1,): 2.0, (0, 1): -1.0}


def super_reduction_rows(ctx: ExperimentContext, space: HarmonicSpace) -> list:
    tf = assemble_super(space, ctx.f, ctx.grid)
    fchi = diagnostics.symbol_field(ctx.f, ctx.grid, ctx.field, space.q)
    gap = float(np.max(np.abs(tf.matrix - assemble(space, fchi, ctx.grid).matrix)))
    invariance = math.nan
    if space.geom.name == CatalogName.PRODUCT_CP1xCP1 and space.q == 1:
        components = dict(ctx.f.components)
        for J, value in INVARIANCE_BLOCKS.items():
            components[J] = ctx.f.component(J) + ScalarField.constant(value)
        shifted = SuperSymbol(space.n, components)
        eigs = spectrum(tf).eigs
        shifted_eigs = spectrum(assemble_super(space, shifted, ctx.grid)).eigs
        invariance = float(np.max(np.abs(eigs - shifted_eigs)))
    return [{'k': space.k, 'reduction_gap': gap, 'invariance_gap': invariance}]


def super_reduction_bands(ctx: ExperimentContext, rows: list) -> list:
    tol = ctx.config.tolerance('super_reduction')
    bands = [_upper_band('super_reduction', [row['reduction_gap'] for row in rows], [tol] * len(rows),
                         'assemble_super(f) against assemble(f_χ)')]
    gaps = [row['invariance_gap'] for row in rows if not math.isnan(row['invariance_gap'])]
    if gaps:
        tol = ctx.config.tolerance('spectral_invariance')
        bands.append(_upper_band('spectral_invariance', gaps, [tol] * len(gaps),
                                 'spectrum unchanged by constant E_(2) and E_(12) blocks'))
    return bands


# sampling

def sampling_rows(ctx: ExperimentContext) -> tuple:
    """Rows of the necessary-condition experiment and the report they came from."""
    config = ctx.config
    report = necessary_condition_experiment(config.geom, config.families(), config.ks, config.regions(), ctx.grid)
    return report.rows, report


def sampling_bands(ctx: ExperimentContext, rows: list, report) -> list:
    bands = []
    for label, verdict in report.verdicts.items():
        bands.append(Band(f'sampling[{label}]', verdict['lam_min_ratio'], 1.0, verdict['passed'], verdict['verdict']))
    quadrature = [row for row in rows if row['family'] == FamilyKind.QUADRATURE_NODES]
    if quadrature:
        tol = ctx.config.tolerance('quadrature_frame')
        bands.append(_upper_band('quadrature_frame', [row['A'] for row in quadrature], [tol] * len(quadrature),
                                 'sampling constant of weighted quadrature nodes'))
    undersampled = [row for row in rows if row['undersampled']]
    if undersampled:
        rank_tol = settings.TOEPLITZ_LAB['FRAME_RANK_TOL']
        bands.append(_upper_band('rank_deficiency', [row['lam_min'] for row in undersampled],
                                 [rank_tol] * len(undersampled), 'fewer points than sections'))
    return bands


def sampling_report(ctx: ExperimentContext, report) -> dict:
    """Per-family verdicts and, when spacings are configured, the Fock lattice condition."""
    extra = {'verdicts': report.verdicts}
    lattice = ctx.config.lattice()
    if lattice:
        extra['lattice'] = lattice_density_condition(lattice)
        logger.info(f'Lattice density condition: covolume {extra["lattice"]["covolume"]:.6g} '
                    f'against π^n = {extra["lattice"]["bound"]:.6g}')
    return extra


EXPERIMENTS = {
    'bergman': Experiment('bergman', ('k', 'dim', 'l1_error', 'max_dev', 'dim_error', 'oracle_dev'),
                          bergman_rows, bergman_bands, spectral=False),
    'dimension': Experiment('dimension', ('k', 'dim', 'dim_oracle', 'dim_error'),
                            dimension_rows, dimension_bands, spectral=False),
    'spectrum': Experiment('spectrum', ('k', 'gamma', 'n_above', 'normalized_count', 'limit_mass', 'error'),
                           spectrum_rows, spectrum_bands),
    'trace': Experiment('trace', ('k', 'trace_error', 'normalized_trace', 'route_gap'), trace_rows, trace_bands),
    'product_trace': Experiment('product_trace', ('k', 'product_trace_defect', 'kernel_pairing_error'),
                                product_trace_rows, product_trace_bands),
    'pushforward': Experiment('pushforward', ('k', 'ks', 'levy', 'has_atoms', 'band_distance'),
                              pushforward_rows, pushforward_bands),
    'offdiagonal': Experiment('offdiagonal', ('k', 'delta', 'offdiag', 'offdiag_oracle'),
                              offdiagonal_rows, offdiagonal_bands),
    'morse': Experiment('morse', ('k', 'local_morse_ratio'), morse_rows, morse_bands),
    'super_reduction': Experiment('super_reduction', ('k', 'reduction_gap', 'invariance_gap'),
                                  super_reduction_rows, super_reduction_bands),
    'sampling': Experiment('sampling', (
        'family', 'k', 'count', 'dim', 'lam_min', 'lam_max', 'A', 'worst_region', 'worst_margin',
        'concentration_dim', 'concentrated_energy', 'undersampled', 'separation', 'separated',
    ), needs_space=False, spectral=False),
}
