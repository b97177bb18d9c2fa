"""k sweeps: every diagnostic for every k, assembled into one report."""
import logging
import time
from dataclasses import dataclass

import numpy as np
from django.conf import settings
from joblib import Parallel, delayed

from toeplitz_lab.apps.asymptotics import diagnostics
from toeplitz_lab.apps.asymptotics.fits import RateFit, fit_exponential, fit_rate
from toeplitz_lab.apps.geometry.catalog import ModelGeometry
from toeplitz_lab.apps.geometry.curvature import CurvatureField, curvature_field
from toeplitz_lab.apps.geometry.quadrature import QuadratureGrid, build_grid
from toeplitz_lab.apps.spaces.sections import build_space, expected_dimension
from toeplitz_lab.apps.superform.symbols import ScalarField, SuperSymbol
from toeplitz_lab.apps.toeplitz.measures import DiscreteMeasure
from toeplitz_lab.apps.toeplitz.spectra import intermediate_fraction
from toeplitz_lab.exceptions import NumericalError, RateFitError

logger = logging.getLogger(__name__)

PLUNGE_EPS = 0.1


def counting_column(gamma) -> str:
    return f'counting_error_{gamma:g}'


@dataclass(frozen=True)
class SweepReport:
    """One row of diagnostics per k plus empirical rate fits."""

    geometry: str
    q: int
    ks: tuple
    gammas: tuple
    rows: list
    fits: dict

    @property
    def columns(self) -> list:
        """Column names in first-seen order; rows of an empty space carry fewer columns."""
        return list(dict.fromkeys(name for row in self.rows for name in row))

    def column(self, name: str) -> np.ndarray:
        return np.array([row[name] for row in self.rows if name in row])

    def counting_convergence(self) -> dict:
        """Counting error per (k, γ) over the rows that have a spectrum."""
        return {(row['k'], gamma): row[counting_column(gamma)]
                for row in self.rows for gamma in self.gammas if counting_column(gamma) in row}

    def validate(self):
        """Diagnostics are finite and nonnegative; dimensions match the oracle exactly."""
        for name in self.columns:
            values = self.column(name)
            if not np.all(np.isfinite(values)) or np.any(values < 0):
                raise NumericalError(f'Sweep column {name!r} on {self.geometry} is not finite and nonnegative')
        if not np.array_equal(self.column('dim'), self.column('dim_oracle')):
            raise NumericalError(f'Dimensions {self.column("dim").tolist()} on {self.geometry} '
                                 f'differ from the oracle {self.column("dim_oracle").tolist()}')


def default_ks(geom: ModelGeometry) -> tuple:
    conf = settings.TOEPLITZ_LAB
    return tuple(conf['CURVE_SWEEP'] if geom.n == 1 else conf['PRODUCT_SWEEP'])


def default_symbols(geom: ModelGeometry) -> tuple:
    """Hemisphere indicator and height on the first factor."""
    return (SuperSymbol.scalar(geom.n, ScalarField.hemisphere()),
            SuperSymbol.scalar(geom.n, ScalarField.height()))


def diagnose(geom: ModelGeometry, q: int, k: int, grid: QuadratureGrid, field: CurvatureField,
             symbol: SuperSymbol, second: SuperSymbol, limit: DiscreteMeasure, gammas: tuple,
             delta: float | None) -> dict:
    """All diagnostics at one k."""
    started = time.perf_counter()
    space = build_space(geom, k, q, grid)
    row = {
        'k': k,
        'dim': space.dim,
        'dim_oracle': expected_dimension(geom, k),
        'dim_error': diagnostics.dimension_error(space, grid, field),
        'l1_error': diagnostics.l1_bergman_error(space, grid, field),
    }
    if space.dim:
        sm = diagnostics.symbol_spectrum(space, grid, symbol)
        distances = diagnostics.spectral_pushforward_test(sm, limit)
        row.update({
            'trace_error': diagnostics.trace_error(space, grid, symbol, field),
            'product_trace_defect': diagnostics.product_trace_defect(space, grid, symbol, second, field),
            'kernel_pairing_error': diagnostics.kernel_pairing_error(space, grid, symbol, second, field),
            'ks': distances.ks,
            'levy': distances.levy,
            'pushforward_distance': distances.band_distance,
            'intermediate_fraction': intermediate_fraction(sm, PLUNGE_EPS),
        })
        for gamma, error in diagnostics.counting_errors(sm, limit, gammas).items():
            row[counting_column(gamma)] = error
        if delta is not None:
            row['offdiag'] = diagnostics.offdiagonal_mass(space, delta)
    logger.info(f'Sweep {geom.label} q={q} k={k}: dim={space.dim}, l1={row["l1_error"]:.3e} '
                f'({time.perf_counter() - started:.2f}s)')
    return row


def _fit(name: str, fitter, ks, values) -> RateFit | None:
    try:
        return fitter(ks, values)
    except RateFitError as exc:
        logger.warning(f'No empirical rate for {name}: {exc}')
        return None


def sweep(geom: ModelGeometry, q: int, ks=None, symbol: SuperSymbol | None = None,
          second: SuperSymbol | None = None, gammas=None, delta: float | None = None,
          resolution=None, threads: int | None = None) -> SweepReport:
    """Run every diagnostic over a k sweep, one joblib task per k.

    joblib returns results in input order, so the report does not depend on
    the thread count.
    """
    ks = tuple(ks or default_ks(geom))
    gammas = tuple(gammas or settings.TOEPLITZ_LAB['GAMMAS'])
    default_symbol, default_second = default_symbols(geom)
    symbol, second = symbol or default_symbol, second or default_second
    threads = threads or settings.THREADS

    grid = build_grid(geom, resolution)
    field = curvature_field(geom, grid)
    limit = diagnostics.limit_law(geom, q, grid, symbol, field)

    rows = Parallel(n_jobs=threads, prefer='threads')(
        delayed(diagnose)(geom, q, k, grid, field, symbol, second, limit, gammas, delta) for k in ks
    )
    fits = {}
    for name, fitter in (('l1_error', fit_rate), ('trace_error', fit_rate), ('offdiag', fit_exponential)):
        present = [row for row in rows if name in row]
        if present:
            fit = _fit(name, fitter, [row['k'] for row in present], [row[name] for row in present])
            if fit is not None:
                fits[name] = fit
    report = SweepReport(geometry=geom.label, q=q, ks=ks, gammas=gammas, rows=rows, fits=fits)
    report.validate()
    return report
