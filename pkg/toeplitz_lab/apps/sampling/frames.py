"""Frame bounds of sampling sets and the necessary density condition.

The sampling operator in the orthonormal basis is

    S_ij = k^{−n} Σ_{x∈D_k} w_x ψ̂_i(x) conj(ψ̂_j(x))

and D_k samples H⁰(X, L^k) with constant A = max(λ_max, 1/λ_min).
"""
import logging
import math
from dataclasses import dataclass

import numpy as np
from django.conf import settings
from scipy import linalg

from toeplitz_lab.apps.asymptotics.diagnostics import concentration_subspace, limit_density
from toeplitz_lab.apps.geometry.catalog import CatalogName, ModelGeometry
from toeplitz_lab.apps.geometry.curvature import CurvatureField, curvature_eps, curvature_field
from toeplitz_lab.apps.geometry.quadrature import QuadratureGrid, build_grid
from toeplitz_lab.apps.sampling.families import FamilyKind, PointFamily, SamplingSet, generate, is_separated, separation
from toeplitz_lab.apps.spaces.bergman import evaluate
from toeplitz_lab.apps.spaces.sections import HarmonicSpace, build_space, hermitian_part, pairing_matrix
from toeplitz_lab.apps.superform.symbols import ScalarField
from toeplitz_lab.exceptions import CatalogError

logger = logging.getLogger(__name__)

SAMPLING_GEOMETRIES = (CatalogName.FS_CP1, CatalogName.PERTURBED_CP1)


@dataclass(frozen=True)
class FrameBounds:
    lam_min: float
    lam_max: float
    A: float
    count: int
    dim: int

    @property
    def undersampled(self) -> bool:
        return self.count < self.dim


def sampling_matrix(space: HarmonicSpace, sampling_set: SamplingSet) -> np.ndarray:
    """S in the pairing convention M_ij = k^{−n}Σ w conj(ψ̂_i)ψ̂_j, so aᴴMa = k^{−n}Σ w|α|²; M = Sᵀ has the same spectrum."""
    values = evaluate(space, sampling_set.points)
    return hermitian_part(pairing_matrix((values,), sampling_set.weights)) / space.k ** space.n


def frame_bounds(space: HarmonicSpace, sampling_set: SamplingSet) -> FrameBounds:
    """Extreme eigenvalues of S and the sampling constant A (∞ when λ_min ≤ FRAME_RANK_TOL)."""
    eigenvalues = linalg.eigvalsh(sampling_matrix(space, sampling_set))
    lam_min, lam_max = float(eigenvalues[0]), float(eigenvalues[-1])
    if lam_min <= settings.TOEPLITZ_LAB['FRAME_RANK_TOL']:
        a = np.inf
    else:
        a = max(lam_max, 1.0 / lam_min)
    bounds = FrameBounds(lam_min=lam_min, lam_max=lam_max, A=a, count=len(sampling_set), dim=space.dim)
    logger.debug(f'Frame bounds of {sampling_set.family} at k={space.k}: [{lam_min:.6e}, {lam_max:.6e}], A={a:.6g}')
    return bounds


def regular_points(geom: ModelGeometry, sampling_set: SamplingSet) -> np.ndarray:
    """Mask of sampling points lying in X(0)."""
    factor, points = geom.factors[0], sampling_set.points
    return factor.eigenvalue(points.chart, points.coord) >= curvature_eps()


@dataclass(frozen=True)
class RegionDensity:
    region: int
    density: float
    mass: float
    clipped: bool

    @property
    def margin(self) -> float:
        return self.density - self.mass


def region_densities(sampling_set: SamplingSet, geom: ModelGeometry, regions, grid: QuadratureGrid,
                     field: CurvatureField) -> list:
    """Weighted counts k^{−n}Σ_{D_k∩Ω∩X(0)} w against the curvature mass of Ω∩X(0)."""
    regular = regular_points(geom, sampling_set)
    singular_nodes = ~field.stratum(0) & (grid.weights > 0)
    rows = []
    for index, region in enumerate(regions):
        inside = region.evaluate((sampling_set.points,)) > 0.5
        density = float(np.sum(sampling_set.weights[inside & regular])) / sampling_set.k ** geom.n
        indicator = region.sample(grid) > 0.5
        mass = float(grid.integrate(indicator * limit_density(field, 0)))
        clipped = bool(np.any(indicator & singular_nodes))
        if clipped:
            logger.warning(f'Region {index} meets the degenerate locus of {geom.label}; clipped to X(0)')
        rows.append(RegionDensity(region=index, density=density, mass=mass, clipped=clipped))
    return rows


def density_report(family: PointFamily, geom: ModelGeometry, regions, ks, grid: QuadratureGrid | None = None) -> list:
    """One row per (k, region): density #(D_k∩Ω)/k^n, curvature mass of Ω and their margin."""
    grid = grid or build_grid(geom)
    field = curvature_field(geom, grid)
    rows = []
    for k in ks:
        sampling_set = generate(family, k)
        for entry in region_densities(sampling_set, geom, regions, grid, field):
            rows.append({'family': family.label, 'k': k, 'region': entry.region, 'density': entry.density,
                         'mass': entry.mass, 'margin': entry.margin, 'clipped': entry.clipped})
    return rows


def lattice_density_condition(spacings) -> dict:
    """Necessary condition a₁⋯a_{2n} ≤ π^n for lattices k^{−1/2}(a₁, …, a_{2n})ℤ^{2n} in Fock space."""
    spacings = np.asarray(spacings, dtype=np.float64)
    if spacings.ndim != 1 or len(spacings) == 0 or len(spacings) % 2 or np.any(spacings <= 0):
        raise ValueError(f'Lattice spacings must be 2n positive numbers, got {spacings.tolist()}')
    n = len(spacings) // 2
    covolume = float(np.prod(spacings))
    bound = np.pi ** n
    return {'n': n, 'covolume': covolume, 'bound': bound, 'satisfied': covolume <= bound,
            'density': 1.0 / covolume}


@dataclass(frozen=True)
class NecessaryConditionReport:
    """Per (family, k) frame bounds and worst regional margin, with one verdict per family."""

    geometry: str
    rows: list
    verdicts: dict

    @property
    def passed(self) -> bool:
        return all(v['passed'] for v in self.verdicts.values())


def _concentrated_energy(space: HarmonicSpace, grid: QuadratureGrid, region: ScalarField,
                         sampling_set: SamplingSet, eps: float) -> tuple:
    """Largest sampled energy k^{−n}Σ|α|² over α concentrated on Ω, and the concentration dimension."""
    sub = concentration_subspace(space, grid, region, eps)
    if sub.dim == 0:
        return 0, 0.0
    s = sampling_matrix(space, sampling_set)
    restricted = sub.vectors.conj().T @ s @ sub.vectors
    return sub.dim, float(linalg.eigvalsh(hermitian_part(restricted))[-1])


def family_verdict(family: PointFamily, rows: list) -> dict:
    """Deficient families need λ_min to fall over the sweep; the others are recorded."""
    lam_min = np.array([row['lam_min'] for row in rows])
    deficient = any(row['worst_margin'] < 0 for row in rows)
    if deficient:
        decreasing = bool(np.all(np.diff(lam_min) <= 1e-12 * max(lam_min[0], 1.0)))
        passed = decreasing and bool(lam_min[-1] < lam_min[0])
        verdict = 'degrading' if passed else 'NOT degrading'
    else:
        passed = True
        bounded = bool(np.all(np.isfinite([row['A'] for row in rows])))
        verdict = 'bounded' if bounded else 'unbounded'
    return {'family': family.label, 'deficient': deficient, 'verdict': verdict, 'passed': passed,
            'lam_min_ratio': float(lam_min[0] / lam_min[-1]) if lam_min[-1] > 0 else math.inf}


def necessary_condition_experiment(geom: ModelGeometry, families, ks, regions=None,
                                   grid: QuadratureGrid | None = None, eps: float = 0.1) -> NecessaryConditionReport:
    """Frame bounds and density margins over a k sweep, one row per (family, k)."""
    if geom.name not in SAMPLING_GEOMETRIES:
        raise CatalogError(f'Sampling experiments run on FS_CP1 or PERTURBED_CP1, got {geom.label}')
    grid = grid or build_grid(geom)
    field = curvature_field(geom, grid)
    regions = list(regions or [ScalarField.hemisphere()])
    rows, verdicts = [], {}
    for family in families:
        if family.geom != geom:
            raise CatalogError(f'{family} lives on {family.geom.label}, not on {geom.label}')
        family_rows = []
        for k in ks:
            space = build_space(geom, k, 0, grid)
            sampling_set = generate(family, k)
            bounds = frame_bounds(space, sampling_set)
            densities = region_densities(sampling_set, geom, regions, grid, field)
            worst = min(densities, key=lambda entry: entry.margin)
            concentration_dim, energy = _concentrated_energy(space, grid, regions[worst.region], sampling_set, eps)
            row = {
                'family': family.label, 'k': k, 'count': bounds.count, 'dim': bounds.dim,
                'lam_min': bounds.lam_min, 'lam_max': bounds.lam_max, 'A': bounds.A,
                'worst_region': worst.region, 'worst_margin': worst.margin,
                'concentration_dim': concentration_dim, 'concentrated_energy': energy,
                'undersampled': bounds.undersampled,
                'separation': math.nan if family.kind == FamilyKind.QUADRATURE_NODES else separation(sampling_set.points),
                'separated': family.kind != FamilyKind.QUADRATURE_NODES and is_separated(sampling_set),
            }
            family_rows.append(row)
        verdicts[family.label] = family_verdict(family, family_rows)
        logger.info(f'Necessary condition on {geom.label} for {family}: {verdicts[family.label]["verdict"]}')
        rows.extend(family_rows)
    return NecessaryConditionReport(geometry=geom.label, rows=rows, verdicts=verdicts)
