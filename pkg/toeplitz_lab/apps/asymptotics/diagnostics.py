"""Finite-k diagnostics, one per limit statement.

Each function compares a k-dependent quantity with its limit on X(q), the
positive curvature measure π^{−n}|det|·ω_n restricted to the stratum.
"""
import logging
from dataclasses import dataclass

import numpy as np
from django.conf import settings
from scipy import special

from toeplitz_lab.apps.geometry.catalog import ModelGeometry
from toeplitz_lab.apps.geometry.curvature import CurvatureField, curvature_field
from toeplitz_lab.apps.geometry.points import ChartPoints, isometry_image
from toeplitz_lab.apps.geometry.quadrature import QuadratureGrid, build_grid
from toeplitz_lab.apps.spaces.bergman import bergman_function
from toeplitz_lab.apps.spaces.sections import HarmonicSpace
from toeplitz_lab.apps.superform.symbols import ScalarField, SuperSymbol, reduced_symbol_field
from toeplitz_lab.apps.toeplitz.measures import DiscreteMeasure, ks_distance, levy_distance, pushforward_cdf
from toeplitz_lab.apps.toeplitz.operators import assemble, assemble_super, trace, trace_product
from toeplitz_lab.apps.toeplitz.spectra import SpectralMeasure, counting, eigen_decomposition, safe_level, spectrum

logger = logging.getLogger(__name__)


def limit_density(field: CurvatureField, q: int) -> np.ndarray:
    """π^{−n}1_{X(q)}|det| over the grid."""
    return field.det_abs * field.stratum(q) / np.pi ** field.n


def stratum_mass(grid: QuadratureGrid, field: CurvatureField, q: int) -> float:
    return float(grid.integrate(limit_density(field, q)))


def dimension_error(space: HarmonicSpace, grid: QuadratureGrid, field: CurvatureField) -> float:
    """|k^{−n}dim − curvature mass of X(q)|."""
    return abs(space.dim / space.k ** space.n - stratum_mass(grid, field, space.q))


def l1_bergman_error(space: HarmonicSpace, grid: QuadratureGrid, field: CurvatureField | None = None) -> float:
    """∫_X |k^{−n}B − π^{−n}1_{X(q)}|det|| ω_n."""
    field = field or curvature_field(space.geom, grid)
    deviation = np.abs(bergman_function(space, grid) / space.k ** space.n - limit_density(field, space.q))
    return float(grid.integrate(deviation))


def symbol_field(symbol: SuperSymbol, grid: QuadratureGrid, field: CurvatureField, q: int) -> np.ndarray:
    return reduced_symbol_field(symbol.sample(grid), field, q)


def trace_error(space: HarmonicSpace, grid: QuadratureGrid, symbol: SuperSymbol, field: CurvatureField) -> float:
    """|k^{−n}Tr T_f − π^{−n}∫_{X(q)} f_χ|det| ω_n|."""
    tf = assemble_super(space, symbol, grid)
    fchi = symbol_field(symbol, grid, field, space.q)
    return abs(tf.normalization * trace(tf) - grid.integrate(fchi * limit_density(field, space.q)))


def product_trace_defect(space: HarmonicSpace, grid: QuadratureGrid, f: SuperSymbol, g: SuperSymbol,
                         field: CurvatureField) -> float:
    """k^{−n}|Tr(T_fT_g) − Tr T_{f_χg_χ}|."""
    tf, tg = assemble_super(space, f, grid), assemble_super(space, g, grid)
    fchi, gchi = (symbol_field(s, grid, field, space.q) for s in (f, g))
    tfg = assemble(space, fchi * gchi, grid)
    return tf.normalization * abs(trace_product(tf, tg) - trace(tfg))


def kernel_pairing_error(space: HarmonicSpace, grid: QuadratureGrid, f: SuperSymbol, g: SuperSymbol,
                         field: CurvatureField) -> float:
    """|k^{−n}Tr(T_fT_g) − π^{−n}∫_{X(q)} f_χg_χ|det| ω_n|."""
    tf, tg = assemble_super(space, f, grid), assemble_super(space, g, grid)
    fchi, gchi = (symbol_field(s, grid, field, space.q) for s in (f, g))
    limit = grid.integrate(fchi * gchi * limit_density(field, space.q))
    return abs(tf.normalization * trace_product(tf, tg) - limit)


def counting_errors(sm: SpectralMeasure, limit: DiscreteMeasure, gammas) -> dict:
    """{γ: |k^{−n}N(T_f>γ) − mass of {f_χ>γ}∩X(q)|}, with levels moved off eigenvalues."""
    errors = {}
    for gamma in gammas:
        level = safe_level(sm, gamma)
        above, _ = counting(sm, level)
        errors[gamma] = abs(sm.weight * above - limit.mass_above(level))
    return errors


@dataclass(frozen=True)
class PushforwardDistances:
    ks: float
    levy: float
    has_atoms: bool

    @property
    def band_distance(self) -> float:
        """Lévy distance when the limit law has atoms, Kolmogorov otherwise."""
        return self.levy if self.has_atoms else self.ks


def spectral_pushforward_test(sm: SpectralMeasure, limit: DiscreteMeasure, atom_mass: float = 1e-3) -> PushforwardDistances:
    """Distances between the normalized spectral law and the f_χ pushforward."""
    has_atoms = bool(np.max(limit.mass, initial=0.0) > atom_mass * limit.total_mass)
    return PushforwardDistances(ks=ks_distance(sm, limit), levy=levy_distance(sm, limit), has_atoms=has_atoms)


def _ball_rule(n: int, delta: float, resolution) -> tuple:
    """Per-factor geodesic radii and weights of a rule for the ball d ≤ δ, angles excluded.

    On one factor the area element in geodesic polar coordinates is
    ¼ sin d dd dθ. On the product d = (d₁² + d₂²)^{1/2}, parametrized by
    d₁ = ρ cos β, d₂ = ρ sin β.
    """
    n_radial, _ = resolution
    x, w = special.roots_legendre(n_radial)
    rho, w_rho = 0.5 * delta * (x + 1.0), 0.5 * delta * w
    if n == 1:
        return (rho,), w_rho * 0.25 * np.sin(rho)
    beta, w_beta = 0.25 * np.pi * (x + 1.0), 0.25 * np.pi * w
    d1 = np.outer(rho, np.cos(beta)).ravel()
    d2 = np.outer(rho, np.sin(beta)).ravel()
    weight = np.outer(w_rho * rho, w_beta).ravel() * 0.0625 * np.sin(d1) * np.sin(d2)
    return (d1, d2), weight


def _circle_average(space: HarmonicSpace, a: int, center: ChartPoints, radii: np.ndarray, n_angle: int) -> np.ndarray:
    """∫_0^{2π} |K_a(x, y(d, θ))|² dθ for every radius d around one anchor x on factor a."""
    theta = 2.0 * np.pi * np.arange(n_angle) / n_angle
    # z = tan(d/2)e^{iθ} at geodesic distance d from 0
    upper = (np.sin(0.5 * radii)[:, None] * np.exp(1j * theta)[None, :]).ravel()
    lower = np.repeat(np.cos(0.5 * radii), n_angle).astype(np.complex128)
    ring = isometry_image(center, ChartPoints.from_homogeneous(np.stack([upper, lower], axis=1)))
    basis, onb = space.bases[a], space.factor_onb[a]
    vx = basis.values(center) @ onb
    vy = basis.values(ring) @ onb
    kernel = np.abs(vy @ np.conj(vx[0])) ** 2
    return kernel.reshape(len(radii), n_angle).sum(axis=1) * (2.0 * np.pi / n_angle)


def offdiagonal_mass(space: HarmonicSpace, delta: float, anchor_resolution=None, polar_resolution=None) -> float:
    """Fraction of ∫∫|K|² carried by pairs at geodesic distance > δ.

    The outer integral runs over a coarse anchor grid; the inner one over the
    geodesic ball around each anchor. The total ∫∫|K|² = ∫B is taken on the
    same anchors so quadrature bias in the outer rule cancels.
    """
    if not 0.0 <= delta <= np.pi:
        raise ValueError(f'Geodesic radius must lie in [0, π], got {delta}')
    if space.dim == 0:
        return 0.0
    conf = settings.TOEPLITZ_LAB
    curve = space.n == 1
    anchor_resolution = anchor_resolution or (conf['ANCHOR_RESOLUTION'] if curve else conf['PRODUCT_ANCHOR_RESOLUTION'])
    polar_resolution = polar_resolution or (conf['POLAR_RESOLUTION'] if curve else conf['PRODUCT_POLAR_RESOLUTION'])
    anchors = build_grid(space.geom, anchor_resolution)

    radii, weights = _ball_rule(space.n, delta, polar_resolution)
    # per factor: (anchors, ball nodes) circle averages of |K_a|²
    averages = []
    for a, factor_grid in enumerate(anchors.factors):
        points = factor_grid.points
        averages.append(np.array([_circle_average(space, a, points[[i]], radii[a], polar_resolution[1])
                                  for i in range(len(points))]))
    if curve:
        inner = averages[0] @ weights
    else:
        inner = np.einsum('ib,jb,b->ij', averages[0], averages[1], weights)
    near = anchors.integrate(inner)
    total = anchors.integrate(bergman_function(space, anchors))
    fraction = float(max(1.0 - near / total, 0.0))
    logger.debug(f'Off-diagonal mass of {space} at δ={delta}: {fraction:.6e}')
    return fraction


@dataclass(frozen=True)
class ConcentrationSubspace:
    """Eigenvectors of T_{1_Ω} with eigenvalue ≥ 1−ε, as orthonormal coefficient columns."""

    vectors: np.ndarray
    eigs: np.ndarray
    region_matrix: np.ndarray

    @property
    def dim(self) -> int:
        return self.vectors.shape[1]

    def region_norm(self, coefficients) -> np.ndarray:
        """‖α‖²_Ω = αᴴT_{1_Ω}α for α = vectors·coefficients (columns allowed)."""
        alpha = self.vectors @ np.asarray(coefficients)
        return np.real(np.sum(np.conj(alpha) * (self.region_matrix @ alpha), axis=0))


def concentration_subspace(space: HarmonicSpace, grid: QuadratureGrid, region: ScalarField,
                           eps: float = 0.1) -> ConcentrationSubspace:
    t = assemble(space, region.sample(grid), grid, symbol_id='region')
    eigenvalues, vectors = eigen_decomposition(t)
    keep = eigenvalues >= 1.0 - eps
    logger.info(f'Concentration subspace of {space}: {int(np.sum(keep))} of {space.dim} eigenvalues ≥ {1.0 - eps}')
    return ConcentrationSubspace(vectors=vectors[:, keep], eigs=eigenvalues[keep], region_matrix=t.matrix)


def limit_law(geom: ModelGeometry, q: int, grid: QuadratureGrid, symbol: SuperSymbol,
              field: CurvatureField) -> DiscreteMeasure:
    """Pushforward of the X(q) curvature measure under f_χ."""
    return pushforward_cdf(geom, grid, symbol_field(symbol, grid, field, q), q, field)


def symbol_spectrum(space: HarmonicSpace, grid: QuadratureGrid, symbol: SuperSymbol) -> SpectralMeasure:
    return spectrum(assemble_super(space, symbol, grid))
