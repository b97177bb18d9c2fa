"""Limit laws of Toeplitz spectra and distances between distribution functions.

The limit law on X(q) is the pushforward under f_χ of the positive measure
π^{−n}|det|·ω_n restricted to X(q), sampled on the same grid as the operators.
"""
import logging
from dataclasses import dataclass

import numpy as np
from scipy import optimize

from toeplitz_lab.apps.geometry.catalog import ModelGeometry
from toeplitz_lab.apps.geometry.curvature import CurvatureField, curvature_field
from toeplitz_lab.apps.geometry.quadrature import QuadratureGrid
from toeplitz_lab.apps.toeplitz.spectra import SpectralMeasure
from toeplitz_lab.exceptions import NumericalError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class DiscreteMeasure:
    """Finite positive measure on ℝ: sorted distinct atoms and their masses."""

    support: np.ndarray
    mass: np.ndarray

    @classmethod
    def from_samples(cls, values, masses) -> 'DiscreteMeasure':
        values = np.asarray(values, dtype=np.float64)
        masses = np.broadcast_to(np.asarray(masses, dtype=np.float64), values.shape).ravel()
        values = values.ravel()
        keep = masses > 0
        support, inverse = np.unique(values[keep], return_inverse=True)
        return cls(support=support, mass=np.bincount(inverse, weights=masses[keep], minlength=len(support)))

    @classmethod
    def from_spectrum(cls, sm: SpectralMeasure) -> 'DiscreteMeasure':
        return cls.from_samples(sm.eigs, sm.weight)

    @property
    def total_mass(self) -> float:
        return float(np.sum(self.mass))

    def _cumulative(self) -> np.ndarray:
        total = self.total_mass
        if total <= 0:
            raise NumericalError('Distribution has zero total mass')
        return np.concatenate([[0.0], np.cumsum(self.mass) / total])

    def cdf(self, x) -> np.ndarray:
        """Normalized right-continuous distribution function."""
        return self._cumulative()[np.searchsorted(self.support, x, side='right')]

    def cdf_left(self, x) -> np.ndarray:
        """Left limits F(x−)."""
        return self._cumulative()[np.searchsorted(self.support, x, side='left')]

    def mass_above(self, gamma: float) -> float:
        """Unnormalized mass of (γ, ∞)."""
        return float(np.sum(self.mass[self.support > gamma]))


def pushforward_cdf(geom: ModelGeometry, grid: QuadratureGrid, fchi, q: int,
                    field: CurvatureField | None = None) -> DiscreteMeasure:
    """Pushforward of π^{−n}|det|·ω_n on X(q) under f_χ; total mass is the curvature mass of X(q)."""
    field = field or curvature_field(geom, grid)
    fchi = np.broadcast_to(np.asarray(fchi, dtype=np.float64), grid.shape)
    masses = grid.weights * field.det_abs * field.stratum(q) / np.pi ** geom.n
    measure = DiscreteMeasure.from_samples(fchi, masses)
    logger.debug(f'Pushforward on {geom.label} X({q}): {len(measure.support)} atoms, mass {measure.total_mass:.12f}')
    return measure


def _as_measure(measure) -> DiscreteMeasure:
    return DiscreteMeasure.from_spectrum(measure) if isinstance(measure, SpectralMeasure) else measure


def ks_distance(spectral, limit: DiscreteMeasure) -> float:
    """sup_x |F(x) − G(x)| between the normalized distribution functions."""
    first, second = _as_measure(spectral), _as_measure(limit)
    jumps = np.union1d(first.support, second.support)
    if len(jumps) == 0:
        raise NumericalError('Distribution has zero total mass')
    right = np.abs(first.cdf(jumps) - second.cdf(jumps))
    left = np.abs(first.cdf_left(jumps) - second.cdf_left(jumps))
    return float(max(right.max(), left.max()))


def levy_distance(spectral, limit: DiscreteMeasure, xtol: float = 1e-12) -> float:
    """Lévy distance: inf{ε : F(x−ε)−ε ≤ G(x) ≤ F(x+ε)+ε for all x}.

    G is the spectral law. Both conditions are monotone between jumps of G, so
    they only need checking at its atoms: G(x) ≤ F(x+ε)+ε and
    F((x−ε)−) − ε ≤ G(x−).
    """
    g, f = _as_measure(spectral), _as_measure(limit)
    atoms = g.support
    g_right, g_left = g.cdf(atoms), g.cdf_left(atoms)

    def violation(eps):
        upper = np.max(g_right - f.cdf(atoms + eps) - eps, initial=-np.inf)
        lower = np.max(f.cdf_left(atoms - eps) - eps - g_left, initial=-np.inf)
        return max(upper, lower)

    if violation(0.0) <= 0:
        return 0.0
    # ε = 1 always satisfies both conditions
    return float(optimize.bisect(lambda eps: 1.0 if violation(eps) > 0 else -1.0, 0.0, 1.0, xtol=xtol))
