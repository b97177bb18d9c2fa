"""Quadrature on CP¹ and CP¹×CP¹.

Each CP¹ factor is covered by the charts z and w = 1/z glued with a partition
of unity ρ in log|ζ|: ρ = 1 for |ζ| ≤ 1/2, ρ = 0 for |ζ| ≥ 2, and
ρ(s) + ρ(−s) = 1, so the same ramp serves both charts. In every chart the rule
is Gauss-Legendre in t = |ζ|² on segments whose breakpoints include the ramp
ends, |ζ| = 1, any bump support edges and the edges of a degenerate annulus,
times a uniform trapezoid in the angle. Integrands are piecewise analytic on
every segment, so the radial rule converges geometrically.
"""
import logging
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from django.conf import settings
from scipy import special

from toeplitz_lab.apps.geometry.catalog import BUMP_CENTER, BUMP_RADIUS, ModelGeometry
from toeplitz_lab.apps.geometry.points import ChartPoints
from toeplitz_lab.exceptions import ResolutionError

logger = logging.getLogger(__name__)

# ramp half-width in s = log|ζ|
RAMP_HALF_WIDTH = np.log(2.0)
BASE_BREAKPOINTS = (0.0, 0.25, 1.0, 4.0)


def partition(s):
    """Chart weight ρ(s), s = log|ζ|, as a C³ septic smoothstep on [−log 2, log 2]."""
    x = np.clip((RAMP_HALF_WIDTH - np.asarray(s, dtype=np.float64)) / (2.0 * RAMP_HALF_WIDTH), 0.0, 1.0)
    return x ** 4 * (35.0 - 84.0 * x + 70.0 * x ** 2 - 20.0 * x ** 3)


def chart_breakpoints(factor, chart: int) -> np.ndarray:
    points = set(BASE_BREAKPOINTS)
    if factor.bump:
        # bump support, plus the annulus where λ < ε_curv when the amplitude reaches it
        edges = (BUMP_CENTER - BUMP_RADIUS, BUMP_CENTER + BUMP_RADIUS,
                 *factor.degenerate_band(settings.TOEPLITZ_LAB['CURVATURE_EPS']))
        points.update(edges if chart == 0 else (1.0 / e for e in edges))
    return np.array(sorted(p for p in points if p <= BASE_BREAKPOINTS[-1]))


@dataclass(frozen=True)
class FactorGrid:
    """Nodes and weights of one CP¹ factor; Σ weight·h ≈ ∫ h ω."""

    chart: np.ndarray
    coord: np.ndarray
    weight: np.ndarray
    resolution: tuple

    def __len__(self):
        return self.coord.shape[0]

    @cached_property
    def points(self) -> ChartPoints:
        return ChartPoints(self.chart, self.coord)

    @property
    def counts(self) -> tuple:
        """Node counts per chart."""
        return int(np.sum(self.chart == 0)), int(np.sum(self.chart == 1))


def build_factor_grid(factor, resolution) -> FactorGrid:
    n_seg, n_ang = resolution
    x, wx = special.roots_legendre(n_seg)
    theta = 2.0 * np.pi * np.arange(n_ang) / n_ang
    charts, coords, weights = [], [], []
    for chart in (0, 1):
        breaks = chart_breakpoints(factor, chart)
        for lo, hi in zip(breaks[:-1], breaks[1:]):
            half = 0.5 * (hi - lo)
            t = 0.5 * (hi + lo) + half * x
            # ω = (i/2)g dζ∧dζ̄ = ½ g dt dθ
            radial = 0.5 * half * wx * factor.metric(np.sqrt(t)) * partition(0.5 * np.log(t))
            r = np.sqrt(t)
            coords.append((r[:, None] * np.exp(1j * theta)[None, :]).ravel())
            weights.append(np.repeat(radial * 2.0 * np.pi / n_ang, n_ang))
            charts.append(np.full(n_seg * n_ang, chart, dtype=np.int64))
    return FactorGrid(chart=np.concatenate(charts), coord=np.concatenate(coords),
                      weight=np.concatenate(weights), resolution=tuple(resolution))


@dataclass(frozen=True)
class QuadratureGrid:
    """Tensor product of factor grids.

    Sampled fields over the grid are arrays of shape `grid.shape`: (N,) on a
    curve, (N₁, N₂) on the product with axis a indexing factor a.
    """

    factors: tuple
    resolution: tuple

    @property
    def n(self) -> int:
        return len(self.factors)

    @property
    def shape(self) -> tuple:
        return tuple(len(f) for f in self.factors)

    @property
    def size(self) -> int:
        return int(np.prod(self.shape))

    @cached_property
    def weights(self) -> np.ndarray:
        w = self.factors[0].weight
        for f in self.factors[1:]:
            w = np.multiply.outer(w, f.weight)
        return w

    @property
    def nodes(self) -> tuple:
        """Per-factor ChartPoints; node (i₁, …, iₙ) pairs entry i_a of factor a."""
        return tuple(f.points for f in self.factors)

    def integrate(self, values) -> float:
        return np.sum(self.weights * np.asarray(values))

    def total_volume(self) -> float:
        return float(np.sum(self.weights))

    def node(self, index) -> tuple:
        """The single node at a multi-index, as length-1 ChartPoints per factor."""
        index = np.unravel_index(index, self.shape) if np.ndim(index) == 0 else index
        return tuple(f.points[[int(i)]] for f, i in zip(self.factors, index))


def default_resolution(geom: ModelGeometry) -> tuple:
    conf = settings.TOEPLITZ_LAB
    return tuple(conf['CURVE_RESOLUTION'] if geom.n == 1 else conf['PRODUCT_RESOLUTION'])


def build_grid(geom: ModelGeometry, resolution=None) -> QuadratureGrid:
    """Per-factor chart-glued polar rules combined as a tensor product."""
    resolution = tuple(resolution) if resolution is not None else default_resolution(geom)
    minimum = tuple(settings.TOEPLITZ_LAB['MIN_RESOLUTION'])
    if len(resolution) != 2 or any(int(r) != r for r in resolution):
        raise ResolutionError(f'Resolution must be (radial nodes per segment, angular nodes), got {resolution}')
    if resolution[0] < minimum[0] or resolution[1] < minimum[1]:
        raise ResolutionError(f'Resolution {resolution} below the minimum {minimum}')
    resolution = tuple(int(r) for r in resolution)

    factors = tuple(build_factor_grid(f, resolution) for f in geom.factors)
    grid = QuadratureGrid(factors=factors, resolution=resolution)
    logger.info(f'Built grid for {geom.label}: resolution={resolution}, shape={grid.shape}, '
                f'volume={grid.total_volume():.15g}')
    return grid
