"""Point families D_k on a curve geometry.

Spherical Fibonacci sets are built inside a geodesic cap around z = 0 with
heights equally spaced in area, then moved by an isometry. The whole sphere
is the cap of radius π, and a cap-deficient family is the Fibonacci set of
the complementary cap, so every point that would have fallen in the removed
cap is placed outside it instead.
"""
import logging
import math
from dataclasses import dataclass

import numpy as np
from django.conf import settings
from django.db import models

from toeplitz_lab.apps.geometry.catalog import ModelGeometry
from toeplitz_lab.apps.geometry.points import ChartPoints, isometry_image, pairwise_distance
from toeplitz_lab.apps.geometry.quadrature import build_grid
from toeplitz_lab.apps.spaces.sections import expected_dimension
from toeplitz_lab.apps.superform.symbols import ScalarField
from toeplitz_lab.exceptions import CatalogError

logger = logging.getLogger(__name__)

GOLDEN_ANGLE = np.pi * (3.0 - np.sqrt(5.0))


class FamilyKind(models.TextChoices):
    FIBONACCI_UNIFORM = 'FIBONACCI_UNIFORM', 'Spherical Fibonacci points, ⌈c·k⌉ of them'
    CAP_DEFICIENT = 'CAP_DEFICIENT', 'Fibonacci points moved out of a cap'
    QUADRATURE_NODES = 'QUADRATURE_NODES', 'Quadrature nodes with weights times k^n'


@dataclass(frozen=True)
class PointFamily:
    """A per-k generator of sampling sets on one curve geometry."""

    kind: str
    geom: ModelGeometry
    c: float = 1.5
    cap_center: complex | None = 0j
    cap_radius: float = np.pi / 2
    sep: float | None = None
    resolution: tuple | None = None

    def __post_init__(self):
        if self.kind not in FamilyKind.values:
            raise CatalogError(f'Unknown point family {self.kind!r}')
        if self.geom.n != 1:
            raise CatalogError(f'Point families live on curves, got {self.geom.label}')
        if self.kind != FamilyKind.QUADRATURE_NODES and not self.c > 0:
            raise CatalogError(f'Density constant c must be positive, got {self.c}')
        if self.kind == FamilyKind.CAP_DEFICIENT and not 0.0 < self.cap_radius < np.pi:
            raise CatalogError(f'Removed cap radius must lie in (0, π), got {self.cap_radius}')

    @property
    def separation_scale(self) -> float:
        return settings.TOEPLITZ_LAB['SEPARATION'] if self.sep is None else self.sep

    @property
    def cap(self) -> ScalarField:
        return ScalarField.cap(self.cap_center, self.cap_radius)

    @property
    def label(self) -> str:
        if self.kind == FamilyKind.QUADRATURE_NODES:
            return str(self.kind)
        if self.kind == FamilyKind.CAP_DEFICIENT:
            return f'{self.kind}(c={self.c:g}, radius={self.cap_radius:g})'
        return f'{self.kind}(c={self.c:g})'

    def target_count(self, k: int) -> int:
        return math.ceil(self.c * k ** self.geom.n)

    def __str__(self):
        return self.label


@dataclass(frozen=True)
class SamplingSet:
    """D_k with per-point weights; unweighted families carry ones."""

    family: PointFamily
    k: int
    points: ChartPoints
    weights: np.ndarray

    def __len__(self):
        return len(self.points)

    @property
    def dim(self) -> int:
        return expected_dimension(self.family.geom, self.k)

    @property
    def undersampled(self) -> bool:
        """Fewer points than sections: some section vanishes on all of D_k."""
        return len(self) < self.dim

    def with_points(self, extra: ChartPoints, weights=None) -> 'SamplingSet':
        weights = np.ones(len(extra)) if weights is None else np.asarray(weights, dtype=np.float64)
        points = ChartPoints(np.concatenate([self.points.chart, extra.chart]),
                             np.concatenate([self.points.coord, extra.coord]))
        return SamplingSet(self.family, self.k, points, np.concatenate([self.weights, weights]))


def as_point(center: complex | None) -> ChartPoints:
    """A single point from an affine coordinate; None is z = ∞."""
    return ChartPoints.from_affine(np.inf if center is None else center)


def antipode(center: complex | None) -> ChartPoints:
    (a, b), = as_point(center).homogeneous
    return ChartPoints.from_homogeneous(np.array([[-np.conj(b), np.conj(a)]]))


def fibonacci_cap(count: int, radius: float = np.pi, center: ChartPoints | None = None) -> ChartPoints:
    """`count` Fibonacci points equally spread in area over the cap d(x, center) < radius (center z = 0 by default)."""
    i = np.arange(count) + 0.5
    # 1 − cos d is proportional to the enclosed area
    d = np.arccos(1.0 - (1.0 - np.cos(radius)) * i / count)
    phi = GOLDEN_ANGLE * np.arange(count)
    local = ChartPoints.from_homogeneous(np.stack([np.sin(0.5 * d) * np.exp(1j * phi),
                                                   np.cos(0.5 * d).astype(np.complex128)], axis=1))
    return local if center is None else isometry_image(center, local)


def generate(family: PointFamily, k: int) -> SamplingSet:
    if family.kind == FamilyKind.QUADRATURE_NODES:
        grid = build_grid(family.geom, family.resolution)
        points = grid.factors[0].points
        weights = grid.weights * k ** family.geom.n
    else:
        count = family.target_count(k)
        if family.kind == FamilyKind.CAP_DEFICIENT:
            points = fibonacci_cap(count, np.pi - family.cap_radius, antipode(family.cap_center))
        else:
            points = fibonacci_cap(count)
        weights = np.ones(count)

    sampling_set = SamplingSet(family=family, k=k, points=points, weights=weights)
    logger.info(f'Generated {family} at k={k}: {len(sampling_set)} points, dim={sampling_set.dim}')
    if sampling_set.undersampled:
        logger.warning(f'{family} at k={k} is UNDERSAMPLED: {len(sampling_set)} points for '
                       f'{sampling_set.dim} sections')
    return sampling_set


def separation(points: ChartPoints) -> float:
    """Minimum pairwise geodesic distance (∞ for fewer than two points)."""
    if len(points) < 2:
        return np.inf
    distances = pairwise_distance(points)
    np.fill_diagonal(distances, np.inf)
    return float(distances.min())


def is_separated(sampling_set: SamplingSet) -> bool:
    """min distance ≥ sep·k^{−1/2}."""
    return separation(sampling_set.points) >= sampling_set.family.separation_scale * sampling_set.k ** -0.5
