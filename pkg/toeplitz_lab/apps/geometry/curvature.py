import logging
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from django.conf import settings
from scipy import linalg

from toeplitz_lab.apps.geometry.catalog import ModelGeometry
from toeplitz_lab.apps.geometry.quadrature import QuadratureGrid
from toeplitz_lab.exceptions import ChartError

logger = logging.getLogger(__name__)

DEGENERATE = -1


def curvature_eps() -> float:
    return settings.TOEPLITZ_LAB['CURVATURE_EPS']


@dataclass(frozen=True)
class CurvatureData:
    """Eigen-decomposition of (i/2)∂∂̄φ relative to ω at one point.

    `v_frame` is unitary in the orthonormal coframe: column c holds the
    components of the c-th eigendirection, so its first `q_index` columns span
    the negative directions.
    """

    point: tuple
    lambdas: np.ndarray
    det_abs: float
    q_index: int
    v_frame: np.ndarray

    @property
    def degenerate(self) -> bool:
        return self.q_index == DEGENERATE


def curvature_at(geom: ModelGeometry, point) -> CurvatureData:
    """Solve the generalized Hermitian eigenproblem ∂∂̄φ·v = λ·g·v at one point."""
    points = geom.factor_points(point)
    if any(len(p) != 1 for p in points):
        raise ChartError('curvature_at expects a single point per factor')
    ddbar = np.diag([f.ddbar(p.chart, p.coord)[0] for f, p in zip(geom.factors, points)])
    metric = np.diag([f.metric(p.coord)[0] for f, p in zip(geom.factors, points)])
    lambdas, vectors = linalg.eigh(ddbar, metric)
    # eigh normalizes vᴴ g v = 1; √g turns that into the orthonormal coframe
    v_frame = np.sqrt(metric) @ vectors.astype(np.complex128)
    det_abs = float(np.prod(np.abs(lambdas)))
    if np.min(np.abs(lambdas)) < curvature_eps():
        q_index = DEGENERATE
    else:
        q_index = int(np.sum(lambdas < 0))
    return CurvatureData(point=points, lambdas=lambdas, det_abs=det_abs, q_index=q_index, v_frame=v_frame)


@dataclass(frozen=True)
class CurvatureField:
    """Curvature eigenvalues over a whole grid.

    The metric and curvature are diagonal in the factor coframe, so eigenvalues
    are stored per factor (`factor_lambdas[a]` has shape (N_a,)) and broadcast to
    the grid shape on demand.
    """

    factor_lambdas: tuple
    shape: tuple

    @property
    def n(self) -> int:
        return len(self.factor_lambdas)

    def _broadcast(self, a):
        index = [None] * self.n
        index[a] = slice(None)
        return self.factor_lambdas[a][tuple(index)]

    @cached_property
    def lambdas(self) -> np.ndarray:
        """Ascending eigenvalues, shape grid.shape + (n,)."""
        stacked = np.stack(np.broadcast_arrays(*(self._broadcast(a) for a in range(self.n))), axis=-1)
        return np.sort(stacked, axis=-1)

    @cached_property
    def det_abs(self) -> np.ndarray:
        det = np.ones(self.shape)
        for a in range(self.n):
            det = det * np.abs(self._broadcast(a))
        return det

    @cached_property
    def degenerate(self) -> np.ndarray:
        mask = np.zeros(self.shape, dtype=bool)
        for a in range(self.n):
            mask = mask | (np.abs(self._broadcast(a)) < curvature_eps())
        return mask

    @cached_property
    def negative_count(self) -> np.ndarray:
        count = np.zeros(self.shape, dtype=np.int64)
        for a in range(self.n):
            count = count + (self._broadcast(a) < 0)
        return count

    @cached_property
    def q_index(self) -> np.ndarray:
        return np.where(self.degenerate, DEGENERATE, self.negative_count)

    def stratum(self, q: int) -> np.ndarray:
        """Indicator of X(q) on the grid."""
        return self.q_index == q

    def negative_directions(self, q: int) -> tuple:
        """One mask per factor, true at nodes where that factor is among the q most negative directions."""
        if q == 0:
            return tuple(np.zeros(self.shape, dtype=bool) for _ in range(self.n))
        if q == self.n:
            return tuple(np.ones(self.shape, dtype=bool) for _ in range(self.n))
        # n = 2, q = 1: pick the factor with the smaller eigenvalue
        first = self._broadcast(0) <= self._broadcast(1)
        first = np.broadcast_to(first, self.shape)
        return first, ~first


def curvature_field(geom: ModelGeometry, grid: QuadratureGrid) -> CurvatureField:
    factor_lambdas = tuple(f.eigenvalue(g.chart, g.coord) for f, g in zip(geom.factors, grid.factors))
    return CurvatureField(factor_lambdas=factor_lambdas, shape=grid.shape)


@dataclass(frozen=True)
class Classification:
    """Node counts and curvature masses π^{−n}∫_{X(q)}|det| ω_n per stratum."""

    counts: dict
    masses: dict
    total: int

    def fraction(self, q) -> float:
        return self.counts.get(q, 0) / self.total


def classify(geom: ModelGeometry, grid: QuadratureGrid, field: CurvatureField | None = None) -> Classification:
    field = field or curvature_field(geom, grid)
    values, tallies = np.unique(field.q_index, return_counts=True)
    counts = {int(q): int(c) for q, c in zip(values, tallies)}
    masses = {}
    for q in sorted(counts):
        if q == DEGENERATE:
            continue
        masses[q] = float(grid.integrate(field.det_abs * field.stratum(q)) / np.pi ** geom.n)
    result = Classification(counts=counts, masses=masses, total=grid.size)
    logger.info(f'Classified {geom.label}: counts={result.counts}, masses={result.masses}')
    return result


def degree(geom: ModelGeometry, grid: QuadratureGrid) -> tuple:
    """Per-factor (2π)^{−1}∫ i∂∂̄φ = π^{−1}∫ λ ω."""
    return tuple(float(np.sum(g.weight * f.eigenvalue(g.chart, g.coord)) / np.pi)
                 for f, g in zip(geom.factors, grid.factors))
