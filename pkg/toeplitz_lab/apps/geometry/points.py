"""Points on CP¹ in the two affine charts.

Chart 0 carries the coordinate z, chart 1 the coordinate w = 1/z. Every point
also has unit homogeneous coordinates (a, b) with z = a/b, which is how the
section spaces evaluate weighted values without overflow.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from toeplitz_lab.exceptions import ChartError


@dataclass(frozen=True)
class ChartPoints:
    """A batch of points on one CP¹ factor, each given in one chart."""

    chart: np.ndarray
    coord: np.ndarray

    def __post_init__(self):
        chart = np.atleast_1d(np.asarray(self.chart, dtype=np.int64))
        coord = np.atleast_1d(np.asarray(self.coord, dtype=np.complex128))
        if chart.shape != coord.shape:
            raise ChartError(f'chart ids {chart.shape} and coordinates {coord.shape} differ in shape')
        if np.any((chart != 0) & (chart != 1)):
            raise ChartError('chart id must be 0 (z) or 1 (w = 1/z)')
        if not np.all(np.isfinite(coord)):
            raise ChartError('point outside all charts (non-finite coordinate)')
        object.__setattr__(self, 'chart', chart)
        object.__setattr__(self, 'coord', coord)

    def __len__(self):
        return self.coord.shape[0]

    def __getitem__(self, index) -> ChartPoints:
        return ChartPoints(self.chart[index], self.coord[index])

    @classmethod
    def from_homogeneous(cls, h: np.ndarray) -> ChartPoints:
        """Pick the chart with the smaller coordinate modulus."""
        h = np.atleast_2d(np.asarray(h, dtype=np.complex128))
        a, b = h[:, 0], h[:, 1]
        chart = (np.abs(a) > np.abs(b)).astype(np.int64)
        with np.errstate(divide='ignore', invalid='ignore'):
            coord = np.where(chart == 0, a / b, b / a)
        return cls(chart, coord)

    @classmethod
    def from_affine(cls, z) -> ChartPoints:
        """Points given by z; z = ∞ (np.inf) maps to the origin of chart 1."""
        z = np.atleast_1d(np.asarray(z, dtype=np.complex128))
        far = ~np.isfinite(z) | (np.abs(z) > 1.0)
        with np.errstate(divide='ignore', invalid='ignore'):
            coord = np.where(far, np.where(np.isfinite(z), 1.0 / z, 0.0), z)
        return cls(far.astype(np.int64), coord)

    @classmethod
    def from_sphere(cls, xyz: np.ndarray) -> ChartPoints:
        """Inverse stereographic projection from the north pole (z = ∞ at (0, 0, 1))."""
        xyz = np.atleast_2d(np.asarray(xyz, dtype=np.float64))
        xyz = xyz / np.linalg.norm(xyz, axis=1, keepdims=True)
        b = np.sqrt(np.clip((1.0 - xyz[:, 2]) / 2.0, 0.0, None))
        with np.errstate(divide='ignore', invalid='ignore'):
            a = np.where(b > 1e-300, (xyz[:, 0] + 1j * xyz[:, 1]) / (2.0 * b), 1.0)
        return cls.from_homogeneous(np.stack([a, b.astype(np.complex128)], axis=1))

    @property
    def homogeneous(self) -> np.ndarray:
        """Unit vectors (a, b) in C², shape (N, 2)."""
        norm = np.sqrt(1.0 + np.abs(self.coord) ** 2)
        ones = np.ones_like(self.coord)
        a = np.where(self.chart == 0, self.coord, ones) / norm
        b = np.where(self.chart == 0, ones, self.coord) / norm
        return np.stack([a, b], axis=1)

    @property
    def sphere(self) -> np.ndarray:
        h = self.homogeneous
        xy = 2.0 * h[:, 0] * np.conj(h[:, 1])
        z = np.abs(h[:, 0]) ** 2 - np.abs(h[:, 1]) ** 2
        return np.stack([xy.real, xy.imag, z], axis=1)

    @property
    def modulus_squared(self) -> np.ndarray:
        """|z|² in chart 0 terms; ∞ at the north pole."""
        t = np.abs(self.coord) ** 2
        with np.errstate(divide='ignore'):
            return np.where(self.chart == 0, t, 1.0 / t)

    def in_chart(self, chart: int) -> np.ndarray:
        """Coordinates of every point in the requested chart (∞ where undefined)."""
        h = self.homogeneous
        num, den = (h[:, 0], h[:, 1]) if chart == 0 else (h[:, 1], h[:, 0])
        with np.errstate(divide='ignore', invalid='ignore'):
            return np.where(np.abs(den) > 0, num / den, np.inf)


def sample_uniform(rng: np.random.Generator, size: int) -> ChartPoints:
    """Points distributed uniformly with respect to the Fubini-Study area."""
    return ChartPoints.from_sphere(rng.standard_normal((size, 3)))


def sample_overlap(rng: np.random.Generator, size: int, low=0.5, high=2.0) -> ChartPoints:
    """Points with low < |z| < high, given in chart 0."""
    r = np.exp(rng.uniform(np.log(low), np.log(high), size))
    theta = rng.uniform(0.0, 2.0 * np.pi, size)
    return ChartPoints(np.zeros(size, dtype=np.int64), r * np.exp(1j * theta))


def geodesic_distance(x, y) -> np.ndarray:
    """Angle on the round unit sphere between paired points, in [0, π].

    Tuples of per-factor points give the product distance (Σ dₐ²)^{1/2}.
    """
    if not isinstance(x, ChartPoints):
        return np.sqrt(sum(geodesic_distance(a, b) ** 2 for a, b in zip(x, y)))
    hx, hy = x.homogeneous, y.homogeneous
    inner = np.abs(np.sum(np.conj(hx) * hy, axis=1))
    cross = np.abs(hx[:, 0] * hy[:, 1] - hx[:, 1] * hy[:, 0])
    return 2.0 * np.arctan2(cross, inner)


def pairwise_distance(x: ChartPoints) -> np.ndarray:
    hx = x.homogeneous
    inner = np.abs(np.conj(hx) @ hx.T)
    cross = np.abs(np.outer(hx[:, 0], hx[:, 1]) - np.outer(hx[:, 1], hx[:, 0]))
    return 2.0 * np.arctan2(cross, inner)


def isometry_image(center: ChartPoints, local: ChartPoints) -> ChartPoints:
    """Move points given around z = 0 so that 0 lands on `center`.

    Uses the SU(2) matrix [[b̄, a], [−ā, b]] built from the centre's homogeneous
    coordinates (a, b), which preserves the Fubini-Study metric and maps
    (0, 1) to (a, b).
    """
    (a, b), = center.homogeneous
    h = local.homogeneous
    image = np.stack([np.conj(b) * h[:, 0] + a * h[:, 1], -np.conj(a) * h[:, 0] + b * h[:, 1]], axis=1)
    return ChartPoints.from_homogeneous(image)
