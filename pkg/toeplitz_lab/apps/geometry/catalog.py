import logging
from dataclasses import dataclass, field
from functools import cache

import numpy as np
from django.db import models
from scipy import optimize

from toeplitz_lab.apps.geometry.points import ChartPoints
from toeplitz_lab.exceptions import CatalogError, ChartError

logger = logging.getLogger(__name__)

# Bump η(u) = exp(−1/(1 − s²)), s = (u − BUMP_CENTER)/BUMP_RADIUS, zero for |s| ≥ 1
BUMP_CENTER = 1.0
BUMP_RADIUS = 0.5


class CatalogName(models.TextChoices):
    FS_CP1 = 'FS_CP1', 'Fubini-Study line bundle O(d) on CP1'
    PERTURBED_CP1 = 'PERTURBED_CP1', 'O(d) with a radial bump, semi-positive'
    NEG_CP1 = 'NEG_CP1', 'Negative line bundle O(-m) on CP1'
    PRODUCT_CP1xCP1 = 'PRODUCT_CP1xCP1', 'O(a) x O(-b) on CP1 x CP1'


def bump(u):
    """η(u) with its first two u-derivatives, vectorized."""
    u = np.asarray(u, dtype=np.float64)
    s = (u - BUMP_CENTER) / BUMP_RADIUS
    inside = np.abs(s) < 1.0
    s_in = np.where(inside, s, 0.0)
    one_minus = 1.0 - s_in ** 2
    eta = np.where(inside, np.exp(-1.0 / one_minus), 0.0)
    # p(s) = −1/(1 − s²); η = exp(p)
    dp = -2.0 * s_in / one_minus ** 2
    d2p = -2.0 / one_minus ** 2 - 8.0 * s_in ** 2 / one_minus ** 3
    eta_1 = eta * dp / BUMP_RADIUS
    eta_2 = eta * (dp ** 2 + d2p) / BUMP_RADIUS ** 2
    return eta, eta_1, eta_2


def bump_curvature_profile(u):
    """(1+u)²(η' + uη''): the bump's contribution to the curvature eigenvalue per unit t."""
    _, eta_1, eta_2 = bump(u)
    return (1.0 + u) ** 2 * (eta_1 + u * eta_2)


@cache
def bump_minimum() -> float:
    """u* minimizing the bump profile: a dense sample refined by a bounded scalar minimization."""
    u = np.linspace(BUMP_CENTER - BUMP_RADIUS, BUMP_CENTER + BUMP_RADIUS, 20001)[1:-1]
    profile = bump_curvature_profile(u)
    i = int(np.argmin(profile))
    lo, hi = u[max(i - 1, 0)], u[min(i + 1, len(u) - 1)]
    refined = optimize.minimize_scalar(bump_curvature_profile, bounds=(lo, hi), method='bounded',
                                       options={'xatol': 1e-14})
    return float(refined.x if refined.fun < profile[i] else u[i])


@cache
def perturbation_limit(degree: int) -> float:
    """Largest bump amplitude keeping PERTURBED_CP1(degree, t) semi-positive.

    The eigenvalue is λ(u) = d + t·h(u) with h the bump profile, so t_max is
    bracketed and bisected at the profile minimum u*.
    """
    if degree <= 0:
        raise CatalogError(f'PERTURBED_CP1 needs a positive degree, got {degree}')
    u_star = bump_minimum()

    def min_eigenvalue(t):
        return degree + t * bump_curvature_profile(u_star)

    upper = 1.0
    while min_eigenvalue(upper) > 0.0:
        upper *= 2.0
    t_max = optimize.bisect(min_eigenvalue, 0.0, upper, xtol=1e-15, rtol=1e-15)
    # stay on the semi-positive side of the root
    while min_eigenvalue(t_max) < 0.0:
        t_max = np.nextafter(t_max, 0.0)
    logger.info(f'Perturbation limit for degree {degree}: t_max = {t_max:.15g} at u* = {u_star:.12g}')
    return float(t_max)


@dataclass(frozen=True)
class CurveFactor:
    """One CP¹ factor with Fubini-Study base metric and weight φ = degree·log(1+|z|²) + bump·η(|z|²).

    Chart 1 uses w = 1/z with φ₁(w) = degree·log(1+|w|²) + bump·η(1/|w|²), so the
    holomorphic transition is t₀₁(z) = z^degree and φ₀(z) − φ₁(1/z) = log|t₀₁(z)|².
    """

    degree: int
    bump: float = 0.0

    def metric(self, coord):
        """Density g of ω = (i/2)g dζ∧dζ̄; identical in both charts."""
        return (1.0 + np.abs(coord) ** 2) ** -2

    def weight(self, chart, coord):
        """φ in the given chart."""
        t = np.abs(coord) ** 2
        phi = self.degree * np.log1p(t)
        if self.bump:
            with np.errstate(divide='ignore'):
                u = np.where(np.asarray(chart) == 0, t, 1.0 / t)
            phi = phi + self.bump * bump(u)[0]
        return phi

    def ddbar(self, chart, coord):
        """∂_ζ∂_ζ̄φ in the given chart, by closed form."""
        t = np.abs(coord) ** 2
        value = self.degree / (1.0 + t) ** 2
        if self.bump:
            chart = np.broadcast_to(np.asarray(chart), t.shape)
            with np.errstate(divide='ignore'):
                u = np.where(chart == 0, t, 1.0 / t)
            active = np.abs(u - BUMP_CENTER) < BUMP_RADIUS
            u = np.where(active, u, BUMP_CENTER)
            _, eta_1, eta_2 = bump(u)
            radial = eta_1 + u * eta_2
            # chart 1: ∂_w∂_w̄ η(1/|w|²) = u²(η' + uη'') with u = 1/|w|²
            scale = np.where(chart == 0, 1.0, u ** 2)
            value = value + np.where(active, self.bump * scale * radial, 0.0)
        return value

    def eigenvalue(self, chart, coord):
        """Eigenvalue of (i/2)∂∂̄φ relative to ω."""
        return self.ddbar(chart, coord) / self.metric(coord)

    def radial_eigenvalue(self, u):
        """λ as a function of u = |z|², the same in both charts."""
        value = self.degree + np.zeros_like(np.asarray(u, dtype=np.float64))
        if self.bump:
            value = value + self.bump * bump_curvature_profile(u)
        return value

    def degenerate_band(self, eps: float) -> tuple:
        """Edges (u₋, u₊) of the annulus where λ < eps around the bump minimum, or () when λ stays above eps."""
        if not self.bump:
            return ()
        u_star = bump_minimum()
        if self.radial_eigenvalue(u_star) >= eps:
            return ()

        def excess(u):
            return float(self.radial_eigenvalue(u)) - eps

        lower = optimize.bisect(excess, BUMP_CENTER - BUMP_RADIUS, u_star, xtol=1e-15)
        upper = optimize.bisect(excess, u_star, BUMP_CENTER + BUMP_RADIUS, xtol=1e-15)
        return lower, upper

    def transition(self, z):
        return np.asarray(z, dtype=np.complex128) ** self.degree


@dataclass(frozen=True)
class ModelGeometry:
    """A catalog geometry: a product of one or two CP¹ factors."""

    name: str
    params: dict
    factors: tuple
    charts: tuple = field(default=('z', 'w = 1/z'))

    @property
    def n(self) -> int:
        return len(self.factors)

    @property
    def degrees(self) -> tuple:
        return tuple(f.degree for f in self.factors)

    @property
    def label(self) -> str:
        args = ','.join(f'{v:g}' if isinstance(v, float) else str(v) for v in self.params.values())
        return f'{self.name}({args})'

    def metric(self, points):
        """Diagonal metric densities per factor, shape (N, n)."""
        return np.stack([f.metric(p.coord) for f, p in zip(self.factors, points)], axis=-1)

    def weight(self, points):
        return sum(f.weight(p.chart, p.coord) for f, p in zip(self.factors, points))

    def factor_points(self, points) -> tuple:
        """Per-factor ChartPoints; a bare ChartPoints is accepted on a curve."""
        points = (points,) if isinstance(points, ChartPoints) else tuple(points)
        if len(points) != self.n:
            raise ChartError(f'{self.label} needs {self.n} factor coordinates, got {len(points)}')
        if len({len(p) for p in points}) > 1:
            raise ChartError(f'Factor point batches differ in length: {[len(p) for p in points]}')
        return points

    def __str__(self):
        return self.label


def _positive_int(params, key, name):
    value = params.get(key)
    if isinstance(value, bool) or not isinstance(value, (int, np.integer)) or int(value) != value:
        raise CatalogError(f'{name} parameter {key!r} must be an integer, got {value!r}')
    if value < 0 or (value == 0 and name != CatalogName.FS_CP1):
        raise CatalogError(f'{name} needs a positive {key!r}, got {value}')
    return int(value)


def _check_keys(name, params, allowed):
    unknown = set(params) - set(allowed)
    missing = set(allowed) - set(params)
    if unknown or missing:
        raise CatalogError(f'{name} takes parameters {sorted(allowed)}; '
                           f'unknown {sorted(unknown)}, missing {sorted(missing)}')


def build_geometry(name: str, params: dict | None = None) -> ModelGeometry:
    """Build a catalog geometry and verify its chart transition on sampled overlap points."""
    params = dict(params or {})
    if name not in CatalogName.values:
        raise CatalogError(f'Unknown catalog geometry {name!r}; choose from {CatalogName.values}')

    if name == CatalogName.FS_CP1:
        _check_keys(name, params, ('d',))
        factors = (CurveFactor(_positive_int(params, 'd', name)),)
    elif name == CatalogName.PERTURBED_CP1:
        _check_keys(name, params, ('d', 't'))
        d = _positive_int(params, 'd', name)
        t = float(params['t'])
        t_max = perturbation_limit(d)
        if not 0.0 <= t <= t_max:
            raise CatalogError(f'PERTURBED_CP1 amplitude t={t} outside [0, t_max={t_max:.12g}] '
                               f'(semi-positivity would fail)')
        params['t'] = t
        factors = (CurveFactor(d, t),)
    elif name == CatalogName.NEG_CP1:
        _check_keys(name, params, ('m',))
        factors = (CurveFactor(-_positive_int(params, 'm', name)),)
    else:
        _check_keys(name, params, ('a', 'b'))
        factors = (CurveFactor(_positive_int(params, 'a', name)),
                   CurveFactor(-_positive_int(params, 'b', name)))

    geom = ModelGeometry(name=str(name), params=params, factors=factors)
    residual = chart_transition_residual(geom, k=1)
    if residual > 1e-10:
        raise CatalogError(f'{geom.label}: chart transition mismatch {residual:.3e}')
    logger.info(f'Built geometry {geom.label} (n={geom.n}, degrees={geom.degrees})')
    return geom


def chart_transition_residual(geom: ModelGeometry, k: int = 1, points: ChartPoints | None = None,
                              size: int = 200) -> float:
    """Max relative mismatch of |s|²e^{−kφ} across the charts for s = z^j, all j ≤ k·|degree|.

    In chart 1 the same section reads s₁(w) = s₀(1/w)·t₀₁(1/w)^{−k}.
    """
    if points is None:
        rng = np.random.default_rng(12345)
        r = np.exp(rng.uniform(np.log(0.5), np.log(2.0), size))
        points = ChartPoints(np.zeros(size, dtype=np.int64), r * np.exp(1j * rng.uniform(0, 2 * np.pi, size)))
    z = points.in_chart(0)
    w = 1.0 / z
    worst = 0.0
    for f in geom.factors:
        top = k * abs(f.degree)
        for j in range(top + 1):
            s0 = z ** j
            s1 = s0 * f.transition(z) ** (-k)
            log0 = np.log(np.abs(s0) ** 2) - k * f.weight(0, z)
            log1 = np.log(np.abs(s1) ** 2) - k * f.weight(1, w)
            worst = max(worst, float(np.max(np.abs(np.expm1(log1 - log0)))))
    return worst
