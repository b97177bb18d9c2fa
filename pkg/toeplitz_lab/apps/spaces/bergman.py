"""Bergman function, form and kernel of a HarmonicSpace.

Orthonormal basis values factor over the product, ψ̂(x₁,x₂) = ψ̂¹(x₁)⊗ψ̂²(x₂),
so B = B¹·B² and K = K¹·K², and grid-wide quantities are outer products of
per-factor arrays.

A basis element of H^q is a scalar times ē^{J₀} with J₀ = `space.component`,
so the Bergman form is B times the constant form c_q·ē^{J₀}∧(ē^{J₀})† = E_{J₀}.
A direction θ is given by its coefficients on the (0,q) monomials ē^J, J
ordered as itertools.combinations(range(n), q).
"""
import itertools
import logging
from dataclasses import dataclass
from functools import reduce

import numpy as np
from django.conf import settings

from toeplitz_lab.apps.geometry.curvature import CurvatureField, curvature_field
from toeplitz_lab.apps.geometry.points import geodesic_distance, sample_uniform
from toeplitz_lab.apps.geometry.quadrature import QuadratureGrid
from toeplitz_lab.apps.spaces.sections import HarmonicSpace, factor_grams
from toeplitz_lab.apps.superform.forms import GradedForm, dagger, pairing_sign, wedge
from toeplitz_lab.exceptions import NoExtremalError, SpaceError

logger = logging.getLogger(__name__)


def _outer(arrays) -> np.ndarray:
    return reduce(np.multiply.outer, arrays)


def evaluate(space: HarmonicSpace, points) -> np.ndarray:
    """Weighted orthonormal-basis values at paired points, shape (N, dim)."""
    values = space.onb_values(points)
    full = values[0]
    for v in values[1:]:
        full = (full[:, :, None] * v[:, None, :]).reshape(len(full), -1)
    return full


def bergman_at(space: HarmonicSpace, points) -> np.ndarray:
    """B(x) = Σ|ψ̂_i(x)|² at paired points."""
    return np.prod([np.sum(np.abs(v) ** 2, axis=1) for v in space.onb_values(points)], axis=0)


def bergman_function(space: HarmonicSpace, grid: QuadratureGrid) -> np.ndarray:
    """B samples over the grid, shape grid.shape."""
    factors = [np.sum(np.abs(v) ** 2, axis=1) for v in space.onb_values(grid.nodes)]
    return _outer(factors) if len(factors) > 1 else factors[0]


def unit_form(space: HarmonicSpace) -> GradedForm:
    """c_q·ē^{J₀}∧(ē^{J₀})†, the Bergman form per unit of B."""
    w = GradedForm.monomial(space.n, anti=space.component)
    return wedge(w, dagger(w)) * pairing_sign(space.q)


@dataclass(frozen=True)
class BergmanForm:
    """𝔅 = scale·unit over a grid, stored factorized."""

    scale: np.ndarray
    unit: GradedForm
    q: int

    def at(self, index) -> GradedForm:
        """The GradedForm at one node (flat or multi-index)."""
        index = np.unravel_index(index, self.scale.shape) if np.ndim(index) == 0 else tuple(index)
        return self.unit * self.scale[index]

    def component(self, holo=(), anti=()) -> np.ndarray:
        return self.scale * self.unit.component(holo, anti)

    def diagonal_component(self, indices) -> np.ndarray:
        return self.scale * self.unit.diagonal_component(indices)

    def trace(self) -> np.ndarray:
        """Σ_{|J|=q} coefficient of E_J; equals B."""
        blocks = sum(self.unit.diagonal_component(J) for J in _q_subsets(self.unit.n, self.q))
        return self.scale * float(np.real(blocks))


def _q_subsets(n: int, q: int) -> list:
    return list(itertools.combinations(range(n), q))


def bergman_form(space: HarmonicSpace, grid: QuadratureGrid) -> BergmanForm:
    """c_q·Σψ̂_i∧ψ̂_i†e^{−kφ}, collapsed to B·unit since every basis element is a scalar times ē^{J₀}."""
    return BergmanForm(scale=bergman_function(space, grid), unit=unit_form(space), q=space.q)


def bergman_kernel_norm2(space: HarmonicSpace, x, y) -> np.ndarray:
    """|K(x,y)|²e^{−kφ(x)−kφ(y)} at paired points x, y."""
    total = 1.0
    for vx, vy in zip(space.onb_values(x), space.onb_values(y)):
        total = total * np.abs(np.sum(vx * np.conj(vy), axis=1)) ** 2
    return total


@dataclass(frozen=True)
class BergmanData:
    """Bergman objects on one grid, with |K|² on a random subsample of node pairs."""

    B: np.ndarray
    Bform: BergmanForm
    pairs: np.ndarray
    offdiag: np.ndarray
    distance: np.ndarray


def bergman_data(space: HarmonicSpace, grid: QuadratureGrid, pair_budget: int | None = None,
                 seed: int | None = None) -> BergmanData:
    budget = pair_budget or settings.TOEPLITZ_LAB['PAIR_BUDGET']
    rng = np.random.default_rng(settings.SEED if seed is None else seed)
    pairs = rng.integers(0, grid.size, size=(budget, 2))
    x, y = (_grid_points(grid, pairs[:, c]) for c in (0, 1))
    b = bergman_function(space, grid)
    data = BergmanData(B=b, Bform=BergmanForm(b, unit_form(space), space.q), pairs=pairs,
                       offdiag=bergman_kernel_norm2(space, x, y), distance=geodesic_distance(x, y))
    logger.info(f'Bergman data for {space}: B in [{b.min():.6g}, {b.max():.6g}], {budget} kernel pairs')
    return data


def _grid_points(grid: QuadratureGrid, flat_index) -> tuple:
    index = np.unravel_index(flat_index, grid.shape)
    return tuple(f.points[i] for f, i in zip(grid.factors, index))


def direction_weight(space: HarmonicSpace, theta) -> float:
    """|θ_{J₀}|² for a direction θ normalized to unit length."""
    theta = _unit_direction(space, theta)
    return float(np.abs(theta[_q_subsets(space.n, space.q).index(space.component)]) ** 2)


def _unit_direction(space: HarmonicSpace, theta) -> np.ndarray:
    theta = np.atleast_1d(np.asarray(theta, dtype=np.complex128))
    expected = len(_q_subsets(space.n, space.q))
    if theta.shape != (expected,):
        raise SpaceError(f'Direction for (0,{space.q})-forms on a {space.n}-fold needs {expected} '
                         f'coefficients, got shape {theta.shape}')
    norm = np.linalg.norm(theta)
    if norm == 0:
        raise SpaceError('Direction θ must be nonzero')
    return theta / norm


def directional_bergman(space: HarmonicSpace, points, theta) -> np.ndarray:
    """B_θ(x) = sup |⟨α(x), θ⟩|² over unit α; here B(x)·|θ_{J₀}|²."""
    return bergman_at(space, points) * direction_weight(space, theta)


def extremal_section(space: HarmonicSpace, x, theta) -> np.ndarray:
    """Orthonormal coefficients of K_{x,θ}/‖K_{x,θ}‖ at a single point x."""
    theta = _unit_direction(space, theta)
    values = evaluate(space, x)
    if values.shape[0] != 1:
        raise SpaceError(f'extremal_section takes one point, got {values.shape[0]}')
    along = values[0] * np.conj(theta[_q_subsets(space.n, space.q).index(space.component)])
    b_theta = float(np.sum(np.abs(along) ** 2))
    if b_theta <= 1e-14 * max(float(np.sum(np.abs(values) ** 2)), 1e-300):
        raise NoExtremalError(f'B_θ vanishes at this point of {space.geom.label}; no extremal in direction θ')
    return np.conj(along) / np.sqrt(b_theta)


def reproducing_residual(space: HarmonicSpace, grid: QuadratureGrid, alpha, points=None,
                         size: int = 200) -> float:
    """max_y |α(y) − (α, K_y)| with (α, K_y) integrated on `grid`.

    Pass a grid other than the one the space was orthonormalized on; on the
    same grid the identity holds by construction.
    """
    alpha = np.asarray(alpha, dtype=np.complex128)
    if points is None:
        rng = np.random.default_rng(settings.SEED)
        points = tuple(sample_uniform(rng, size) for _ in range(space.n))
    gram = reduce(np.kron, [c.conj().T @ g @ c for g, c in zip(factor_grams(space.bases, grid), space.factor_onb)])
    values = evaluate(space, points)
    return float(np.max(np.abs(values @ (alpha - gram @ alpha)), initial=0.0))


def harmonicity_residual(space: HarmonicSpace, points) -> float:
    return max(b.harmonicity_residual(p) for b, p in zip(space.bases, space.geom.factor_points(points)))


def local_morse_ratio(space: HarmonicSpace, grid: QuadratureGrid, theta,
                      field: CurvatureField | None = None) -> float:
    """max over X(q) nodes of k^{−n}B_θ / ((1+5/k)·π^{−n}·⟨χ, θ∧θ†⟩·|det|)."""
    theta = _unit_direction(space, theta)
    field = field or curvature_field(space.geom, grid)
    n, q, k = space.n, space.q, space.k
    b_theta = bergman_function(space, grid) * direction_weight(space, theta)

    subsets = _q_subsets(n, q)
    directions = field.negative_directions(q)
    pairing = np.zeros(grid.shape)
    for J, coefficient in zip(subsets, theta):
        mask = np.ones(grid.shape, dtype=bool)
        for a in J:
            mask = mask & directions[a]
        pairing = pairing + np.abs(coefficient) ** 2 * mask

    bound = (1.0 + 5.0 / k) * pairing * field.det_abs / np.pi ** n
    stratum = field.stratum(q)
    numerator = b_theta[stratum] / k ** n
    denominator = bound[stratum]
    with np.errstate(divide='ignore', invalid='ignore'):
        ratio = np.where(denominator > 0, numerator / denominator, np.where(numerator > 0, np.inf, 0.0))
    worst = float(np.max(ratio, initial=0.0))
    logger.info(f'Local Morse ratio for {space}: {worst:.6g}')
    return worst
