"""Section spaces H⁰(X, L^k) and harmonic (0,1)-form spaces H¹(X, L^k).

Every catalog factor contributes a one-variable basis:

    degree d ≥ 0, M = k·d    s_j = z^j,                          j = 0..M
    degree −m < 0, M = k·m   u_j = z̄^j(1+|z|²)^{−M} dz̄,          j = 0..M−2

and the product geometry uses the Künneth products s_i(z₁)·u_j(z₂). Values are
always weighted by e^{−kφ/2} and written in the orthonormal coframe, which in
unit homogeneous coordinates (a, b) gives

    s_j ↦ a^j b^{M−j},    u_j ↦ conj(a^j b^{M−2−j})

up to a per-point phase that cancels in every pairing. All entries stay O(1)
at any k.
"""
import logging
from dataclasses import dataclass
from functools import cached_property, reduce

import numpy as np
from django.conf import settings
from scipy import linalg

from toeplitz_lab.apps.geometry.catalog import CatalogName, CurveFactor, ModelGeometry, bump
from toeplitz_lab.apps.geometry.points import ChartPoints
from toeplitz_lab.apps.geometry.quadrature import QuadratureGrid, build_grid
from toeplitz_lab.exceptions import CatalogError, NonFiniteError, SingularGramError

logger = logging.getLogger(__name__)

# form degree supported by each catalog geometry
SUPPORTED_DEGREE = {
    CatalogName.FS_CP1: 0,
    CatalogName.PERTURBED_CP1: 0,
    CatalogName.NEG_CP1: 1,
    CatalogName.PRODUCT_CP1xCP1: 1,
}


@dataclass(frozen=True)
class FactorBasis:
    """Monomial sections (degree ≥ 0) or harmonic u_j forms (degree < 0) of one factor at power k."""

    factor: CurveFactor
    k: int

    @property
    def anti(self) -> bool:
        return self.factor.degree < 0

    @property
    def total_degree(self) -> int:
        return self.k * abs(self.factor.degree)

    @property
    def top(self) -> int:
        """Exponent sum of a^j b^{top−j}."""
        return self.total_degree - 2 if self.anti else self.total_degree

    @property
    def size(self) -> int:
        return max(self.top + 1, 0)

    @property
    def labels(self) -> list:
        if self.anti:
            return [f'zbar^{j}(1+|z|^2)^-{self.total_degree} dzbar' for j in range(self.size)]
        return [f'z^{j}' for j in range(self.size)]

    def values(self, points: ChartPoints) -> np.ndarray:
        """Weighted values, shape (N, size)."""
        if self.size == 0:
            return np.zeros((len(points), 0), dtype=np.complex128)
        h = points.homogeneous
        a_pow = np.vander(h[:, 0], self.top + 1, increasing=True)
        b_pow = np.vander(h[:, 1], self.top + 1, increasing=True)
        values = a_pow * b_pow[:, ::-1]
        if self.anti:
            values = np.conj(values)
        if self.factor.bump:
            eta = bump(points.modulus_squared)[0]
            values = values * np.exp(-0.5 * self.k * self.factor.bump * eta)[:, None]
        return values

    def harmonicity_residual(self, points: ChartPoints) -> float:
        """Max normalized |∂_ζ(u·e^{−kφ})| over the basis, evaluated in each point's own chart.

        With u = ζ̄^e(1+t)^{−M} and e^{−kφ} = (1+t)^M the two product-rule terms
        are evaluated separately; their sum vanishes for a harmonic element.
        """
        if not self.anti or self.size == 0:
            return 0.0
        m = self.total_degree
        j = np.arange(self.size)
        # in chart w = 1/z the same element reads w̄^{M−2−j}(1+|w|²)^{−M}dw̄ up to a unimodular factor
        e = np.where(points.chart[:, None] == 0, j[None, :], self.top - j[None, :])
        zb = np.conj(points.coord)[:, None]
        t = np.abs(points.coord)[:, None] ** 2
        u = zb ** e * (1.0 + t) ** -m
        du = -m * zb ** (e + 1) * (1.0 + t) ** (-m - 1)
        g = (1.0 + t) ** m
        dg = m * zb * (1.0 + t) ** (m - 1)
        num = np.abs(du * g + u * dg)
        den = np.abs(du * g) + np.abs(u * dg)
        mask = den > 0
        return float(np.max(num[mask] / den[mask], initial=0.0))


def pairing_matrix(values: tuple, density) -> np.ndarray:
    """Σ_x density(x)·conj(v_i(x))·v_j(x) for tensor-product values v(x₁,x₂) = v₁(x₁)⊗v₂(x₂).

    `values` holds one (N_a, d_a) array per factor and `density` has shape
    (N₁, …). Rows and columns follow the Kronecker order of the factor bases.
    """
    if len(values) == 1:
        v, = values
        return v.conj().T @ (np.asarray(density)[:, None] * v)
    v1, v2 = values
    d1, d2 = v1.shape[1], v2.shape[1]
    a1 = (v1.conj()[:, :, None] * v1[:, None, :]).reshape(len(v1), d1 * d1)
    a2 = (v2.conj()[:, :, None] * v2[:, None, :]).reshape(len(v2), d2 * d2)
    m = a1.T @ (np.asarray(density) @ a2)
    return m.reshape(d1, d1, d2, d2).transpose(0, 2, 1, 3).reshape(d1 * d2, d1 * d2)


def hermitian_part(matrix: np.ndarray) -> np.ndarray:
    return 0.5 * (matrix + matrix.conj().T)


def orthonormalize(gram: np.ndarray) -> np.ndarray:
    """C with CᴴGC = I from the pivoted LDLᴴ factorization of the equilibrated Gram matrix.

    G is first scaled to unit diagonal, G̃ = SGS; then G̃ = L D Lᴴ and
    C = S·L^{−H}D^{−1/2}. D may carry 2×2 pivot blocks, so its inverse square
    root comes from a Hermitian eigen-decomposition.
    """
    gram = np.asarray(gram, dtype=np.complex128)
    if gram.shape[0] == 0:
        return np.zeros((0, 0), dtype=np.complex128)
    diagonal = np.real(np.diag(gram))
    if np.any(diagonal <= 0):
        raise SingularGramError('Gram matrix has a basis element of zero norm')
    scale = diagonal ** -0.5
    equilibrated = scale[:, None] * gram * scale[None, :]
    eigenvalues = linalg.eigvalsh(equilibrated)
    rtol = settings.TOEPLITZ_LAB['GRAM_SINGULAR_RTOL']
    if eigenvalues[0] <= rtol * eigenvalues[-1]:
        raise SingularGramError(f'Gram matrix is numerically singular: equilibrated eigenvalues in '
                                f'[{eigenvalues[0]:.3e}, {eigenvalues[-1]:.3e}]')
    logger.info(f'Gram condition number {eigenvalues[-1] / eigenvalues[0]:.6e} after equilibration, '
                f'diagonal range {diagonal.max() / diagonal.min():.3e} (dim {gram.shape[0]})')

    lu, d, perm = linalg.ldl(equilibrated, lower=True, hermitian=True)
    d_values, d_vectors = linalg.eigh(d)
    d_inv_sqrt = (d_vectors / np.sqrt(d_values)) @ d_vectors.conj().T
    # lu[perm] is lower triangular
    solved = linalg.solve_triangular(lu[perm], d_inv_sqrt, lower=True, trans='C')
    onb = np.empty_like(solved)
    onb[perm] = solved
    return scale[:, None] * onb


@dataclass(frozen=True)
class HarmonicSpace:
    """Basis, Gram matrix and orthonormalizing factor of H^q(X, L^k).

    The Gram matrix and C are Kronecker products of per-factor matrices, so a
    product space is never assembled node by node.
    """

    geom: ModelGeometry
    k: int
    q: int
    component: tuple
    bases: tuple
    factor_gram: tuple
    factor_onb: tuple
    resolution: tuple

    @property
    def n(self) -> int:
        return self.geom.n

    @property
    def dim(self) -> int:
        return int(np.prod([b.size for b in self.bases]))

    @cached_property
    def gram(self) -> np.ndarray:
        return reduce(np.kron, self.factor_gram)

    @cached_property
    def onb_factor(self) -> np.ndarray:
        return reduce(np.kron, self.factor_onb)

    @property
    def ansatz(self) -> list:
        labels = [b.labels for b in self.bases]
        return reduce(lambda left, right: [f'{x} * {y}' for x in left for y in right], labels)

    def basis_values(self, points) -> tuple:
        """Raw weighted basis values per factor at paired points."""
        return tuple(b.values(p) for b, p in zip(self.bases, self.geom.factor_points(points)))

    def onb_values(self, points) -> tuple:
        """Orthonormal-basis values per factor at paired points."""
        return tuple(v @ c for v, c in zip(self.basis_values(points), self.factor_onb))

    def __str__(self):
        return f'H^{self.q}({self.geom.label}, k={self.k})'


def expected_dimension(geom: ModelGeometry, k: int) -> int:
    """Riemann-Roch on positive factors (kd+1), Serre duality on negative ones (km−1), Künneth for products."""
    dim = 1
    for d in geom.degrees:
        dim *= k * d + 1 if d >= 0 else max(k * -d - 1, 0)
    return dim


def _check_power(k):
    if isinstance(k, bool) or not isinstance(k, (int, np.integer)) or k < 1:
        raise CatalogError(f'Tensor power k must be a positive integer, got {k!r}')
    return int(k)


def gram_matrix(space: HarmonicSpace, grid: QuadratureGrid) -> np.ndarray:
    """G_ij = (ψ_j, ψ_i) = Σ_nodes w·conj(ψ_i)ψ_j, symmetrized exactly."""
    grams = factor_grams(space.bases, grid)
    return reduce(np.kron, grams)


def factor_grams(bases: tuple, grid: QuadratureGrid) -> tuple:
    grams = []
    for basis, factor_grid in zip(bases, grid.factors):
        gram = pairing_matrix((basis.values(factor_grid.points),), factor_grid.weight)
        if not np.all(np.isfinite(gram)):
            raise NonFiniteError(f'Gram matrix of {basis.labels[:1]}... has non-finite entries')
        grams.append(hermitian_part(gram))
    return tuple(grams)


def build_space(geom: ModelGeometry, k: int, q: int, grid: QuadratureGrid | None = None) -> HarmonicSpace:
    """Build the section (q = 0) or harmonic-form (q = 1) space and orthonormalize it on `grid`."""
    k = _check_power(k)
    supported = SUPPORTED_DEGREE.get(geom.name)
    if supported != q:
        raise CatalogError(f'{geom.label} supports q={supported} only, got q={q}')
    bases = tuple(FactorBasis(f, k) for f in geom.factors)
    component = tuple(a for a, b in enumerate(bases) if b.anti)

    grid = grid or build_grid(geom)
    grams = factor_grams(bases, grid)
    onbs = tuple(orthonormalize(g) for g in grams)
    space = HarmonicSpace(geom=geom, k=k, q=q, component=component, bases=bases,
                          factor_gram=grams, factor_onb=onbs, resolution=grid.resolution)
    logger.info(f'Built {space}: dim={space.dim}, component={component}, resolution={grid.resolution}')
    return space
