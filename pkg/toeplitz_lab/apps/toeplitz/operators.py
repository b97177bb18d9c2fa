"""Scalar and super Toeplitz matrices in the orthonormal basis of a HarmonicSpace.

Every basis element of H^q is a scalar times the same ē^{J₀}, so the super
pairing (T_fα, β) = c_q(i/2)ⁿ∫ f∧α∧β†∧e^{ω′−kφ} of a diagonal symbol
f = Σ_J f_J E_J reduces node by node to the scalar pairing with
h = Σ_J f_J R_J, where R_J comes from the wedge/Berezin pipeline once per
(n, q, J₀).
"""
import logging
from dataclasses import dataclass

import numpy as np

from toeplitz_lab.apps.geometry.quadrature import QuadratureGrid
from toeplitz_lab.apps.spaces.sections import HarmonicSpace, hermitian_part, pairing_matrix
from toeplitz_lab.apps.superform.forms import pairing_table
from toeplitz_lab.apps.superform.symbols import SuperSymbol
from toeplitz_lab.exceptions import FormAlgebraError, NonFiniteError, NonHermitianError, SpaceError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ToeplitzMatrix:
    matrix: np.ndarray
    symbol_id: str
    k: int
    q: int
    n: int

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def normalization(self) -> float:
        """k^{−n}, the weight of one eigenvalue in the spectral measure."""
        return float(self.k) ** -self.n


def _real_samples(f, grid: QuadratureGrid) -> np.ndarray:
    f = np.asarray(f)
    if np.iscomplexobj(f):
        if np.any(f.imag != 0):
            raise NonHermitianError('Scalar symbol samples must be real')
        f = f.real
    f = np.broadcast_to(np.asarray(f, dtype=np.float64), grid.shape)
    if not np.all(np.isfinite(f)):
        raise NonFiniteError('Symbol samples are not finite')
    return f


def assemble(space: HarmonicSpace, f, grid: QuadratureGrid, symbol_id: str = 'f') -> ToeplitzMatrix:
    """T_ij = Σ_nodes w·f·conj(ψ̂_i)ψ̂_j, symmetrized."""
    f = _real_samples(f, grid)
    matrix = pairing_matrix(space.onb_values(grid.nodes), grid.weights * f)
    if not np.all(np.isfinite(matrix)):
        raise NonFiniteError(f'Toeplitz matrix of {symbol_id} on {space} has non-finite entries')
    logger.debug(f'Assembled T[{symbol_id}] on {space}, dim {space.dim}')
    return ToeplitzMatrix(matrix=hermitian_part(matrix), symbol_id=symbol_id, k=space.k, q=space.q, n=space.n)


def super_weights(space: HarmonicSpace, symbol: SuperSymbol, grid: QuadratureGrid) -> np.ndarray:
    """h = Σ_J f_J·R_J over the grid."""
    if symbol.n != space.n:
        raise FormAlgebraError(f'Symbol of dimension {symbol.n} on a {space.n}-dimensional space')
    table = pairing_table(space.n, space.q, space.component)
    h = np.zeros(grid.shape)
    for J, values in symbol.sample(grid).items():
        if table[J]:
            h = h + table[J] * values
    return h


def assemble_super(space: HarmonicSpace, symbol: SuperSymbol, grid: QuadratureGrid,
                   symbol_id: str = 'f') -> ToeplitzMatrix:
    return assemble(space, super_weights(space, symbol, grid), grid, symbol_id)


def trace(t: ToeplitzMatrix) -> float:
    return float(np.real(np.trace(t.matrix)))


def trace_product(tf: ToeplitzMatrix, tg: ToeplitzMatrix) -> float:
    """Tr(T_f·T_g) without forming the product."""
    if tf.matrix.shape != tg.matrix.shape:
        raise SpaceError(f'Toeplitz matrices of dimension {tf.dim} and {tg.dim} live on different spaces')
    return float(np.real(np.sum(tf.matrix * tg.matrix.T)))


def concentration_defect(t: ToeplitzMatrix) -> float:
    """k^{−n}(Tr T − Tr T²); zero iff T is a projection."""
    return t.normalization * (trace(t) - trace_product(t, t))
