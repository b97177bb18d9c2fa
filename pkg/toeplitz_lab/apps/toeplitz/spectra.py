"""Eigenvalues of Toeplitz matrices, counting functions and spectral measures."""
import logging
from dataclasses import dataclass

import numpy as np
from django.conf import settings
from scipy import linalg

from toeplitz_lab.apps.toeplitz.operators import ToeplitzMatrix
from toeplitz_lab.exceptions import NonHermitianError, NumericalError

logger = logging.getLogger(__name__)

RESIDUAL_PAIRS = 10
RESIDUAL_RTOL = 1e-9


def _jacobi_rotation(a_pp, a_qq, a_pq):
    """2×2 unitary J with (JᴴAJ)_pq = 0 for the Hermitian block [[a_pp, a_pq], [conj(a_pq), a_qq]].

    The phase of a_pq is moved onto column q first, leaving a real symmetric
    block for the classical rotation.
    """
    r = abs(a_pq)
    phase = a_pq / r
    tau = (a_qq - a_pp) / (2.0 * r)
    t = (1.0 if tau >= 0 else -1.0) / (abs(tau) + np.sqrt(1.0 + tau * tau))
    c = 1.0 / np.sqrt(1.0 + t * t)
    s = t * c
    return np.array([[c, s], [-s * np.conj(phase), c * np.conj(phase)]])


def jacobi_eigh(matrix: np.ndarray, tol: float | None = None, max_sweeps: int | None = None) -> tuple:
    """Cyclic Jacobi eigen-decomposition of a Hermitian matrix.

    Sweeps rotate every (p, q) pair above the threshold until the off-diagonal
    Frobenius mass drops below tol·‖A‖_F. Returns ascending eigenvalues and the
    matching orthonormal eigenvectors as columns.
    """
    conf = settings.TOEPLITZ_LAB
    tol = conf['JACOBI_TOL'] if tol is None else tol
    max_sweeps = conf['JACOBI_MAX_SWEEPS'] if max_sweeps is None else max_sweeps

    a = np.array(matrix, dtype=np.complex128)
    dim = a.shape[0]
    vectors = np.eye(dim, dtype=np.complex128)
    norm = np.linalg.norm(a)
    if dim > 1 and norm > 0:
        target = tol * norm
        threshold = target / dim
        for sweep in range(max_sweeps):
            off = np.linalg.norm(a - np.diag(np.diag(a)))
            if off < target:
                break
            for p in range(dim - 1):
                for q in range(p + 1, dim):
                    if abs(a[p, q]) <= threshold:
                        continue
                    rot = _jacobi_rotation(a[p, p].real, a[q, q].real, a[p, q])
                    pq = [p, q]
                    a[:, pq] = a[:, pq] @ rot
                    a[pq, :] = rot.conj().T @ a[pq, :]
                    a[p, q] = a[q, p] = 0.0
                    vectors[:, pq] = vectors[:, pq] @ rot
        else:
            raise NumericalError(f'Jacobi eigensolver did not converge in {max_sweeps} sweeps (dim {dim})')
        logger.debug(f'Jacobi converged after {sweep} sweeps (dim {dim})')

    eigenvalues = np.real(np.diag(a))
    order = np.argsort(eigenvalues, kind='stable')
    return eigenvalues[order], vectors[:, order]


def check_hermitian(matrix: np.ndarray):
    tol = settings.TOEPLITZ_LAB['HERMITIAN_TOL']
    scale = max(np.linalg.norm(matrix), 1.0)
    defect = np.linalg.norm(matrix - matrix.conj().T)
    if not np.isfinite(defect):
        raise NumericalError('Matrix has non-finite entries')
    if defect > tol * scale:
        raise NonHermitianError(f'Matrix is not Hermitian: ‖T − Tᴴ‖ = {defect:.3e}')


def eigen_decomposition(t: ToeplitzMatrix, method: str = 'lapack') -> tuple:
    """Ascending eigenvalues and eigenvectors, with residuals checked on sampled pairs."""
    matrix = t.matrix
    check_hermitian(matrix)
    if t.dim == 0:
        return np.zeros(0), np.zeros((0, 0), dtype=np.complex128)
    if method == 'lapack':
        eigenvalues, vectors = linalg.eigh(matrix)
    elif method == 'jacobi':
        eigenvalues, vectors = jacobi_eigh(matrix)
    else:
        raise ValueError(f'Unknown eigensolver {method!r}')

    picks = np.unique(np.linspace(0, t.dim - 1, min(RESIDUAL_PAIRS, t.dim)).astype(int))
    residual = np.linalg.norm(matrix @ vectors[:, picks] - vectors[:, picks] * eigenvalues[picks], axis=0)
    bound = RESIDUAL_RTOL * max(np.linalg.norm(matrix, 2), np.finfo(float).tiny)
    if np.max(residual) > bound:
        raise NumericalError(f'Eigenpair residual {np.max(residual):.3e} exceeds {bound:.3e} for T[{t.symbol_id}]')
    return eigenvalues, vectors


@dataclass(frozen=True)
class SpectralMeasure:
    """Eigenvalues τ_i of a Toeplitz matrix, each carrying mass k^{−n}."""

    eigs: np.ndarray
    k: int
    n: int

    @property
    def weight(self) -> float:
        return float(self.k) ** -self.n

    @property
    def dim(self) -> int:
        return len(self.eigs)

    @property
    def total_mass(self) -> float:
        return self.weight * self.dim


def spectrum(t: ToeplitzMatrix, method: str = 'lapack') -> SpectralMeasure:
    eigenvalues, _ = eigen_decomposition(t, method)
    return SpectralMeasure(eigs=eigenvalues, k=t.k, n=t.n)


def counting(sm: SpectralMeasure, gamma: float) -> tuple:
    """(#{τ > γ}, #{τ < γ}); eigenvalues equal to γ count in neither."""
    return int(np.sum(sm.eigs > gamma)), int(np.sum(sm.eigs < gamma))


def safe_level(sm: SpectralMeasure, gamma: float, atol: float = 1e-12) -> float:
    """γ, or the midpoint of the gap above an eigenvalue that collides with it."""
    eigs = sm.eigs
    hits = np.flatnonzero(np.abs(eigs - gamma) <= atol)
    if len(hits) == 0:
        return float(gamma)
    top = hits[-1]
    upper = eigs[top + 1] if top + 1 < len(eigs) else eigs[top] + 1.0
    level = 0.5 * (eigs[top] + upper)
    logger.debug(f'Counting level {gamma} hits an eigenvalue, moved to {level}')
    return float(level)


def intermediate_fraction(sm: SpectralMeasure, eps: float) -> float:
    """k^{−n}#{τ ∈ (ε, 1−ε)}."""
    return sm.weight * int(np.sum((sm.eigs > eps) & (sm.eigs < 1.0 - eps)))
