"""
Eigencontour basis service.

Fits the basis as the leading left singular vectors of the raw contour
matrix (no mean subtraction) and maps contours to and from the
M-dimensional coefficient space:

    A = U S V^T,   c = U_M^T r,   r~ = max(U_M c, 0)
"""

from typing import Any, Dict, Optional

import numpy as np

from models.basis import CoefficientVector, ContourMatrix, EigenBasis
from utils.errors import DimensionMismatch, EmptyMatrix, InvalidM
from utils.logger import get_logger

logger = get_logger(__name__)


def _fix_signs(U: np.ndarray) -> np.ndarray:
    """Flip each column so its largest-magnitude entry is positive."""
    pivots = np.argmax(np.abs(U), axis=0)
    signs = np.sign(U[pivots, np.arange(U.shape[1])])
    signs[signs == 0] = 1.0
    return U * signs


def fit_eigenbasis(A: ContourMatrix, M: int, angle0: float = 0.0,
                   provenance: Optional[Dict[str, Any]] = None) -> EigenBasis:
    """
    Best rank-M basis of a contour matrix.

    Returns the first M left singular vectors (sign-normalized) and all
    min(N, L) singular values. Singular values below the numerical rank
    tolerance sigma_1 * max(N, L) * eps are stored as exact zeros.

    Args:
        A: N x L contour matrix
        M: Basis dimension, 1 <= M <= min(N, L)
        angle0: Angular convention of the contours, recorded in the basis
        provenance: Dataset id, group key and creation metadata

    Returns:
        EigenBasis: Orthonormal N x M basis

    Raises:
        EmptyMatrix: If A has no columns
        InvalidM: If M is out of range
    """
    if A.L == 0:
        raise EmptyMatrix("Cannot fit a basis on an empty contour matrix")
    limit = min(A.N, A.L)
    if M < 1 or M > limit:
        raise InvalidM(f"M={M} must lie in [1, {limit}] for a {A.N}x{A.L} matrix",
                       group_key=A.group_key)

    U, sigma, _ = np.linalg.svd(A.data, full_matrices=False)
    U = _fix_signs(U[:, :M])
    sigma = sigma.copy()
    if sigma.size:
        sigma[sigma <= sigma[0] * max(A.N, A.L) * np.finfo(float).eps] = 0.0

    meta = {'group_key': A.group_key, 'num_contours': A.L}
    meta.update(provenance or {})
    basis = EigenBasis(U=U, singular_values=sigma, angle0=angle0, provenance=meta)
    logger.info(f"Fitted {basis} from {A.L} contours (energy kept {energy_profile(basis)[M - 1]:.4f})")
    return basis


def truncate(basis: EigenBasis, M: int) -> EigenBasis:
    """
    Leading M columns of an existing basis.

    Raises:
        InvalidM: If M exceeds the stored dimension
    """
    if M < 1 or M > basis.M:
        raise InvalidM(f"Cannot truncate a basis of dimension {basis.M} to M={M}")
    return EigenBasis(U=basis.U[:, :M], singular_values=basis.singular_values,
                      angle0=basis.angle0, provenance=dict(basis.provenance))


def energy_profile(basis: EigenBasis) -> np.ndarray:
    """Cumulative energy fraction sum_{k<=m} sigma_k^2 / sum sigma_k^2, m = 1..len(sigma)."""
    energy = np.square(basis.singular_values)
    total = energy.sum()
    if total == 0:
        return np.ones_like(energy)
    return np.cumsum(energy) / total


def _as_radii(r: Any) -> np.ndarray:
    if hasattr(r, 'radii'):
        return np.asarray(r.radii, dtype=float)
    return np.asarray(r, dtype=float)


def encode(r: Any, basis: EigenBasis) -> CoefficientVector:
    """
    Coefficients c = U_M^T r.

    This is the orthogonal projection, i.e. the least-squares optimum of
    min_c ||U_M c - r||.

    Args:
        r: Length-N radii (array or StarContour)
        basis: Eigencontour basis

    Returns:
        CoefficientVector: Length-M coefficients

    Raises:
        DimensionMismatch: If len(r) != basis.N
    """
    radii = _as_radii(r).reshape(-1)
    if radii.size != basis.N:
        raise DimensionMismatch(f"Contour has {radii.size} samples, basis expects {basis.N}")
    return CoefficientVector(c=basis.U.T @ radii, basis_id=basis.basis_id)


def encode_batch(R: np.ndarray, basis: EigenBasis) -> np.ndarray:
    """Rows of R (L x N) to coefficient rows (L x M)."""
    R = np.atleast_2d(np.asarray(R, dtype=float))
    if R.shape[1] != basis.N:
        raise DimensionMismatch(f"Contours have {R.shape[1]} samples, basis expects {basis.N}")
    return R @ basis.U


def decode(c: Any, basis: EigenBasis, clamp: bool = True) -> np.ndarray:
    """
    Radii r~ = max(U_M c, 0).

    Args:
        c: Length-M coefficients (array or CoefficientVector)
        basis: Eigencontour basis
        clamp: Truncate negative radii to 0; False returns U_M c

    Returns:
        np.ndarray: Length-N radii

    Raises:
        DimensionMismatch: If len(c) != basis.M
    """
    coeffs = np.asarray(c.c if isinstance(c, CoefficientVector) else c, dtype=float).reshape(-1)
    if coeffs.size != basis.M:
        raise DimensionMismatch(f"Coefficient vector has {coeffs.size} entries, basis has M={basis.M}")
    radii = basis.U @ coeffs
    return np.maximum(radii, 0.0) if clamp else radii


def decode_batch(C: np.ndarray, basis: EigenBasis, clamp: bool = True) -> np.ndarray:
    """Coefficient rows (L x M) to radii rows (L x N)."""
    C = np.atleast_2d(np.asarray(C, dtype=float))
    if C.shape[1] != basis.M:
        raise DimensionMismatch(f"Coefficients have {C.shape[1]} entries, basis has M={basis.M}")
    R = C @ basis.U.T
    return np.maximum(R, 0.0) if clamp else R


def rank_m_reconstruct(A: ContourMatrix, basis: EigenBasis, clamp: bool = True) -> ContourMatrix:
    """
    Column-wise decode(encode(column)).

    With clamp=False the result is the projection U_M U_M^T A whose
    Frobenius error equals sqrt(sum_{k>M} sigma_k^2) when the basis was
    fitted on A.

    Raises:
        DimensionMismatch: If A.N != basis.N
    """
    if A.N != basis.N:
        raise DimensionMismatch(f"Matrix has N={A.N}, basis expects {basis.N}")
    projected = basis.U @ (basis.U.T @ A.data)
    if clamp:
        projected = np.maximum(projected, 0.0)
    return ContourMatrix(data=projected, group_key=A.group_key, ids=A.ids,
                         require_nonnegative=clamp)


def reconstruction_error(A: ContourMatrix, basis: EigenBasis) -> float:
    """Pre-clamp Frobenius error ||A - U_M U_M^T A||_F."""
    if A.N != basis.N:
        raise DimensionMismatch(f"Matrix has N={A.N}, basis expects {basis.N}")
    residual = A.data - basis.U @ (basis.U.T @ A.data)
    return float(np.linalg.norm(residual))
