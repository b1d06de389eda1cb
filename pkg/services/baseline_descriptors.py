"""
Contour descriptors behind one encode/decode contract.

- eigencontour: projection onto a fitted EigenBasis,
- centroidal: M radii subsampled from the profile, periodic linear
  interpolation back to N angles,
- chebyshev: least-squares Chebyshev series of the signature r(theta) with
  theta mapped to x = (theta - pi) / pi.

Every decode clamps radii at 0.
"""

from abc import ABC, abstractmethod
from typing import Any, Dict, Optional

import numpy as np
from numpy.polynomial import chebyshev

from models.basis import ContourMatrix, EigenBasis
from services import eigenbasis
from utils.errors import DimensionMismatch, IllConditioned, InvalidM, InvalidParams
from utils.logger import get_logger

logger = get_logger(__name__)

EIGENCONTOUR = 'eigencontour'
CENTROIDAL = 'centroidal'
CHEBYSHEV = 'chebyshev'
KINDS = (EIGENCONTOUR, CENTROIDAL, CHEBYSHEV)

# periodic interpolation needs a polygon of samples
CENTROIDAL_MIN_M = 3

# Aliases accepted on the command line
KIND_ALIASES = {
    'eigen': EIGENCONTOUR,
    'eigencontour': EIGENCONTOUR,
    'centroidal': CENTROIDAL,
    'centroidal_subsample': CENTROIDAL,
    'polar': CENTROIDAL,
    'chebyshev': CHEBYSHEV,
    'cheb': CHEBYSHEV,
}


def _radii(r: Any) -> np.ndarray:
    if hasattr(r, 'radii'):
        r = r.radii
    return np.asarray(r, dtype=float).reshape(-1)


def _check_m(M: int, N: int, minimum: int = 1) -> None:
    if M < minimum:
        raise InvalidM(f"Descriptor dimension M={M} must be at least {minimum}")
    if M > N:
        raise InvalidM(f"Descriptor dimension M={M} exceeds contour resolution N={N}")


def subsample_indices(N: int, M: int) -> np.ndarray:
    """Indices round(i*N/M), i = 0..M-1, rounding halves up."""
    return np.floor(np.arange(M) * N / M + 0.5).astype(int)


def centroidal_encode(r: Any, M: int) -> np.ndarray:
    """
    Uniformly subsample M radii from a length-N profile.

    Raises:
        InvalidM: If M < 3 or M > N
    """
    radii = _radii(r)
    _check_m(M, radii.size, CENTROIDAL_MIN_M)
    return radii[subsample_indices(radii.size, M)].copy()


def centroidal_decode(v: Any, N: int) -> np.ndarray:
    """
    Periodic linear interpolation of M samples back onto N angles.

    Samples sit at the indices chosen by centroidal_encode; the result is
    clamped at 0.
    """
    samples = np.asarray(v, dtype=float).reshape(-1)
    M = samples.size
    if M > N:
        raise DimensionMismatch(f"Cannot interpolate {M} samples onto N={N} angles")
    positions = subsample_indices(N, M).astype(float)
    radii = np.interp(np.arange(N, dtype=float), positions, samples, period=N)
    return np.maximum(radii, 0.0)


def signature_abscissa(N: int) -> np.ndarray:
    """Sample positions x = (theta - pi) / pi for theta_j = j*2*pi/N."""
    return 2.0 * np.arange(N) / N - 1.0


def chebyshev_design(N: int, M: int) -> np.ndarray:
    """N x M matrix of T_0..T_{M-1} evaluated at the signature abscissae."""
    return chebyshev.chebvander(signature_abscissa(N), M - 1)


def chebyshev_encode(r: Any, M: int) -> np.ndarray:
    """
    Least-squares Chebyshev coefficients of the shape signature.

    Raises:
        InvalidM: If M < 1 or M > N
        IllConditioned: If the design matrix is numerically rank deficient
    """
    radii = _radii(r)
    _check_m(M, radii.size)
    design = chebyshev_design(radii.size, M)
    coeffs, _, rank, _ = np.linalg.lstsq(design, radii, rcond=None)
    if rank < M:
        raise IllConditioned(
            f"Chebyshev system of degree {M - 1} on {radii.size} samples has rank {rank}")
    return coeffs


def chebyshev_decode(v: Any, N: int) -> np.ndarray:
    """Evaluate the Chebyshev series at the N signature abscissae, clamped at 0."""
    coeffs = np.asarray(v, dtype=float).reshape(-1)
    if coeffs.size == 0:
        return np.zeros(N)
    return np.maximum(chebyshev.chebval(signature_abscissa(N), coeffs), 0.0)


class DescriptorModel(ABC):
    """
    Common contract of the contour descriptors.

    encode maps a length-N profile to a length-M vector; decode maps it
    back to N nonnegative radii.
    """

    kind: str = ''

    def __init__(self, N: int, M: int):
        self.N = int(N)
        self.M = int(M)

    @abstractmethod
    def encode(self, r: Any) -> np.ndarray:
        """Length-M descriptor of a profile."""

    @abstractmethod
    def decode(self, v: Any) -> np.ndarray:
        """Length-N radii (>= 0) of a descriptor."""

    @property
    def descriptor_id(self) -> str:
        return f"{self.kind}-N{self.N}-M{self.M}"

    def encode_batch(self, R: np.ndarray) -> np.ndarray:
        R = np.atleast_2d(np.asarray(R, dtype=float))
        return np.vstack([self.encode(row) for row in R])

    def decode_batch(self, V: np.ndarray) -> np.ndarray:
        V = np.atleast_2d(np.asarray(V, dtype=float))
        return np.vstack([self.decode(row) for row in V])

    def _check_length(self, r: np.ndarray) -> np.ndarray:
        if r.size != self.N:
            raise DimensionMismatch(f"{self.kind} descriptor expects N={self.N}, got {r.size}")
        return r

    def to_dict(self) -> Dict[str, Any]:
        return {'kind': self.kind, 'N': self.N, 'M': self.M, 'descriptor_id': self.descriptor_id}

    def __repr__(self):
        return f'<{type(self).__name__} N={self.N} M={self.M}>'


class EigencontourDescriptor(DescriptorModel):
    """Projection onto the leading eigencontours."""

    kind = EIGENCONTOUR

    def __init__(self, basis: EigenBasis):
        super().__init__(basis.N, basis.M)
        self.basis = basis

    @property
    def descriptor_id(self) -> str:
        return self.basis.basis_id

    def encode(self, r: Any) -> np.ndarray:
        return np.array(eigenbasis.encode(_radii(r), self.basis).c)

    def decode(self, v: Any) -> np.ndarray:
        return eigenbasis.decode(v, self.basis)

    def encode_batch(self, R: np.ndarray) -> np.ndarray:
        return eigenbasis.encode_batch(R, self.basis)

    def decode_batch(self, V: np.ndarray) -> np.ndarray:
        return eigenbasis.decode_batch(V, self.basis)

    def to_dict(self) -> Dict[str, Any]:
        data = super().to_dict()
        data['basis_id'] = self.basis.basis_id
        return data


class CentroidalDescriptor(DescriptorModel):
    """M radii sampled from the centroidal profile."""

    kind = CENTROIDAL

    def __init__(self, N: int, M: int):
        _check_m(M, N, CENTROIDAL_MIN_M)
        super().__init__(N, M)

    def encode(self, r: Any) -> np.ndarray:
        return centroidal_encode(self._check_length(_radii(r)), self.M)

    def decode(self, v: Any) -> np.ndarray:
        return centroidal_decode(v, self.N)


class ChebyshevDescriptor(DescriptorModel):
    """First M Chebyshev coefficients of the shape signature."""

    kind = CHEBYSHEV

    def __init__(self, N: int, M: int):
        _check_m(M, N)
        super().__init__(N, M)
        self.degrees = list(range(M))
        self._design = chebyshev_design(N, M)
        if np.linalg.matrix_rank(self._design) < M:
            raise IllConditioned(f"Chebyshev degree {M - 1} is too high for N={N} samples")
        self._pinv = np.linalg.pinv(self._design)

    def encode(self, r: Any) -> np.ndarray:
        return self._pinv @ self._check_length(_radii(r))

    def decode(self, v: Any) -> np.ndarray:
        coeffs = np.asarray(v, dtype=float).reshape(-1)
        if coeffs.size != self.M:
            raise DimensionMismatch(f"chebyshev descriptor expects M={self.M}, got {coeffs.size}")
        return np.maximum(self._design @ coeffs, 0.0)

    def to_dict(self) -> Dict[str, Any]:
        data = super().to_dict()
        data['degrees'] = self.degrees
        return data


def normalize_kind(kind: str) -> str:
    """Canonical descriptor kind for a name or alias."""
    try:
        return KIND_ALIASES[kind.lower()]
    except KeyError:
        raise InvalidParams(f"Unknown descriptor kind {kind!r}; expected one of {', '.join(KINDS)}")


def build_descriptor(kind: str, M: int, N: int, training: Optional[ContourMatrix] = None,
                     basis: Optional[EigenBasis] = None, angle0: float = 0.0) -> DescriptorModel:
    """
    Instantiate a descriptor of the given kind.

    For eigencontours either a fitted basis (truncated to M when larger) or
    a training matrix to fit on is required.

    Raises:
        InvalidParams: If the kind is unknown or an eigencontour descriptor
            has neither basis nor training data
    """
    kind = normalize_kind(kind)
    if kind == CENTROIDAL:
        return CentroidalDescriptor(N, M)
    if kind == CHEBYSHEV:
        return ChebyshevDescriptor(N, M)
    if basis is None:
        if training is None:
            raise InvalidParams("An eigencontour descriptor needs a basis or training contours")
        basis = eigenbasis.fit_eigenbasis(training, M, angle0=angle0)
    elif basis.M != M:
        basis = eigenbasis.truncate(basis, M)
    if basis.N != N:
        raise DimensionMismatch(f"Basis has N={basis.N}, contours have N={N}")
    return EigencontourDescriptor(basis)
