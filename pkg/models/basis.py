"""
Modelos do espaço de contornos - StarBasis

ContourMatrix (training contours as columns), EigenBasis (leading left
singular vectors plus the full singular spectrum) and CoefficientVector.
"""

import hashlib
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

import numpy as np

from models.shape import ORIENTATION
from utils.errors import EmptyMatrix, InvalidM, InvalidN, ParseError
from utils.serialization import read_json, write_json

BASIS_FORMAT_VERSION = 1


@dataclass(eq=False)
class ContourMatrix:
    """N x L matrix whose column i holds the radii of training contour i."""

    data: np.ndarray
    group_key: Optional[str] = None
    ids: Optional[List[str]] = None
    # pre-clamp reconstructions may hold negative radii
    require_nonnegative: bool = field(default=True, repr=False)

    def __post_init__(self):
        self.data = np.asarray(self.data, dtype=float)
        if self.data.ndim != 2:
            raise ValueError("Contour matrix data must be 2D (N x L)")
        if self.data.shape[1] == 0:
            raise EmptyMatrix("Contour matrix has no columns", group_key=self.group_key)
        if self.data.shape[0] < 3:
            raise InvalidN(f"Contour matrix needs N >= 3 rows, got {self.data.shape[0]}")
        if not np.all(np.isfinite(self.data)):
            raise ValueError("Contour matrix entries must be finite")
        if self.require_nonnegative and np.any(self.data < 0):
            raise ValueError("Contour matrix entries must be nonnegative")
        if self.ids is not None and len(self.ids) != self.data.shape[1]:
            raise ValueError("ids must name every column")

    @classmethod
    def from_radii(cls, radii: List[np.ndarray], group_key: Optional[str] = None,
                   ids: Optional[List[str]] = None) -> 'ContourMatrix':
        """Stack radii vectors as columns."""
        if not radii:
            raise EmptyMatrix("Contour matrix has no columns", group_key=group_key)
        return cls(data=np.column_stack([np.asarray(r, dtype=float) for r in radii]),
                   group_key=group_key, ids=ids)

    @property
    def N(self) -> int:
        return int(self.data.shape[0])

    @property
    def L(self) -> int:
        return int(self.data.shape[1])

    def __repr__(self):
        return f'<ContourMatrix N={self.N} L={self.L} group={self.group_key!r}>'


@dataclass(frozen=True, eq=False)
class EigenBasis:
    """
    Eigencontour basis.

    U holds the first M left singular vectors as orthonormal columns;
    singular_values holds all min(N, L) singular values, nonincreasing.
    """

    U: np.ndarray = field(repr=False)
    singular_values: np.ndarray = field(repr=False)
    angle0: float = 0.0
    provenance: Dict[str, Any] = field(default_factory=dict, compare=False)

    def __post_init__(self):
        U = np.array(self.U, dtype=float)
        sigma = np.array(self.singular_values, dtype=float).reshape(-1)
        if U.ndim != 2:
            raise ValueError("Basis matrix U must be 2D (N x M)")
        if U.shape[1] < 1 or U.shape[1] > sigma.size:
            raise InvalidM(f"M={U.shape[1]} must lie in [1, {sigma.size}]")
        U.setflags(write=False)
        sigma.setflags(write=False)
        object.__setattr__(self, 'U', U)
        object.__setattr__(self, 'singular_values', sigma)

    @property
    def N(self) -> int:
        return int(self.U.shape[0])

    @property
    def M(self) -> int:
        return int(self.U.shape[1])

    @property
    def basis_id(self) -> str:
        """Content hash of U, used to tie coefficients and clusters to a basis."""
        return hashlib.sha256(np.ascontiguousarray(self.U).tobytes()).hexdigest()[:16]

    def to_dict(self) -> Dict[str, Any]:
        provenance = dict(self.provenance)
        provenance.setdefault('dataset', None)
        provenance.setdefault('group_key', None)
        provenance.setdefault('num_contours', None)
        provenance.setdefault('timestamp', None)
        return {
            'version': BASIS_FORMAT_VERSION,
            'N': self.N,
            'M': self.M,
            'angle0': float(self.angle0),
            'orientation': ORIENTATION,
            'singular_values': self.singular_values.tolist(),
            'U': self.U.tolist(),
            'basis_id': self.basis_id,
            'provenance': provenance,
        }

    @classmethod
    def from_dict(cls, document: Dict[str, Any]) -> 'EigenBasis':
        """
        Restore a basis from its JSON form.

        Raises:
            ParseError: If required fields are missing or inconsistent
        """
        try:
            U = np.asarray(document['U'], dtype=float)
            basis = cls(U=U.reshape(int(document['N']), int(document['M'])),
                        singular_values=document['singular_values'],
                        angle0=float(document.get('angle0', 0.0)),
                        provenance=dict(document.get('provenance') or {}))
        except (KeyError, ValueError, TypeError) as e:
            raise ParseError(f"Invalid basis document: {e}") from e
        if document.get('orientation', ORIENTATION) != ORIENTATION:
            raise ParseError(f"Unsupported orientation {document.get('orientation')!r}")
        return basis

    def save(self, path: Union[str, Path]) -> Path:
        return write_json(path, self.to_dict())

    @classmethod
    def load(cls, path: Union[str, Path]) -> 'EigenBasis':
        return cls.from_dict(read_json(path))

    def __repr__(self):
        group = self.provenance.get('group_key')
        return f'<EigenBasis N={self.N} M={self.M} group={group!r} id={self.basis_id}>'


@dataclass(frozen=True, eq=False)
class CoefficientVector:
    """M-dimensional descriptor of one contour in a given basis."""

    c: np.ndarray
    basis_id: str

    def __post_init__(self):
        c = np.array(self.c, dtype=float).reshape(-1)
        if not np.all(np.isfinite(c)):
            raise ValueError("Coefficient vector must be finite")
        c.setflags(write=False)
        object.__setattr__(self, 'c', c)

    @property
    def M(self) -> int:
        return int(self.c.size)

    def to_dict(self) -> Dict[str, Any]:
        return {'c': self.c.tolist(), 'basis_id': self.basis_id}

    def __repr__(self):
        return f'<CoefficientVector M={self.M} basis={self.basis_id}>'
