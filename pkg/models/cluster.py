"""
Modelo ClusterModel - StarBasis

Result of K-means in a descriptor space: centroids, assignments and the
inertia trace of the run.
"""

from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

import numpy as np

from utils.errors import ParseError
from utils.serialization import read_json, write_json


@dataclass(eq=False)
class ClusterModel:
    """K-means model over L descriptor vectors of dimension M."""

    centroids: np.ndarray
    assignments: np.ndarray
    inertia: float
    seed: Optional[int] = None
    descriptor_ref: Optional[str] = None
    n_iter: int = 0
    converged: bool = False
    inertia_history: List[float] = field(default_factory=list)

    def __post_init__(self):
        self.centroids = np.atleast_2d(np.asarray(self.centroids, dtype=float))
        self.assignments = np.asarray(self.assignments, dtype=int).reshape(-1)

    @property
    def K(self) -> int:
        return int(self.centroids.shape[0])

    @property
    def M(self) -> int:
        return int(self.centroids.shape[1])

    @property
    def sizes(self) -> np.ndarray:
        return np.bincount(self.assignments, minlength=self.K)

    def to_dict(self) -> Dict[str, Any]:
        return {
            'K': self.K,
            'M': self.M,
            'centroids': self.centroids.tolist(),
            'inertia': float(self.inertia),
            'seed': self.seed,
            'descriptor_ref': self.descriptor_ref,
            'assignments': self.assignments.tolist(),
            'n_iter': self.n_iter,
            'converged': self.converged,
            'inertia_history': [float(v) for v in self.inertia_history],
        }

    @classmethod
    def from_dict(cls, document: Dict[str, Any]) -> 'ClusterModel':
        try:
            centroids = np.asarray(document['centroids'], dtype=float).reshape(
                int(document['K']), int(document['M']))
            return cls(centroids=centroids,
                       assignments=document.get('assignments', []),
                       inertia=float(document['inertia']),
                       seed=document.get('seed'),
                       descriptor_ref=document.get('descriptor_ref'),
                       n_iter=int(document.get('n_iter', 0)),
                       converged=bool(document.get('converged', False)),
                       inertia_history=list(document.get('inertia_history', [])))
        except (KeyError, ValueError, TypeError) as e:
            raise ParseError(f"Invalid cluster document: {e}") from e

    def save(self, path: Union[str, Path], extra: Optional[Dict[str, Any]] = None) -> Path:
        document = self.to_dict()
        document.update(extra or {})
        return write_json(path, document)

    @classmethod
    def load(cls, path: Union[str, Path]) -> 'ClusterModel':
        return cls.from_dict(read_json(path))

    def __repr__(self):
        return f'<ClusterModel K={self.K} M={self.M} inertia={self.inertia:.4f} iter={self.n_iter}>'
