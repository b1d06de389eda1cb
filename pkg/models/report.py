"""
Modelos de avaliação - StarBasis

Boundary scores, F-vs-M curves and the report that carries them.
"""

import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional


def harmonic_f(precision: float, recall: float) -> float:
    """2PR / (P + R), or 0 when both are 0."""
    if precision + recall <= 0:
        return 0.0
    return 2.0 * precision * recall / (precision + recall)


@dataclass(frozen=True)
class FScore:
    """Boundary precision, recall and F of one prediction/reference pair."""

    precision: float
    recall: float
    tolerance_px: float
    matched: int = 0
    n_pred: int = 0
    n_gt: int = 0

    @property
    def f(self) -> float:
        return harmonic_f(self.precision, self.recall)

    def to_dict(self) -> Dict[str, Any]:
        return {
            'precision': self.precision,
            'recall': self.recall,
            'f': self.f,
            'tolerance_px': self.tolerance_px,
            'matched': self.matched,
            'n_pred': self.n_pred,
            'n_gt': self.n_gt,
        }

    def __repr__(self):
        return f'<FScore P={self.precision:.4f} R={self.recall:.4f} F={self.f:.4f}>'


@dataclass(frozen=True)
class InstanceScore:
    """Score of one evaluated instance at one descriptor dimension."""

    id: str
    category: str
    score: FScore
    cluster: Optional[int] = None

    def to_dict(self) -> Dict[str, Any]:
        data = {'id': self.id, 'category': self.category, **self.score.to_dict()}
        if self.cluster is not None:
            data['cluster'] = self.cluster
        return data


@dataclass
class ScoreSummary:
    """Mean precision, recall and F over a set of instances."""

    mean_precision: float
    mean_recall: float
    mean_f: float
    count: int
    per_instance: List[InstanceScore] = field(default_factory=list)

    @classmethod
    def from_scores(cls, scores: List[InstanceScore]) -> 'ScoreSummary':
        count = len(scores)
        if count == 0:
            return cls(0.0, 0.0, 0.0, 0, [])
        return cls(
            mean_precision=math.fsum(s.score.precision for s in scores) / count,
            mean_recall=math.fsum(s.score.recall for s in scores) / count,
            mean_f=math.fsum(s.score.f for s in scores) / count,
            count=count,
            per_instance=list(scores),
        )

    def to_dict(self, include_instances: bool = True) -> Dict[str, Any]:
        data = {
            'mean_precision': self.mean_precision,
            'mean_recall': self.mean_recall,
            'mean_f': self.mean_f,
            'count': self.count,
        }
        if include_instances:
            data['per_instance'] = [s.to_dict() for s in self.per_instance]
        return data


@dataclass
class CurvePoint:
    """One M of an F curve; error is set when that M could not be evaluated."""

    M: int
    mean_f: Optional[float] = None
    mean_precision: Optional[float] = None
    mean_recall: Optional[float] = None
    count: int = 0
    train_mse: Optional[float] = None
    error: Optional[Dict[str, Any]] = None

    @property
    def ok(self) -> bool:
        return self.error is None and self.mean_f is not None

    def to_dict(self) -> Dict[str, Any]:
        return {
            'M': self.M,
            'mean_f': self.mean_f,
            'mean_precision': self.mean_precision,
            'mean_recall': self.mean_recall,
            'count': self.count,
            'train_mse': self.train_mse,
            'error': self.error,
        }


@dataclass
class EvalReport:
    """
    F-vs-M curve of one descriptor family.

    auc_f is computed from the successful curve points only; gaps are
    reported with their error and skipped.
    """

    descriptor: str
    curve: List[CurvePoint] = field(default_factory=list)
    per_instance: Dict[int, List[InstanceScore]] = field(default_factory=dict)
    auc_f: Optional[float] = None
    metadata: Dict[str, Any] = field(default_factory=dict)

    @property
    def pairs(self) -> List[tuple]:
        """(M, mean_f) of the successful points, increasing M."""
        return [(p.M, p.mean_f) for p in self.curve if p.ok]

    @property
    def mean_f(self) -> Optional[float]:
        values = [f for _, f in self.pairs]
        if not values:
            return None
        return math.fsum(values) / len(values)

    def to_dict(self, include_instances: bool = False) -> Dict[str, Any]:
        data = {
            'descriptor': self.descriptor,
            'curve': [p.to_dict() for p in self.curve],
            'mean_f': self.mean_f,
            'auc_f': self.auc_f,
            'metadata': self.metadata,
        }
        if include_instances:
            data['per_instance'] = {
                str(M): [s.to_dict() for s in scores]
                for M, scores in sorted(self.per_instance.items())
            }
        return data

    def __repr__(self):
        auc = 'n/a' if self.auc_f is None else f'{self.auc_f:.2f}'
        return f'<EvalReport {self.descriptor} points={len(self.curve)} AUC-F={auc}>'
