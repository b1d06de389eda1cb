"""
Modelos de corpus - StarBasis

Annotation records, corpus selection and the synthetic generator
parameters.
"""

from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Tuple

from models.shape import Shape, StarContour

UNIVERSAL = 'universal'
PER_CATEGORY = 'per-category'
GROUPINGS = (UNIVERSAL, PER_CATEGORY)

SPLITS = ('all', 'train', 'test')


@dataclass(eq=False)
class InstanceRecord:
    """One annotated object instance."""

    id: str
    category: str
    shape: Shape
    image_width: Optional[float] = None
    image_height: Optional[float] = None
    image_id: Optional[int] = None

    def __post_init__(self):
        self.id = str(self.id)
        if not self.category:
            raise ValueError(f"Instance {self.id} has an empty category")

    def to_dict(self) -> Dict[str, Any]:
        return {
            'id': self.id,
            'category': self.category,
            'image_id': self.image_id,
            'image_width': self.image_width,
            'image_height': self.image_height,
            'shape': self.shape.to_dict(),
        }

    def __repr__(self):
        return f'<InstanceRecord {self.id} [{self.category}] {self.shape!r}>'


@dataclass
class CorpusSpec:
    """Which instances to read and how to group their contours."""

    source: Optional[str] = None
    include: List[str] = field(default_factory=list)
    exclude: List[str] = field(default_factory=list)
    N: int = 360
    angle0: float = 0.0
    grid_step: float = 0.05
    split: str = 'all'
    holdout: float = 0.0
    seed: int = 0
    grouping: str = UNIVERSAL
    clip_to_image: bool = False

    def __post_init__(self):
        if self.grouping not in GROUPINGS:
            raise ValueError(f"grouping must be one of {GROUPINGS}, got {self.grouping!r}")
        if self.split not in SPLITS:
            raise ValueError(f"split must be one of {SPLITS}, got {self.split!r}")

    def accepts(self, category: str) -> bool:
        if self.include and category not in self.include:
            return False
        return category not in self.exclude

    def to_dict(self) -> Dict[str, Any]:
        return {
            'source': self.source,
            'include': sorted(self.include),
            'exclude': sorted(self.exclude),
            'N': self.N,
            'angle0': self.angle0,
            'grid_step': self.grid_step,
            'split': self.split,
            'holdout': self.holdout,
            'seed': self.seed,
            'grouping': self.grouping,
            'clip_to_image': self.clip_to_image,
        }


@dataclass
class SyntheticParams:
    """
    Random star polygon generator settings.

    r(theta) = base_radius * (1 + sum_k a_k cos(k theta + phi_k)) with
    |a_k| <= amplitude / k**smoothness for k in [min_harmonic,
    max_harmonic], plus per-vertex multiplicative noise. Phases follow a
    per-category template within +-phase_spread * pi (objects in a
    canonical pose); phase_spread = 1 makes them uniform.
    """

    count: int = 500
    seed: int = 0
    min_harmonic: int = 1
    max_harmonic: int = 6
    amplitude: float = 0.3
    smoothness: float = 1.5
    phase_spread: float = 0.05
    noise: float = 0.0
    base_radius: float = 50.0
    vertices: int = 360
    categories: List[str] = field(default_factory=lambda: ['synthetic'])
    # None sizes each image to fit its shape
    image_size: Optional[Tuple[int, int]] = None

    def to_dict(self) -> Dict[str, Any]:
        return {
            'count': self.count,
            'seed': self.seed,
            'min_harmonic': self.min_harmonic,
            'max_harmonic': self.max_harmonic,
            'amplitude': self.amplitude,
            'smoothness': self.smoothness,
            'phase_spread': self.phase_spread,
            'noise': self.noise,
            'base_radius': self.base_radius,
            'vertices': self.vertices,
            'categories': list(self.categories),
            'image_size': None if self.image_size is None else list(self.image_size),
        }


@dataclass(frozen=True, eq=False)
class ExtractedContour:
    """A star contour together with the instance it came from."""

    id: str
    category: str
    contour: StarContour

    def __repr__(self):
        return f'<ExtractedContour {self.id} [{self.category}] N={self.contour.N}>'
