"""
Modelos geométricos - StarBasis

Point, Shape (polygon rings or a raster mask) and StarContour, the
N-sample centroidal profile every descriptor works on.
"""

import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from utils.errors import EmptyShape, InvalidN

ORIENTATION = 'ccw'


@dataclass(frozen=True)
class Point:
    """Coordinate in pixel units."""

    x: float
    y: float

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise ValueError(f"Point coordinates must be finite, got ({self.x}, {self.y})")

    def to_dict(self) -> Dict[str, float]:
        return {'x': float(self.x), 'y': float(self.y)}

    def __iter__(self):
        yield self.x
        yield self.y


def _ring_area(ring: np.ndarray) -> float:
    x, y = ring[:, 0], ring[:, 1]
    return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(np.roll(x, -1), y))


@dataclass(eq=False)
class Shape:
    """
    An object whose boundary is encoded.

    Exactly one of polygons or mask is set. Polygon rings are (k, 2)
    arrays in pixel units; outer rings are stored counterclockwise. A mask
    is a 2D boolean grid whose cell (row, col) covers
    [ox + col*s, ox + (col+1)*s] x [oy + row*s, oy + (row+1)*s].
    """

    polygons: Optional[List[np.ndarray]] = None
    mask: Optional[np.ndarray] = None
    origin: Tuple[float, float] = (0.0, 0.0)
    pixel_size: float = 1.0
    # False keeps rings verbatim (no closing-vertex strip, no reorientation)
    normalize: bool = field(default=True, repr=False)

    def __post_init__(self):
        if (self.polygons is None) == (self.mask is None):
            raise ValueError("Shape needs exactly one of polygons or mask")
        if self.polygons is not None:
            rings = []
            for ring in self.polygons:
                ring = np.asarray(ring, dtype=float).reshape(-1, 2)
                if not self.normalize:
                    rings.append(ring)
                    continue
                if len(ring) > 1 and np.array_equal(ring[0], ring[-1]):
                    ring = ring[:-1]
                if _ring_area(ring) < 0:
                    ring = ring[::-1]
                rings.append(ring)
            self.polygons = rings
        else:
            self.mask = np.asarray(self.mask, dtype=bool)
            if self.mask.ndim != 2:
                raise ValueError("Shape mask must be a 2D grid")

    @classmethod
    def from_polygon(cls, points: Sequence[Sequence[float]]) -> 'Shape':
        """Build a single-ring shape."""
        return cls(polygons=[np.asarray(points, dtype=float)])

    @classmethod
    def from_coco_segmentation(cls, segmentation: Sequence[Sequence[float]]) -> 'Shape':
        """Build a shape from COCO flat [x1, y1, x2, y2, ...] rings."""
        return cls(polygons=[np.asarray(flat, dtype=float).reshape(-1, 2) for flat in segmentation])

    @property
    def is_mask(self) -> bool:
        return self.mask is not None

    @property
    def bbox(self) -> Tuple[float, float, float, float]:
        """Axis-aligned bounding box (xmin, ymin, xmax, ymax)."""
        if self.is_mask:
            rows, cols = np.nonzero(self.mask)
            if rows.size == 0:
                raise EmptyShape("Mask has no foreground cell")
            ox, oy = self.origin
            s = self.pixel_size
            return (ox + cols.min() * s, oy + rows.min() * s,
                    ox + (cols.max() + 1) * s, oy + (rows.max() + 1) * s)
        points = np.vstack(self.polygons)
        return (float(points[:, 0].min()), float(points[:, 1].min()),
                float(points[:, 0].max()), float(points[:, 1].max()))

    @property
    def diagonal(self) -> float:
        xmin, ymin, xmax, ymax = self.bbox
        return math.hypot(xmax - xmin, ymax - ymin)

    @property
    def vertex_count(self) -> int:
        if self.is_mask:
            return 0
        return int(sum(len(ring) for ring in self.polygons))

    def validate(self) -> 'Shape':
        """
        Check the shape invariants.

        Raises:
            EmptyShape: If a ring is degenerate or the mask is empty
        """
        if self.is_mask:
            if not self.mask.any():
                raise EmptyShape("Mask has no foreground cell")
            return self
        if not self.polygons:
            raise EmptyShape("Shape has no polygon ring")
        for index, ring in enumerate(self.polygons):
            if len(ring) < 3:
                raise EmptyShape(f"Ring {index} has {len(ring)} vertices, need at least 3")
            if not np.all(np.isfinite(ring)):
                raise EmptyShape(f"Ring {index} has non-finite coordinates")
            if abs(_ring_area(ring)) <= 0.0:
                raise EmptyShape(f"Ring {index} has zero area")
        return self

    def to_dict(self) -> Dict:
        if self.is_mask:
            return {
                'mask': self.mask.astype(int).tolist(),
                'origin': list(self.origin),
                'pixel_size': self.pixel_size,
            }
        return {'polygons': [ring.tolist() for ring in self.polygons]}

    def __repr__(self):
        if self.is_mask:
            return f'<Shape mask {self.mask.shape} ({int(self.mask.sum())} px)>'
        return f'<Shape {len(self.polygons)} ring(s), {self.vertex_count} vertices>'


@dataclass(frozen=True, eq=False)
class StarContour:
    """
    Star-convex centroidal profile.

    radii[i] is the boundary distance along theta_i = angle0 + i*2*pi/N,
    counterclockwise, measured from center.
    """

    center: Point
    radii: np.ndarray = field(repr=False)
    angle0: float = 0.0

    def __post_init__(self):
        radii = np.asarray(self.radii, dtype=float).reshape(-1)
        if radii.size < 3:
            raise InvalidN(f"A star contour needs N >= 3 samples, got {radii.size}")
        if not np.all(np.isfinite(radii)) or np.any(radii < 0):
            raise ValueError("Star contour radii must be finite and nonnegative")
        radii.setflags(write=False)
        object.__setattr__(self, 'radii', radii)

    @property
    def N(self) -> int:
        return int(self.radii.size)

    @property
    def orientation(self) -> str:
        return ORIENTATION

    @property
    def angles(self) -> np.ndarray:
        return sample_angles(self.N, self.angle0)

    def with_radii(self, radii: np.ndarray) -> 'StarContour':
        """Same center and angular convention, new radii."""
        return StarContour(center=self.center, radii=radii, angle0=self.angle0)

    def to_dict(self) -> Dict:
        return {
            'center': self.center.to_dict(),
            'N': self.N,
            'angle0': float(self.angle0),
            'orientation': ORIENTATION,
            'radii': self.radii.tolist(),
        }

    def __repr__(self):
        return (f'<StarContour N={self.N} center=({self.center.x:.3f}, {self.center.y:.3f}) '
                f'mean_r={float(self.radii.mean()):.3f}>')


def sample_angles(N: int, angle0: float = 0.0) -> np.ndarray:
    """Uniform counterclockwise angles angle0 + i*2*pi/N, i = 0..N-1."""
    return angle0 + np.arange(N) * (2.0 * np.pi / N)
