"""
Synthetic corpus generation for development and testing.

This module produces random star-convex polygons with a controlled radial
spectrum so the whole pipeline can run without a downloaded dataset.
"""

import math
from dataclasses import dataclass
from typing import List, Optional

import numpy as np

from models.instance import InstanceRecord, SyntheticParams
from models.shape import Point, Shape, sample_angles
from utils.errors import InvalidParams
from utils.logger import get_logger

logger = get_logger(__name__)

# Empty border around each generated shape (px)
IMAGE_MARGIN = 2


@dataclass(frozen=True, eq=False)
class GeneratedShape:
    """Generating center and radii of one synthetic polygon."""

    center: Point
    radii: np.ndarray


class ShapeSimulator:
    """
    Random star polygon generator.

    Each shape has radii r(theta_j) = base * (1 + sum_k a_k cos(k theta_j + phi_k))
    at `vertices` uniform angles, optionally perturbed by multiplicative
    noise, and is placed at the center of its own image.

    Every category draws one template phase per harmonic; a shape's phases
    are its category's template jittered by up to phase_spread * pi, so
    phase_spread = 1 gives uniformly random phases.
    """

    def __init__(self, params: Optional[SyntheticParams] = None):
        self.params = params or SyntheticParams()
        self._validate()
        self.rng = np.random.default_rng(self.params.seed)

    @property
    def harmonics(self) -> np.ndarray:
        p = self.params
        if p.max_harmonic < 1:
            return np.arange(0)
        return np.arange(p.min_harmonic, p.max_harmonic + 1)

    @property
    def amplitude_bound(self) -> float:
        """Largest possible |sum_k a_k cos(...)|."""
        k = self.harmonics.astype(float)
        return float(np.sum(self.params.amplitude / k ** self.params.smoothness)) if k.size else 0.0

    def _validate(self) -> None:
        p = self.params
        if p.count < 1:
            raise InvalidParams(f"count must be at least 1, got {p.count}")
        if p.vertices < 3:
            raise InvalidParams(f"vertices must be at least 3, got {p.vertices}")
        if p.base_radius <= 0:
            raise InvalidParams(f"base_radius must be positive, got {p.base_radius}")
        if p.amplitude < 0 or p.noise < 0:
            raise InvalidParams("amplitude and noise must be nonnegative")
        if not 0.0 <= p.phase_spread <= 1.0:
            raise InvalidParams(f"phase_spread must lie in [0, 1], got {p.phase_spread}")
        if p.max_harmonic >= 1 and not 1 <= p.min_harmonic <= p.max_harmonic:
            raise InvalidParams(
                f"Harmonic range [{p.min_harmonic}, {p.max_harmonic}] must satisfy 1 <= min <= max")
        if not p.categories:
            raise InvalidParams("At least one category is required")
        # worst case radius factor (1 - bound) * (1 - noise) must stay positive
        if self.amplitude_bound >= 1.0 or p.noise >= 1.0:
            raise InvalidParams(
                f"Harmonic bound {self.amplitude_bound:.4f} and noise {p.noise} admit r <= 0")

    def _image_size(self) -> tuple:
        p = self.params
        if p.image_size is not None:
            return tuple(p.image_size)
        reach = p.base_radius * (1.0 + self.amplitude_bound) * (1.0 + p.noise)
        side = int(math.ceil(2.0 * reach)) + 2 * IMAGE_MARGIN
        return side, side

    def template_phases(self) -> List[np.ndarray]:
        """One phase per harmonic for each category, in category order."""
        return [self.rng.uniform(0.0, 2.0 * np.pi, self.harmonics.size) for _ in self.params.categories]

    def sample_profile(self, template: Optional[np.ndarray] = None) -> np.ndarray:
        """Radii of one random shape at the generator's vertex angles."""
        p = self.params
        theta = sample_angles(p.vertices)
        if template is None:
            template = np.zeros(self.harmonics.size)
        factor = np.ones(p.vertices)
        for k, phase in zip(self.harmonics, template):
            a = self.rng.uniform(-1.0, 1.0) * p.amplitude / float(k) ** p.smoothness
            phi = phase + p.phase_spread * self.rng.uniform(-np.pi, np.pi)
            factor += a * np.cos(k * theta + phi)
        if p.noise > 0:
            factor *= 1.0 + self.rng.uniform(-p.noise, p.noise, p.vertices)
        return p.base_radius * factor

    def generate_shapes(self) -> List[GeneratedShape]:
        """Generating centers and radii, in generation order."""
        width, height = self._image_size()
        center = Point(width / 2.0, height / 2.0)
        templates = self.template_phases()
        return [GeneratedShape(center=center, radii=self.sample_profile(templates[index % len(templates)]))
                for index in range(self.params.count)]

    def generate(self) -> List[InstanceRecord]:
        """Synthetic instance records with ids 1..count."""
        p = self.params
        width, height = self._image_size()
        theta = sample_angles(p.vertices)
        records = []
        for index, generated in enumerate(self.generate_shapes()):
            ring = np.column_stack([
                generated.center.x + generated.radii * np.cos(theta),
                generated.center.y + generated.radii * np.sin(theta),
            ])
            records.append(InstanceRecord(
                id=str(index + 1),
                category=p.categories[index % len(p.categories)],
                shape=Shape(polygons=[ring]),
                image_width=float(width),
                image_height=float(height),
                image_id=index + 1,
            ))
        logger.info(f"Generated {len(records)} synthetic shapes "
                    f"(harmonics {list(self.harmonics)}, phase spread {p.phase_spread}, noise {p.noise}, seed {p.seed})")
        return records


def generate_synthetic(params: Optional[SyntheticParams] = None) -> List[InstanceRecord]:
    """
    Random star-convex polygons, deterministic under params.seed.

    Raises:
        InvalidParams: If the amplitude bounds admit a radius <= 0 or a
            parameter is out of range
    """
    return ShapeSimulator(params).generate()
