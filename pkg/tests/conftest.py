import json
from pathlib import Path

import numpy as np
import pytest

from models.instance import ExtractedContour, InstanceRecord
from models.shape import Point, Shape, StarContour, sample_angles

FIXTURES = Path(__file__).parent / 'fixtures'


def regular_polygon(radius=10.0, center=(50.0, 50.0), vertices=360, angle0=0.0):
    theta = sample_angles(vertices, angle0)
    return np.column_stack([center[0] + radius * np.cos(theta), center[1] + radius * np.sin(theta)])


def circle_contour(radius=10.0, N=36, center=(0.0, 0.0)):
    return StarContour(center=Point(*center), radii=np.full(N, radius))


def extracted(contours, category='object'):
    return [ExtractedContour(id=str(i + 1), category=category, contour=c) for i, c in enumerate(contours)]


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def fixtures_dir():
    return FIXTURES


@pytest.fixture
def mini_manifest():
    return json.loads((FIXTURES / 'mini_manifest.json').read_text(encoding='utf-8'))


@pytest.fixture
def square():
    return Shape.from_polygon([[0, 0], [10, 0], [10, 10], [0, 10]])


@pytest.fixture
def circle_records():
    return [InstanceRecord(id=str(i + 1), category='disc', shape=Shape.from_polygon(regular_polygon()))
            for i in range(3)]


@pytest.fixture
def random_contours(rng):
    """Smooth random star profiles, N=64."""
    theta = sample_angles(64)
    contours = []
    for _ in range(30):
        radii = 20.0 + sum(rng.uniform(-2, 2) * np.cos(k * theta + rng.uniform(0, 2 * np.pi))
                           for k in range(1, 5))
        contours.append(StarContour(center=Point(0.0, 0.0), radii=radii))
    return contours


@pytest.fixture(autouse=True)
def reproducible_time(monkeypatch):
    monkeypatch.setenv('SOURCE_DATE_EPOCH', '1700000000')
