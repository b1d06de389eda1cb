import math

import numpy as np
import pytest
import shapely

from models.instance import SyntheticParams
from models.shape import Point, Shape, StarContour, sample_angles
from services.contour_extraction import (_boundary_segments, cast_rays, compute_inner_center, contour_points,
                                         contour_to_polygon, extract_star_contour, shape_geometry)
from services.synthetic import ShapeSimulator
from tests.conftest import regular_polygon
from tests.oracles import depth_at, inscribed_circle_grid, ray_radii
from utils.errors import CenterOutsideShape, DegenerateShape, EmptyShape, InvalidN

GRID_STEP = 0.05

# Simple polygons for the inner-center search; the first four have a unique optimum
POLYGONS = {
    'square': [[0, 0], [10, 0], [10, 10], [0, 10]],
    'triangle': [[0, 0], [12, 0], [6, 6 * math.sqrt(3)]],
    'hexagon': regular_polygon(radius=6.0, center=(10.0, 10.0), vertices=6).tolist(),
    'right-triangle': [[0, 0], [8, 0], [0, 6]],
    'rectangle': [[0, 0], [20, 0], [20, 6], [0, 6]],
    'l-shape': [[0, 0], [12, 0], [12, 4], [4, 4], [4, 12], [0, 12]],
    'kite': [[5, 0], [10, 4], [5, 14], [0, 4]],
    'pentagon': [[0, 0], [9, 1], [11, 8], [4, 12], [-2, 6]],
    'arrow': [[0, 3], [8, 3], [8, 0], [14, 5], [8, 10], [8, 7], [0, 7]],
    'trapezoid': [[0, 0], [16, 0], [12, 7], [3, 7]],
}
UNIQUE_OPTIMUM = ('square', 'triangle', 'hexagon', 'right-triangle')


class TestInnerCenter:

    @pytest.mark.parametrize('name', sorted(POLYGONS))
    def test_matches_grid_search(self, name):
        ring = np.asarray(POLYGONS[name], dtype=float)
        center = compute_inner_center(Shape.from_polygon(ring), grid_step=GRID_STEP)
        (ox, oy), best_depth = inscribed_circle_grid(ring, GRID_STEP)

        assert depth_at(ring, (center.x, center.y)) >= best_depth - GRID_STEP
        if name in UNIQUE_OPTIMUM:
            assert math.hypot(center.x - ox, center.y - oy) <= 2 * GRID_STEP

    def test_square_center(self, square):
        center = compute_inner_center(square, grid_step=GRID_STEP)
        assert math.hypot(center.x - 5.0, center.y - 5.0) <= GRID_STEP / 2

    def test_mask_block(self):
        mask = np.zeros((14, 14), dtype=bool)
        mask[2:12, 2:12] = True
        center = compute_inner_center(Shape(mask=mask), grid_step=GRID_STEP)
        assert math.hypot(center.x - 7.0, center.y - 7.0) <= GRID_STEP

    def test_sliver_is_degenerate_with_fallback(self):
        sliver = Shape.from_polygon([[10, 10], [60, 10.02], [10, 10.04]])
        with pytest.raises(DegenerateShape) as info:
            compute_inner_center(sliver, grid_step=GRID_STEP)
        fallback = info.value.fallback
        assert fallback is not None
        assert shape_geometry(sliver).buffer(1e-9).contains(
            shapely.Point(fallback.x, fallback.y))

    def test_collinear_ring_is_empty(self):
        with pytest.raises(EmptyShape):
            compute_inner_center(Shape.from_polygon([[0, 0], [5, 0], [10, 0]]))


class TestShapeGeometry:

    def test_nested_ring_is_absorbed(self):
        shape = Shape(polygons=[np.array([[0, 0], [10, 0], [10, 10], [0, 10]], dtype=float),
                                np.array([[3, 3], [6, 3], [6, 6], [3, 6]], dtype=float)])
        assert shape_geometry(shape).area == pytest.approx(100.0)

    def test_disjoint_parts_are_kept(self):
        shape = Shape(polygons=[np.array([[0, 0], [4, 0], [4, 4], [0, 4]], dtype=float),
                                np.array([[10, 0], [12, 0], [12, 2], [10, 2]], dtype=float)])
        geometry = shape_geometry(shape)
        assert len(geometry.geoms) == 2
        assert geometry.area == pytest.approx(20.0)

    def test_clockwise_input_is_reoriented(self):
        shape = Shape.from_polygon([[0, 0], [0, 10], [10, 10], [10, 0]])
        exterior = shape_geometry(shape).geoms[0].exterior
        assert exterior.is_ccw


class TestRayCasting:

    def test_circle_vertices_on_rays(self):
        shape = Shape.from_polygon(regular_polygon(radius=10.0, center=(50.0, 50.0), vertices=360))
        contour = extract_star_contour(shape, N=360, center=Point(50.0, 50.0))
        np.testing.assert_allclose(contour.radii, 10.0, atol=1e-9)

    def test_square_axes_and_diagonals(self, square):
        contour = extract_star_contour(square, N=8, center=Point(5.0, 5.0))
        expected = [5.0, 5.0 * math.sqrt(2.0)] * 4
        np.testing.assert_allclose(contour.radii, expected, atol=1e-9)

    def test_angle0_rotates_first_ray(self, square):
        contour = extract_star_contour(square, N=4, center=Point(5.0, 5.0), angle0=math.pi / 4)
        np.testing.assert_allclose(contour.radii, 5.0 * math.sqrt(2.0), atol=1e-9)
        assert contour.angle0 == pytest.approx(math.pi / 4)

    def test_farthest_hit_on_concave_shape(self):
        # U opening upwards, center in the floor under the left arm
        ring = np.array([[0, 0], [12, 0], [12, 10], [8, 10], [8, 3], [4, 3], [4, 10], [0, 10]], dtype=float)
        center = Point(2.0, 1.5)
        contour = extract_star_contour(Shape.from_polygon(ring), N=72, center=center)
        expected = ray_radii(ring, (center.x, center.y), sample_angles(72))
        np.testing.assert_allclose(contour.radii, expected, atol=1e-9)
        # the 45 degree ray leaves the left arm, crosses the gap and ends on the right arm
        assert contour.radii[9] == pytest.approx(8.5 * math.sqrt(2.0))

    def test_random_polygons_against_dense_oracle(self, rng):
        angles = sample_angles(72, 0.1)
        for _ in range(20):
            k = int(rng.integers(5, 15))
            theta = np.sort(rng.uniform(0, 2 * np.pi, k))
            radius = rng.uniform(5, 20, k)
            ring = np.column_stack([30 + radius * np.cos(theta), 30 + radius * np.sin(theta)])
            geometry = shape_geometry(Shape.from_polygon(ring))
            center = Point(30.0, 30.0)
            if not geometry.contains(shapely.Point(30.0, 30.0)):
                continue
            radii = cast_rays(_boundary_segments(geometry), center, angles)
            np.testing.assert_allclose(radii, ray_radii(ring, (30.0, 30.0), angles), atol=1e-9)

    def test_generated_star_polygons_are_reproduced(self):
        N = 90
        simulator = ShapeSimulator(SyntheticParams(count=100, seed=3, vertices=N))
        for generated in simulator.generate_shapes():
            ring = np.column_stack([generated.center.x + generated.radii * np.cos(sample_angles(N)),
                                    generated.center.y + generated.radii * np.sin(sample_angles(N))])
            contour = extract_star_contour(Shape.from_polygon(ring), N=N, center=generated.center)
            np.testing.assert_allclose(contour.radii, generated.radii, atol=1e-6)

    def test_mask_contour(self):
        mask = np.zeros((14, 14), dtype=bool)
        mask[2:12, 2:12] = True
        contour = extract_star_contour(Shape(mask=mask), N=4, center=Point(7.0, 7.0))
        np.testing.assert_allclose(contour.radii, 5.0, atol=1e-9)

    def test_inner_center_used_by_default(self, square):
        contour = extract_star_contour(square, N=4, grid_step=GRID_STEP)
        assert math.hypot(contour.center.x - 5.0, contour.center.y - 5.0) <= GRID_STEP
        np.testing.assert_allclose(contour.radii, 5.0, atol=GRID_STEP)


class TestExtractionErrors:

    def test_n_below_three(self, square):
        with pytest.raises(InvalidN):
            extract_star_contour(square, N=2)

    def test_center_outside(self, square):
        with pytest.raises(CenterOutsideShape):
            extract_star_contour(square, N=8, center=Point(20.0, 5.0))

    def test_center_on_boundary_is_accepted(self, square):
        contour = extract_star_contour(square, N=4, center=Point(0.0, 5.0))
        assert contour.radii[0] == pytest.approx(10.0)

    def test_empty_mask(self):
        with pytest.raises(EmptyShape):
            extract_star_contour(Shape(mask=np.zeros((3, 3), dtype=bool)), N=8)


class TestContourPolygon:

    def test_points_and_polygon(self):
        contour = StarContour(center=Point(1.0, 2.0), radii=np.full(4, 3.0))
        points = contour_points(contour)
        np.testing.assert_allclose(points, [[4, 2], [1, 5], [-2, 2], [1, -1]], atol=1e-12)
        polygon = contour_to_polygon(contour)
        assert polygon.vertex_count == 4

    def test_zero_radii_collapse_to_center(self):
        contour = StarContour(center=Point(1.0, 2.0), radii=np.array([0.0, 2.0, 0.0, 2.0]))
        points = contour_points(contour)
        np.testing.assert_allclose(points[0], [1.0, 2.0])
        np.testing.assert_allclose(points[2], [1.0, 2.0], atol=1e-12)

    @pytest.mark.parametrize('N', [64, 128])
    def test_round_trip_through_polygon(self, rng, N):
        for _ in range(10):
            contour = StarContour(center=Point(*rng.uniform(-20.0, 20.0, 2)), radii=rng.uniform(2.0, 12.0, N))
            again = extract_star_contour(contour_to_polygon(contour), N=N, center=contour.center)
            np.testing.assert_allclose(again.radii, contour.radii, atol=1e-6)


# fat convex polygons: regular, at assorted rotations
CONVEX = [regular_polygon(radius=8.0 + k, center=(30.0, 30.0), vertices=k, angle0=0.37 * k) for k in range(4, 13)]
CONVEX.append(np.array(POLYGONS['square'], dtype=float))


class TestConvexContainment:

    @pytest.mark.parametrize('N', [64, 90, 128])
    @pytest.mark.parametrize('index', range(len(CONVEX)))
    def test_vertices_near_reconstruction(self, N, index):
        ring = CONVEX[index]
        contour = extract_star_contour(Shape.from_polygon(ring), N=N, grid_step=GRID_STEP)
        reconstructed = shapely.Polygon(contour_points(contour))
        bound = 2.0 * math.pi / N * float(np.max(contour.radii))
        for x, y in ring:
            assert reconstructed.distance(shapely.Point(x, y)) <= bound
