"""
Contour extraction service.

Converts an instance annotation (polygon rings or a raster mask) into an
N-sample star-convex centroidal profile:

1. the outer boundary is turned into one polygon set (holes dropped),
2. the inner center (center of the largest inscribed circle) is located
   by a coarse grid refined around the cells that can still beat the best
   candidate,
3. rays at uniform angles are cast from the center and each radius is the
   farthest boundary hit.
"""

import math
from typing import List, Optional

import numpy as np
import shapely
from shapely.geometry import MultiPolygon, Polygon, box
from shapely.geometry.polygon import orient
from shapely.ops import unary_union
from shapely.validation import make_valid

from config import Config
from models.shape import Point, Shape, StarContour, sample_angles
from utils.errors import CenterOutsideShape, DegenerateShape, EmptyShape, InvalidN
from utils.logger import get_logger

logger = get_logger(__name__)

# Coarse grid resolution (cells along the longer bbox side)
COARSE_CELLS = 16
# Each kept cell is split into REFINE x REFINE children per level
REFINE = 3
# Ray/segment parameter slack so rays through vertices register a hit
_U_EPS = 1e-9
# Memory cap for the (rays x segments) intersection table
_MAX_TABLE = 4_000_000


def polygon_parts(geometry) -> List[Polygon]:
    if geometry.is_empty:
        return []
    if isinstance(geometry, Polygon):
        return [geometry]
    if hasattr(geometry, 'geoms'):
        parts: List[Polygon] = []
        for part in geometry.geoms:
            parts.extend(polygon_parts(part))
        return parts
    return []


def _outer_only(geometry) -> List[Polygon]:
    return [Polygon(p.exterior) for p in polygon_parts(geometry) if p.area > 0]


def _mask_geometry(shape: Shape):
    ox, oy = shape.origin
    s = shape.pixel_size
    boxes = []
    for row, line in enumerate(shape.mask):
        padded = np.concatenate(([0], line.astype(np.int8), [0]))
        edges = np.flatnonzero(np.diff(padded))
        for start, stop in zip(edges[::2], edges[1::2]):
            boxes.append(box(ox + start * s, oy + row * s, ox + stop * s, oy + (row + 1) * s))
    if not boxes:
        raise EmptyShape("Mask has no foreground cell")
    # border following at pixel resolution: union of row runs, collinear vertices removed
    return unary_union(boxes).simplify(0.0, preserve_topology=True)


def shape_geometry(shape: Shape) -> MultiPolygon:
    """
    Outer-boundary polygon set used by every geometric query.

    Rings are unioned, holes dropped and invalid rings repaired; masks are
    converted by a union of per-row pixel runs.

    Args:
        shape: Polygon or mask shape

    Returns:
        MultiPolygon: Hole-free parts, counterclockwise exteriors

    Raises:
        EmptyShape: If nothing with positive area remains
    """
    if shape.is_mask:
        merged = _mask_geometry(shape)
    else:
        parts = []
        for ring in shape.polygons:
            if len(ring) < 3:
                continue
            polygon = Polygon(ring)
            if not polygon.is_valid:
                polygon = make_valid(polygon)
            parts.extend(polygon_parts(polygon))
        merged = unary_union(parts) if parts else Polygon()

    # a second pass absorbs parts that sat inside a dropped hole
    outer = _outer_only(unary_union(_outer_only(merged)))
    if not outer:
        raise EmptyShape("Shape has no interior")
    outer = [orient(p, sign=1.0) for p in outer]
    return MultiPolygon(outer)


def _boundary_segments(geometry: MultiPolygon) -> np.ndarray:
    segments = []
    for polygon in geometry.geoms:
        coords = np.asarray(polygon.exterior.coords, dtype=float)
        segments.append(np.hstack([coords[:-1], coords[1:]]))
    return np.vstack(segments)


def _signed_distance(geometry, boundary, points: np.ndarray) -> np.ndarray:
    distance = shapely.distance(boundary, shapely.points(points))
    inside = shapely.contains_xy(geometry, points[:, 0], points[:, 1])
    return np.where(inside, distance, -distance)


def _inner_center(geometry: MultiPolygon, grid_step: float) -> Point:
    if grid_step <= 0:
        raise ValueError("grid_step must be positive")
    shapely.prepare(geometry)
    boundary = geometry.boundary
    xmin, ymin, xmax, ymax = geometry.bounds
    target = grid_step / 2.0

    h = max(xmax - xmin, ymax - ymin) / COARSE_CELLS
    h = max(h, target)
    nx = max(1, int(math.ceil((xmax - xmin) / h)))
    ny = max(1, int(math.ceil((ymax - ymin) / h)))
    gx, gy = np.meshgrid(xmin + (np.arange(nx) + 0.5) * h, ymin + (np.arange(ny) + 0.5) * h)
    cells = np.column_stack([gx.ravel(), gy.ravel()])

    best_d = -np.inf
    best_xy = (np.inf, np.inf)
    level = 0
    while True:
        d = _signed_distance(geometry, boundary, cells)
        top = np.flatnonzero(d == d.max())
        pick = top[np.lexsort((cells[top, 0], cells[top, 1]))[0]]
        candidate = (float(cells[pick, 1]), float(cells[pick, 0]))
        if d[pick] > best_d or (d[pick] == best_d and candidate < best_xy):
            best_d = float(d[pick])
            best_xy = candidate
        if h <= target:
            break
        # signed distance is 1-Lipschitz: a cell can only beat best_d if its bound does
        keep = cells[d + (h / 2.0) * math.sqrt(2.0) >= best_d]
        h /= REFINE
        offsets = (np.arange(REFINE) - (REFINE - 1) / 2.0) * h
        ox, oy = np.meshgrid(offsets, offsets)
        children = np.column_stack([ox.ravel(), oy.ravel()])
        cells = (keep[:, None, :] + children[None, :, :]).reshape(-1, 2)
        level += 1

    center = Point(best_xy[1], best_xy[0])
    logger.debug(f"Inner center {center} radius={best_d:.4f} after {level} refinements")

    if best_d < grid_step:
        centroid = geometry.centroid
        fallback = centroid if geometry.contains(centroid) else geometry.representative_point()
        raise DegenerateShape(
            f"Maximum inscribed radius {best_d:.4g} is below grid step {grid_step}",
            fallback=Point(float(fallback.x), float(fallback.y)),
            radius=best_d,
        )
    return center


def compute_inner_center(shape: Shape, grid_step: Optional[float] = None) -> Point:
    """
    Center of the largest circle wholly contained in the shape.

    Maximizes the distance to the boundary to grid_step resolution; ties
    are broken by smallest y, then smallest x.

    Args:
        shape: Valid polygon or mask shape
        grid_step: Resolution in pixels (default Config.GRID_STEP)

    Returns:
        Point: Inner center, strictly inside the shape

    Raises:
        EmptyShape: If the shape has no interior
        DegenerateShape: If the inscribed radius is below grid_step; the
            exception carries the clamped centroid as fallback
    """
    grid_step = Config.GRID_STEP if grid_step is None else grid_step
    return _inner_center(shape_geometry(shape.validate()), grid_step)


def cast_rays(segments: np.ndarray, center: Point, angles: np.ndarray) -> np.ndarray:
    """
    Distance to the farthest boundary hit along each ray.

    Args:
        segments: (S, 4) array of x0, y0, x1, y1
        center: Ray origin
        angles: Ray directions in radians

    Returns:
        np.ndarray: One radius per angle; 0 where a ray hits nothing
    """
    P = segments[:, :2]
    E = segments[:, 2:] - P
    W = P - np.array([center.x, center.y])
    t_num = W[:, 0] * E[:, 1] - W[:, 1] * E[:, 0]

    radii = np.zeros(len(angles))
    chunk = max(1, _MAX_TABLE // max(1, len(segments)))
    for start in range(0, len(angles), chunk):
        theta = angles[start:start + chunk]
        dx, dy = np.cos(theta)[:, None], np.sin(theta)[:, None]
        denom = dx * E[None, :, 1] - dy * E[None, :, 0]
        u_num = W[None, :, 0] * dy - W[None, :, 1] * dx
        with np.errstate(divide='ignore', invalid='ignore'):
            t = t_num[None, :] / denom
            u = u_num / denom
        hit = (denom != 0.0) & (t >= 0.0) & (u >= -_U_EPS) & (u <= 1.0 + _U_EPS)
        t = np.where(hit, t, -np.inf)
        farthest = t.max(axis=1)
        radii[start:start + chunk] = np.where(np.isfinite(farthest), farthest, 0.0)
    return np.maximum(radii, 0.0)


def extract_star_contour(shape: Shape, N: Optional[int] = None, center: Optional[Point] = None,
                         angle0: Optional[float] = None,
                         grid_step: Optional[float] = None) -> StarContour:
    """
    Star-convex centroidal profile of a shape.

    For each theta_i = angle0 + i*2*pi/N the radius is the distance from the
    center to the farthest intersection of the ray with the boundary of
    any part; rays hitting nothing get 0.

    Args:
        shape: Polygon or mask shape
        N: Number of angular samples (default Config.N)
        center: Polar origin; computed with compute_inner_center when omitted
        angle0: Direction of the first ray (default Config.ANGLE0, +x)
        grid_step: Inner-center resolution when center is omitted

    Returns:
        StarContour: Profile with N nonnegative radii

    Raises:
        InvalidN: If N < 3
        CenterOutsideShape: If the supplied center is exterior
    """
    N = Config.N if N is None else int(N)
    if N < 3:
        raise InvalidN(f"N must be at least 3, got {N}")
    angle0 = Config.ANGLE0 if angle0 is None else float(angle0)
    grid_step = Config.GRID_STEP if grid_step is None else grid_step

    geometry = shape_geometry(shape.validate())
    if center is None:
        center = _inner_center(geometry, grid_step)
    elif not geometry.covers(shapely.Point(center.x, center.y)):
        raise CenterOutsideShape(f"Center ({center.x}, {center.y}) lies outside the shape")

    radii = cast_rays(_boundary_segments(geometry), center, sample_angles(N, angle0))
    return StarContour(center=center, radii=radii, angle0=angle0)


def contour_points(contour: StarContour) -> np.ndarray:
    """(N, 2) boundary vertices center + r_i (cos theta_i, sin theta_i)."""
    theta = contour.angles
    return np.column_stack([
        contour.center.x + contour.radii * np.cos(theta),
        contour.center.y + contour.radii * np.sin(theta),
    ])


def contour_to_polygon(contour: StarContour) -> Shape:
    """
    Render a star contour as an N-vertex counterclockwise polygon.

    Zero radii give vertices at the center; the ring is kept verbatim.
    """
    return Shape(polygons=[contour_points(contour)], normalize=False)
