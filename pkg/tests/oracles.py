"""
Brute-force reference implementations used by the test-suite.

Each oracle is written with plain loops (or plain numpy arithmetic) and
shares no code path with the package: no SVD, no shapely, no scipy.
"""

import itertools
import math
from typing import List, Sequence, Tuple

import numpy as np


def jacobi_eigenvalues(S: np.ndarray, sweeps: int = 100, tol: float = 1e-15) -> np.ndarray:
    """Eigenvalues of a symmetric matrix by cyclic Jacobi rotations, descending."""
    A = [list(map(float, row)) for row in S]
    n = len(A)
    for _ in range(sweeps):
        off = math.fsum(A[i][j] ** 2 for i in range(n) for j in range(n) if i != j)
        if off <= tol * tol:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                if abs(A[p][q]) < 1e-300:
                    continue
                theta = (A[q][q] - A[p][p]) / (2.0 * A[p][q])
                t = math.copysign(1.0, theta) / (abs(theta) + math.sqrt(theta * theta + 1.0))
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                for k in range(n):
                    akp, akq = A[k][p], A[k][q]
                    A[k][p] = c * akp - s * akq
                    A[k][q] = s * akp + c * akq
                for k in range(n):
                    apk, aqk = A[p][k], A[q][k]
                    A[p][k] = c * apk - s * aqk
                    A[q][k] = s * apk + c * aqk
    return np.array(sorted((A[i][i] for i in range(n)), reverse=True))


def gaussian_solve(A: Sequence[Sequence[float]], b: Sequence[float]) -> List[float]:
    """Solve A x = b by Gaussian elimination with partial pivoting."""
    n = len(A)
    M = [list(map(float, A[i])) + [float(b[i])] for i in range(n)]
    for col in range(n):
        pivot = max(range(col, n), key=lambda r: abs(M[r][col]))
        M[col], M[pivot] = M[pivot], M[col]
        for row in range(col + 1, n):
            factor = M[row][col] / M[col][col]
            for k in range(col, n + 1):
                M[row][k] -= factor * M[col][k]
    x = [0.0] * n
    for row in range(n - 1, -1, -1):
        x[row] = (M[row][n] - sum(M[row][k] * x[k] for k in range(row + 1, n))) / M[row][row]
    return x


def chebyshev_lstsq(r: Sequence[float], M: int) -> List[float]:
    """Least-squares Chebyshev coefficients via the normal equations."""
    N = len(r)
    xs = [2.0 * j / N - 1.0 for j in range(N)]
    rows = []
    for x in xs:
        T = [1.0, x]
        while len(T) < M:
            T.append(2.0 * x * T[-1] - T[-2])
        rows.append(T[:M])
    normal = [[sum(row[i] * row[j] for row in rows) for j in range(M)] for i in range(M)]
    rhs = [sum(row[i] * r[k] for k, row in enumerate(rows)) for i in range(M)]
    return gaussian_solve(normal, rhs)


def augmenting_matching(adjacency: Sequence[Sequence[bool]]) -> int:
    """Maximum bipartite matching cardinality by repeated augmenting paths."""
    n_left = len(adjacency)
    n_right = len(adjacency[0]) if n_left else 0
    match_right = [-1] * n_right

    def augment(u: int, seen: List[bool]) -> bool:
        for v in range(n_right):
            if adjacency[u][v] and not seen[v]:
                seen[v] = True
                if match_right[v] == -1 or augment(match_right[v], seen):
                    match_right[v] = u
                    return True
        return False

    return sum(1 for u in range(n_left) if augment(u, [False] * n_right))


def fscore_oracle(pred: np.ndarray, gt: np.ndarray, tol: float) -> Tuple[int, float, float]:
    """(matched, precision, recall) by explicit distances and augmenting paths."""
    adjacency = [[math.hypot(p[0] - g[0], p[1] - g[1]) <= tol for g in gt] for p in pred]
    matched = augmenting_matching(adjacency)
    return matched, matched / len(pred), matched / len(gt)


def best_two_partition(points: np.ndarray) -> Tuple[Tuple[int, ...], float]:
    """Labels and inertia of the best split of points into two nonempty clusters."""
    L = len(points)
    best_labels, best_inertia = None, math.inf
    for labels in itertools.product((0, 1), repeat=L):
        if labels[0] != 0 or len(set(labels)) < 2:
            continue
        inertia = 0.0
        for k in (0, 1):
            members = points[[i for i in range(L) if labels[i] == k]]
            inertia += float(((members - members.mean(axis=0)) ** 2).sum())
        if inertia < best_inertia:
            best_labels, best_inertia = labels, inertia
    return best_labels, best_inertia


def ray_radii(ring: np.ndarray, center: Tuple[float, float], angles: Sequence[float]) -> List[float]:
    """Farthest ray/edge intersection per angle, one segment at a time."""
    cx, cy = center
    out = []
    n = len(ring)
    for theta in angles:
        dx, dy = math.cos(theta), math.sin(theta)
        best = 0.0
        for i in range(n):
            x0, y0 = ring[i]
            x1, y1 = ring[(i + 1) % n]
            ex, ey = x1 - x0, y1 - y0
            denom = dx * ey - dy * ex
            if denom == 0.0:
                continue
            wx, wy = x0 - cx, y0 - cy
            t = (wx * ey - wy * ex) / denom
            u = (wx * dy - wy * dx) / denom
            if t >= 0.0 and -1e-9 <= u <= 1.0 + 1e-9:
                best = max(best, t)
        out.append(best)
    return out


def _segment_distance(px: np.ndarray, py: np.ndarray, ring: np.ndarray) -> np.ndarray:
    d = np.full(px.shape, np.inf)
    n = len(ring)
    for i in range(n):
        x0, y0 = ring[i]
        x1, y1 = ring[(i + 1) % n]
        ex, ey = x1 - x0, y1 - y0
        t = np.clip(((px - x0) * ex + (py - y0) * ey) / (ex * ex + ey * ey), 0.0, 1.0)
        d = np.minimum(d, np.hypot(px - (x0 + t * ex), py - (y0 + t * ey)))
    return d


def _inside(px: np.ndarray, py: np.ndarray, ring: np.ndarray) -> np.ndarray:
    inside = np.zeros(px.shape, dtype=bool)
    n = len(ring)
    for i in range(n):
        x0, y0 = ring[i]
        x1, y1 = ring[(i + 1) % n]
        crosses = (y0 > py) != (y1 > py)
        with np.errstate(divide='ignore', invalid='ignore'):
            x_at = x0 + (py - y0) * (x1 - x0) / (y1 - y0)
        inside ^= crosses & (px < x_at)
    return inside


def inscribed_circle_grid(ring: np.ndarray, step: float) -> Tuple[Tuple[float, float], float]:
    """Grid search of the deepest interior point of a simple polygon."""
    ring = np.asarray(ring, dtype=float)
    xs = np.arange(ring[:, 0].min(), ring[:, 0].max() + step, step)
    ys = np.arange(ring[:, 1].min(), ring[:, 1].max() + step, step)
    px, py = np.meshgrid(xs, ys)
    depth = np.where(_inside(px, py, ring), _segment_distance(px, py, ring), -np.inf)
    index = np.unravel_index(np.argmax(depth), depth.shape)
    return (float(px[index]), float(py[index])), float(depth[index])


def depth_at(ring: np.ndarray, point: Tuple[float, float]) -> float:
    """Distance from an interior point to the polygon boundary (negative outside)."""
    px, py = np.array([point[0]]), np.array([point[1]])
    d = float(_segment_distance(px, py, np.asarray(ring, dtype=float))[0])
    return d if bool(_inside(px, py, np.asarray(ring, dtype=float))[0]) else -d
