"""
Boundary-quality evaluation.

Precision, recall and F between a reconstructed and a reference boundary
come from an exact maximum bipartite matching of their points under a
distance tolerance. F-vs-M curves, AUC-F and the nearest-centroid protocol
are built on top of it.
"""

import csv
import math
from pathlib import Path
from typing import Any, Dict, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np
import shapely
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import maximum_bipartite_matching
from scipy.spatial.distance import cdist

from config import Config
from models.basis import ContourMatrix
from models.cluster import ClusterModel
from models.instance import GROUPINGS, PER_CATEGORY, UNIVERSAL, ExtractedContour
from models.report import CurvePoint, EvalReport, FScore, InstanceScore, ScoreSummary
from models.shape import Shape, StarContour
from services import eigenbasis
from services.baseline_descriptors import EIGENCONTOUR, DescriptorModel, build_descriptor, normalize_kind
from services.clustering import kmeans, nearest_centroid
from services.contour_extraction import contour_points, shape_geometry
from utils.errors import EmptyContour, InvalidM, InvalidParams, StarBasisError, TooFewPoints
from utils.logger import get_logger
from utils.parallel import ordered_map
from utils.serialization import format_float

logger = get_logger(__name__)

REFERENCE_STAR = 'star'
REFERENCE_POLYGON = 'polygon'
REFERENCES = (REFERENCE_STAR, REFERENCE_POLYGON)


def boundary_points(item: Any, count: Optional[int] = None) -> np.ndarray:
    """
    Boundary point set of a contour-like object.

    StarContours give their N vertices; Shapes are sampled at `count`
    evenly spaced points along the outer boundary (default: vertices);
    arrays are taken as (k, 2) points.
    """
    if isinstance(item, ExtractedContour):
        item = item.contour
    if isinstance(item, StarContour):
        return contour_points(item)
    if isinstance(item, Shape):
        if count is None and not item.is_mask:
            return np.vstack(item.polygons)
        return _sample_boundary(item, count or Config.N)
    points = np.asarray(item, dtype=float)
    if points.size == 0:
        return points.reshape(0, 2)
    return points.reshape(-1, 2)


def _sample_boundary(shape: Shape, count: int) -> np.ndarray:
    rings = [polygon.exterior for polygon in shape_geometry(shape).geoms]
    lengths = np.array([ring.length for ring in rings])
    # points per ring proportional to its length, at least one each
    shares = np.maximum(1, np.round(count * lengths / lengths.sum()).astype(int))
    samples = []
    for ring, share in zip(rings, shares):
        distances = np.arange(share) * (ring.length / share)
        points = shapely.line_interpolate_point(ring, distances)
        samples.append(shapely.get_coordinates(points))
    return np.vstack(samples)


def _diagonal(points: np.ndarray) -> float:
    extent = points.max(axis=0) - points.min(axis=0)
    return float(math.hypot(extent[0], extent[1]))


def default_tolerance(gt: Any, fraction: Optional[float] = None) -> float:
    """fraction (default Config.TOL_FRACTION) of the reference bbox diagonal."""
    fraction = Config.TOL_FRACTION if fraction is None else fraction
    points = boundary_points(gt)
    if points.shape[0] == 0:
        raise EmptyContour("Reference boundary has no points")
    return fraction * _diagonal(points)


def max_matching(adjacency: np.ndarray) -> int:
    """Cardinality of a maximum matching of a boolean pred x gt adjacency."""
    if adjacency.size == 0 or not adjacency.any():
        return 0
    graph = csr_matrix(adjacency.astype(np.int8))
    match = maximum_bipartite_matching(graph, perm_type='column')
    return int(np.count_nonzero(match >= 0))


def boundary_fscore(pred: Any, gt: Any, tol_px: Optional[float] = None,
                    tol_fraction: Optional[float] = None) -> FScore:
    """
    Boundary precision, recall and F under a matching tolerance.

    Predicted and reference points are connected when they lie within
    tol_px of each other; precision and recall are the matched fractions
    of each side under a maximum-cardinality matching.

    Args:
        pred: StarContour, Shape or (k, 2) points
        gt: StarContour, Shape or (k, 2) points
        tol_px: Matching distance; default tol_fraction times the
            reference bbox diagonal
        tol_fraction: Fraction used for the default tolerance

    Returns:
        FScore: Precision, recall and F in [0, 1]

    Raises:
        EmptyContour: If either side has no points
        InvalidParams: If the tolerance is not positive
    """
    pred_points = boundary_points(pred)
    gt_points = boundary_points(gt)
    if pred_points.shape[0] == 0 or gt_points.shape[0] == 0:
        raise EmptyContour("Boundary point set is empty",
                           n_pred=int(pred_points.shape[0]), n_gt=int(gt_points.shape[0]))
    if tol_px is None:
        fraction = Config.TOL_FRACTION if tol_fraction is None else tol_fraction
        tol_px = fraction * _diagonal(gt_points)
    if not tol_px > 0:
        raise InvalidParams(f"Matching tolerance must be positive, got {tol_px}")

    adjacency = cdist(pred_points, gt_points) <= tol_px
    matched = max_matching(adjacency)
    return FScore(precision=matched / pred_points.shape[0],
                  recall=matched / gt_points.shape[0],
                  tolerance_px=float(tol_px),
                  matched=matched,
                  n_pred=int(pred_points.shape[0]),
                  n_gt=int(gt_points.shape[0]))


def auc_f(curve: Sequence[Union[Tuple[float, float], CurvePoint]]) -> float:
    """
    Area under the F-vs-M curve, normalized by the M range, times 100.

    Raises:
        TooFewPoints: With fewer than 2 points
        InvalidParams: If M is not strictly increasing
    """
    pairs = [(p.M, p.mean_f) if isinstance(p, CurvePoint) else tuple(p) for p in curve]
    if len(pairs) < 2:
        raise TooFewPoints(f"AUC-F needs at least 2 curve points, got {len(pairs)}")
    Ms = [float(m) for m, _ in pairs]
    fs = [float(f) for _, f in pairs]
    if any(b <= a for a, b in zip(Ms, Ms[1:])):
        raise InvalidParams("Curve M values must be strictly increasing")
    area = math.fsum((Ms[i + 1] - Ms[i]) * (fs[i] + fs[i + 1]) / 2.0 for i in range(len(Ms) - 1))
    return 100.0 * area / (Ms[-1] - Ms[0])


def split_train_eval(items: Sequence[Any], holdout: float = 0.0,
                     seed: Optional[int] = None) -> Tuple[List[Any], List[Any]]:
    """
    Training and evaluation lists.

    holdout = 0 evaluates on the training items themselves; otherwise a
    seeded random fraction is held out. Both lists keep input order.

    Raises:
        InvalidParams: If holdout is outside [0, 1)
    """
    items = list(items)
    if not 0.0 <= holdout < 1.0:
        raise InvalidParams(f"holdout must lie in [0, 1), got {holdout}")
    if holdout == 0.0:
        return items, items
    if len(items) < 2:
        raise TooFewPoints("A held-out split needs at least 2 items")
    seed = Config.SEED if seed is None else seed
    n_test = min(len(items) - 1, max(1, int(round(holdout * len(items)))))
    permutation = np.random.default_rng(seed).permutation(len(items))
    test_index = set(int(i) for i in permutation[:n_test])
    train = [item for i, item in enumerate(items) if i not in test_index]
    test = [item for i, item in enumerate(items) if i in test_index]
    return train, test


def _entries(corpus: Iterable[Any]) -> List[ExtractedContour]:
    entries = []
    for index, item in enumerate(corpus):
        if isinstance(item, ExtractedContour):
            entries.append(item)
        elif isinstance(item, StarContour):
            entries.append(ExtractedContour(id=str(index), category='object', contour=item))
        else:
            raise InvalidParams(f"Cannot evaluate item of type {type(item).__name__}")
    return entries


def _matrix(entries: List[ExtractedContour], group_key: Optional[str] = None) -> ContourMatrix:
    return ContourMatrix.from_radii([e.contour.radii for e in entries], group_key=group_key,
                                    ids=[e.id for e in entries])


class _Scorer:
    """Scores reconstructions of one evaluation split against their references."""

    def __init__(self, entries: List[ExtractedContour], tol_px: Optional[float],
                 tol_fraction: Optional[float], reference: str,
                 references: Optional[Mapping[str, Shape]], workers: int):
        if reference not in REFERENCES:
            raise InvalidParams(f"reference must be one of {REFERENCES}, got {reference!r}")
        if reference == REFERENCE_POLYGON and references is None:
            raise InvalidParams("Polygon reference needs the annotation shapes")
        self.entries = entries
        self.tol_px = tol_px
        self.tol_fraction = tol_fraction
        self.workers = workers
        self.gt = [self._reference(e, reference, references) for e in entries]

    @staticmethod
    def _reference(entry, reference, references):
        if reference == REFERENCE_STAR:
            return contour_points(entry.contour)
        return boundary_points(references[entry.id], entry.contour.N)

    def score(self, radii: np.ndarray, clusters: Optional[Sequence[int]] = None) -> List[InstanceScore]:
        def one(index: int) -> InstanceScore:
            entry = self.entries[index]
            pred = entry.contour.with_radii(radii[index])
            result = boundary_fscore(pred, self.gt[index], self.tol_px, self.tol_fraction)
            cluster = None if clusters is None else int(clusters[index])
            return InstanceScore(id=entry.id, category=entry.category, score=result, cluster=cluster)

        return ordered_map(one, range(len(self.entries)), self.workers)


Built = Union[Tuple[DescriptorModel, Optional[float]], StarBasisError]


def _descriptors(kind: str, M_values: Sequence[int], training: List[ExtractedContour],
                 group_key: Optional[str]) -> Dict[int, Built]:
    """(descriptor, training MSE) per M, or the error that prevented building it."""
    N = training[0].contour.N
    out: Dict[int, Built] = {}
    if kind != EIGENCONTOUR:
        for M in M_values:
            try:
                out[M] = (build_descriptor(kind, M, N), None)
            except StarBasisError as e:
                out[M] = e
        return out

    A = _matrix(training, group_key)
    limit = min(A.N, A.L)
    fitted: Any = None
    top = min(max(M_values), limit)
    if top >= 1:
        try:
            # one fit at the largest M; smaller M are its leading columns
            fitted = eigenbasis.fit_eigenbasis(A, top, angle0=training[0].contour.angle0)
        except StarBasisError as e:
            fitted = e
    for M in M_values:
        if isinstance(fitted, StarBasisError):
            out[M] = fitted
        elif M < 1 or M > limit:
            out[M] = InvalidM(f"M={M} must lie in [1, {limit}] for a {A.N}x{A.L} matrix",
                              group_key=group_key)
        else:
            descriptor = build_descriptor(kind, M, N, basis=fitted)
            mse = eigenbasis.reconstruction_error(A, descriptor.basis) ** 2 / (A.N * A.L)
            out[M] = (descriptor, mse)
    return out


def _check_m_values(M_values: Sequence[int]) -> List[int]:
    values = [int(m) for m in M_values]
    if not values:
        raise InvalidParams("M sweep is empty")
    if any(b <= a for a, b in zip(values, values[1:])):
        raise InvalidParams("M values must be strictly increasing")
    return values


def _finish(report: EvalReport) -> EvalReport:
    pairs = report.pairs
    if len(pairs) >= 2:
        report.auc_f = auc_f(pairs)
    else:
        logger.warning(f"{report.descriptor}: {len(pairs)} successful curve point(s); AUC-F not computed")
    for point in report.curve:
        if not point.ok:
            logger.warning(f"{report.descriptor} M={point.M} skipped: {point.error.get('message')}")
    return report


def _gap(M: int, error: StarBasisError, group: Optional[str] = None) -> CurvePoint:
    details = error.to_dict()
    if group is not None:
        details['group'] = group
    return CurvePoint(M=M, error=details)


def _groups(train: List[ExtractedContour], test: List[ExtractedContour],
            grouping: str) -> List[Tuple[Optional[str], List[ExtractedContour], List[ExtractedContour]]]:
    if grouping == UNIVERSAL:
        return [(None, train, test)]
    categories = sorted({e.category for e in test})
    groups = []
    for category in categories:
        group_train = [e for e in train if e.category == category]
        group_test = [e for e in test if e.category == category]
        groups.append((category, group_train, group_test))
    return groups


def grouped_f_curve(corpus: Sequence[Any], descriptor_family: str, M_values: Sequence[int],
                    training: Optional[Sequence[Any]] = None, grouping: str = PER_CATEGORY,
                    tol_px: Optional[float] = None, tol_fraction: Optional[float] = None,
                    reference: str = REFERENCE_STAR,
                    references: Optional[Mapping[str, Shape]] = None,
                    workers: int = 1) -> EvalReport:
    """
    F-vs-M curve with one descriptor per group.

    In per-category mode each category gets its own descriptor fitted on
    its training contours, and the per-instance scores of all categories
    are pooled into one mean per M. Universal mode is the single-group
    case. An M fails as a whole when any group cannot be evaluated at it.

    Args:
        corpus: Evaluation contours (ExtractedContour or StarContour)
        descriptor_family: eigencontour, centroidal or chebyshev
        M_values: Strictly increasing descriptor dimensions
        training: Contours the descriptors are fitted on (default corpus)
        grouping: universal or per-category
        tol_px: Fixed matching tolerance
        tol_fraction: Fraction of the reference diagonal when tol_px is None
        reference: star (N-point star contour) or polygon (annotation)
        references: id -> annotation Shape, for the polygon reference
        workers: Threads for per-instance scoring

    Returns:
        EvalReport: Curve, per-instance scores and AUC-F
    """
    kind = normalize_kind(descriptor_family)
    M_values = _check_m_values(M_values)
    if grouping not in GROUPINGS:
        raise InvalidParams(f"grouping must be one of {GROUPINGS}, got {grouping!r}")
    test = _entries(corpus)
    train = test if training is None else _entries(training)
    if not test:
        raise TooFewPoints("Nothing to evaluate")

    report = EvalReport(descriptor=kind, metadata={
        'descriptor': kind,
        'N': test[0].contour.N,
        'grouping': grouping,
        'reference': reference,
        'tolerance': {'tol_px': tol_px,
                      'tol_fraction': Config.TOL_FRACTION if tol_fraction is None else tol_fraction,
                      'rule': 'fixed' if tol_px is not None else 'fraction_of_reference_diagonal'},
        'num_train': len(train),
        'num_eval': len(test),
    })

    pooled: Dict[int, List[InstanceScore]] = {M: [] for M in M_values}
    mse: Dict[int, List[Tuple[float, int]]] = {M: [] for M in M_values}
    failed: Dict[int, CurvePoint] = {}
    for group, group_train, group_test in _groups(train, test, grouping):
        if not group_train:
            for M in M_values:
                failed.setdefault(M, _gap(M, TooFewPoints("Group has no training contours"), group))
            continue
        scorer = _Scorer(group_test, tol_px, tol_fraction, reference, references, workers)
        built = _descriptors(kind, M_values, group_train, group)
        for M in M_values:
            if M in failed:
                continue
            entry = built[M]
            if isinstance(entry, StarBasisError):
                failed[M] = _gap(M, entry, group)
                continue
            descriptor, train_mse = entry
            R = np.vstack([e.contour.radii for e in group_test])
            try:
                decoded = descriptor.decode_batch(descriptor.encode_batch(R))
            except StarBasisError as e:
                failed[M] = _gap(M, e, group)
                continue
            pooled[M].extend(scorer.score(decoded))
            if train_mse is not None:
                mse[M].append((train_mse, len(group_train)))
            logger.debug(f"{kind} M={M} group={group or 'all'} scored {len(group_test)} contours")

    for M in M_values:
        if M in failed:
            report.curve.append(failed[M])
            continue
        summary = ScoreSummary.from_scores(pooled[M])
        train_mse = None
        if mse[M]:
            weight = sum(n for _, n in mse[M])
            train_mse = math.fsum(value * n for value, n in mse[M]) / weight
        report.curve.append(CurvePoint(M=M, mean_f=summary.mean_f,
                                       mean_precision=summary.mean_precision,
                                       mean_recall=summary.mean_recall,
                                       count=summary.count, train_mse=train_mse))
        report.per_instance[M] = summary.per_instance
    return _finish(report)


def f_curve(corpus: Sequence[Any], descriptor_family: str, M_values: Sequence[int],
            training: Optional[Sequence[Any]] = None, **options: Any) -> EvalReport:
    """
    F-vs-M curve of one descriptor family with a single (universal) descriptor.

    For each M the descriptor is fitted (eigencontour) or parameterized
    (baselines) on the training contours, every evaluation contour is
    encoded and decoded, and the mean boundary F against its reference is
    recorded. An M that cannot be evaluated becomes a gap in the curve.

    Raises:
        InvalidParams: If the M sweep is empty or not increasing
    """
    return grouped_f_curve(corpus, descriptor_family, M_values, training=training,
                           grouping=UNIVERSAL, **options)


def clustering_fscore(corpus: Sequence[Any], model: ClusterModel, descriptor: DescriptorModel,
                      tol_px: Optional[float] = None, tol_fraction: Optional[float] = None,
                      workers: int = 1) -> ScoreSummary:
    """
    Nearest-centroid matching performance.

    Every contour is encoded, assigned its nearest centroid, and the
    decoded centroid contour (placed at the contour's center) is scored
    against the contour.

    Returns:
        ScoreSummary: Mean precision, recall and F plus per-instance scores
    """
    entries = _entries(corpus)
    if not entries:
        raise TooFewPoints("Nothing to evaluate")
    R = np.vstack([e.contour.radii for e in entries])
    coeffs = descriptor.encode_batch(R)
    clusters = [nearest_centroid(c, model) for c in coeffs]
    centroid_radii = descriptor.decode_batch(model.centroids)
    scorer = _Scorer(entries, tol_px, tol_fraction, REFERENCE_STAR, None, workers)
    summary = ScoreSummary.from_scores(scorer.score(centroid_radii[clusters], clusters))
    logger.info(f"Nearest-centroid protocol K={model.K}: mean F={summary.mean_f:.4f} "
                f"over {summary.count} contours")
    return summary


def clustering_curve(corpus: Sequence[Any], descriptor_family: str, M_values: Sequence[int],
                     K: int, seed: Optional[int] = None, max_iter: Optional[int] = None,
                     training: Optional[Sequence[Any]] = None, tol_px: Optional[float] = None,
                     tol_fraction: Optional[float] = None, workers: int = 1) -> EvalReport:
    """
    Nearest-centroid protocol swept over M.

    For each M the descriptor is built on the training contours, K-means
    runs on their coefficients, and clustering_fscore scores the
    evaluation contours.
    """
    kind = normalize_kind(descriptor_family)
    M_values = _check_m_values(M_values)
    test = _entries(corpus)
    train = test if training is None else _entries(training)
    if not test or not train:
        raise TooFewPoints("Nothing to evaluate")

    report = EvalReport(descriptor=kind, metadata={
        'descriptor': kind,
        'protocol': 'clustering',
        'N': test[0].contour.N,
        'K': K,
        'seed': Config.SEED if seed is None else seed,
        'tolerance': {'tol_px': tol_px,
                      'tol_fraction': Config.TOL_FRACTION if tol_fraction is None else tol_fraction},
        'num_train': len(train),
        'num_eval': len(test),
    })
    built = _descriptors(kind, M_values, train, None)
    R_train = np.vstack([e.contour.radii for e in train])
    for M in M_values:
        entry = built[M]
        try:
            if isinstance(entry, StarBasisError):
                raise entry
            descriptor, train_mse = entry
            model = kmeans(descriptor.encode_batch(R_train), K, seed=seed, max_iter=max_iter,
                           descriptor_ref=descriptor.descriptor_id)
            summary = clustering_fscore(test, model, descriptor, tol_px, tol_fraction, workers)
        except StarBasisError as e:
            report.curve.append(_gap(M, e))
            continue
        report.curve.append(CurvePoint(M=M, mean_f=summary.mean_f,
                                       mean_precision=summary.mean_precision,
                                       mean_recall=summary.mean_recall, count=summary.count,
                                       train_mse=train_mse))
        report.per_instance[M] = summary.per_instance
    return _finish(report)


def write_curve_csv(report: EvalReport, path: Union[str, Path]) -> Path:
    """Flat `M,mean_f` rows of the successful curve points."""
    path = Path(path)
    if path.parent and not path.parent.exists():
        path.parent.mkdir(parents=True)
    with open(path, 'w', newline='', encoding='utf-8') as handle:
        writer = csv.writer(handle, lineterminator='\n')
        writer.writerow(['M', 'mean_f'])
        for M, f in report.pairs:
            writer.writerow([M, format_float(f)])
    return path
