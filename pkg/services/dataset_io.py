"""
Corpus input/output.

Reads COCO-style annotation documents, writes them back (for synthetic
corpora), extracts star contours per instance, groups them into contour
matrices and persists contours in the internal CSV format:

    # provenance: {...}
    id,category,cx,cy,N,angle0,r_1,...,r_N
"""

import csv
import json
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np
from shapely.geometry import Polygon, box
from shapely.validation import make_valid

from models.basis import ContourMatrix
from models.instance import PER_CATEGORY, CorpusSpec, ExtractedContour, InstanceRecord
from models.shape import Point, Shape, StarContour
from services.contour_extraction import extract_star_contour, polygon_parts
from services.evaluation import split_train_eval
from utils.errors import (DimensionMismatch, EmptyGroup, InputError, ParseError,
                          UnknownCategoryId)
from utils.logger import get_logger
from utils.parallel import ordered_map
from utils.serialization import format_float, read_json, write_json

logger = get_logger(__name__)

PathLike = Union[str, Path]
PROVENANCE_PREFIX = '# provenance: '
UNIVERSAL_KEY = 'universal'


def id_key(value: str) -> Tuple[int, Any]:
    """Sort key: numeric ids numerically, then the rest lexically."""
    text = str(value)
    return (0, int(text)) if text.isdigit() else (1, text)


def _clip(shape: Shape, width: Optional[float], height: Optional[float]) -> Optional[Shape]:
    if not width or not height:
        return shape
    frame = box(0.0, 0.0, width, height)
    rings = []
    for ring in shape.polygons:
        polygon = Polygon(ring)
        if not polygon.is_valid:
            polygon = make_valid(polygon)
        for part in polygon_parts(polygon.intersection(frame)):
            if part.area > 0:
                rings.append(np.asarray(part.exterior.coords)[:-1])
    return Shape(polygons=rings) if rings else None


def load_annotations(path: PathLike, spec: Optional[CorpusSpec] = None) -> List[InstanceRecord]:
    """
    Read a COCO-style annotation document.

    One record per non-crowd polygon annotation whose category passes the
    include/exclude filter; multi-ring segmentations stay one Shape.
    Records are sorted by id.

    Args:
        path: JSON document with images, annotations and categories
        spec: Category filter and clipping options

    Returns:
        list: InstanceRecord per accepted annotation

    Raises:
        ParseError: If the document is malformed (with line/column)
        UnknownCategoryId: If an annotation names a missing category id
    """
    spec = spec or CorpusSpec()
    path = Path(path)
    document = read_json(path)
    if not isinstance(document, dict) or not isinstance(document.get('annotations'), list):
        raise ParseError(f"{path}: expected an object with an 'annotations' list", line=1, column=1)

    categories = {}
    for entry in document.get('categories', []):
        try:
            categories[int(entry['id'])] = str(entry['name'])
        except (KeyError, TypeError, ValueError) as e:
            raise ParseError(f"{path}: invalid category entry {entry!r}") from e
    images = {}
    for entry in document.get('images', []):
        try:
            images[int(entry['id'])] = (entry.get('width'), entry.get('height'))
        except (KeyError, TypeError, ValueError) as e:
            raise ParseError(f"{path}: invalid image entry {entry!r}") from e

    known = set(categories.values())
    for name in sorted(set(spec.include) | set(spec.exclude)):
        if name not in known:
            logger.warning(f"Category filter '{name}' matches no category in {path.name}")

    records = []
    crowd = filtered = 0
    for index, annotation in enumerate(document['annotations']):
        try:
            ann_id = annotation['id']
            category_id = int(annotation['category_id'])
            segmentation = annotation['segmentation']
        except (KeyError, TypeError, ValueError) as e:
            raise ParseError(f"{path}: annotation #{index} is missing {e}") from e
        if int(annotation.get('iscrowd', 0)) == 1:
            crowd += 1
            continue
        if category_id not in categories:
            raise UnknownCategoryId(f"Annotation {ann_id} references unknown category id {category_id}",
                                    annotation_id=str(ann_id), category_id=category_id)
        category = categories[category_id]
        if not spec.accepts(category):
            filtered += 1
            continue
        if not isinstance(segmentation, list):
            logger.warning(f"Annotation {ann_id}: non-polygon segmentation skipped")
            continue
        try:
            shape = Shape.from_coco_segmentation(segmentation)
        except ValueError as e:
            raise ParseError(f"{path}: annotation {ann_id} has a malformed segmentation") from e

        image_id = annotation.get('image_id')
        width, height = images.get(int(image_id), (None, None)) if image_id is not None else (None, None)
        if spec.clip_to_image:
            shape = _clip(shape, width, height)
            if shape is None:
                logger.warning(f"Annotation {ann_id}: nothing left after clipping to the image")
                continue
        records.append(InstanceRecord(id=str(ann_id), category=category, shape=shape,
                                      image_width=width, image_height=height,
                                      image_id=None if image_id is None else int(image_id)))

    records.sort(key=lambda r: id_key(r.id))
    logger.info(f"Loaded {len(records)} instances from {path.name} "
                f"({crowd} crowd, {filtered} filtered by category)")
    return records


def dump_annotations(records: Sequence[InstanceRecord], path: PathLike,
                     info: Optional[Dict[str, Any]] = None) -> Path:
    """
    Write records as a COCO-style document readable by load_annotations.

    Category ids follow the sorted category names, starting at 1. `info`
    becomes the document's info block (load_annotations ignores it).
    """
    names = sorted({r.category for r in records})
    category_ids = {name: index + 1 for index, name in enumerate(names)}
    images: Dict[int, Dict[str, Any]] = {}
    annotations = []
    for position, record in enumerate(sorted(records, key=lambda r: id_key(r.id))):
        if record.shape.is_mask:
            raise InputError(f"Instance {record.id}: mask shapes cannot be written as polygons")
        image_id = record.image_id if record.image_id is not None else position + 1
        images.setdefault(image_id, {'id': image_id, 'width': record.image_width,
                                     'height': record.image_height})
        xmin, ymin, xmax, ymax = record.shape.bbox
        annotations.append({
            'id': int(record.id) if record.id.isdigit() else record.id,
            'image_id': image_id,
            'category_id': category_ids[record.category],
            'iscrowd': 0,
            'segmentation': [ring.reshape(-1).tolist() for ring in record.shape.polygons],
            'bbox': [xmin, ymin, xmax - xmin, ymax - ymin],
        })
    document = {
        'images': [images[k] for k in sorted(images)],
        'annotations': annotations,
        'categories': [{'id': category_ids[name], 'name': name} for name in names],
    }
    if info is not None:
        document['info'] = info
    return write_json(path, document)


def extract_corpus(records: Iterable[InstanceRecord], spec: Optional[CorpusSpec] = None,
                   workers: int = 1) -> Tuple[List[ExtractedContour], List[Tuple[str, str]]]:
    """
    Star contour of every record.

    Instances that cannot be converted (empty or degenerate shapes) are
    skipped and reported with their reason.

    Returns:
        tuple: (contours sorted by id, [(id, reason), ...] of skipped records)
    """
    spec = spec or CorpusSpec()

    def one(record: InstanceRecord):
        try:
            contour = extract_star_contour(record.shape, N=spec.N, angle0=spec.angle0,
                                           grid_step=spec.grid_step)
            return ExtractedContour(id=record.id, category=record.category, contour=contour)
        except InputError as e:
            return e

    records = sorted(records, key=lambda r: id_key(r.id))
    results = ordered_map(one, records, workers)
    contours, skipped = [], []
    for record, result in zip(records, results):
        if isinstance(result, InputError):
            reason = f"{type(result).__name__}: {result}"
            logger.warning(f"Skipping instance {record.id} [{record.category}]: {reason}")
            skipped.append((record.id, reason))
        else:
            contours.append(result)
    logger.info(f"Extracted {len(contours)} contours at N={spec.N} ({len(skipped)} skipped)")
    return contours, skipped


def group_contours(contours: Sequence[ExtractedContour],
                   grouping: str) -> Dict[str, List[ExtractedContour]]:
    """Contours per group key: 'universal', or one key per category."""
    if grouping != PER_CATEGORY:
        return {UNIVERSAL_KEY: list(contours)}
    groups: Dict[str, List[ExtractedContour]] = {}
    for item in contours:
        groups.setdefault(item.category, []).append(item)
    return {key: groups[key] for key in sorted(groups)}


def build_contour_matrix(items: Sequence[Union[InstanceRecord, ExtractedContour]],
                         spec: Optional[CorpusSpec] = None,
                         workers: int = 1) -> Dict[str, ContourMatrix]:
    """
    One N x L contour matrix per group.

    Records are extracted at spec.N first (failures skipped and logged);
    already extracted contours are used as they are.

    Raises:
        EmptyGroup: If a group (or the whole corpus) ends up empty
    """
    spec = spec or CorpusSpec()
    records = [i for i in items if isinstance(i, InstanceRecord)]
    contours = [i for i in items if isinstance(i, ExtractedContour)]
    if records:
        extracted, _ = extract_corpus(records, spec, workers)
        contours.extend(extracted)
    if not contours:
        raise EmptyGroup("No contour survived extraction", grouping=spec.grouping)

    # one key per input category, even when extraction empties it
    keys = [UNIVERSAL_KEY] if spec.grouping != PER_CATEGORY else sorted({i.category for i in items})
    groups = group_contours(contours, spec.grouping)
    matrices = {}
    for key in keys:
        members = groups.get(key, [])
        if not members:
            raise EmptyGroup(f"Group '{key}' has no contours", group_key=key)
        members = sorted(members, key=lambda c: id_key(c.id))
        matrices[key] = ContourMatrix.from_radii([m.contour.radii for m in members],
                                                 group_key=key, ids=[m.id for m in members])
        logger.info(f"Contour matrix '{key}': N={matrices[key].N} L={matrices[key].L}")
    return matrices


def select_split(items: Sequence[Any], spec: CorpusSpec) -> List[Any]:
    """Items of the split named by spec.split ('all', 'train' or 'test')."""
    if spec.split == 'all':
        return list(items)
    train, test = split_train_eval(items, spec.holdout, spec.seed)
    return train if spec.split == 'train' else test


def write_contour_csv(contours: Sequence[ExtractedContour], path: PathLike,
                      provenance: Optional[Dict[str, Any]] = None) -> Path:
    """
    Write contours sorted by id, floats in lossless 17-digit form.

    Raises:
        DimensionMismatch: If contours differ in N
    """
    contours = sorted(contours, key=lambda c: id_key(c.id))
    sizes = {c.contour.N for c in contours}
    if len(sizes) > 1:
        raise DimensionMismatch(f"Contours have mixed resolutions {sorted(sizes)}")
    N = sizes.pop() if sizes else 0

    path = Path(path)
    if path.parent and not path.parent.exists():
        path.parent.mkdir(parents=True)
    with open(path, 'w', newline='', encoding='utf-8') as handle:
        if provenance is not None:
            handle.write(PROVENANCE_PREFIX + json.dumps(provenance, sort_keys=True,
                                                        separators=(',', ':')) + '\n')
        writer = csv.writer(handle, lineterminator='\n')
        writer.writerow(['id', 'category', 'cx', 'cy', 'N', 'angle0']
                        + [f'r_{i}' for i in range(1, N + 1)])
        for item in contours:
            c = item.contour
            writer.writerow([item.id, item.category, format_float(c.center.x),
                             format_float(c.center.y), c.N, format_float(c.angle0)]
                            + [format_float(r) for r in c.radii])
    return path


def read_contour_csv(path: PathLike) -> Tuple[List[ExtractedContour], Optional[Dict[str, Any]]]:
    """
    Read a contour CSV written by write_contour_csv.

    Returns:
        tuple: (contours in file order, provenance dict or None)

    Raises:
        ParseError: With the offending line and column
    """
    path = Path(path)
    provenance = None
    contours = []
    header = None
    with open(path, newline='', encoding='utf-8') as handle:
        lines = handle.read().splitlines()
    for line_no, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        if line.startswith('#'):
            if line.startswith(PROVENANCE_PREFIX):
                try:
                    provenance = json.loads(line[len(PROVENANCE_PREFIX):])
                except json.JSONDecodeError as e:
                    raise ParseError(f"{path}: bad provenance line", line=line_no,
                                     column=len(PROVENANCE_PREFIX) + e.colno) from e
            continue
        row = next(csv.reader([line]))
        if header is None:
            if row[:6] != ['id', 'category', 'cx', 'cy', 'N', 'angle0']:
                raise ParseError(f"{path}: unexpected header", line=line_no, column=1)
            header = row
            continue
        if len(row) != len(header):
            raise ParseError(f"{path}: expected {len(header)} fields, got {len(row)}",
                             line=line_no, column=1)
        column = 3
        try:
            cx = float(row[2])
            column = 4
            cy = float(row[3])
            column = 5
            N = int(row[4])
            column = 6
            angle0 = float(row[5])
            column = 7
            radii = np.array([float(v) for v in row[6:]], dtype=float)
        except ValueError as e:
            raise ParseError(f"{path}: invalid number ({e})", line=line_no, column=column) from e
        if radii.size != N:
            raise ParseError(f"{path}: row declares N={N} but has {radii.size} radii",
                             line=line_no, column=5)
        try:
            contour = StarContour(center=Point(cx, cy), radii=radii, angle0=angle0)
        except (ValueError, InputError) as e:
            raise ParseError(f"{path}: invalid contour {row[0]} ({e})", line=line_no, column=7) from e
        contours.append(ExtractedContour(id=row[0], category=row[1], contour=contour))
    if header is None:
        raise ParseError(f"{path}: missing header", line=1, column=1)
    return contours, provenance
