import json
import logging

import numpy as np
import pytest

from models.instance import PER_CATEGORY, CorpusSpec, ExtractedContour, InstanceRecord
from models.shape import Point, Shape, StarContour
from services.dataset_io import (build_contour_matrix, dump_annotations, extract_corpus, group_contours,
                                 load_annotations, read_contour_csv, select_split, write_contour_csv)
from tests.conftest import regular_polygon
from utils.errors import DimensionMismatch, EmptyGroup, ParseError, UnknownCategoryId


def write_document(path, annotations, categories=None, images=None):
    document = {
        'images': images or [{'id': 1, 'width': 100, 'height': 100}],
        'categories': categories or [{'id': 1, 'name': 'thing'}],
        'annotations': annotations,
    }
    path.write_text(json.dumps(document), encoding='utf-8')
    return path


TRIANGLE = {'id': 7, 'image_id': 1, 'category_id': 1, 'iscrowd': 0,
            'segmentation': [[0, 0, 10, 0, 0, 10]]}


class TestLoadAnnotations:

    def test_single_triangle(self, tmp_path):
        records = load_annotations(write_document(tmp_path / 'a.json', [TRIANGLE]))
        assert len(records) == 1
        assert records[0].id == '7'
        assert records[0].category == 'thing'
        assert records[0].shape.vertex_count == 3
        assert (records[0].image_width, records[0].image_height) == (100, 100)

    def test_crowd_annotations_are_skipped(self, tmp_path):
        crowd = dict(TRIANGLE, iscrowd=1)
        assert load_annotations(write_document(tmp_path / 'a.json', [crowd])) == []

    def test_fixture_matches_manifest(self, fixtures_dir, mini_manifest):
        records = load_annotations(fixtures_dir / 'mini.json')
        assert len(records) == mini_manifest['instances']
        counts = {}
        for record in records:
            counts[record.category] = counts.get(record.category, 0) + 1
            assert record.shape.vertex_count == mini_manifest['vertices'][record.id]
        assert counts == mini_manifest['categories']
        by_id = {r.id: r for r in records}
        for ann_id, rings in mini_manifest['rings'].items():
            assert len(by_id[ann_id].shape.polygons) == rings

    def test_records_sorted_by_numeric_id(self, fixtures_dir):
        ids = [r.id for r in load_annotations(fixtures_dir / 'mini.json')]
        assert ids == [str(i) for i in range(1, 21)]

    def test_category_filters(self, fixtures_dir):
        kept = load_annotations(fixtures_dir / 'mini.json', CorpusSpec(exclude=['misc']))
        assert len(kept) == 16
        only = load_annotations(fixtures_dir / 'mini.json', CorpusSpec(include=['person']))
        assert {r.category for r in only} == {'person'}

    def test_unknown_filter_name_warns(self, fixtures_dir, caplog):
        with caplog.at_level(logging.WARNING, logger='starbasis'):
            records = load_annotations(fixtures_dir / 'mini.json', CorpusSpec(include=['truck']))
        assert records == []
        assert any('truck' in message for message in caplog.messages)

    def test_unknown_category_id(self, tmp_path):
        with pytest.raises(UnknownCategoryId):
            load_annotations(write_document(tmp_path / 'a.json', [dict(TRIANGLE, category_id=9)]))

    def test_crowd_annotation_with_unknown_category_is_skipped(self, tmp_path):
        crowd = dict(TRIANGLE, id=8, category_id=9, iscrowd=1)
        assert load_annotations(write_document(tmp_path / 'a.json', [crowd, TRIANGLE])) != []
        assert load_annotations(write_document(tmp_path / 'b.json', [crowd])) == []

    def test_malformed_json_reports_line(self, tmp_path):
        path = tmp_path / 'broken.json'
        path.write_text('{\n  "annotations": [\n    {"id": 1,,}\n  ]\n}\n', encoding='utf-8')
        with pytest.raises(ParseError) as info:
            load_annotations(path)
        assert info.value.line == 3

    def test_missing_annotations_list(self, tmp_path):
        path = tmp_path / 'a.json'
        path.write_text('{"images": []}', encoding='utf-8')
        with pytest.raises(ParseError):
            load_annotations(path)

    def test_clip_to_image(self, tmp_path):
        overhanging = dict(TRIANGLE, segmentation=[[90, 10, 120, 10, 120, 40, 90, 40]])
        path = write_document(tmp_path / 'a.json', [overhanging])
        records = load_annotations(path, CorpusSpec(clip_to_image=True))
        xmin, ymin, xmax, ymax = records[0].shape.bbox
        assert (xmin, xmax) == (90.0, 100.0)
        unclipped = load_annotations(path)
        assert unclipped[0].shape.bbox[2] == 120.0

    def test_dump_and_reload(self, tmp_path, circle_records):
        path = dump_annotations(circle_records, tmp_path / 'dump.json')
        records = load_annotations(path)
        assert [r.id for r in records] == ['1', '2', '3']
        np.testing.assert_array_equal(records[0].shape.polygons[0], circle_records[0].shape.polygons[0])

    def test_info_block_is_written_and_ignored_on_load(self, tmp_path, circle_records):
        path = dump_annotations(circle_records, tmp_path / 'dump.json', info={'provenance': {'inputs': {'x': 'abc'}}})
        assert json.loads(path.read_text(encoding='utf-8'))['info'] == {'provenance': {'inputs': {'x': 'abc'}}}
        assert [r.id for r in load_annotations(path)] == ['1', '2', '3']


class TestExtraction:

    def test_fixture_failures_are_logged_and_skipped(self, fixtures_dir, mini_manifest, caplog):
        records = load_annotations(fixtures_dir / 'mini.json')
        with caplog.at_level(logging.WARNING, logger='starbasis'):
            contours, skipped = extract_corpus(records, CorpusSpec(N=36))
        assert [i for i, _ in skipped] == mini_manifest['extraction_failures']
        assert 'DegenerateShape' in skipped[0][1]
        assert len(contours) == mini_manifest['instances'] - len(mini_manifest['extraction_failures'])
        assert any('Skipping instance 20' in message for message in caplog.messages)

    def test_universal_matrix(self, fixtures_dir, mini_manifest):
        records = load_annotations(fixtures_dir / 'mini.json')
        matrices = build_contour_matrix(records, CorpusSpec(N=36))
        assert list(matrices) == ['universal']
        assert matrices['universal'].N == 36
        assert matrices['universal'].L == mini_manifest['instances'] - len(mini_manifest['extraction_failures'])

    def test_per_category_matrices_partition_the_corpus(self, fixtures_dir):
        records = load_annotations(fixtures_dir / 'mini.json')
        matrices = build_contour_matrix(records, CorpusSpec(N=36, grouping=PER_CATEGORY))
        assert sorted(matrices) == ['car', 'misc', 'person']
        assert {key: m.L for key, m in matrices.items()} == {'car': 8, 'misc': 3, 'person': 8}

    def test_identical_circles_give_identical_columns(self, circle_records):
        matrix = build_contour_matrix(circle_records, CorpusSpec(N=36))['universal']
        assert matrix.L == 3
        np.testing.assert_array_equal(matrix.data[:, 0], matrix.data[:, 1])
        np.testing.assert_array_equal(matrix.data[:, 0], matrix.data[:, 2])

    def test_two_categories(self):
        records = [InstanceRecord(id=str(i), category='a' if i < 2 else 'b',
                                  shape=Shape.from_polygon(regular_polygon(radius=5.0 + i, vertices=24)))
                   for i in range(4)]
        matrices = build_contour_matrix(records, CorpusSpec(N=24, grouping=PER_CATEGORY))
        assert {key: m.L for key, m in matrices.items()} == {'a': 2, 'b': 2}
        assert matrices['a'].ids == ['0', '1']

    def test_nothing_extracted(self):
        sliver = InstanceRecord(id='1', category='a', shape=Shape.from_polygon([[0, 0], [50, 0.01], [0, 0.02]]))
        with pytest.raises(EmptyGroup):
            build_contour_matrix([sliver], CorpusSpec(N=24))

    def test_category_emptied_by_extraction(self):
        cars = [InstanceRecord(id=str(i), category='car',
                               shape=Shape.from_polygon(regular_polygon(radius=10.0 + i, vertices=24)))
                for i in (1, 2)]
        pole = InstanceRecord(id='3', category='pole', shape=Shape.from_polygon([[0, 0], [50, 0.01], [0, 0.02]]))
        with pytest.raises(EmptyGroup) as info:
            build_contour_matrix(cars + [pole], CorpusSpec(N=24, grouping=PER_CATEGORY))
        assert 'pole' in str(info.value)
        assert list(build_contour_matrix(cars + [pole], CorpusSpec(N=24))) == ['universal']

    def test_group_contours(self):
        contour = StarContour(center=Point(0.0, 0.0), radii=np.ones(8))
        items = [ExtractedContour(id=str(i), category=c, contour=contour) for i, c in enumerate('bab')]
        assert list(group_contours(items, PER_CATEGORY)) == ['a', 'b']
        assert list(group_contours(items, 'universal')) == ['universal']

    def test_select_split(self):
        items = list(range(10))
        assert select_split(items, CorpusSpec()) == items
        train = select_split(items, CorpusSpec(split='train', holdout=0.3, seed=1))
        test = select_split(items, CorpusSpec(split='test', holdout=0.3, seed=1))
        assert sorted(train + test) == items and len(test) == 3


class TestContourCsv:

    def _contours(self, rng):
        return [ExtractedContour(id=str(i), category='cat,with comma' if i == 2 else 'obj',
                                 contour=StarContour(center=Point(*rng.uniform(0, 100, 2)),
                                                     radii=rng.uniform(0, 30, 16), angle0=0.25))
                for i in (10, 2, 1)]

    def test_round_trip_is_lossless(self, rng, tmp_path):
        contours = self._contours(rng)
        path = write_contour_csv(contours, tmp_path / 'c.csv', provenance={'source': 'unit'})
        restored, provenance = read_contour_csv(path)
        assert provenance == {'source': 'unit'}
        assert [c.id for c in restored] == ['1', '2', '10']
        originals = {c.id: c for c in contours}
        for item in restored:
            original = originals[item.id].contour
            assert item.category == originals[item.id].category
            assert item.contour.center == original.center
            assert item.contour.angle0 == original.angle0
            np.testing.assert_array_equal(item.contour.radii, original.radii)

    def test_header(self, rng, tmp_path):
        path = write_contour_csv(self._contours(rng), tmp_path / 'c.csv')
        header = path.read_text(encoding='utf-8').splitlines()[0].split(',')
        assert header[:6] == ['id', 'category', 'cx', 'cy', 'N', 'angle0']
        assert header[6] == 'r_1' and header[-1] == 'r_16'

    def test_mixed_resolution(self, tmp_path):
        items = [ExtractedContour(id=str(n), category='a',
                                  contour=StarContour(center=Point(0.0, 0.0), radii=np.ones(n)))
                 for n in (8, 9)]
        with pytest.raises(DimensionMismatch):
            write_contour_csv(items, tmp_path / 'c.csv')

    def test_bad_number_reports_position(self, tmp_path):
        path = tmp_path / 'c.csv'
        path.write_text('id,category,cx,cy,N,angle0,r_1,r_2,r_3\n'
                        '1,a,0.0,0.0,3,0.0,1.0,1.0,1.0\n'
                        '2,a,0.0,zero,3,0.0,1.0,1.0,1.0\n', encoding='utf-8')
        with pytest.raises(ParseError) as info:
            read_contour_csv(path)
        assert info.value.line == 3
        assert info.value.column == 4

    def test_negative_radius_is_rejected(self, tmp_path):
        path = tmp_path / 'c.csv'
        path.write_text('id,category,cx,cy,N,angle0,r_1,r_2,r_3\n'
                        '1,a,0.0,0.0,3,0.0,1.0,-1.0,1.0\n', encoding='utf-8')
        with pytest.raises(ParseError) as info:
            read_contour_csv(path)
        assert info.value.line == 2
