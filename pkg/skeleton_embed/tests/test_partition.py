"""Tests for radial sweeps, cell division and the top-level partition."""

import numpy as np
import pytest

from skeleton_embed.exceptions import CountMismatch, InsufficientPoints
from skeleton_embed.modules.geometry import (
    Direction,
    Point,
    PointSet,
    Segment,
    SimplePolygon,
)
from skeleton_embed.modules.partition import (
    Anchor,
    center_candidates,
    divide_subface,
    find_anchors,
    merge_convex_cells,
    partition,
    partition_cycle,
    radial_argsort,
    radial_order,
)
from skeleton_embed.modules.skeleton import compute_straight_skeleton
from skeleton_embed.modules.sss import (
    EdgeTag,
    make_subface,
    middle_point,
    open_cycle,
    split_reflex_vertices,
)
from skeleton_embed.modules.tree import BalancedBinaryTree, build_balanced_tree
from skeleton_embed.modules.validator import validate_partition

from .conftest import NOTCHED, NOTCHED_POINTS

DIVIDE_POINTS = PointSet.from_coords([(1.0, 0.5), (1.0, 1.0), (1.0, 1.5)])


def _box(x0, y0, x1, y1, point_ids=(), tag=EdgeTag.BOUNDARY):
    ring = [Point(x0, y0), Point(x1, y0), Point(x1, y1), Point(x0, y1)]
    return make_subface(0, ring, [tag] * 4, 0, point_ids)


def _partition(polygon: SimplePolygon, points: PointSet, tree: BalancedBinaryTree):
    return partition(polygon, points, tree), polygon.eps()


def test_radial_order_counter_clockwise_from_start():
    pts = [Point(0, 1), Point(-1, 0), Point(1, 0), Point(0, -1)]
    ordered = radial_order(pts, Point(0, 0))
    assert ordered == [Point(1, 0), Point(0, 1), Point(-1, 0), Point(0, -1)]


def test_radial_order_clockwise_and_distance_ties():
    pts = [Point(2, 0), Point(1, 0), Point(0, 1)]
    assert radial_order(pts, Point(0, 0), Direction(1.0, 0.0), clockwise=True) == [
        Point(1, 0),
        Point(2, 0),
        Point(0, 1),
    ]


def test_radial_argsort_empty():
    assert radial_argsort(np.zeros((0, 2)), Point(0, 0)).size == 0


def test_divide_subface_counter_clockwise_sweep():
    cf = _box(0, 0, 2, 2, point_ids=(0, 1, 2))
    division = divide_subface(cf, Point(0.0, 1.0), 2, DIVIDE_POINTS)
    assert division.point == 1
    assert division.near.point_ids == (0,)
    assert division.far.point_ids == (2,)
    assert division.near.area == pytest.approx(2.0)
    assert division.far.area == pytest.approx(2.0)
    assert sorted(division.chord) == [Point(0.0, 1.0), Point(2.0, 1.0)]
    assert EdgeTag.DIVIDING in division.near.edge_tags


def test_divide_subface_clockwise_sweep_flips_sides():
    cf = _box(0, 0, 2, 2, point_ids=(0, 1, 2))
    division = divide_subface(cf, Point(0.0, 1.0), 2, DIVIDE_POINTS, clockwise=True)
    assert division.point == 1
    assert division.near.point_ids == (2,)
    assert division.far.point_ids == (0,)


def test_divide_subface_first_point():
    cf = _box(0, 0, 2, 2, point_ids=(0, 1, 2))
    division = divide_subface(cf, Point(0.0, 1.0), 1, DIVIDE_POINTS)
    assert division.point == 0
    assert division.near.count == 0
    assert division.far.point_ids == (1, 2)


@pytest.mark.parametrize("k", [0, 4])
def test_divide_subface_rejects_out_of_range_k(k):
    cf = _box(0, 0, 2, 2, point_ids=(0, 1, 2))
    with pytest.raises(CountMismatch):
        divide_subface(cf, Point(0.0, 1.0), k, DIVIDE_POINTS)


def test_find_anchors_keeps_both_pieces_attached():
    cf = _box(0, 0, 2, 2)
    before = Segment(Point(0, 0), Point(0, 1))
    after = Segment(Point(2, 0), Point(2, 2))
    candidates = [Point(0, 1), Point(2, 1), Point(0, 0)]
    assert find_anchors(cf, before, after, candidates) == [Anchor(Point(0, 0), True)]


def test_find_anchors_skips_points_off_the_boundary():
    cf = _box(0, 0, 2, 2)
    assert find_anchors(cf, None, None, [Point(1, 1)]) == []


def test_center_candidates_prefer_internal_dummy_midpoint():
    ring = [Point(0, 0), Point(4, 0), Point(4, 2), Point(0, 2)]
    tags = [
        EdgeTag.BOUNDARY,
        EdgeTag.BCD,
        EdgeTag.INTERNAL_DUMMY,
        EdgeTag.BCD,
    ]
    cf = make_subface(0, ring, tags, 0)
    candidates = center_candidates(cf)
    assert candidates[0] == Point(2, 2)
    assert set(ring) <= set(candidates)


def test_partition_triangle_contract(triangle):
    points = PointSet.from_coords([(0.5, 0.5), (2.0, 0.4), (0.3, 2.0)])
    tree = build_balanced_tree(3)
    result, eps = _partition(triangle, points, tree)
    assert result.left_count == 1
    assert result.right_count == 1
    report = validate_partition(triangle, points, tree, result, eps)
    assert report.passed, report.failures


def test_partition_notched_polygon_contract():
    polygon = SimplePolygon.from_coords(NOTCHED)
    points = PointSet.from_coords(NOTCHED_POINTS)
    tree = build_balanced_tree(15)
    result, eps = _partition(polygon, points, tree)
    assert (result.left_count, result.right_count) == (7, 7)
    report = validate_partition(polygon, points, tree, result, eps)
    assert report.passed, report.failures


def test_partition_rejects_wrong_point_count(triangle):
    points = PointSet.from_coords([(0.5, 0.5), (2.0, 0.4)])
    with pytest.raises(CountMismatch):
        partition(triangle, points, build_balanced_tree(3))


def test_partition_of_empty_tree_is_an_error(triangle):
    with pytest.raises(ValueError):
        partition(triangle, PointSet(()), build_balanced_tree(0))


def test_partition_needs_enough_points(rectangle):
    skeleton = compute_straight_skeleton(rectangle)
    ms, sf = middle_point(skeleton)
    cycle = open_cycle(split_reflex_vertices(skeleton, start_face=sf), ms, sf)
    points = PointSet.from_coords([(1.0, 0.5), (2.0, 1.5)])
    with pytest.raises(InsufficientPoints):
        partition_cycle(cycle, points, left_size=5, eps=skeleton.eps)


def test_merge_convex_cells_joins_boxes_into_rectangle():
    chain = [_box(0, 0, 1, 1, (0,)), _box(1, 0, 2, 1, (1,))]
    merged = merge_convex_cells(chain)
    assert len(merged) == 1
    assert merged[0].area == pytest.approx(2.0)
    assert merged[0].point_ids == (0, 1)
    assert len(merged[0].vertices) == 4


def test_merge_convex_cells_keeps_non_convex_unions_apart():
    chain = [_box(0, 0, 1, 1), _box(1, 0, 2, 1), _box(1, 1, 2, 2)]
    merged = merge_convex_cells(chain)
    assert len(merged) == 2
    assert sum(c.area for c in merged) == pytest.approx(3.0)
