"""Tests for backbones, edge routes and the recursive embedding."""

import pytest

from skeleton_embed.exceptions import CountMismatch, PerturbationFailure
from skeleton_embed.modules.embedder import (
    Backbone,
    Embedding,
    SideTag,
    build_backbone,
    concatenate,
    embed,
    embed_partitioned,
    rec_embed,
    route_edge,
)
from skeleton_embed.modules.geometry import Point, PointSet, Polyline
from skeleton_embed.modules.instance_io import generate_instance
from skeleton_embed.modules.pipeline import run_pipeline
from skeleton_embed.modules.sss import EdgeTag, make_subface
from skeleton_embed.modules.tree import build_balanced_tree
from skeleton_embed.modules.validator import validate_embedding

from .conftest import make_instance


def _row_of_squares(count: int) -> list:
    cells = []
    for i in range(count):
        ring = [Point(i, 0), Point(i + 1, 0), Point(i + 1, 1), Point(i, 1)]
        cells.append(make_subface(i, ring, [EdgeTag.BOUNDARY] * 4, 0))
    return cells


def test_backbone_through_three_squares():
    chain = _row_of_squares(3)
    backbone, scl, scr = build_backbone(chain, Point(0.0, 0.5), PointSet(()))
    assert backbone.vertices == (
        Point(0.0, 0.5),
        Point(1.0, 0.5),
        Point(2.0, 0.5),
        Point(3.0, 0.5),
    )
    assert backbone.perturbed == 0
    assert backbone.bent == 0
    assert backbone.polyline.bends() == 0
    assert len(scl) == len(scr) == 3
    assert all(c.area == pytest.approx(0.5) for c in scl + scr)
    assert all(min(v.y for v in c.vertices) == pytest.approx(0.5) for c in scl)
    assert all(max(v.y for v in c.vertices) == pytest.approx(0.5) for c in scr)


def test_backbone_shifts_off_a_point_on_the_midpoint():
    chain = _row_of_squares(2)
    points = PointSet.from_coords([(0.5, 0.5)])
    chain[0] = make_subface(0, chain[0].vertices, chain[0].edge_tags, 0, (0,))
    backbone, scl, scr = build_backbone(chain, Point(0.0, 0.5), points)
    assert backbone.perturbed >= 1
    assert backbone.points[0] != Point(1.0, 0.5)
    assert sum(c.count for c in scl + scr) == 1


def test_backbone_needs_a_chain():
    with pytest.raises(ValueError):
        build_backbone([], Point(0, 0), PointSet(()))


def test_backbone_origin_off_the_first_cell_is_a_perturbation_failure():
    chain = _row_of_squares(2)
    with pytest.raises(PerturbationFailure):
        build_backbone(chain, Point(0.5, 0.5), PointSet(()))


def test_concatenate_orders_by_side():
    a, b, c = _row_of_squares(3)
    assert concatenate([c], [a, b], SideTag.RIGHT) == [a, b, c]
    assert concatenate([c], [a, b], SideTag.LEFT) == [c, a, b]


def test_route_edge_leaves_backbone_at_anchor():
    backbone = Backbone(Point(0, 0), Point(2, 0), (Point(1, 0),))
    route = route_edge(backbone, Point(0, 0), Point(1, 0), Point(1, 1))
    assert route.vertices == (Point(0, 0), Point(1, 0), Point(1, 1))
    assert route.bends() == 1


def test_route_edge_from_origin_is_straight():
    backbone = Backbone(Point(0, 0), Point(2, 0), (Point(1, 0),))
    route = route_edge(backbone, Point(0, 0), Point(0, 0), Point(1, 1))
    assert route.vertices == (Point(0, 0), Point(1, 1))


def test_route_edge_leaves_backbone_inside_a_segment():
    backbone = Backbone(Point(0, 0), Point(2, 0), (Point(1, 0),))
    route = route_edge(backbone, Point(0, 0), Point(1.5, 0), Point(1.5, 1))
    assert route.vertices == (Point(0, 0), Point(1.5, 0), Point(1.5, 1))
    assert route.bends() == 1


def test_route_edge_rejects_foreign_anchor():
    backbone = Backbone(Point(0, 0), Point(2, 0), (Point(1, 0),))
    with pytest.raises(ValueError):
        route_edge(backbone, Point(0, 0), Point(5, 5), Point(1, 1))


def test_three_points_in_a_square(three_in_a_row):
    inst = three_in_a_row
    embedding = embed(inst.polygon, inst.points, inst.tree)
    assert sorted(embedding.assignment) == [0, 1, 2]
    assert sorted(embedding.routes) == [(0, 1), (0, 2)]
    report = validate_embedding(inst.polygon, inst.points, inst.tree, embedding)
    assert report.passed, report.failures


def test_notched_polygon_embedding(notched_instance):
    inst = notched_instance
    embedding = embed(inst.polygon, inst.points, inst.tree)
    report = validate_embedding(inst.polygon, inst.points, inst.tree, embedding)
    assert report.passed, report.failures
    assert embedding.max_bends <= 4 * inst.polygon.m
    assert len(embedding.routes) == 14


def test_single_point_has_no_routes(triangle):
    points = PointSet.from_coords([(1.0, 0.6)])
    embedding = embed(triangle, points, build_balanced_tree(1))
    assert embedding.assignment == {0: 0}
    assert embedding.routes == {}
    assert embedding.max_bends == 0


def test_empty_tree_embeds_nothing(triangle):
    embedding = embed(triangle, PointSet(()), build_balanced_tree(0))
    assert embedding == Embedding(build_balanced_tree(0), PointSet(()))


def test_embed_rejects_count_mismatch(triangle):
    points = PointSet.from_coords([(1.0, 1.0)])
    with pytest.raises(CountMismatch):
        embed(triangle, points, build_balanced_tree(2))


def test_embedding_is_deterministic(notched_instance):
    inst = notched_instance
    first = embed(inst.polygon, inst.points, inst.tree)
    second = embed(inst.polygon, inst.points, inst.tree)
    assert first.assignment == second.assignment
    assert first.routes == second.routes


def test_l_shape_embedding_through_pipeline():
    inst = make_instance(
        [(0, 0), (10, 0), (10, 3), (4, 3), (4, 10), (0, 10)],
        [(1, 1), (3, 2), (6, 1), (8, 2), (9, 1), (2, 5), (3, 7), (1, 9), (2, 8)],
    )
    result = run_pipeline(inst)
    assert result.report.passed, result.report.failures


@pytest.mark.slow
@pytest.mark.parametrize("seed", range(10))
def test_random_instances_embed_within_budget(seed):
    inst = generate_instance(m=10, n=20, seed=seed)
    result = run_pipeline(inst)
    assert result.report.passed, result.report.failures
    assert result.embedding is not None
    assert result.embedding.max_bends <= 4 * inst.polygon.m


def test_rec_embed_matches_partitioned_embedding(notched_instance):
    result = run_pipeline(notched_instance, until="partition")
    part = result.partition
    tree = notched_instance.tree
    points = notched_instance.points
    expected = embed_partitioned(part, Embedding(tree, points), result.eps)

    embedding = Embedding(tree, points)
    root = tree.root
    embedding.assignment[root] = part.point
    q = points[part.point]
    eps = result.eps
    rec_embed(part.left, q, root, tree.left[root], SideTag.RIGHT, embedding, eps)
    rec_embed(part.right, q, root, tree.right[root], SideTag.LEFT, embedding, eps)
    assert embedding.assignment == expected.assignment
    assert embedding.routes == expected.routes


def test_middle_point_on_the_cut_of_the_stop_cell():
    # the child at (5, 5) sits on a corner of the cell the root's edge enters,
    # so the edge leaves the backbone partway along its first segment
    inst = make_instance(
        [(0, 0), (10, 0), (10, 10), (0, 10)], [(2, 5), (5, 5), (8, 5)]
    )
    embedding = embed(inst.polygon, inst.points, inst.tree)
    assert embedding.assignment[0] == 2
    assert all(r.vertices[0] == Point(8, 5) for r in embedding.routes.values())
    report = validate_embedding(inst.polygon, inst.points, inst.tree, embedding)
    assert report.passed, report.failures


def test_rec_embed_refuses_to_cross_an_earlier_route():
    ring = [Point(0, 0), Point(4, 0), Point(4, 4), Point(0, 4)]
    cell = make_subface(0, ring, [EdgeTag.BOUNDARY] * 4, 0, (1,))
    points = PointSet.from_coords([(0, 2), (2, 2), (3, 3)])
    embedding = Embedding(build_balanced_tree(3), points)
    # a wall from the bottom edge to the top edge cuts q off from its target
    embedding.routes[(7, 8)] = Polyline((Point(1, 0), Point(1, 4)))
    with pytest.raises(PerturbationFailure):
        rec_embed([cell], Point(0, 2), 0, 1, SideTag.RIGHT, embedding)
    assert list(embedding.routes) == [(7, 8)]


@pytest.mark.slow
@pytest.mark.parametrize(
    ("m", "n", "seed"), [(10, 255, 1006), (22, 255, 1166), (12, 100, 1119)]
)
def test_dense_instances_validate_or_fail_cleanly(m, n, seed):
    instance = generate_instance(m=m, n=n, seed=seed)
    try:
        result = run_pipeline(instance)
    except PerturbationFailure as e:
        pytest.xfail(f"known limit for seed {seed}: {e.message}")
    assert result.report.passed, result.report.failures
    assert len(result.embedding.routes) == n - 1
