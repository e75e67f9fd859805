"""Tests for the embedding oracles."""

import pytest

from skeleton_embed.modules.embedder import Embedding
from skeleton_embed.modules.geometry import IntersectionKind, Point, Polyline
from skeleton_embed.modules.validator import (
    ValidationReport,
    brute_force_crossings,
    validate_embedding,
)


def _line(*coords) -> Polyline:
    return Polyline(tuple(Point(x, y) for x, y in coords))


@pytest.fixture
def drawn(three_in_a_row) -> Embedding:
    inst = three_in_a_row
    return Embedding(
        inst.tree,
        inst.points,
        assignment={0: 1, 1: 0, 2: 2},
        routes={
            (0, 1): _line((5, 5), (2, 5)),
            (0, 2): _line((5, 5), (8, 5)),
        },
    )


def _check(report: ValidationReport, name: str) -> bool:
    return next(c.passed for c in report.checks if c.name == name)


def test_straight_drawing_passes(three_in_a_row, drawn):
    inst = three_in_a_row
    report = validate_embedding(inst.polygon, inst.points, inst.tree, drawn)
    assert report.passed, report.failures
    assert report.metrics["max_bends"] == 0.0
    assert report.metrics["bend_budget"] == 16.0


def test_crossing_segments_are_found():
    routes = {(0, 1): _line((0, 0), (2, 2)), (2, 3): _line((0, 2), (2, 0))}
    positions = {0: Point(0, 0), 1: Point(2, 2), 2: Point(0, 2), 3: Point(2, 0)}
    crossings = brute_force_crossings(routes, positions)
    assert len(crossings) == 1
    assert crossings[0].kind is IntersectionKind.POINT
    assert crossings[0].where == pytest.approx((1.0, 1.0))


def test_edges_may_meet_at_their_common_vertex():
    routes = {(0, 1): _line((0, 0), (1, 0)), (0, 2): _line((0, 0), (0, 1))}
    positions = {0: Point(0, 0), 1: Point(1, 0), 2: Point(0, 1)}
    assert brute_force_crossings(routes, positions) == []


def test_overlapping_edges_cross_even_with_a_common_vertex():
    routes = {(0, 1): _line((0, 0), (2, 0)), (0, 2): _line((0, 0), (3, 0))}
    positions = {0: Point(0, 0), 1: Point(2, 0), 2: Point(3, 0)}
    crossings = brute_force_crossings(routes, positions)
    assert [c.kind for c in crossings] == [IntersectionKind.OVERLAP]


def test_bijection_failure(three_in_a_row, drawn):
    inst = three_in_a_row
    drawn.assignment[1] = 1
    report = validate_embedding(inst.polygon, inst.points, inst.tree, drawn)
    assert not _check(report, "bijection")


def test_bend_budget_failure(three_in_a_row, drawn):
    inst = three_in_a_row
    drawn.routes[(0, 1)] = _line((5, 5), (5, 7), (2, 5))
    report = validate_embedding(
        inst.polygon, inst.points, inst.tree, drawn, bend_budget=0
    )
    assert not _check(report, "bends")
    assert _check(report, "crossings")


def test_route_leaving_the_polygon(three_in_a_row, drawn):
    inst = three_in_a_row
    drawn.routes[(0, 1)] = _line((5, 5), (5, 12), (2, 5))
    report = validate_embedding(inst.polygon, inst.points, inst.tree, drawn)
    assert not _check(report, "containment")


def test_missing_edge_breaks_isomorphism(three_in_a_row, drawn):
    inst = three_in_a_row
    del drawn.routes[(0, 2)]
    report = validate_embedding(inst.polygon, inst.points, inst.tree, drawn)
    assert not _check(report, "isomorphism")
    assert [c.name for c in report.failures] == ["isomorphism"]


def test_route_ending_elsewhere(three_in_a_row, drawn):
    inst = three_in_a_row
    drawn.routes[(0, 2)] = _line((5, 5), (7, 5))
    report = validate_embedding(inst.polygon, inst.points, inst.tree, drawn)
    assert not _check(report, "endpoints")


def test_report_serializes_sorted(three_in_a_row, drawn):
    inst = three_in_a_row
    report = validate_embedding(inst.polygon, inst.points, inst.tree, drawn)
    report.degenerate_flags["b"] = False
    report.degenerate_flags["a"] = True
    data = report.to_dict()
    assert data["passed"] is True
    assert list(data["degenerate_flags"]) == ["a", "b"]
    assert {c["name"] for c in data["checks"]} >= {"bijection", "crossings"}
