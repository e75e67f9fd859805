"""Tests for the straight skeleton and its validator checks."""

import pytest

from skeleton_embed.modules.geometry import SimplePolygon
from skeleton_embed.modules.skeleton import (
    ArcKind,
    NodeKind,
    compute_straight_skeleton,
    face_areas,
    face_of_edge,
)
from skeleton_embed.modules.validator import (
    check_faces,
    check_skeleton_counts,
    validate_skeleton,
)


def _dummy_positions(skeleton):
    return sorted(
        (round(n.position.x, 9), round(n.position.y, 9)) for n in skeleton.dummy_nodes
    )


def test_triangle_skeleton_meets_at_incenter(triangle):
    skeleton = compute_straight_skeleton(triangle)
    assert _dummy_positions(skeleton) == [(1.0, 1.0)]
    assert len(skeleton.arcs) == 3
    assert all(arc.kind is ArcKind.BCD for arc in skeleton.arcs)
    assert skeleton.nodes[3].time == pytest.approx(1.0)


def test_triangle_face_areas(triangle):
    areas = face_areas(compute_straight_skeleton(triangle))
    assert areas == pytest.approx({0: 2.0, 1: 2.5, 2: 1.5})


def test_rectangle_skeleton(rectangle):
    skeleton = compute_straight_skeleton(rectangle)
    assert _dummy_positions(skeleton) == [(1.0, 1.0), (3.0, 1.0)]
    assert len(skeleton.arcs) == 5
    kinds = sorted(arc.kind.value for arc in skeleton.arcs)
    assert kinds == ["bcd", "bcd", "bcd", "bcd", "internal"]
    assert face_areas(skeleton) == pytest.approx({0: 3.0, 1: 1.0, 2: 3.0, 3: 1.0})


def test_unit_square_merges_center(unit_square):
    skeleton = compute_straight_skeleton(unit_square)
    assert skeleton.degenerate
    assert _dummy_positions(skeleton) == [(0.5, 0.5)]
    assert len(skeleton.arcs) == 4
    assert face_areas(skeleton) == pytest.approx({i: 0.25 for i in range(4)})
    assert check_skeleton_counts(skeleton, 4).passed


POLYGONS = ["triangle", "rectangle", "unit_square", "l_shape", "notched"]


@pytest.mark.parametrize("name", POLYGONS)
def test_skeleton_passes_its_oracles(name, request):
    polygon: SimplePolygon = request.getfixturevalue(name)
    skeleton = compute_straight_skeleton(polygon)
    report = validate_skeleton(skeleton)
    assert report.passed, report.failures
    assert sum(face_areas(skeleton).values()) == pytest.approx(polygon.area, rel=1e-6)


def test_faces_start_with_their_boundary_edge(l_shape):
    skeleton = compute_straight_skeleton(l_shape)
    m = l_shape.m
    for face in skeleton.faces:
        assert face.node_ids[:2] == (face.boundary_edge, (face.boundary_edge + 1) % m)
        assert skeleton.nodes[face.node_ids[0]].kind is NodeKind.POLYGON_VERTEX


def test_face_of_edge(triangle):
    skeleton = compute_straight_skeleton(triangle)
    assert face_of_edge(skeleton, 1).boundary_edge == 1
    with pytest.raises(IndexError):
        face_of_edge(skeleton, 3)


def test_check_faces_flags_missing_area(rectangle):
    skeleton = compute_straight_skeleton(rectangle)
    broken = type(skeleton)(
        polygon=skeleton.polygon,
        nodes=skeleton.nodes,
        arcs=skeleton.arcs,
        faces=skeleton.faces[:-1],
        degenerate=skeleton.degenerate,
        eps=skeleton.eps,
    )
    assert not check_faces(broken).passed

