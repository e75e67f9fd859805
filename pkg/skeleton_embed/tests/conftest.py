"""Shared pytest fixtures: small polygons, point sets and ready instances."""

import json
from typing import Optional

import pytest

from skeleton_embed.config import Settings
from skeleton_embed.modules.geometry import PointSet, SimplePolygon
from skeleton_embed.modules.instance_io import Instance
from skeleton_embed.modules.tree import build_balanced_tree

TRIANGLE = [(0.0, 0.0), (4.0, 0.0), (0.0, 3.0)]
RECTANGLE = [(0.0, 0.0), (4.0, 0.0), (4.0, 2.0), (0.0, 2.0)]
UNIT_SQUARE = [(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)]
L_SHAPE = [(0.0, 0.0), (10.0, 0.0), (10.0, 3.0), (4.0, 3.0), (4.0, 10.0), (0.0, 10.0)]
NOTCHED = [(0.0, 0.0), (12.0, 0.0), (12.0, 8.0), (7.0, 5.0), (3.0, 9.0), (0.0, 7.0)]
NOTCHED_POINTS = [
    (1.0, 1.0),
    (3.0, 1.5),
    (5.0, 0.8),
    (7.0, 1.3),
    (9.0, 1.1),
    (11.0, 2.0),
    (2.0, 3.0),
    (4.0, 3.4),
    (6.0, 2.7),
    (8.0, 3.2),
    (10.0, 4.1),
    (1.5, 5.2),
    (3.2, 6.1),
    (5.1, 4.4),
    (2.4, 7.3),
]


def make_instance(
    polygon: list[tuple[float, float]],
    points: list[tuple[float, float]],
    n: Optional[int] = None,
) -> Instance:
    size = len(points) if n is None else n
    return Instance(
        SimplePolygon.from_coords(polygon),
        PointSet.from_coords(points),
        build_balanced_tree(size),
        {"balanced": size},
    )


def instance_text(polygon, points, tree=None) -> str:
    tree = {"balanced": len(points)} if tree is None else tree
    return json.dumps({"polygon": polygon, "points": points, "tree": tree})


@pytest.fixture
def triangle() -> SimplePolygon:
    return SimplePolygon.from_coords(TRIANGLE)


@pytest.fixture
def rectangle() -> SimplePolygon:
    return SimplePolygon.from_coords(RECTANGLE)


@pytest.fixture
def unit_square() -> SimplePolygon:
    return SimplePolygon.from_coords(UNIT_SQUARE)


@pytest.fixture
def l_shape() -> SimplePolygon:
    return SimplePolygon.from_coords(L_SHAPE)


@pytest.fixture
def notched() -> SimplePolygon:
    return SimplePolygon.from_coords(NOTCHED)


@pytest.fixture
def notched_instance() -> Instance:
    """15 points inside a non-convex hexagon with a complete 15-node tree."""
    return make_instance(NOTCHED, NOTCHED_POINTS)


@pytest.fixture
def three_in_a_row() -> Instance:
    square = [(0.0, 0.0), (10.0, 0.0), (10.0, 10.0), (0.0, 10.0)]
    return make_instance(square, [(2.0, 5.0), (5.0, 5.0), (8.0, 5.0)])


@pytest.fixture
def settings() -> Settings:
    return Settings()
