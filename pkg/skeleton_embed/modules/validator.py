"""
Brute-force oracles for every stage of the pipeline.

None of these checks reuse the construction code paths: they recompute the
claimed properties from the produced geometry.
"""

import logging
from dataclasses import dataclass, field
from typing import Any, Optional, Sequence

import networkx as nx
import numpy as np
from shapely.geometry import LineString
from shapely.geometry import Polygon as ShapelyPolygon

from .embedder import Embedding
from .geometry import (
    EPS,
    Direction,
    IntersectionKind,
    Location,
    Point,
    PointSet,
    Polyline,
    SimplePolygon,
    dist,
    first_crossing,
    is_convex,
    is_monotone,
    point_location,
    polyline_contacts,
    shared_border,
)
from .partition import PartitionResult
from .skeleton import StraightSkeleton
from .sss import EdgeTag, SplitSkeleton, Subface
from .tree import BalancedBinaryTree

__all__ = [
    "Crossing",
    "ValidationCheck",
    "ValidationReport",
    "brute_force_crossings",
    "check_faces",
    "check_skeleton_counts",
    "check_sss",
    "validate_embedding",
    "validate_partition",
    "validate_skeleton",
]

logger = logging.getLogger("skeleton-embed.validator")

AREA_RTOL = 1e-6


@dataclass(frozen=True)
class ValidationCheck:
    name: str
    passed: bool
    detail: str = ""

    def to_dict(self) -> dict[str, Any]:
        return {"name": self.name, "passed": self.passed, "detail": self.detail}


@dataclass
class ValidationReport:
    """Outcome of a validation run. Any failed check carries a detail string."""

    checks: list[ValidationCheck] = field(default_factory=list)
    degenerate_flags: dict[str, bool] = field(default_factory=dict)
    metrics: dict[str, float] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    @property
    def failures(self) -> list[ValidationCheck]:
        return [c for c in self.checks if not c.passed]

    def add(self, name: str, passed: bool, detail: str = "") -> None:
        if not passed and not detail:
            detail = "check failed"
        self.checks.append(ValidationCheck(name, passed, detail))

    def extend(self, other: "ValidationReport") -> None:
        self.checks.extend(other.checks)
        self.degenerate_flags.update(other.degenerate_flags)
        self.metrics.update(other.metrics)

    def to_dict(self) -> dict[str, Any]:
        return {
            "passed": self.passed,
            "checks": [c.to_dict() for c in self.checks],
            "degenerate_flags": dict(sorted(self.degenerate_flags.items())),
            "metrics": dict(sorted(self.metrics.items())),
        }


def _areas_match(a: float, b: float) -> bool:
    return abs(a - b) <= AREA_RTOL * max(abs(a), abs(b), 1e-300)


def check_skeleton_counts(skeleton: StraightSkeleton, m: int) -> ValidationCheck:
    """
    m faces, m-2 dummy nodes and 2m-3 arcs. A merged node of degree d counts
    as d-2 generic nodes joined by d-3 zero-length arcs.
    """
    dummies = skeleton.dummy_nodes
    degrees = [len(skeleton.node_neighbors.get(n.id, ())) for n in dummies]
    credited_nodes = sum(max(d - 2, 1) for d in degrees)
    credited_arcs = len(skeleton.arcs) + sum(max(d - 3, 0) for d in degrees)
    faces = len(skeleton.faces)
    if not skeleton.degenerate:
        credited_nodes = len(dummies)
        credited_arcs = len(skeleton.arcs)
    ok = faces == m and credited_nodes == m - 2 and credited_arcs == 2 * m - 3
    detail = (
        f"faces={faces}, dummy_nodes={len(dummies)} (credited {credited_nodes}), "
        f"arcs={len(skeleton.arcs)} (credited {credited_arcs}), expected "
        f"{m}/{m - 2}/{2 * m - 3}"
    )
    return ValidationCheck("skeleton_counts", ok, "" if ok else detail)


def check_faces(skeleton: StraightSkeleton) -> ValidationCheck:
    polygon = skeleton.polygon
    boundary = polygon.shape.exterior
    eps = skeleton.eps
    problems: list[str] = []
    total = 0.0
    for face in skeleton.faces:
        edge = polygon.edge(face.boundary_edge)
        d = Direction.between(*edge)
        if not is_monotone(face.boundary_chain, d, eps):
            problems.append(f"face {face.id} not monotone")
        shape = ShapelyPolygon(face.vertices)
        touching = shape.exterior.intersection(boundary).length
        if abs(touching - edge.length) > 1e3 * eps * max(1.0, edge.length):
            problems.append(f"face {face.id} touches the boundary along {touching:.6g}")
        total += face.area
    if not _areas_match(total, polygon.area):
        problems.append(f"face areas sum to {total:.12g}, polygon {polygon.area:.12g}")
    return ValidationCheck("faces", not problems, "; ".join(problems))


def check_sss(sss: SplitSkeleton) -> ValidationCheck:
    """Every subface convex, areas add up, splitting segments perpendicular."""
    skeleton = sss.base
    eps = sss.eps
    problems: list[str] = []
    for cell in sss.subfaces:
        if not is_convex(cell.vertices, eps):
            problems.append(f"subface {cell.id} is not convex")
    total = sum(cell.area for cell in sss.subfaces)
    if not _areas_match(total, skeleton.polygon.area):
        problems.append(f"subface areas sum to {total:.12g}")
    for cell in sss.subfaces:
        d = Direction.between(*skeleton.polygon.edge(cell.parent_face))
        for seg, tag in cell.edges():
            if tag is not EdgeTag.SPLITTING or seg.length <= eps:
                continue
            u = seg.direction
            if abs(u.dx * d.dx + u.dy * d.dy) > 1e-6:
                problems.append(f"subface {cell.id} has a slanted splitting edge")
    return ValidationCheck("sss", not problems, "; ".join(problems))


def _chain_problems(cells: Sequence[Subface], label: str, eps: float) -> list[str]:
    out = []
    for i, (a, b) in enumerate(zip(cells, cells[1:])):
        if shared_border(a.vertices, b.vertices, eps) is None:
            out.append(f"{label} cells {i} and {i + 1} share no border")
    for i, cell in enumerate(cells):
        if not is_convex(cell.vertices, eps):
            out.append(f"{label} cell {i} is not convex")
    return out


def validate_partition(
    polygon: SimplePolygon,
    points: PointSet,
    tree: BalancedBinaryTree,
    result: PartitionResult,
    eps: float = EPS,
) -> ValidationReport:
    report = ValidationReport()
    root = tree.root
    expected_left = tree.size(tree.left[root]) if root is not None else 0
    expected_right = tree.size(tree.right[root]) if root is not None else 0
    report.add(
        "left_count",
        result.left_count == expected_left,
        f"Num(L)={result.left_count}, expected {expected_left}",
    )
    report.add(
        "right_count",
        result.right_count == expected_right,
        f"Num(R)={result.right_count}, expected {expected_right}",
    )
    report.add("q_in_points", 0 <= result.point < len(points), f"q={result.point}")
    area = sum(c.area for c in result.left) + sum(c.area for c in result.right)
    report.add(
        "area",
        _areas_match(area, polygon.area),
        f"area(L)+area(R)={area:.12g}, area(P)={polygon.area:.12g}",
    )
    problems = _chain_problems(result.left, "L", eps) + _chain_problems(
        result.right, "R", eps
    )
    report.add("chains", not problems, "; ".join(problems))
    on_chord = dist(points[result.point], result.chord.a) + dist(
        points[result.point], result.chord.b
    ) - result.chord.length
    report.add(
        "q_on_chain", abs(on_chord) <= 1e3 * eps, f"q is {on_chord:.3g} off the chord"
    )
    report.metrics.update(
        {
            "left_delta": float(result.left_count - expected_left),
            "right_delta": float(result.right_count - expected_right),
        }
    )
    return report


@dataclass(frozen=True)
class Crossing:
    first: tuple[int, int]
    second: tuple[int, int]
    kind: IntersectionKind
    where: Optional[Point]


def brute_force_crossings(
    routes: dict[tuple[int, int], Polyline],
    positions: dict[int, Point],
    eps: float = EPS,
) -> list[Crossing]:
    """
    All pairs of route segments that meet, except at a tree vertex shared by
    both edges.
    """
    found: list[Crossing] = []
    items = sorted(routes.items())
    if not items:
        return found
    xy = [np.asarray(r.vertices, dtype=float) for _, r in items]
    lows = np.array([v.min(axis=0) for v in xy]) - eps
    highs = np.array([v.max(axis=0) for v in xy]) + eps
    for i, (e1, r1) in enumerate(items):
        # only routes whose bounding boxes overlap can meet
        rest_lo, rest_hi = lows[i + 1 :], highs[i + 1 :]
        near = np.all((rest_lo <= highs[i]) & (rest_hi >= lows[i]), axis=1)
        for j in np.flatnonzero(near) + i + 1:
            e2, r2 = items[j]
            allowed = [positions[v] for v in set(e1) & set(e2)]
            for hit in polyline_contacts(r1, r2, allowed, eps):
                where = hit.point if hit.point is not None else (
                    hit.segment.a if hit.segment is not None else None
                )
                found.append(Crossing(e1, e2, hit.kind, where))
    return found


def _route_inside(route: Polyline, polygon: SimplePolygon, eps: float) -> bool:
    if any(point_location(v, polygon, eps) is Location.OUTSIDE for v in route.vertices):
        return False
    grown = polygon.shape.buffer(eps)
    return all(grown.covers(LineString([s.a, s.b])) for s in route.segments())


def validate_embedding(
    polygon: SimplePolygon,
    points: PointSet,
    tree: BalancedBinaryTree,
    embedding: Embedding,
    bend_budget: Optional[int] = None,
    eps: Optional[float] = None,
) -> ValidationReport:
    """
    Bijection, containment, crossings, bends and isomorphism of an embedding.
    """
    eps = polygon.eps() if eps is None else eps
    budget = 4 * polygon.m if bend_budget is None else bend_budget
    report = ValidationReport()
    assignment = embedding.assignment

    nodes_ok = set(assignment) == set(range(tree.n))
    targets = list(assignment.values())
    points_ok = len(set(targets)) == len(targets) and set(targets) == set(
        range(len(points))
    )
    report.add(
        "bijection",
        nodes_ok and points_ok,
        f"{len(assignment)} nodes mapped onto "
        f"{len(set(targets))} of {len(points)} points",
    )

    routes = sorted(embedding.routes.items())
    outside = [e for e, r in routes if not _route_inside(r, polygon, eps)]
    report.add("containment", not outside, f"routes leaving the polygon: {outside}")

    positions = {v: points[p] for v, p in assignment.items()}
    ends_off = [
        e
        for e, r in routes
        if e[0] not in positions
        or e[1] not in positions
        or dist(r.vertices[0], positions[e[0]]) > eps
        or dist(r.vertices[-1], positions[e[1]]) > eps
    ]
    report.add(
        "endpoints", not ends_off, f"routes not ending at their nodes: {ends_off}"
    )

    crossings = (
        [] if ends_off else brute_force_crossings(embedding.routes, positions, eps)
    )
    self_crossing = [
        e for e, r in routes if first_crossing(r.vertices, eps, closed=False)
    ]
    report.add(
        "crossings",
        not crossings and not self_crossing,
        f"{len(crossings)} crossing pairs, self-crossing routes {self_crossing}; "
        + ", ".join(f"{c.first}x{c.second}" for c in crossings[:5]),
    )

    bends = {e: r.bends(eps) for e, r in embedding.routes.items()}
    over = sorted(e for e, b in bends.items() if b > budget)
    report.add("bends", not over, f"edges over the budget of {budget}: {over}")

    expected = nx.Graph(tree.edges())
    expected.add_nodes_from(range(tree.n))
    drawn = nx.Graph()
    drawn.add_nodes_from(assignment.get(v, -1 - v) for v in range(tree.n))
    drawn.add_edges_from(
        (assignment[a], assignment[b])
        for a, b in embedding.routes
        if a in assignment and b in assignment
    )
    same_edges = set(embedding.routes) == set(tree.edges())
    iso = same_edges and nx.is_isomorphic(expected, drawn)
    report.add("isomorphism", iso, "routed graph differs from the tree")

    report.metrics.update(
        {
            "max_bends": float(max(bends.values(), default=0)),
            "total_bends": float(sum(bends.values())),
            "mean_bends": float(sum(bends.values())) / max(len(bends), 1),
            "crossings": float(len(crossings)),
            "bend_budget": float(budget),
        }
    )
    if not report.passed:
        logger.warning(
            "Embedding failed validation",
            extra={"failures": [c.name for c in report.failures]},
        )
    return report


def validate_skeleton(skeleton: StraightSkeleton) -> ValidationReport:
    report = ValidationReport()
    report.checks.append(check_skeleton_counts(skeleton, skeleton.polygon.m))
    report.checks.append(check_faces(skeleton))
    report.degenerate_flags["skeleton"] = skeleton.degenerate
    report.metrics["face_area_sum"] = float(sum(f.area for f in skeleton.faces))
    return report

