"""
Ham-sandwich style partition of a chain of convex cells: walk the chain,
accumulate point counts, and divide the cell where the count overflows with a
ray through the k-th point in radial order.
"""

import logging
import math
from dataclasses import dataclass, replace
from typing import NamedTuple, Optional, Sequence

import numpy as np
from shapely.geometry import Polygon
from shapely.geometry.polygon import orient

from ..exceptions import CountMismatch, InsufficientPoints, PerturbationFailure
from .geometry import (
    EPS,
    Direction,
    IntersectionKind,
    Point,
    PointSet,
    Segment,
    SimplePolygon,
    clean_ring,
    dist,
    insert_vertex,
    is_convex,
    on_segment,
    segment_intersection,
    shared_border,
    split_convex,
)
from .skeleton import compute_straight_skeleton
from .sss import (
    EdgeTag,
    Subface,
    SubfaceCycle,
    assign_points,
    make_subface,
    middle_point,
    open_cycle,
    split_reflex_vertices,
)
from .tree import BalancedBinaryTree

__all__ = [
    "Anchor",
    "Division",
    "PartitionResult",
    "center_candidates",
    "divide_subface",
    "find_anchors",
    "merge_convex_cells",
    "partition",
    "partition_cycle",
    "radial_argsort",
    "radial_order",
]

logger = logging.getLogger("skeleton-embed.partition")

_ANGLE_QUANTUM = 1e-12


def radial_argsort(
    xy: np.ndarray,
    center: Point,
    start: Direction = Direction(1.0, 0.0),
    clockwise: bool = False,
) -> np.ndarray:
    """
    Indices of ``xy`` sorted by angle around ``center``, measured from
    ``start`` in the sweep direction. Equal angles sort by distance.
    """
    if xy.shape[0] == 0:
        return np.zeros(0, dtype=int)
    v = xy - np.asarray(center, dtype=float)
    c = start.dx * v[:, 1] - start.dy * v[:, 0]
    d = start.dx * v[:, 0] + start.dy * v[:, 1]
    ang = np.mod(np.arctan2(c, d), 2.0 * math.pi)
    if clockwise:
        ang = np.mod(2.0 * math.pi - ang, 2.0 * math.pi)
    ang[ang >= 2.0 * math.pi - _ANGLE_QUANTUM] = 0.0
    key = np.round(ang / _ANGLE_QUANTUM)
    return np.lexsort((np.hypot(v[:, 0], v[:, 1]), key))


def radial_order(
    points: Sequence[Point],
    center: Point,
    start: Direction = Direction(1.0, 0.0),
    clockwise: bool = False,
) -> list[Point]:
    xy = np.asarray(points, dtype=float).reshape(-1, 2)
    return [points[int(i)] for i in radial_argsort(xy, center, start, clockwise)]


class Division(NamedTuple):
    near: Subface
    far: Subface
    point: int
    chord: Segment


def divide_subface(
    cf: Subface,
    center: Point,
    k: int,
    points: PointSet,
    eps: float = EPS,
    clockwise: bool = False,
) -> Division:
    """
    Divide ``cf`` by the ray from ``center`` through its k-th point in radial
    order. The sweep starts along the boundary edge leaving ``center``
    (counter-clockwise) or entering it (clockwise). The near piece holds the
    first k-1 points, the far piece the rest; the k-th point lies on the cut.
    """
    ids = np.asarray(cf.point_ids, dtype=int)
    if not 1 <= k <= len(ids):
        raise CountMismatch(k, len(ids), phase="partition")
    ring, tags, ci = insert_vertex(cf.vertices, cf.edge_tags, center, eps)
    c = ring[ci]
    n = len(ring)
    neighbour = ring[ci - 1] if clockwise else ring[(ci + 1) % n]
    start = Direction.between(c, neighbour)
    order = ids[radial_argsort(points.array[ids], c, start, clockwise)]
    q = int(order[k - 1])
    target = points[q]
    if dist(c, target) <= eps:
        raise PerturbationFailure(
            "Dividing point coincides with the center", {"point": q}
        )
    left, right = split_convex(ring, tags, c, target, EdgeTag.DIVIDING, eps)
    if left is None or right is None:
        raise PerturbationFailure("Dividing ray runs along the boundary", {"point": q})
    near, far = (left, right) if clockwise else (right, left)
    chord = next(
        (
            Segment(near[0][i], near[0][(i + 1) % len(near[0])])
            for i, tag in enumerate(near[1])
            if tag is EdgeTag.DIVIDING
        ),
        Segment(c, target),
    )
    near_ids = sorted(int(i) for i in order[: k - 1])
    far_ids = sorted(int(i) for i in order[k:])
    return Division(
        near=make_subface(-1, near[0], near[1], cf.parent_face, near_ids),
        far=make_subface(-1, far[0], far[1], cf.parent_face, far_ids),
        point=q,
        chord=chord,
    )


class Anchor(NamedTuple):
    point: Point
    clockwise: bool


def _overlaps(border: Segment, edge: Segment, eps: float) -> bool:
    return segment_intersection(border, edge, eps).kind is IntersectionKind.OVERLAP


def _reaches(
    border: Optional[Segment], first: Segment, following: Segment, eps: float
) -> bool:
    # the piece swept from this side always holds `first` and a sliver of
    # `following` beyond their joint
    if border is None:
        return True
    if _overlaps(border, first, eps):
        return True
    return _overlaps(border, following, eps) and on_segment(
        first.b, border.a, border.b, eps
    )


def find_anchors(
    cf: Subface,
    before: Optional[Segment],
    after: Optional[Segment],
    candidates: Sequence[Point],
    eps: float = EPS,
) -> list[Anchor]:
    """
    Candidate centers on the boundary of ``cf`` whose division keeps the near
    piece attached to the border ``before`` and the far piece to ``after``.
    """
    found: list[Anchor] = []
    for cand in candidates:
        try:
            ring, _, ci = insert_vertex(cf.vertices, cf.edge_tags, cand, eps)
        except ValueError:
            continue
        n = len(ring)
        c = ring[ci]
        fwd = Segment(c, ring[(ci + 1) % n])
        fwd_next = Segment(ring[(ci + 1) % n], ring[(ci + 2) % n])
        back = Segment(c, ring[ci - 1])
        back_next = Segment(ring[ci - 1], ring[ci - 2])
        for clockwise in (False, True):
            near, near_next = (back, back_next) if clockwise else (fwd, fwd_next)
            far, far_next = (fwd, fwd_next) if clockwise else (back, back_next)
            if _reaches(before, near, near_next, eps) and _reaches(
                after, far, far_next, eps
            ):
                anchor = Anchor(c, clockwise)
                if anchor not in found:
                    found.append(anchor)
    return found


def center_candidates(cf: Subface) -> list[Point]:
    """
    Centers to try for the top-level division, in preference order: midpoint
    of the longest internal dummy edge, the joint of two bcd edges, then every
    vertex of the cell.
    """
    edges = cf.edges()
    dummy = sorted(
        (seg for seg, tag in edges if tag is EdgeTag.INTERNAL_DUMMY),
        key=lambda s: -s.length,
    )
    out = [seg.midpoint for seg in dummy]
    n = len(edges)
    for i in range(n):
        if edges[i - 1][1] is EdgeTag.BCD and edges[i][1] is EdgeTag.BCD:
            out.append(edges[i][0].a)
    for v in cf.vertices:
        if v not in out:
            out.append(v)
    return out


def _border(a: Subface, b: Subface, eps: float) -> Optional[Segment]:
    return shared_border(a.vertices, b.vertices, eps)


def _gap_point(
    before: Segment, after: Segment, cf: Subface, eps: float
) -> Optional[Point]:
    # borders on one straight edge: the point between them works as a center
    for seg, _ in cf.edges():
        if all(on_segment(p, seg.a, seg.b, eps) for p in (*before, *after)):
            u = seg.direction
            lo, hi = sorted(
                [before, after], key=lambda s: min(u.project(s.a), u.project(s.b))
            )
            end = max(lo, key=u.project)
            begin = min(hi, key=u.project)
            return Point((end.x + begin.x) / 2, (end.y + begin.y) / 2)
    return None


def _normalize(
    cf: Subface, before: Segment, after: Segment, points: PointSet, eps: float
) -> list[Subface]:
    a, b = before.midpoint, after.midpoint
    ring, tags, _ = insert_vertex(cf.vertices, cf.edge_tags, a, eps)
    ring, tags, _ = insert_vertex(ring, tags, b, eps)
    left, right = split_convex(ring, tags, a, b, EdgeTag.SPLITTING, eps)
    if left is None or right is None:
        raise PerturbationFailure("Cell cannot be normalized", {"subface": cf.id})
    # the piece right of a->b follows the before-border counter-clockwise
    pieces = [
        make_subface(-1, right[0], right[1], cf.parent_face),
        make_subface(-1, left[0], left[1], cf.parent_face),
    ]
    sub = PointSet(tuple(points[i] for i in cf.point_ids))
    assigned = assign_points(pieces, sub, eps)
    return [
        replace(p, point_ids=tuple(cf.point_ids[i] for i in p.point_ids))
        for p in assigned
    ]


@dataclass(frozen=True)
class PartitionResult:
    """
    Outcome of the top-level division. ``left`` starts with f(m)'s side of
    the cut (cf_m) and walks back to f(t); ``right`` starts with cf_t and
    walks on to f(m).
    """

    point: int
    chord: Segment
    center: Point
    left: tuple[Subface, ...]
    right: tuple[Subface, ...]
    cycle: SubfaceCycle

    @property
    def left_count(self) -> int:
        return sum(c.count for c in self.left)

    @property
    def right_count(self) -> int:
        return sum(c.count for c in self.right)


def partition_cycle(
    cycle: SubfaceCycle, points: PointSet, left_size: int, eps: float = EPS
) -> PartitionResult:
    """
    Walk the chain and divide the cell that holds point number
    ``left_size + 1``.
    """
    cells = assign_points(cycle.subfaces, points, eps)
    total = sum(c.count for c in cells)
    if total < left_size + 1:
        raise InsufficientPoints(left_size + 1, total)
    for _ in range(2 * len(cells) + 2):
        running = 0
        idx = 0
        for idx, cell in enumerate(cells):
            if running + cell.count > left_size:
                break
            running += cell.count
        cf = cells[idx]
        k = left_size - running + 1
        before = _border(cells[idx - 1], cf, eps) if idx > 0 else None
        after = _border(cf, cells[idx + 1], eps) if idx + 1 < len(cells) else None
        candidates = center_candidates(cf)
        if before is not None and after is not None:
            gap = _gap_point(before, after, cf, eps)
            if gap is not None:
                candidates.append(gap)
        for anchor in find_anchors(cf, before, after, candidates, eps):
            try:
                division = divide_subface(
                    cf, anchor.point, k, points, eps, anchor.clockwise
                )
            except PerturbationFailure:
                continue
            # the cut may shave a neighbouring border down to a point
            if idx and _border(cells[idx - 1], division.near, eps) is None:
                continue
            if idx + 1 < len(cells) and (
                _border(division.far, cells[idx + 1], eps) is None
            ):
                continue
            left = (division.near, *reversed(cells[:idx]))
            right = (division.far, *cells[idx + 1 :])
            logger.info(
                "Partition found",
                extra={
                    "point": division.point,
                    "stop_cell": idx,
                    "k": k,
                    "left_points": sum(c.count for c in left),
                    "right_points": sum(c.count for c in right),
                },
            )
            return PartitionResult(
                division.point, division.chord, anchor.point, left, right, cycle
            )
        if before is None or after is None:
            break
        logger.debug("Normalizing stop cell", extra={"cell": idx})
        pieces = _normalize(cf, before, after, points, eps)
        cells = [*cells[:idx], *pieces, *cells[idx + 1 :]]
    raise PerturbationFailure(
        "No valid center for the stop cell", {"left_size": left_size}
    )


def partition(
    polygon: SimplePolygon,
    points: PointSet,
    tree: BalancedBinaryTree,
    tolerance: float = EPS,
    max_events_factor: int = 64,
) -> PartitionResult:
    """
    Divide ``polygon`` into the chains that take the root's two subtrees.
    Builds the skeleton, splits its reflex vertices, opens the cycle at the
    middle point and walks it.
    """
    if tree.root is None:
        raise ValueError("An empty tree has no partition")
    if len(points) != tree.n:
        raise CountMismatch(tree.n, len(points), phase="partition")
    skeleton = compute_straight_skeleton(polygon, tolerance, max_events_factor)
    ms, sf = middle_point(skeleton)
    sss = split_reflex_vertices(skeleton, start_face=sf)
    cycle = open_cycle(sss, ms, sf)
    left_size = tree.size(tree.left[tree.root])
    return partition_cycle(cycle, points, left_size, sss.eps)


def _tag_from_sources(seg: Segment, sources: Sequence[Subface], eps: float) -> EdgeTag:
    for cell in sources:
        for edge, tag in cell.edges():
            if on_segment(seg.a, edge.a, edge.b, eps) and on_segment(
                seg.b, edge.a, edge.b, eps
            ):
                return tag
    return EdgeTag.BOUNDARY


def merge_convex_cells(chain: Sequence[Subface], eps: float = EPS) -> list[Subface]:
    """Merge consecutive cells of a chain whenever their union stays convex."""
    out: list[Subface] = []
    for cell in chain:
        if out:
            prev = out[-1]
            union = Polygon(prev.vertices).union(Polygon(cell.vertices))
            if union.geom_type == "Polygon" and not union.interiors:
                ring_coords = orient(union, 1.0).exterior.coords[:-1]
                coords = [Point(x, y) for x, y in ring_coords]
                n = len(coords)
                sides = [Segment(coords[i], coords[(i + 1) % n]) for i in range(n)]
                tags = [_tag_from_sources(s, (prev, cell), eps) for s in sides]
                ring, tags = clean_ring(coords, tags, eps)
                if is_convex(ring, eps):
                    out[-1] = make_subface(
                        prev.id,
                        ring,
                        tags,
                        prev.parent_face,
                        tuple(prev.point_ids) + tuple(cell.point_ids),
                    )
                    continue
        out.append(cell)
    return out
