"""
Split straight skeleton: every skeleton face is cut into convex subfaces by
segments perpendicular to its boundary edge, one through each reflex vertex.

The module also hosts the arc-weight rule that picks the middle point of the
skeleton and the routine that opens the cycle of subfaces at that point.
"""

import logging
from collections import defaultdict
from dataclasses import dataclass, field, replace
from enum import Enum
from functools import cached_property
from typing import Optional, Sequence, Union

import networkx as nx
import numpy as np

from ..exceptions import NonMonotoneFace, PerturbationFailure
from .geometry import (
    EPS,
    Direction,
    Orientation,
    Point,
    PointSet,
    Segment,
    SimplePolygon,
    add,
    dist,
    inside_convex_mask,
    insert_vertex,
    midpoint,
    orientation,
    ring_distance,
    shared_border,
    signed_area,
    split_convex,
)
from .skeleton import StraightSkeleton, face_areas

__all__ = [
    "ArcWeight",
    "EdgeTag",
    "MiddleEdge",
    "SplitSkeleton",
    "Subface",
    "SubfaceCycle",
    "arc_weights",
    "assign_points",
    "count_points",
    "middle_point",
    "open_cycle",
    "select_middle_edge",
    "split_reflex_vertices",
]

logger = logging.getLogger("skeleton-embed.sss")


class EdgeTag(Enum):
    BOUNDARY = "boundary"
    BCD = "bcd"
    INTERNAL_DUMMY = "internal_dummy"
    SPLITTING = "splitting"
    OPENING = "opening"
    DIVIDING = "dividing"
    BACKBONE = "backbone"
    THREADING = "threading"


@dataclass(frozen=True)
class Subface:
    """
    Convex cell of a partition.

    ``edge_tags[i]`` labels the edge leaving vertex ``i`` of ``region``.
    ``point_ids`` is filled once points are assigned to cells.
    """

    id: int
    region: SimplePolygon
    edge_tags: tuple[EdgeTag, ...]
    parent_face: int
    point_ids: tuple[int, ...] = ()

    @property
    def vertices(self) -> tuple[Point, ...]:
        return self.region.vertices

    @property
    def count(self) -> int:
        return len(self.point_ids)

    @property
    def area(self) -> float:
        return signed_area(self.region.vertices)

    def edges(self) -> list[tuple[Segment, EdgeTag]]:
        n = len(self.vertices)
        return [
            (Segment(self.vertices[i], self.vertices[(i + 1) % n]), self.edge_tags[i])
            for i in range(n)
        ]


def make_subface(
    sid: int,
    vertices: Sequence[Point],
    tags: Sequence[EdgeTag],
    parent_face: int,
    point_ids: Sequence[int] = (),
) -> Subface:
    return Subface(
        id=sid,
        region=SimplePolygon(tuple(Point(v[0], v[1]) for v in vertices)),
        edge_tags=tuple(tags),
        parent_face=parent_face,
        point_ids=tuple(point_ids),
    )


@dataclass(frozen=True)
class SplitSkeleton:
    base: StraightSkeleton
    splitting_segments: tuple[Segment, ...]
    subfaces: tuple[Subface, ...]

    @property
    def eps(self) -> float:
        return self.base.eps

    def of_face(self, face: int) -> list[Subface]:
        return [s for s in self.subfaces if s.parent_face == face]

    @cached_property
    def neighbors(self) -> dict[int, tuple[int, ...]]:
        """Subface ids sharing a border of positive length, per subface id."""
        found: dict[int, list[int]] = defaultdict(list)
        cells = self.subfaces
        for i, a in enumerate(cells):
            for b in cells[i + 1 :]:
                if shared_border(a.vertices, b.vertices, self.eps) is not None:
                    found[a.id].append(b.id)
                    found[b.id].append(a.id)
        return {s.id: tuple(sorted(found[s.id])) for s in cells}


def _face_tags(skeleton: StraightSkeleton, node_ids: Sequence[int]) -> list[EdgeTag]:
    m = skeleton.polygon.m
    n = len(node_ids)
    tags = [EdgeTag.BOUNDARY]
    for k in range(1, n):
        a, b = node_ids[k], node_ids[(k + 1) % n]
        tags.append(EdgeTag.BCD if min(a, b) < m else EdgeTag.INTERNAL_DUMMY)
    return tags


def _reflex_cuts(
    ring: Sequence[Point], u: Direction, eps: float
) -> list[tuple[float, Point]]:
    n = len(ring)
    cuts: list[tuple[float, Point]] = []
    for i in range(n):
        if orientation(ring[i - 1], ring[i], ring[(i + 1) % n], eps) is Orientation.CW:
            cuts.append((u.project(ring[i]), ring[i]))
    cuts.sort(key=lambda c: c[0])
    unique: list[tuple[float, Point]] = []
    for value, pivot in cuts:
        if not unique or value - unique[-1][0] > eps:
            unique.append((value, pivot))
    return unique


def _check_single_crossing(
    ring: Sequence[Point], pivot: Point, u: Direction, face_id: int, eps: float
) -> None:
    value = u.project(pivot)
    signs = [
        1 if d > eps else -1
        for d in (u.project(v) - value for v in ring)
        if abs(d) > eps
    ]
    changes = sum(1 for i in range(len(signs)) if signs[i] != signs[i - 1])
    if changes > 2:
        raise NonMonotoneFace(
            face_id, f"Splitting segment through {tuple(pivot)} leaves face {face_id}"
        )


def split_reflex_vertices(
    skeleton: StraightSkeleton, start_face: int = 0
) -> SplitSkeleton:
    """
    Cut each face at the reflex vertices of its chain. Subfaces are numbered
    face by face in counter-clockwise order from ``start_face`` and by
    increasing projection on the boundary edge within a face.
    """
    eps = skeleton.eps
    m = len(skeleton.faces)
    subfaces: list[Subface] = []
    segments: list[Segment] = []
    for offset in range(m):
        face = skeleton.faces[(start_face + offset) % m]
        u = Direction.between(*skeleton.polygon.edge(face.boundary_edge))
        normal = u.left_normal
        ring = list(face.vertices)
        tags = _face_tags(skeleton, face.node_ids)
        for value, pivot in _reflex_cuts(ring, u, eps):
            _check_single_crossing(ring, pivot, u, face.id, eps)
            # larger projections fall on the right of the upward normal
            lower, upper = split_convex(
                ring, tags, pivot, add(pivot, normal), EdgeTag.SPLITTING, eps
            )
            if lower is None or upper is None:
                continue
            cut = [
                Segment(seg.a, seg.b)
                for seg, tag in zip(_ring_segments(lower[0]), lower[1])
                if tag is EdgeTag.SPLITTING
                and abs(u.project(seg.a) - value) <= eps
                and abs(u.project(seg.b) - value) <= eps
            ]
            segments.extend(cut)
            subfaces.append(make_subface(len(subfaces), lower[0], lower[1], face.id))
            ring, tags = upper
        subfaces.append(make_subface(len(subfaces), ring, tags, face.id))
    logger.info(
        "Split skeleton built",
        extra={"subfaces": len(subfaces), "splitting_segments": len(segments)},
    )
    return SplitSkeleton(skeleton, tuple(segments), tuple(subfaces))


def _ring_segments(ring: Sequence[Point]) -> list[Segment]:
    n = len(ring)
    return [Segment(ring[i], ring[(i + 1) % n]) for i in range(n)]


def _area_tolerance(skeleton: StraightSkeleton) -> float:
    return skeleton.eps * max(1.0, skeleton.polygon.diameter)


@dataclass(frozen=True)
class ArcWeight:
    """Weight of an arc directed from its lower to its higher node id."""

    arc_id: int
    source: int
    target: int
    weight: float

    def reversed(self) -> "ArcWeight":
        return ArcWeight(self.arc_id, self.target, self.source, -self.weight)


def arc_weights(skeleton: StraightSkeleton) -> list[ArcWeight]:
    areas = face_areas(skeleton)
    adjacent = {
        node: sum(areas[f] for f in faces) for node, faces in skeleton.node_faces.items()
    }
    weights = []
    for arc in skeleton.arcs:
        source, target = sorted(arc.endpoints)
        weights.append(
            ArcWeight(arc.id, source, target, adjacent[target] - adjacent[source])
        )
    return weights


@dataclass(frozen=True)
class MiddleEdge:
    point: Point
    face: int
    arcs: tuple[int, ...]
    node: Optional[int] = None


def select_middle_edge(skeleton: StraightSkeleton) -> MiddleEdge:
    """
    Middle arc of the skeleton: smallest positive weight, ties resolved by a
    node common to all tied arcs, then by the smallest arc id.
    """
    tol = _area_tolerance(skeleton)
    weights = arc_weights(skeleton)
    if not weights:
        raise ValueError("Skeleton has no arcs")
    positive = [w for w in weights if abs(w.weight) > tol]
    pool = positive or weights
    best = min(abs(w.weight) for w in pool)
    tied = [w for w in pool if abs(w.weight) - best <= tol]
    arcs = tuple(sorted(w.arc_id for w in tied))
    if len(tied) > 1:
        common = set(skeleton.arcs[arcs[0]].endpoints)
        for aid in arcs[1:]:
            common &= set(skeleton.arcs[aid].endpoints)
        if common:
            node = min(common)
            face = min(skeleton.node_faces[node])
            return MiddleEdge(skeleton.position(node), face, arcs, node)
    arc = skeleton.arcs[arcs[0]]
    a, b = arc.endpoints
    point = midpoint(skeleton.position(a), skeleton.position(b))
    return MiddleEdge(point, min(arc.faces), arcs)


def middle_point(skeleton: StraightSkeleton) -> tuple[Point, int]:
    choice = select_middle_edge(skeleton)
    logger.debug(
        "Middle point selected",
        extra={"point": tuple(choice.point), "face": choice.face, "arcs": choice.arcs},
    )
    return choice.point, choice.face


def count_points(
    region: Union[Subface, SimplePolygon, Sequence[Point]],
    points: PointSet,
    eps: float = EPS,
    exclude: Sequence[int] = (),
) -> int:
    """Points of ``points`` in the closed convex region, skipping ``exclude``."""
    if isinstance(region, Subface):
        ring: Sequence[Point] = region.vertices
    elif isinstance(region, SimplePolygon):
        ring = region.vertices
    else:
        ring = region
    mask = inside_convex_mask(ring, points.array, eps)
    if exclude:
        mask[np.asarray(list(exclude), dtype=int)] = False
    return int(mask.sum())


def assign_points(
    cells: Sequence[Subface], points: PointSet, eps: float = EPS
) -> list[Subface]:
    """
    Give every point to the first cell (in sequence order) whose closure holds
    it. A point outside every cell within eps goes to the nearest cell.
    """
    xy = points.array
    owner = np.full(len(points), -1, dtype=int)
    for index, cell in enumerate(cells):
        mask = inside_convex_mask(cell.vertices, xy, eps) & (owner < 0)
        owner[mask] = index
    for pid in np.flatnonzero(owner < 0):
        p = points[int(pid)]
        owner[pid] = min(
            range(len(cells)), key=lambda i: ring_distance(cells[i].vertices, p)
        )
        logger.warning(
            "Point outside every cell; assigned to nearest",
            extra={"point": int(pid), "cell": int(owner[pid])},
        )
    return [
        replace(cell, point_ids=tuple(int(i) for i in np.flatnonzero(owner == index)))
        for index, cell in enumerate(cells)
    ]


@dataclass(frozen=True)
class SubfaceCycle:
    """
    Chain of convex subfaces covering the polygon. Consecutive entries share
    a border; the chain opens at the middle point between ``subfaces[0]``
    (f(t)) and ``subfaces[-1]`` (f(m)).
    """

    subfaces: tuple[Subface, ...]
    opening: Optional[Segment]
    threaded: bool = False
    middle: Optional[Point] = field(default=None, compare=False)

    def __len__(self) -> int:
        return len(self.subfaces)

    @property
    def first(self) -> Subface:
        return self.subfaces[0]

    @property
    def last(self) -> Subface:
        return self.subfaces[-1]


def _renumber(cells: Sequence[Subface]) -> tuple[Subface, ...]:
    return tuple(replace(cell, id=i) for i, cell in enumerate(cells))


def _is_chain(cells: Sequence[Subface], eps: float) -> bool:
    return all(
        shared_border(a.vertices, b.vertices, eps) is not None
        for a, b in zip(cells, cells[1:])
    )


def _locate_slab(
    slabs: Sequence[Subface], ms: Point, u: Direction, eps: float
) -> tuple[int, float, float]:
    value = u.project(ms)
    best: Optional[tuple[int, float, float]] = None
    for j, slab in enumerate(slabs):
        proj = [u.project(v) for v in slab.vertices]
        lo, hi = min(proj), max(proj)
        if lo - eps <= value <= hi + eps and ring_distance(slab.vertices, ms) <= eps:
            best = (j, lo, hi)
            break
    if best is None:
        raise ValueError(f"Middle point {tuple(ms)} is not on the boundary of its face")
    return best


def open_cycle(sss: SplitSkeleton, ms: Point, sf: int) -> SubfaceCycle:
    """
    Open the cycle of subfaces at the middle point ``ms`` of face ``sf``.

    The line through ``ms`` perpendicular to the boundary edge of ``sf`` cuts
    the subface holding ``ms``; the half with the later projection is f(t) and
    opens the sequence, the earlier half is f(m) and closes it. The remaining
    faces follow in counter-clockwise order. When that order is not a chain of
    neighbours the cells are threaded along a spanning tree instead.
    """
    eps = sss.eps
    skeleton = sss.base
    m = len(skeleton.faces)
    u = Direction.between(*skeleton.polygon.edge(sf))
    groups = {f: sss.of_face(f) for f in range(m)}
    slabs = groups[sf]
    j, lo, hi = _locate_slab(slabs, ms, u, eps)
    value = u.project(ms)

    head: list[Subface] = []
    tail: list[Subface] = []
    opening: Optional[Segment] = None
    if lo + eps < value < hi - eps:
        slab = slabs[j]
        lower, upper = split_convex(
            slab.vertices,
            slab.edge_tags,
            ms,
            add(ms, u.left_normal),
            EdgeTag.OPENING,
            eps,
        )
        if lower is None or upper is None:
            raise PerturbationFailure(
                "Opening line does not split its subface",
                {"face": sf, "subface": slab.id},
            )
        f_m = make_subface(-1, lower[0], lower[1], sf)
        f_t = make_subface(-1, upper[0], upper[1], sf)
        head, tail = [f_t] + slabs[j + 1 :], slabs[:j] + [f_m]
        opening = shared_border(f_m.vertices, f_t.vertices, eps)
    else:
        cut = j + 1 if value >= hi - eps else j
        head, tail = slabs[cut:], slabs[:cut]
    middle = [s for k in range(1, m) for s in groups[(sf + k) % m]]
    order = head + middle + tail
    if opening is None:
        opening = shared_border(order[-1].vertices, order[0].vertices, eps)

    if _is_chain(order, eps):
        cycle = SubfaceCycle(_renumber(order), opening, False, ms)
    else:
        logger.warning(
            "Subface cycle is not a chain; threading along a spanning tree",
            extra={"face": sf, "subfaces": len(order)},
        )
        threaded = thread_subfaces(sss.subfaces, slabs[j].id, ms, eps)
        cycle = SubfaceCycle(_renumber(threaded), None, True, ms)
    logger.info(
        "Subface cycle opened",
        extra={"face": sf, "length": len(cycle), "threaded": cycle.threaded},
    )
    return cycle


class _DegenerateFan(Exception):
    pass


def _adjacency(cells: Sequence[Subface], eps: float) -> nx.Graph:
    graph = nx.Graph()
    graph.add_nodes_from(range(len(cells)))
    for i, a in enumerate(cells):
        for k in range(i + 1, len(cells)):
            border = shared_border(a.vertices, cells[k].vertices, eps)
            if border is not None:
                graph.add_edge(i, k, border=border, weight=-border.length)
    return graph


def _spanning_trees(graph: nx.Graph, root: int) -> list[nx.DiGraph]:
    # neighbours iterate in edge insertion order, which is ascending by index
    return [
        nx.dfs_tree(graph, root),
        nx.bfs_tree(graph, root),
        nx.dfs_tree(nx.minimum_spanning_tree(graph), root),
    ]


def thread_subfaces(
    cells: Sequence[Subface], root: int, anchor: Point, eps: float = EPS
) -> list[Subface]:
    """
    Turn a set of convex cells into a chain by an Euler tour of a spanning
    tree. A cell with children is fanned from its entry point to the midpoint
    of each child border, so the tour enters and leaves every piece through a
    shared border. ``anchor`` is the entry point of the root cell; the chain
    starts and ends next to it.
    """
    graph = _adjacency(cells, eps)
    if not nx.is_connected(graph):
        raise PerturbationFailure("Subfaces do not form a connected partition")
    for strategy, tree in enumerate(_spanning_trees(graph, root)):
        try:
            return _tour(cells, graph, tree, root, anchor, eps)
        except _DegenerateFan as exc:
            logger.debug(
                "Threading strategy failed",
                extra={"strategy": strategy, "reason": str(exc)},
            )
    raise PerturbationFailure("Every threading strategy produced a degenerate fan")


def _tour(
    cells: Sequence[Subface],
    graph: nx.Graph,
    tree: nx.DiGraph,
    node: int,
    entry: Point,
    eps: float,
) -> list[Subface]:
    cell = cells[node]
    children = sorted(tree.successors(node))
    if not children:
        return [cell]
    ring, tags, entry_idx = insert_vertex(cell.vertices, cell.edge_tags, entry, eps)
    entry = ring[entry_idx]
    mids: list[tuple[int, Point]] = []
    for child in children:
        border: Segment = graph.edges[node, child]["border"]
        mids.append((child, border.midpoint))
    for _, mid in mids:
        ring, tags, _ = insert_vertex(ring, tags, mid, eps)
    n = len(ring)
    start = min(range(n), key=lambda i: dist(ring[i], entry))

    def ring_rank(p: Point) -> int:
        idx = min(range(n), key=lambda i: dist(ring[i], p))
        return (idx - start) % n

    mids.sort(key=lambda item: ring_rank(item[1]))
    pieces: list[list[Point]] = []
    piece_tags: list[list[EdgeTag]] = []
    rest, rest_tags = ring, tags
    for child, mid in mids:
        if dist(mid, entry) <= eps:
            raise _DegenerateFan(f"child {child} border touches the entry point")
        left, right = split_convex(rest, rest_tags, entry, mid, EdgeTag.THREADING, eps)
        if left is None or right is None:
            raise _DegenerateFan(f"fan chord to child {child} lies on the boundary")
        pieces.append(right[0])
        piece_tags.append(right[1])
        rest, rest_tags = left
    pieces.append(rest)
    piece_tags.append(rest_tags)

    out = [make_subface(-1, pieces[0], piece_tags[0], cell.parent_face)]
    for k, (child, mid) in enumerate(mids):
        out.extend(_tour(cells, graph, tree, child, mid, eps))
        out.append(make_subface(-1, pieces[k + 1], piece_tags[k + 1], cell.parent_face))
    return out
