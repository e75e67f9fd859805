"""
Recursive embedding of a balanced binary tree into a chain of convex cells.

Every call draws a backbone through its chain, walks the cells on both sides
of it, and places the subtree root on the point where the left subtree's count
is reached. The tree edge into that root follows the backbone.
"""

import logging
from dataclasses import dataclass, field
from enum import Enum
from itertools import islice
from typing import Iterator, NamedTuple, Optional, Sequence

import numpy as np
import shapely
from shapely.geometry import LineString

from ..exceptions import CountMismatch, PerturbationFailure
from .geometry import (
    EPS,
    Direction,
    Point,
    PointSet,
    Polyline,
    Segment,
    SimplePolygon,
    add,
    dist,
    inside_convex_mask,
    insert_vertex,
    lerp,
    merge_collinear,
    midpoint,
    path_point_at,
    point_segment_distance,
    polyline_contacts,
    ray_exit,
    ring_distance,
    scale,
    shared_border,
    signed_area,
    split_convex,
    sub,
)
from .partition import (
    Division,
    PartitionResult,
    divide_subface,
    find_anchors,
    merge_convex_cells,
    partition,
)
from .sss import EdgeTag, Subface, make_subface
from .tree import BalancedBinaryTree

__all__ = [
    "Backbone",
    "Embedding",
    "SideTag",
    "build_backbone",
    "concatenate",
    "embed",
    "embed_partitioned",
    "rec_embed",
    "route_edge",
]

logger = logging.getLogger("skeleton-embed.embedder")


class SideTag(Enum):
    LEFT = "l"
    RIGHT = "r"


@dataclass(frozen=True)
class Backbone:
    """Directed path q -> backbone points -> q' through a chain of cells."""

    origin: Point
    terminal: Point
    points: tuple[Point, ...]
    perturbed: int = 0
    bent: int = 0

    @property
    def vertices(self) -> tuple[Point, ...]:
        return (self.origin, *self.points, self.terminal)

    @property
    def polyline(self) -> Polyline:
        return Polyline(tuple(merge_collinear(self.vertices)))


@dataclass
class Embedding:
    tree: BalancedBinaryTree
    points: PointSet
    assignment: dict[int, int] = field(default_factory=dict)
    routes: dict[tuple[int, int], Polyline] = field(default_factory=dict)
    backbones: list[Backbone] = field(default_factory=list)
    partition_chord: Optional[Segment] = None

    def position(self, node: int) -> Point:
        return self.points[self.assignment[node]]

    def bends(self, edge: tuple[int, int]) -> int:
        return self.routes[edge].bends()

    @property
    def max_bends(self) -> int:
        return max((r.bends() for r in self.routes.values()), default=0)

    @property
    def total_bends(self) -> int:
        return sum(r.bends() for r in self.routes.values())


def _fractions(steps: int) -> list[float]:
    delta = 1.0 / (2 * (steps + 1))
    out = [0.5]
    for j in range(1, steps + 1):
        out.extend((0.5 + j * delta, 0.5 - j * delta))
    return out


def _chord_ok(
    cell: Subface, a: Point, b: Point, points: PointSet, eps: float
) -> bool:
    if dist(a, b) <= eps:
        return False
    try:
        ring, tags, _ = insert_vertex(cell.vertices, cell.edge_tags, a, eps)
        ring, tags, _ = insert_vertex(ring, tags, b, eps)
    except ValueError:
        return False
    left, right = split_convex(ring, tags, a, b, EdgeTag.BACKBONE, eps)
    if left is None or right is None:
        return False
    # the chord must cross the interior, not run along an edge
    if ring_distance(cell.vertices, midpoint(a, b)) <= eps:
        return False
    return all(point_segment_distance(points[i], a, b) > eps for i in cell.point_ids)


def _give_points(
    pieces: Sequence[tuple[list[Point], list[EdgeTag]]],
    source: Subface,
    points: PointSet,
    eps: float,
) -> list[Subface]:
    ids = np.asarray(source.point_ids, dtype=int)
    xy = points.array[ids] if len(ids) else np.zeros((0, 2))
    taken = np.zeros(len(ids), dtype=bool)
    out = []
    for ring, tags in pieces:
        mask = inside_convex_mask(ring, xy, eps) & ~taken
        taken |= mask
        out.append(
            make_subface(
                -1, ring, tags, source.parent_face, [int(i) for i in ids[mask]]
            )
        )
    if not taken.all():
        raise CountMismatch(len(ids), int(taken.sum()), phase="backbone")
    return out


def _split_by_chord(
    cell: Subface, a: Point, b: Point, points: PointSet, eps: float
) -> tuple[list[Subface], list[Subface]]:
    ring, tags, _ = insert_vertex(cell.vertices, cell.edge_tags, a, eps)
    ring, tags, _ = insert_vertex(ring, tags, b, eps)
    left, right = split_convex(ring, tags, a, b, EdgeTag.BACKBONE, eps)
    if left is None or right is None:
        raise PerturbationFailure("Backbone chord does not split its cell")
    lhs, rhs = _give_points([left, right], cell, points, eps)
    return [lhs], [rhs]


def _bent_split(
    cell: Subface, a: Point, b: Point, points: PointSet, eps: float
) -> tuple[Point, list[Subface], list[Subface]]:
    """
    Route the backbone a -> g -> b through an interior vertex g when the
    straight chord is unusable. Returns g and the left/right pieces in
    backbone order.
    """
    mid = midpoint(a, b)
    base = Direction.of(sub(b, a)) if dist(a, b) > eps else Direction(1.0, 0.0)
    flip = Direction(-base.left_normal.dx, -base.left_normal.dy)
    for normal in (base.left_normal, flip):
        exit_point = ray_exit(cell.vertices, mid, add(mid, normal), eps)
        if exit_point is None:
            continue
        depth = dist(mid, exit_point)
        for frac in (0.5, 0.25, 0.75, 0.125, 0.375):
            g = add(mid, scale(normal, depth * frac))
            pieces = _three_way(cell, a, g, b, points, eps)
            if pieces is not None:
                return (g, *pieces)
    raise PerturbationFailure(
        "No interior backbone vertex fits the cell", {"cell": cell.id}
    )


def _three_way(
    cell: Subface, a: Point, g: Point, b: Point, points: PointSet, eps: float
) -> Optional[tuple[list[Subface], list[Subface]]]:
    if any(
        point_segment_distance(points[i], a, g) <= eps
        or point_segment_distance(points[i], g, b) <= eps
        for i in cell.point_ids
    ):
        return None
    try:
        ring, tags, _ = insert_vertex(cell.vertices, cell.edge_tags, a, eps)
        ring, tags, _ = insert_vertex(ring, tags, b, eps)
    except ValueError:
        return None
    first_left, first_right = split_convex(ring, tags, a, g, EdgeTag.BACKBONE, eps)
    if first_left is None or first_right is None:
        return None
    b_on_left = signed_area((a, g, b)) > 0
    if b_on_left:
        holder, other = first_left, first_right
    else:
        holder, other = first_right, first_left
    try:
        held_ring, held_tags, _ = insert_vertex(holder[0], holder[1], g, eps)
    except ValueError:
        return None
    second_left, second_right = split_convex(
        held_ring, held_tags, g, b, EdgeTag.BACKBONE, eps
    )
    if second_left is None or second_right is None:
        return None
    if b_on_left:
        wedge, beyond = second_left, second_right
    else:
        wedge, beyond = second_right, second_left
    wedge_cell, near_a, near_b = _give_points([wedge, other, beyond], cell, points, eps)
    if b_on_left:
        return [wedge_cell], [near_a, near_b]
    return [near_a, near_b], [wedge_cell]


def _terminal_path(
    cell: Subface, entry: Optional[Segment], origin: Point, eps: float
) -> list[Point]:
    ring, tags = list(cell.vertices), list(cell.edge_tags)
    if entry is None:
        ring, tags, i = insert_vertex(ring, tags, origin, eps)
        n = len(ring)
        return [ring[(i + k) % n] for k in range(n + 1)]
    # perimeter of the last cell minus its border with the predecessor
    ring, tags, _ = insert_vertex(ring, tags, entry.a, eps)
    ring, tags, _ = insert_vertex(ring, tags, entry.b, eps)
    n = len(ring)
    k = min(range(n), key=lambda i: dist(ring[i], entry.b))
    stop = min(range(n), key=lambda i: dist(ring[i], entry.a))
    path = [ring[k]]
    while k != stop:
        k = (k + 1) % n
        path.append(ring[k])
    return path


def build_backbone(
    chain: Sequence[Subface],
    q: Point,
    points: PointSet,
    eps: float = EPS,
    steps: int = 8,
) -> tuple[Backbone, list[Subface], list[Subface]]:
    """
    Backbone from ``q`` through the midpoints of consecutive borders to q'
    on the last cell. Points are shifted along their border when the chord
    they produce is unusable; if no shift works, the cell gets an interior
    backbone vertex instead. Returns the backbone with the cells left and
    right of it, both in backbone order.
    """
    if not chain:
        raise ValueError("Backbone needs at least one cell")
    if ring_distance(chain[0].vertices, q) > eps:
        raise PerturbationFailure(
            "Backbone origin is off the first cell", {"origin": tuple(q)}
        )
    borders: list[Segment] = []
    for k, (prev, nxt) in enumerate(zip(chain, chain[1:])):
        border = shared_border(prev.vertices, nxt.vertices, eps)
        if border is None:
            raise PerturbationFailure(
                "Consecutive cells do not share a border", {"cell": k}
            )
        borders.append(border)
    fractions = _fractions(steps)
    scl: list[Subface] = []
    scr: list[Subface] = []
    vertices: list[Point] = []
    perturbed = bent = 0
    a = q
    for k, cell in enumerate(chain):
        if k < len(borders):
            border = borders[k]
            # a backbone point on a border end leaves a neighbour without a side
            options = [
                b
                for b in (lerp(border.a, border.b, f) for f in fractions)
                if min(dist(b, border.a), dist(b, border.b)) > 2 * eps
            ] or [border.midpoint]
        else:
            path = _terminal_path(
                cell, borders[-1].reversed() if borders else None, q, eps
            )
            options = [path_point_at(path, f)[0] for f in fractions]
        usable = (
            i for i, b in enumerate(options) if _chord_ok(cell, a, b, points, eps)
        )
        chosen = next(usable, None)
        if chosen is not None:
            b = options[chosen]
            perturbed += int(chosen > 0)
            left, right = _split_by_chord(cell, a, b, points, eps)
        else:
            b = options[0]
            g, left, right = _bent_split(cell, a, b, points, eps)
            vertices.append(g)
            bent += 1
            logger.warning(
                "Backbone bent inside cell", extra={"cell": cell.id, "vertex": tuple(g)}
            )
        scl.extend(left)
        scr.extend(right)
        if k < len(borders):
            vertices.append(b)
        a = b
    backbone = Backbone(q, a, tuple(vertices), perturbed, bent)
    return backbone, scl, scr


def concatenate(
    scl: Sequence[Subface], scr: Sequence[Subface], sid: SideTag
) -> list[Subface]:
    if sid is SideTag.RIGHT:
        return [*scr, *scl]
    return [*scl, *scr]


def route_edge(backbone: Backbone, q: Point, anchor: Point, t: Point) -> Polyline:
    """
    Backbone from q up to the anchor, then straight to t. The anchor is a
    backbone vertex or a point inside one of the backbone segments.
    """
    verts = list(backbone.vertices)
    if dist(verts[0], q) > EPS * max(1.0, dist(q, t)):
        raise ValueError("Route must start at the backbone origin")
    scale_eps = EPS * max(1.0, max(dist(q, v) for v in verts))
    idx = next(
        (i for i, v in enumerate(verts) if dist(v, anchor) <= scale_eps), None
    )
    if idx is not None:
        path = [*verts[: idx + 1], t]
    else:
        seg = next(
            (
                i
                for i, (u, v) in enumerate(zip(verts, verts[1:]))
                if point_segment_distance(anchor, u, v) <= scale_eps
            ),
            None,
        )
        if seg is None:
            raise ValueError(f"Anchor {tuple(anchor)} is not on the backbone")
        path = [*verts[: seg + 1], anchor, t]
    return Polyline(tuple(merge_collinear(path, scale_eps)))


def _trim(chain: list[Subface]) -> list[Subface]:
    # empty cells at the far end of a chain carry nothing and only add bends
    while len(chain) > 1 and chain[-1].count == 0:
        chain.pop()
    return chain


def _walk_to(cells: Sequence[Subface], left_size: int) -> tuple[int, int]:
    running = 0
    for idx, cell in enumerate(cells):
        if running + cell.count > left_size:
            return idx, running
        running += cell.count
    raise CountMismatch(left_size + 1, running)


def _other_side(sid: SideTag) -> SideTag:
    return SideTag.LEFT if sid is SideTag.RIGHT else SideTag.RIGHT


def _walk(
    scl: Sequence[Subface], scr: Sequence[Subface], sid: SideTag
) -> list[Subface]:
    if sid is SideTag.RIGHT:
        return concatenate(list(reversed(scl)), scr, sid)
    return concatenate(scl, list(reversed(scr)), sid)


def _is_chain(cells: Sequence[Subface], q: Point, eps: float) -> bool:
    if ring_distance(cells[0].vertices, q) > eps:
        return False
    return all(
        shared_border(a.vertices, b.vertices, eps) is not None
        for a, b in zip(cells, cells[1:])
    )


def _anchor_candidates(
    backbone: Backbone, cf: Subface, steps: int, eps: float
) -> tuple[list[Point], dict[Point, Point]]:
    """
    Backbone vertices on the boundary of ``cf``, then points spread along the
    backbone segments that run on that boundary. The mapping sends each
    spread point to the backbone vertex the route passes just before it.
    """
    verts = backbone.vertices
    ring = cf.vertices
    out = [v for v in verts[:-1] if ring_distance(ring, v) <= eps]
    entries: dict[Point, Point] = {}
    for u, v in zip(verts, verts[1:]):
        if any(ring_distance(ring, p) > eps for p in (u, v, midpoint(u, v))):
            continue
        for j in range(1, steps + 1):
            p = lerp(u, v, j / (steps + 1))
            out.append(p)
            entries[p] = u
    return out, entries


def _separates(
    walk: Sequence[Subface],
    idx: int,
    division: Division,
    entry: Point,
    anchor: Point,
    eps: float,
) -> bool:
    # the stretch entry -> anchor must keep near cells on one side, far on the other
    mid = midpoint(entry, anchor)
    across = next(
        (
            i
            for i, cell in enumerate(walk)
            if i != idx and ring_distance(cell.vertices, mid) <= eps
        ),
        None,
    )
    if across is None:
        return False
    on_near = ring_distance(division.near.vertices, mid) <= eps
    return (across < idx) != on_near


class _Placement(NamedTuple):
    backbone: Backbone
    walk: list[Subface]
    idx: int
    division: Division
    route: Polyline


class _RecursiveEmbedder:
    """Carries the shared state of one embedding run through the recursion."""

    def __init__(
        self,
        embedding: Embedding,
        eps: float,
        perturbation_steps: int,
        merge_cells: bool,
    ) -> None:
        self.out = embedding
        self.tree = embedding.tree
        self.points = embedding.points
        self.eps = eps
        self.steps = perturbation_steps
        self.merge_cells = merge_cells
        self._edges: list[tuple[int, int]] = []
        self._lines: list[LineString] = []
        self._boxes: list[np.ndarray] = []

    def _chains(self, chain: list[Subface], q: Point) -> list[list[Subface]]:
        if not self.merge_cells:
            return [chain]
        merged = merge_convex_cells(chain, self.eps)
        if len(merged) < len(chain) and _is_chain(merged, q, self.eps):
            return [merged, chain]
        return [chain]

    def _walks(
        self, chain: list[Subface], q: Point, sid: SideTag
    ) -> Iterator[tuple[Backbone, SideTag, list[Subface]]]:
        for cells in self._chains(chain, q):
            try:
                backbone, scl, scr = build_backbone(
                    cells, q, self.points, self.eps, self.steps
                )
            except (PerturbationFailure, ValueError) as e:
                logger.debug(
                    "Backbone rejected",
                    extra={"cells": len(cells), "reason": str(e)},
                )
                continue
            for side in (sid, _other_side(sid)):
                yield backbone, side, _walk(scl, scr, side)

    def _sync(self) -> None:
        for edge, route in islice(self.out.routes.items(), len(self._edges), None):
            xy = np.asarray(route.vertices, dtype=float)
            self._edges.append(edge)
            self._lines.append(LineString(xy))
            self._boxes.append(np.concatenate([xy.min(axis=0), xy.max(axis=0)]))

    def _clear(self, route: Polyline, parent: int, q: Point) -> bool:
        """True when ``route`` meets no drawn route except at ``q``."""
        self._sync()
        if not self._edges:
            return True
        eps = self.eps
        xy = np.asarray(route.vertices, dtype=float)
        boxes = np.asarray(self._boxes)
        near = np.all(boxes[:, :2] <= xy.max(axis=0) + eps, axis=1) & np.all(
            boxes[:, 2:] >= xy.min(axis=0) - eps, axis=1
        )
        idx = np.flatnonzero(near)
        if not len(idx):
            return True
        lines = np.asarray(self._lines, dtype=object)[idx]
        gaps = shapely.distance(lines, LineString(xy))
        for i in idx[gaps <= 2 * eps]:
            edge = self._edges[i]
            allowed = [q] if parent in edge else []
            contacts = polyline_contacts(self.out.routes[edge], route, allowed, eps)
            hit = next(contacts, None)
            if hit is not None:
                logger.debug(
                    "Route meets an earlier route",
                    extra={"edge": edge, "kind": hit.kind.value},
                )
                return False
        return True

    def _place(
        self,
        backbone: Backbone,
        walk: list[Subface],
        q: Point,
        parent: int,
        node: int,
    ) -> Optional[_Placement]:
        tree, eps = self.tree, self.eps
        left_size = tree.size(tree.left[node])
        idx, running = _walk_to(walk, left_size)
        cf = walk[idx]
        k = left_size - running + 1
        before = (
            shared_border(walk[idx - 1].vertices, cf.vertices, eps) if idx else None
        )
        after = (
            shared_border(cf.vertices, walk[idx + 1].vertices, eps)
            if idx + 1 < len(walk)
            else None
        )
        candidates, entries = _anchor_candidates(backbone, cf, self.steps, eps)
        for anchor in find_anchors(cf, before, after, candidates, eps):
            try:
                division = divide_subface(
                    cf, anchor.point, k, self.points, eps, anchor.clockwise
                )
                route = route_edge(
                    backbone, q, anchor.point, self.points[division.point]
                )
            except (PerturbationFailure, ValueError):
                continue
            if idx and shared_border(
                walk[idx - 1].vertices, division.near.vertices, eps
            ) is None:
                continue
            if idx + 1 < len(walk) and shared_border(
                division.far.vertices, walk[idx + 1].vertices, eps
            ) is None:
                continue
            entry = entries.get(anchor.point)
            if entry is not None and not _separates(
                walk, idx, division, entry, anchor.point, eps
            ):
                continue
            if not self._clear(route, parent, q):
                continue
            return _Placement(backbone, walk, idx, division, route)
        return None

    def run(
        self,
        chain: Sequence[Subface],
        q: Point,
        parent: int,
        node: Optional[int],
        sid: SideTag,
    ) -> None:
        if node is None:
            return
        tree = self.tree
        held = sum(c.count for c in chain)
        if held != tree.size(node):
            raise CountMismatch(tree.size(node), held)
        cells = _trim(list(chain))
        placed = None
        for backbone, side, walk in self._walks(cells, q, sid):
            placed = self._place(backbone, walk, q, parent, node)
            if placed is not None:
                if side is not sid:
                    logger.warning(
                        "Chain walked against its side",
                        extra={"node": node, "side": side.value},
                    )
                break
        if placed is None:
            raise PerturbationFailure(
                "No anchor gives the tree edge a clear route",
                {"node": node, "parent": parent, "cells": len(cells)},
            )
        self.out.backbones.append(placed.backbone)
        division, idx, walk = placed.division, placed.idx, placed.walk
        t = division.point
        self.out.assignment[node] = t
        self.out.routes[(parent, node)] = placed.route
        near = [division.near, *reversed(walk[:idx])]
        far = [division.far, *walk[idx + 1 :]]
        logger.debug(
            "Node placed",
            extra={
                "node": node,
                "point": t,
                "cell": idx,
                "bends": placed.route.bends(),
            },
        )
        self.run(near, self.points[t], node, tree.left[node], SideTag.RIGHT)
        self.run(far, self.points[t], node, tree.right[node], SideTag.LEFT)


def rec_embed(
    chain: Sequence[Subface],
    q: Point,
    parent: int,
    node: Optional[int],
    sid: SideTag,
    embedding: Embedding,
    eps: float = EPS,
    perturbation_steps: int = 8,
    merge_cells: bool = True,
) -> None:
    """Embed the subtree at ``node`` into ``chain``, entering from ``q``."""
    _RecursiveEmbedder(embedding, eps, perturbation_steps, merge_cells).run(
        chain, q, parent, node, sid
    )


def embed(
    polygon: SimplePolygon,
    points: PointSet,
    tree: BalancedBinaryTree,
    tolerance: float = EPS,
    perturbation_steps: int = 8,
    merge_cells: bool = True,
    max_events_factor: int = 64,
) -> Embedding:
    """
    Embed ``tree`` onto ``points`` inside ``polygon``: the root goes on the
    point where the partition chain is divided, its subtrees into the two
    halves of the chain.
    """
    if len(points) != tree.n:
        raise CountMismatch(tree.n, len(points), phase="embed")
    embedding = Embedding(tree, points)
    if tree.root is None:
        return embedding
    result = partition(polygon, points, tree, tolerance, max_events_factor)
    eps = polygon.eps(tolerance)
    embed_partitioned(result, embedding, eps, perturbation_steps, merge_cells)
    logger.info(
        "Embedding complete",
        extra={
            "nodes": tree.n,
            "edges": len(embedding.routes),
            "max_bends": embedding.max_bends,
            "bent_backbones": sum(b.bent for b in embedding.backbones),
        },
    )
    return embedding


def embed_partitioned(
    result: PartitionResult,
    embedding: Embedding,
    eps: float = EPS,
    perturbation_steps: int = 8,
    merge_cells: bool = True,
) -> Embedding:
    """Place the root on the partition point and embed both subtrees."""
    tree = embedding.tree
    root = tree.root
    if root is None:
        return embedding
    embedding.assignment[root] = result.point
    embedding.partition_chord = result.chord
    q = embedding.points[result.point]
    worker = _RecursiveEmbedder(embedding, eps, perturbation_steps, merge_cells)
    worker.run(result.left, q, root, tree.left[root], SideTag.RIGHT)
    worker.run(result.right, q, root, tree.right[root], SideTag.LEFT)
    return embedding
