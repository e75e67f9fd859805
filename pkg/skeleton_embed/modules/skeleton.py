"""
Straight skeleton by the shrinking-wavefront process.

Every polygon edge moves inward at unit speed. Wavefront vertices are kinetic:
each stores the pair of edges it sits between, its birth point and time, and
its velocity, so positions at any event time are recomputed from the origin
rather than accumulated. Edge events (an edge shrinks to nothing) and split
events (a reflex vertex reaches an opposite edge) are processed in time order
from a heap, in the manner of the classic LAV/SLAV formulation.
"""

import heapq
import logging
from collections import defaultdict
from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property
from typing import Iterator, Optional

from ..exceptions import NumericFailure
from .geometry import (
    EPS,
    Point,
    SimplePolygon,
    add,
    cross,
    dist,
    dot,
    midpoint,
    scale,
    signed_area,
    sub,
)

__all__ = [
    "ArcKind",
    "NodeKind",
    "SkeletonArc",
    "SkeletonFace",
    "SkeletonNode",
    "StraightSkeleton",
    "compute_straight_skeleton",
    "face_areas",
    "face_of_edge",
]

logger = logging.getLogger("skeleton-embed.skeleton")

_EDGE_EVENT = 0
_SPLIT_EVENT = 1
_PARALLEL = 1e-12


class NodeKind(Enum):
    POLYGON_VERTEX = "polygon_vertex"
    DUMMY = "dummy"


class ArcKind(Enum):
    BCD = "bcd"
    INTERNAL = "internal"


@dataclass(frozen=True)
class SkeletonNode:
    id: int
    position: Point
    kind: NodeKind
    time: float = 0.0


@dataclass(frozen=True)
class SkeletonArc:
    """Bisector trace between two nodes; ``faces`` are the two faces it separates."""

    id: int
    endpoints: tuple[int, int]
    kind: ArcKind
    faces: tuple[int, int]

    def other(self, node: int) -> int:
        return self.endpoints[1] if self.endpoints[0] == node else self.endpoints[0]


@dataclass(frozen=True)
class SkeletonFace:
    """
    Region swept by polygon edge ``boundary_edge``. ``node_ids`` lists the
    nodes of ``boundary_chain`` in the same counter-clockwise order, starting
    with the two endpoints of the boundary edge.
    """

    id: int
    boundary_edge: int
    boundary_chain: SimplePolygon
    node_ids: tuple[int, ...]
    incident_arcs: tuple[int, ...]

    @property
    def vertices(self) -> tuple[Point, ...]:
        return self.boundary_chain.vertices

    @property
    def area(self) -> float:
        return signed_area(self.boundary_chain.vertices)


@dataclass(frozen=True)
class StraightSkeleton:
    polygon: SimplePolygon
    nodes: tuple[SkeletonNode, ...]
    arcs: tuple[SkeletonArc, ...]
    faces: tuple[SkeletonFace, ...]
    degenerate: bool
    eps: float

    @property
    def dummy_nodes(self) -> list[SkeletonNode]:
        return [n for n in self.nodes if n.kind is NodeKind.DUMMY]

    @cached_property
    def node_faces(self) -> dict[int, tuple[int, ...]]:
        """Faces whose boundary passes through each node."""
        table: dict[int, set[int]] = defaultdict(set)
        for face in self.faces:
            for node in face.node_ids:
                table[node].add(face.id)
        return {node: tuple(sorted(ids)) for node, ids in sorted(table.items())}

    @cached_property
    def node_neighbors(self) -> dict[int, tuple[int, ...]]:
        table: dict[int, set[int]] = defaultdict(set)
        for arc in self.arcs:
            u, v = arc.endpoints
            table[u].add(v)
            table[v].add(u)
        return {node: tuple(sorted(ids)) for node, ids in sorted(table.items())}

    def position(self, node: int) -> Point:
        return self.nodes[node].position


@dataclass(eq=False)
class _WavefrontVertex:
    edge_in: int
    edge_out: int
    origin: Point
    born: float
    velocity: Optional[Point]
    node: int
    prev: "_WavefrontVertex" = field(init=False, repr=False)
    next: "_WavefrontVertex" = field(init=False, repr=False)
    alive: bool = True

    def at(self, t: float) -> Point:
        if self.velocity is None:
            return self.origin
        return add(self.origin, scale(self.velocity, t - self.born))


class _Wavefront:
    """Mutable event-processing state for one polygon."""

    def __init__(self, polygon: SimplePolygon, eps: float, max_events: int):
        self.polygon = polygon
        self.eps = eps
        self.merge_eps = 100.0 * eps
        self.max_events = max_events
        self.now = 0.0
        self.degenerate = False
        self.starts = list(polygon.vertices)
        self.dirs = [e.direction for e in polygon.edges]
        self.normals = [d.left_normal for d in self.dirs]
        self.positions: list[Point] = list(polygon.vertices)
        self.times: list[float] = [0.0] * polygon.m
        self.arcs: list[tuple[int, int, tuple[int, int]]] = []
        self._arc_keys: set[tuple[int, int]] = set()
        self._heap: list[tuple[float, float, int, int, tuple]] = []
        self._seq = 0
        self.vertices: list[_WavefrontVertex] = []

    def run(self) -> None:
        m = self.polygon.m
        ring = [
            self._new_vertex((i - 1) % m, i, self.starts[i], 0.0, i) for i in range(m)
        ]
        for i, v in enumerate(ring):
            self._link(v, ring[(i + 1) % m])
        for v in ring:
            self._push_edge_event(v)
            self._push_split_events(v)

        popped = 0
        while self._heap:
            popped += 1
            if popped > self.max_events:
                raise NumericFailure(
                    "Wavefront event guard exceeded",
                    {"events": popped, "limit": self.max_events},
                )
            tau, _, _, kind, payload = heapq.heappop(self._heap)
            if kind == _EDGE_EVENT:
                x, y = payload
                if not (x.alive and y.alive and x.next is y):
                    continue
                self.now = max(self.now, tau)
                self._handle_edge_event(x, y, tau)
            else:
                v, e = payload
                if not v.alive:
                    continue
                target = self._split_target(v, e, tau)
                if target is None:
                    continue
                self.now = max(self.now, tau)
                self._handle_split_event(v, e, target[0], target[1], tau)

        stalled = [v for v in self.vertices if v.alive]
        if stalled:
            raise NumericFailure(
                "Wavefront stalled with live vertices",
                {"alive": len(stalled), "time": self.now},
            )

    def _velocity(self, a: int, b: int) -> Optional[Point]:
        na, nb = self.normals[a], self.normals[b]
        det = cross(na, nb)
        if abs(det) > _PARALLEL:
            return Point((nb.dy - na.dy) / det, (na.dx - nb.dx) / det)
        if dot(na, nb) > 0:
            return Point(na.dx, na.dy)
        return None

    def _new_vertex(
        self, edge_in: int, edge_out: int, origin: Point, born: float, node: int
    ) -> _WavefrontVertex:
        v = _WavefrontVertex(
            edge_in, edge_out, origin, born, self._velocity(edge_in, edge_out), node
        )
        self.vertices.append(v)
        return v

    @staticmethod
    def _link(a: _WavefrontVertex, b: _WavefrontVertex) -> None:
        a.next = b
        b.prev = a

    @staticmethod
    def _lav(v: _WavefrontVertex) -> Iterator[_WavefrontVertex]:
        cur = v
        while True:
            yield cur
            cur = cur.next
            if cur is v:
                return

    def _is_reflex(self, v: _WavefrontVertex) -> bool:
        return cross(self.dirs[v.edge_in], self.dirs[v.edge_out]) < -_PARALLEL

    def _push(self, tau: float, span: float, kind: int, payload: tuple) -> None:
        self._seq += 1
        heapq.heappush(self._heap, (tau, span, self._seq, kind, payload))

    def _push_edge_event(self, x: _WavefrontVertex) -> None:
        y = x.next
        if y is x or x.velocity is None or y.velocity is None:
            return
        d = self.dirs[x.edge_out]
        length = dot(d, sub(y.at(self.now), x.at(self.now)))
        closing = dot(d, sub(x.velocity, y.velocity))
        if closing <= _PARALLEL or length < -self.merge_eps:
            return
        self._push(self.now + max(length, 0.0) / closing, length, _EDGE_EVENT, (x, y))

    def _push_split_events(self, v: _WavefrontVertex) -> None:
        if v.velocity is None or not self._is_reflex(v):
            return
        pos = v.at(self.now)
        seen: set[int] = set()
        for x in self._lav(v):
            e = x.edge_out
            if e in (v.edge_in, v.edge_out) or e in seen:
                continue
            seen.add(e)
            n = self.normals[e]
            ahead = dot(n, sub(pos, self.starts[e])) - self.now
            closing = 1.0 - dot(n, v.velocity)
            if ahead < -self.merge_eps or closing <= _PARALLEL:
                continue
            self._push(self.now + max(ahead, 0.0) / closing, ahead, _SPLIT_EVENT, (v, e))

    def _split_target(
        self, v: _WavefrontVertex, e: int, tau: float
    ) -> Optional[tuple[_WavefrontVertex, _WavefrontVertex]]:
        d = self.dirs[e]
        hit = d.project(v.at(tau))
        for x in self._lav(v):
            if x.edge_out != e:
                continue
            y = x.next
            lo, hi = d.project(x.at(tau)), d.project(y.at(tau))
            if lo - self.merge_eps <= hit <= hi + self.merge_eps:
                return x, y
        return None

    def _node_at(self, p: Point, tau: float) -> int:
        for node in range(self.polygon.m, len(self.positions)):
            if (
                abs(self.times[node] - tau) <= self.merge_eps
                and dist(self.positions[node], p) <= self.merge_eps
            ):
                self.degenerate = True
                logger.debug("Merged event at %s into node %d", p, node)
                return node
        self.positions.append(p)
        self.times.append(tau)
        return len(self.positions) - 1

    def _add_arc(self, u: int, v: int, faces: tuple[int, int]) -> None:
        if u == v:
            self.degenerate = True
            return
        key = (min(u, v), max(u, v))
        if key in self._arc_keys:
            self.degenerate = True
            return
        self._arc_keys.add(key)
        self.arcs.append((u, v, (min(faces), max(faces))))

    def _handle_edge_event(
        self, x: _WavefrontVertex, y: _WavefrontVertex, tau: float
    ) -> None:
        p = midpoint(x.at(tau), y.at(tau))
        node = self._node_at(p, tau)
        logger.debug("Edge event on edge %d at t=%.12g %s", x.edge_out, tau, p)
        self._add_arc(x.node, node, (x.edge_in, x.edge_out))
        self._add_arc(y.node, node, (y.edge_in, y.edge_out))
        x.alive = y.alive = False
        if x.prev is y.next:
            last = x.prev
            self._add_arc(last.node, node, (last.edge_in, last.edge_out))
            last.alive = False
            return
        z = self._new_vertex(x.edge_in, y.edge_out, p, tau, node)
        self._link(x.prev, z)
        self._link(z, y.next)
        self._settle(z)

    def _handle_split_event(
        self,
        v: _WavefrontVertex,
        e: int,
        x: _WavefrontVertex,
        y: _WavefrontVertex,
        tau: float,
    ) -> None:
        p = v.at(tau)
        node = self._node_at(p, tau)
        logger.debug("Split event: edge %d hit at t=%.12g %s", e, tau, p)
        self._add_arc(v.node, node, (v.edge_in, v.edge_out))
        v.alive = False
        before, after = v.prev, v.next
        v1 = self._new_vertex(v.edge_in, e, p, tau, node)
        v2 = self._new_vertex(e, v.edge_out, p, tau, node)
        self._link(before, v1)
        self._link(v1, y)
        self._link(x, v2)
        self._link(v2, after)
        self._settle(v1)
        if v2.alive:
            self._settle(v2)

    def _settle(self, v: _WavefrontVertex) -> None:
        """Close two-vertex loops, otherwise schedule the vertex's events."""
        if v.next.next is v:
            other = v.next
            self._add_arc(v.node, other.node, (v.edge_in, v.edge_out))
            v.alive = other.alive = False
            return
        self._push_edge_event(v.prev)
        self._push_edge_event(v)
        self._push_split_events(v)


def _build_faces(
    polygon: SimplePolygon, positions: list[Point], arcs: list[SkeletonArc]
) -> tuple[SkeletonFace, ...]:
    m = polygon.m
    by_face: dict[int, dict[int, list[int]]] = defaultdict(lambda: defaultdict(list))
    arc_ids: dict[int, list[int]] = defaultdict(list)
    for arc in arcs:
        u, v = arc.endpoints
        for f in arc.faces:
            by_face[f][u].append(v)
            by_face[f][v].append(u)
            arc_ids[f].append(arc.id)

    faces = []
    for i in range(m):
        graph = by_face[i]
        start, goal = (i + 1) % m, i
        walk = [start]
        visited = {start}
        while walk[-1] != goal:
            options = sorted(n for n in graph[walk[-1]] if n not in visited)
            if not options:
                raise NumericFailure(
                    f"Face {i} boundary could not be closed", {"face": i}
                )
            if len(options) > 1:
                logger.warning("Face %d branches at node %d", i, walk[-1])
            walk.append(options[0])
            visited.add(options[0])
        node_ids = (i, *walk[:-1])
        faces.append(
            SkeletonFace(
                id=i,
                boundary_edge=i,
                boundary_chain=SimplePolygon(tuple(positions[n] for n in node_ids)),
                node_ids=node_ids,
                incident_arcs=tuple(sorted(set(arc_ids[i]))),
            )
        )
    return tuple(faces)


def compute_straight_skeleton(
    polygon: SimplePolygon,
    tolerance: float = EPS,
    max_events_factor: int = 64,
) -> StraightSkeleton:
    """
    Build the straight skeleton of ``polygon``.

    Raises NumericFailure if the event queue runs dry with live wavefront
    vertices or exceeds ``max_events_factor * m**2`` events.
    """
    eps = polygon.eps(tolerance)
    m = polygon.m
    front = _Wavefront(polygon, eps, max(64, max_events_factor * m * m))
    front.run()

    nodes = tuple(
        SkeletonNode(
            id=i,
            position=pos,
            kind=NodeKind.POLYGON_VERTEX if i < m else NodeKind.DUMMY,
            time=front.times[i],
        )
        for i, pos in enumerate(front.positions)
    )
    arcs = tuple(
        SkeletonArc(
            id=k,
            endpoints=(u, v),
            kind=ArcKind.BCD if min(u, v) < m else ArcKind.INTERNAL,
            faces=faces,
        )
        for k, (u, v, faces) in enumerate(front.arcs)
    )
    faces = _build_faces(polygon, front.positions, list(arcs))
    if front.degenerate:
        logger.warning(
            "Simultaneous events merged into higher-degree skeleton nodes",
            extra={"m": m, "nodes": len(nodes)},
        )
    logger.info(
        "Straight skeleton built: %d faces, %d dummy nodes, %d arcs",
        len(faces),
        len(nodes) - m,
        len(arcs),
    )
    return StraightSkeleton(
        polygon=polygon,
        nodes=nodes,
        arcs=arcs,
        faces=faces,
        degenerate=front.degenerate,
        eps=eps,
    )


def face_of_edge(skeleton: StraightSkeleton, e: int) -> SkeletonFace:
    if not 0 <= e < len(skeleton.faces):
        raise IndexError(f"Polygon edge {e} out of range")
    return skeleton.faces[e]


def face_areas(skeleton: StraightSkeleton) -> dict[int, float]:
    return {face.id: face.area for face in skeleton.faces}

