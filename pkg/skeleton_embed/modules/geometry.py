"""
Planar primitives and predicates shared by every pipeline stage.

All predicates take an absolute tolerance ``eps``. Callers derive it from the
instance with :func:`scaled_eps`, so desk-scale inputs behave the same at any
coordinate magnitude.
"""

import logging
import math
from collections.abc import Iterable, Iterator, Sequence
from dataclasses import dataclass
from enum import Enum
from functools import cached_property
from typing import NamedTuple, Optional, TypeVar, Union

import numpy as np
from shapely.geometry import Point as ShapelyPoint
from shapely.geometry import Polygon

from ..exceptions import DegenerateInput

__all__ = [
    "EPS",
    "Direction",
    "Intersection",
    "IntersectionKind",
    "Location",
    "Orientation",
    "Point",
    "PointSet",
    "Polyline",
    "Segment",
    "SimplePolygon",
    "bbox_diameter",
    "clean_ring",
    "count_bends",
    "first_crossing",
    "insert_vertex",
    "inside_convex_mask",
    "is_convex",
    "is_monotone",
    "merge_collinear",
    "on_segment",
    "orientation",
    "path_point_at",
    "point_location",
    "point_segment_distance",
    "polyline_contacts",
    "ray_exit",
    "ring_distance",
    "scaled_eps",
    "segment_intersection",
    "shared_border",
    "signed_area",
    "split_convex",
]

logger = logging.getLogger("skeleton-embed.geometry")

EPS = 1e-9

L = TypeVar("L")


class Point(NamedTuple):
    x: float
    y: float


def sub(p: Sequence[float], q: Sequence[float]) -> Point:
    return Point(p[0] - q[0], p[1] - q[1])


def add(p: Sequence[float], q: Sequence[float]) -> Point:
    return Point(p[0] + q[0], p[1] + q[1])


def scale(v: Sequence[float], s: float) -> Point:
    return Point(v[0] * s, v[1] * s)


def dot(u: Sequence[float], v: Sequence[float]) -> float:
    return u[0] * v[0] + u[1] * v[1]


def cross(u: Sequence[float], v: Sequence[float]) -> float:
    return u[0] * v[1] - u[1] * v[0]


def norm(v: Sequence[float]) -> float:
    return math.hypot(v[0], v[1])


def dist(p: Sequence[float], q: Sequence[float]) -> float:
    return math.hypot(p[0] - q[0], p[1] - q[1])


def midpoint(p: Sequence[float], q: Sequence[float]) -> Point:
    return Point((p[0] + q[0]) / 2.0, (p[1] + q[1]) / 2.0)


def lerp(p: Sequence[float], q: Sequence[float], t: float) -> Point:
    return Point(p[0] + (q[0] - p[0]) * t, p[1] + (q[1] - p[1]) * t)


class Direction(NamedTuple):
    """Unit vector."""

    dx: float
    dy: float

    @classmethod
    def of(cls, v: Sequence[float]) -> "Direction":
        length = norm(v)
        if length == 0.0:
            raise DegenerateInput("Direction of a zero-length vector")
        return cls(v[0] / length, v[1] / length)

    @classmethod
    def between(cls, a: Sequence[float], b: Sequence[float]) -> "Direction":
        return cls.of(sub(b, a))

    @property
    def left_normal(self) -> "Direction":
        return Direction(-self.dy, self.dx)

    def project(self, p: Sequence[float]) -> float:
        return p[0] * self.dx + p[1] * self.dy


class Segment(NamedTuple):
    a: Point
    b: Point

    @property
    def length(self) -> float:
        return dist(self.a, self.b)

    @property
    def midpoint(self) -> Point:
        return midpoint(self.a, self.b)

    @property
    def direction(self) -> Direction:
        return Direction.between(self.a, self.b)

    def reversed(self) -> "Segment":
        return Segment(self.b, self.a)


@dataclass(frozen=True)
class Polyline:
    vertices: tuple[Point, ...]

    def __post_init__(self) -> None:
        if len(self.vertices) < 2:
            raise ValueError("A polyline needs at least two vertices")
        for p, q in zip(self.vertices, self.vertices[1:]):
            if p == q:
                raise ValueError(f"Repeated consecutive polyline vertex {p}")

    def segments(self) -> list[Segment]:
        return [Segment(p, q) for p, q in zip(self.vertices, self.vertices[1:])]

    @property
    def length(self) -> float:
        return sum(s.length for s in self.segments())

    def bends(self, eps: float = EPS) -> int:
        return count_bends(self.vertices, eps)


class Orientation(Enum):
    CCW = "ccw"
    CW = "cw"
    COLLINEAR = "collinear"


class Location(Enum):
    INSIDE = "inside"
    BOUNDARY = "boundary"
    OUTSIDE = "outside"


class IntersectionKind(Enum):
    NONE = "none"
    POINT = "point"
    OVERLAP = "overlap"


class Intersection(NamedTuple):
    kind: IntersectionKind
    point: Optional[Point] = None
    segment: Optional[Segment] = None


def bbox_diameter(points: Iterable[Sequence[float]]) -> float:
    xy = np.asarray(list(points), dtype=float).reshape(-1, 2)
    if xy.shape[0] == 0:
        return 0.0
    span = xy.max(axis=0) - xy.min(axis=0)
    return float(np.hypot(span[0], span[1]))


def scaled_eps(points: Iterable[Sequence[float]], tolerance: float = EPS) -> float:
    """Absolute tolerance: ``tolerance`` times the bounding-box diameter (at least 1)."""
    return tolerance * max(1.0, bbox_diameter(points))


@dataclass(frozen=True)
class SimplePolygon:
    """
    Counter-clockwise simple polygon. Build it with :meth:`from_coords`, which
    normalizes orientation and rejects repeated vertices.
    """

    vertices: tuple[Point, ...]

    @classmethod
    def from_coords(
        cls, coords: Iterable[Sequence[float]], tolerance: float = EPS
    ) -> "SimplePolygon":
        pts = [Point(float(c[0]), float(c[1])) for c in coords]
        if len(pts) > 1 and pts[0] == pts[-1]:
            pts.pop()
        if len(pts) < 3:
            raise DegenerateInput(
                "Polygon needs at least 3 vertices", {"vertices": len(pts)}
            )
        for value in pts:
            if not (math.isfinite(value.x) and math.isfinite(value.y)):
                raise DegenerateInput("Non-finite polygon coordinate", {"vertex": value})
        eps = scaled_eps(pts, tolerance)
        for i, p in enumerate(pts):
            q = pts[(i + 1) % len(pts)]
            if dist(p, q) <= eps:
                raise DegenerateInput(
                    f"Zero-length polygon edge at vertex {i}", {"edge": i}
                )
        if len(set(pts)) != len(pts):
            raise DegenerateInput("Polygon has repeated vertices")
        area = signed_area(pts)
        if abs(area) <= eps * eps:
            raise DegenerateInput("Polygon has zero area")
        if area < 0:
            pts.reverse()
        return cls(tuple(pts))

    def __len__(self) -> int:
        return len(self.vertices)

    @property
    def m(self) -> int:
        return len(self.vertices)

    def edge(self, i: int) -> Segment:
        return Segment(self.vertices[i % self.m], self.vertices[(i + 1) % self.m])

    @property
    def edges(self) -> list[Segment]:
        return [self.edge(i) for i in range(self.m)]

    @cached_property
    def area(self) -> float:
        return signed_area(self.vertices)

    @cached_property
    def shape(self) -> Polygon:
        return Polygon(self.vertices)

    @cached_property
    def diameter(self) -> float:
        return bbox_diameter(self.vertices)

    def eps(self, tolerance: float = EPS) -> float:
        return tolerance * max(1.0, self.diameter)


@dataclass(frozen=True)
class PointSet:
    """Points with stable ids (their index)."""

    points: tuple[Point, ...]

    @classmethod
    def from_coords(cls, coords: Iterable[Sequence[float]]) -> "PointSet":
        return cls(tuple(Point(float(c[0]), float(c[1])) for c in coords))

    def __len__(self) -> int:
        return len(self.points)

    def __getitem__(self, i: int) -> Point:
        return self.points[i]

    def __iter__(self):
        return iter(self.points)

    @cached_property
    def array(self) -> np.ndarray:
        return np.asarray(self.points, dtype=float).reshape(-1, 2)


def orientation(p: Point, q: Point, r: Point, eps: float = EPS) -> Orientation:
    """
    Sign of (q - p) x (r - p). COLLINEAR when the triangle height is within eps.
    """
    c = cross(sub(q, p), sub(r, p))
    extent = max(dist(p, q), dist(p, r), dist(q, r))
    if extent == 0.0 or abs(c) <= eps * extent:
        return Orientation.COLLINEAR
    return Orientation.CCW if c > 0 else Orientation.CW


def _side(a: Point, b: Point, p: Point, eps: float) -> int:
    length = dist(a, b)
    if length == 0.0:
        return 0
    d = cross(sub(b, a), sub(p, a)) / length
    if abs(d) <= eps:
        return 0
    return 1 if d > 0 else -1


def point_segment_distance(p: Point, a: Point, b: Point) -> float:
    ab = sub(b, a)
    denom = dot(ab, ab)
    if denom == 0.0:
        return dist(p, a)
    t = min(1.0, max(0.0, dot(sub(p, a), ab) / denom))
    return dist(p, lerp(a, b, t))


def on_segment(p: Point, a: Point, b: Point, eps: float = EPS) -> bool:
    return point_segment_distance(p, a, b) <= eps


def segment_intersection(s1: Segment, s2: Segment, eps: float = EPS) -> Intersection:
    """
    Classify the intersection of two closed segments. Touching endpoints are
    reported as POINT with the endpoint itself; collinear overlaps as OVERLAP
    with lexicographically ordered ends.
    """
    if s2 < s1:
        s1, s2 = s2, s1
    a, b = s1
    c, d = s2
    if a == b or c == d:
        p, seg = (a, s2) if a == b else (c, s1)
        if on_segment(p, seg.a, seg.b, eps):
            return Intersection(IntersectionKind.POINT, p)
        return Intersection(IntersectionKind.NONE)

    o1, o2 = _side(a, b, c, eps), _side(a, b, d, eps)
    o3, o4 = _side(c, d, a, eps), _side(c, d, b, eps)

    if o1 == 0 and o2 == 0:
        u = Direction.between(a, b)
        ranked = sorted(
            [(0.0, 0, a), (dist(a, b), 0, b), (u.project(sub(c, a)), 1, c),
             (u.project(sub(d, a)), 1, d)],
            key=lambda item: (item[0], item[1]),
        )
        low1, high1 = 0.0, dist(a, b)
        low2 = min(ranked_t for ranked_t, owner, _ in ranked if owner == 1)
        high2 = max(ranked_t for ranked_t, owner, _ in ranked if owner == 1)
        lo, hi = max(low1, low2), min(high1, high2)
        if hi < lo - eps:
            return Intersection(IntersectionKind.NONE)
        p, q = ranked[1][2], ranked[2][2]
        if hi - lo <= eps:
            return Intersection(IntersectionKind.POINT, p)
        ends = sorted((p, q))
        return Intersection(IntersectionKind.OVERLAP, segment=Segment(ends[0], ends[1]))

    if (o1 * o2 > 0) or (o3 * o4 > 0):
        return Intersection(IntersectionKind.NONE)

    for side, endpoint, seg in ((o1, c, s1), (o2, d, s1), (o3, a, s2), (o4, b, s2)):
        if side == 0 and on_segment(endpoint, seg.a, seg.b, eps):
            return Intersection(IntersectionKind.POINT, endpoint)

    if o1 * o2 < 0 and o3 * o4 < 0:
        d1, d2 = sub(b, a), sub(d, c)
        t = cross(sub(c, a), d2) / cross(d1, d2)
        return Intersection(IntersectionKind.POINT, lerp(a, b, t))
    return Intersection(IntersectionKind.NONE)


def _coords(polygon: Union[SimplePolygon, Sequence[Sequence[float]]]) -> np.ndarray:
    pts = polygon.vertices if isinstance(polygon, SimplePolygon) else polygon
    return np.asarray(pts, dtype=float).reshape(-1, 2)


def signed_area(polygon: Union[SimplePolygon, Sequence[Sequence[float]]]) -> float:
    """Shoelace area, positive for counter-clockwise vertex order."""
    xy = _coords(polygon)
    if xy.shape[0] < 3:
        return 0.0
    x, y = xy[:, 0], xy[:, 1]
    return float(0.5 * (np.dot(x, np.roll(y, -1)) - np.dot(np.roll(x, -1), y)))


def point_location(p: Point, polygon: SimplePolygon, eps: float = EPS) -> Location:
    sp = ShapelyPoint(p)
    if polygon.shape.exterior.distance(sp) <= eps:
        return Location.BOUNDARY
    return Location.INSIDE if polygon.shape.contains(sp) else Location.OUTSIDE


def is_monotone(
    polygon: Union[SimplePolygon, Sequence[Sequence[float]]],
    d: Direction,
    eps: float = EPS,
) -> bool:
    """
    True iff every line perpendicular to ``d`` meets the boundary at most twice,
    i.e. the cyclic projection sequence changes direction at most twice.
    """
    xy = _coords(polygon)
    proj = xy @ np.array([d.dx, d.dy])
    diffs = np.roll(proj, -1) - proj
    signs = [int(s) for s in np.sign(np.where(np.abs(diffs) <= eps, 0.0, diffs)) if s]
    if not signs:
        return True
    changes = sum(1 for i in range(len(signs)) if signs[i] != signs[i - 1])
    return changes <= 2


def is_convex(
    polygon: Union[SimplePolygon, Sequence[Sequence[float]]], eps: float = EPS
) -> bool:
    """No clockwise turn anywhere along a counter-clockwise ring."""
    pts = [Point(float(x), float(y)) for x, y in _coords(polygon)]
    n = len(pts)
    return all(
        orientation(pts[i - 1], pts[i], pts[(i + 1) % n], eps) is not Orientation.CW
        for i in range(n)
    )


def merge_collinear(vertices: Sequence[Point], eps: float = EPS) -> list[Point]:
    """
    Drop repeated vertices and interior vertices where an open path continues
    straight on. A collinear U-turn is kept since it changes direction.
    """
    kept: list[Point] = []
    for p in vertices:
        if kept and dist(kept[-1], p) <= eps:
            continue
        while len(kept) >= 2:
            a, b = kept[-2], kept[-1]
            if (
                orientation(a, b, p, eps) is Orientation.COLLINEAR
                and dot(sub(b, a), sub(p, b)) > 0
            ):
                kept.pop()
            else:
                break
        kept.append(Point(p[0], p[1]))
    return kept


def count_bends(vertices: Sequence[Point], eps: float = EPS) -> int:
    return max(0, len(merge_collinear(vertices, eps)) - 2)


def clean_ring(
    vertices: Sequence[Point], labels: Sequence[L], eps: float = EPS
) -> tuple[list[Point], list[L]]:
    """
    Remove duplicate and straight-through vertices from a closed ring. Label i
    belongs to the edge leaving vertex i; a removed vertex keeps the label of the
    edge entering it.
    """
    pts, tags = list(vertices), list(labels)
    changed = True
    while changed and len(pts) > 3:
        changed = False
        n = len(pts)
        for i in range(n):
            prev, cur, nxt = pts[i - 1], pts[i], pts[(i + 1) % n]
            duplicate = dist(prev, cur) <= eps
            straight = (
                orientation(prev, cur, nxt, eps) is Orientation.COLLINEAR
                and dot(sub(cur, prev), sub(nxt, cur)) > 0
                and tags[i - 1] == tags[i]
            )
            if duplicate or straight:
                del pts[i]
                del tags[i]
                changed = True
                break
    return pts, tags


def split_convex(
    vertices: Sequence[Point],
    labels: Sequence[L],
    a: Point,
    b: Point,
    chord_label: L,
    eps: float = EPS,
) -> tuple[Optional[tuple[list[Point], list[L]]], Optional[tuple[list[Point], list[L]]]]:
    """
    Split a convex ring by the line through ``a`` and ``b``.

    Returns ``(left, right)`` relative to the directed line; each part is a
    ``(vertices, labels)`` ring or None when empty. New edges on the line carry
    ``chord_label``; pieces of old edges keep their label.
    """
    return (
        _clip_left(vertices, labels, a, b, chord_label, eps, keep=1),
        _clip_left(vertices, labels, a, b, chord_label, eps, keep=-1),
    )


def _clip_left(
    vertices: Sequence[Point],
    labels: Sequence[L],
    a: Point,
    b: Point,
    chord_label: L,
    eps: float,
    keep: int = 1,
) -> Optional[tuple[list[Point], list[L]]]:
    # both halves of a split measure against the same directed line so they
    # share bit-identical chord endpoints
    n = len(vertices)
    sides = [keep * _side(a, b, v, eps) for v in vertices]
    if all(s >= 0 for s in sides):
        if all(s == 0 for s in sides):
            return None
        return list(vertices), list(labels)
    out_pts: list[Point] = []
    out_tags: list[L] = []
    direction = sub(b, a)
    for i in range(n):
        p, q = vertices[i], vertices[(i + 1) % n]
        sp, sq = sides[i], sides[(i + 1) % n]
        if sp >= 0:
            if sq >= 0:
                out_pts.append(p)
                out_tags.append(labels[i])
            elif sp > 0:
                out_pts.append(p)
                out_tags.append(labels[i])
                out_pts.append(_line_crossing(p, q, a, direction))
                out_tags.append(chord_label)
            else:
                out_pts.append(p)
                out_tags.append(chord_label)
        elif sq > 0:
            out_pts.append(_line_crossing(p, q, a, direction))
            out_tags.append(labels[i])
    if len(out_pts) < 3 or signed_area(out_pts) <= eps * eps:
        return None
    return clean_ring(out_pts, out_tags, eps)


def _line_crossing(p: Point, q: Point, a: Point, direction: Point) -> Point:
    dp = cross(direction, sub(p, a))
    dq = cross(direction, sub(q, a))
    return lerp(p, q, dp / (dp - dq))


def ray_exit(
    vertices: Sequence[Point], origin: Point, toward: Point, eps: float = EPS
) -> Optional[Point]:
    """Farthest boundary point of a convex ring hit by the ray origin -> toward."""
    d = sub(toward, origin)
    best_t, best = eps / max(norm(d), eps), None
    n = len(vertices)
    for i in range(n):
        p, q = vertices[i], vertices[(i + 1) % n]
        e = sub(q, p)
        denom = cross(d, e)
        if abs(denom) <= 1e-15 * max(1.0, norm(d) * norm(e)):
            continue
        w = sub(p, origin)
        t = cross(w, e) / denom
        s = cross(w, d) / denom
        tol = eps / max(norm(e), eps)
        if -tol <= s <= 1 + tol and t > best_t:
            best_t = t
            best = q if s >= 1 - tol else p if s <= tol else add(origin, scale(d, t))
    return best


def shared_border(
    ring_a: Sequence[Point], ring_b: Sequence[Point], eps: float = EPS
) -> Optional[Segment]:
    """
    Common border of positive length between two interior-disjoint convex
    rings, oriented along ``ring_a``'s counter-clockwise direction.
    """
    na, nb = len(ring_a), len(ring_b)
    pieces: list[tuple[Segment, Segment]] = []
    for i in range(na):
        ea = Segment(ring_a[i], ring_a[(i + 1) % na])
        for j in range(nb):
            eb = Segment(ring_b[j], ring_b[(j + 1) % nb])
            hit = segment_intersection(ea, eb, eps)
            if hit.kind is IntersectionKind.OVERLAP and hit.segment is not None:
                pieces.append((ea, hit.segment))
    if not pieces:
        return None
    u = pieces[0][0].direction
    ends = [p for _, seg in pieces for p in seg]
    lo = min(ends, key=u.project)
    hi = max(ends, key=u.project)
    if dist(lo, hi) <= eps:
        return None
    return Segment(lo, hi)


def path_point_at(path: Sequence[Point], fraction: float) -> tuple[Point, int]:
    """
    Point at ``fraction`` of the arc length of an open path, with the index of
    the segment that holds it.
    """
    lengths = [dist(p, q) for p, q in zip(path, path[1:])]
    target = max(0.0, min(1.0, fraction)) * sum(lengths)
    for i, length in enumerate(lengths):
        if target <= length or i == len(lengths) - 1:
            t = 0.0 if length == 0 else min(1.0, target / length)
            return lerp(path[i], path[i + 1], t), i
        target -= length
    return path[0], 0


def first_crossing(
    vertices: Sequence[Point], eps: float = EPS, closed: bool = True
) -> Optional[tuple[int, int]]:
    """First pair of edges that touch or cross illegally, or None."""
    n = len(vertices)
    count = n if closed else n - 1
    edges = [Segment(vertices[i], vertices[(i + 1) % n]) for i in range(count)]
    for i in range(count):
        for j in range(i + 1, count):
            hit = segment_intersection(edges[i], edges[j], eps)
            if hit.kind is IntersectionKind.NONE:
                continue
            adjacent = j == i + 1 or (closed and i == 0 and j == n - 1)
            if adjacent and hit.kind is IntersectionKind.POINT:
                continue
            return i, j
    return None


def polyline_contacts(
    first: Polyline,
    second: Polyline,
    allowed: Sequence[Point] = (),
    eps: float = EPS,
) -> Iterator[Intersection]:
    """Every place two polylines meet, skipping single touches at ``allowed``."""
    for s1 in first.segments():
        for s2 in second.segments():
            hit = segment_intersection(s1, s2, eps)
            if hit.kind is IntersectionKind.NONE:
                continue
            if hit.kind is IntersectionKind.POINT and any(
                dist(hit.point, p) <= eps for p in allowed
            ):
                continue
            yield hit


def insert_vertex(
    vertices: Sequence[Point], labels: Sequence[L], p: Point, eps: float = EPS
) -> tuple[list[Point], list[L], int]:
    """
    Make ``p`` a vertex of the ring. An existing vertex within eps is reused;
    otherwise the nearest edge is split and both halves keep its label.
    """
    pts, tags = list(vertices), list(labels)
    for i, v in enumerate(pts):
        if dist(v, p) <= eps:
            return pts, tags, i
    n = len(pts)
    gaps = [point_segment_distance(p, pts[i], pts[(i + 1) % n]) for i in range(n)]
    best = int(np.argmin(gaps))
    if gaps[best] > eps:
        raise ValueError(f"Point {p} is not on the ring boundary")
    pts.insert(best + 1, Point(p[0], p[1]))
    tags.insert(best + 1, tags[best])
    return pts, tags, best + 1


def inside_convex_mask(
    vertices: Sequence[Point], xy: np.ndarray, eps: float = EPS
) -> np.ndarray:
    """Boolean mask of rows of ``xy`` inside or within eps of a convex CCW ring."""
    ring = np.asarray(vertices, dtype=float).reshape(-1, 2)
    mask = np.ones(xy.shape[0], dtype=bool)
    if xy.shape[0] == 0:
        return mask
    nxt = np.roll(ring, -1, axis=0)
    for start, end in zip(ring, nxt):
        edge = end - start
        length = float(np.hypot(edge[0], edge[1]))
        if length == 0.0:
            continue
        rel = xy - start
        mask &= (edge[0] * rel[:, 1] - edge[1] * rel[:, 0]) / length >= -eps
    return mask


def ring_distance(vertices: Sequence[Point], p: Point) -> float:
    n = len(vertices)
    return min(
        point_segment_distance(p, vertices[i], vertices[(i + 1) % n]) for i in range(n)
    )
