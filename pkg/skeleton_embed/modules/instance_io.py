"""
Instance files, seeded instance generation and JSON dumps of every pipeline
artifact.

Dumps round floats to 12 significant digits and sort keys so identical runs
produce identical bytes.
"""

import json
import logging
import math
from dataclasses import dataclass, field
from typing import Any, Optional

import numpy as np
import shapely
from pydantic import ValidationError

from ..exceptions import (
    DegenerateInput,
    GenerationFailure,
    InstanceValidationError,
    ParseError,
)
from ..schemas import EmbeddingDocument, InstanceDocument
from .embedder import Backbone, Embedding
from .geometry import (
    EPS,
    Location,
    Point,
    PointSet,
    Polyline,
    SimplePolygon,
    first_crossing,
    point_location,
)
from .partition import PartitionResult
from .skeleton import StraightSkeleton, face_areas
from .sss import SplitSkeleton, Subface, SubfaceCycle
from .tree import (
    BalancedBinaryTree,
    build_balanced_tree,
    tree_from_nested,
    tree_to_nested,
)
from .validator import ValidationReport

__all__ = [
    "Instance",
    "dumps",
    "embedding_from_dict",
    "embedding_to_dict",
    "generate_instance",
    "instance_to_json",
    "parse_instance",
    "partition_to_dict",
    "report_to_dict",
    "skeleton_to_dict",
    "sss_to_dict",
]

logger = logging.getLogger("skeleton-embed.instance_io")

SIGNIFICANT_DIGITS = 12


@dataclass(frozen=True)
class Instance:
    polygon: SimplePolygon
    points: PointSet
    tree: BalancedBinaryTree
    tree_spec: dict[str, Any] = field(default_factory=dict, compare=False)


def _location(error: ValidationError) -> str:
    first = error.errors()[0]
    loc = first.get("loc", ())
    out = ""
    for part in loc:
        if isinstance(part, int):
            out += f"[{part}]"
        else:
            out += f".{part}" if out else str(part)
    return out or "$"


def parse_instance(text: str, tolerance: float = EPS) -> Instance:
    """
    Parse and validate an instance document. Every invariant is checked on
    load: simple polygon, points inside it, one point per tree node, and a
    balanced tree.
    """
    try:
        doc = InstanceDocument.model_validate_json(text)
    except ValidationError as e:
        if any(err.get("type") == "json_invalid" for err in e.errors()):
            raise ParseError(f"Malformed instance JSON: {e.errors()[0]['msg']}") from e
        raise InstanceValidationError(e.errors()[0]["msg"], _location(e)) from e

    polygon = SimplePolygon.from_coords(doc.polygon, tolerance)
    eps = polygon.eps(tolerance)
    crossing = first_crossing(polygon.vertices, eps)
    if crossing is not None:
        i, j = crossing
        raise InstanceValidationError(
            f"Polygon edges {i} and {j} intersect", f"polygon.edges[{i},{j}]"
        )

    if "balanced" in doc.tree:
        tree = build_balanced_tree(int(doc.tree["balanced"]))
    else:
        try:
            tree = tree_from_nested(doc.tree)
        except TypeError as e:
            raise InstanceValidationError(str(e), "tree") from e
        if not tree.is_balanced():
            raise InstanceValidationError("Tree is not balanced", "tree")

    points = PointSet.from_coords(doc.points)
    if len(points) != tree.n:
        raise InstanceValidationError(
            f"{len(points)} points for a tree of {tree.n} nodes", "points"
        )
    for i, p in enumerate(points):
        if not all(math.isfinite(c) for c in p):
            raise InstanceValidationError(
                "Point coordinates must be finite", f"points[{i}]"
            )
        if point_location(p, polygon, eps) is Location.OUTSIDE:
            raise InstanceValidationError(
                f"Point {tuple(p)} lies outside the polygon", f"points[{i}]"
            )
    if len(set(points.points)) != len(points):
        raise InstanceValidationError("Points must be distinct", "points")
    return Instance(polygon, points, tree, dict(doc.tree))


def instance_to_json(instance: Instance) -> str:
    spec = instance.tree_spec or {"balanced": instance.tree.n}
    if "balanced" not in spec:
        spec = tree_to_nested(instance.tree) or {}
    doc = {
        "polygon": [[v.x, v.y] for v in instance.polygon.vertices],
        "points": [[p.x, p.y] for p in instance.points],
        "tree": spec,
    }
    return json.dumps(doc, sort_keys=True, indent=2) + "\n"


def _star_ring(rng: np.random.Generator, m: int) -> Optional[np.ndarray]:
    angles = np.sort(rng.uniform(0.0, 2.0 * math.pi, m))
    gaps = np.diff(np.append(angles, angles[0] + 2.0 * math.pi))
    if gaps.min() < math.pi / (2.0 * m):
        return None
    radii = rng.uniform(0.35, 1.0, m) * 10.0
    return np.column_stack((radii * np.cos(angles), radii * np.sin(angles)))


def _convex_ring(rng: np.random.Generator, m: int) -> np.ndarray:
    step = 2.0 * math.pi / m
    angles = np.arange(m) * step + rng.uniform(-0.3, 0.3, m) * step
    radii = 10.0 * (1.0 + rng.uniform(-0.1, 0.1, m))
    return np.column_stack((radii * np.cos(angles), radii * np.sin(angles)))


def _sample_inside(
    rng: np.random.Generator, polygon: SimplePolygon, n: int, margin: float
) -> Optional[np.ndarray]:
    shape = polygon.shape
    lo_x, lo_y, hi_x, hi_y = shape.bounds
    found: list[np.ndarray] = []
    total = 0
    for _ in range(200):
        xy = np.round(
            rng.uniform((lo_x, lo_y), (hi_x, hi_y), size=(max(4 * n, 64), 2)), 6
        )
        keep = shapely.contains_xy(shape, xy[:, 0], xy[:, 1])
        xy = xy[keep]
        if len(xy):
            gaps = shapely.distance(shapely.points(xy), shape.exterior)
            xy = xy[gaps > margin]
        found.append(xy)
        total += len(xy)
        if total >= 2 * n:
            break
    pool = np.unique(np.concatenate(found), axis=0) if found else np.zeros((0, 2))
    if len(pool) < n:
        return None
    return pool[np.sort(rng.choice(len(pool), size=n, replace=False))]


def generate_instance(
    m: int, n: int, seed: int, tolerance: float = EPS, max_attempts: int = 100
) -> Instance:
    """
    Seeded random instance: a star-shaped or jittered convex m-gon, n points
    strictly inside it and the balanced tree on n nodes.
    """
    if m < 3 or n < 1:
        raise GenerationFailure("Need m >= 3 and n >= 1", {"m": m, "n": n})
    rng = np.random.default_rng(seed)
    for attempt in range(max_attempts):
        ring = _star_ring(rng, m) if rng.random() < 0.5 else _convex_ring(rng, m)
        if ring is None:
            continue
        try:
            polygon = SimplePolygon.from_coords(np.round(ring, 6).tolist(), tolerance)
        except DegenerateInput:
            continue
        eps = polygon.eps(tolerance)
        if polygon.m != m or first_crossing(polygon.vertices, eps) is not None:
            continue
        pts = _sample_inside(rng, polygon, n, max(1e3 * eps, 1e-6 * polygon.diameter))
        if pts is None:
            continue
        logger.debug("Instance generated", extra={"seed": seed, "attempt": attempt})
        points = PointSet.from_coords(pts.tolist())
        return Instance(polygon, points, build_balanced_tree(n), {"balanced": n})
    raise GenerationFailure(
        "No valid instance within the retry budget", {"m": m, "n": n, "seed": seed}
    )


def _round(value: Any) -> Any:
    if isinstance(value, float):
        if not math.isfinite(value) or value == 0.0:
            return 0.0 if value == 0.0 else value
        return float(f"{value:.{SIGNIFICANT_DIGITS}g}")
    if isinstance(value, dict):
        return {str(k): _round(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_round(v) for v in value]
    return value


def dumps(obj: Any) -> str:
    return json.dumps(_round(obj), sort_keys=True, indent=2) + "\n"


def _xy(p: Point) -> list[float]:
    return [float(p[0]), float(p[1])]


def skeleton_to_dict(skeleton: StraightSkeleton) -> dict[str, Any]:
    areas = face_areas(skeleton)
    return {
        "degenerate": skeleton.degenerate,
        "nodes": [
            {
                "id": n.id,
                "kind": n.kind.value,
                "position": _xy(n.position),
                "time": n.time,
            }
            for n in skeleton.nodes
        ],
        "arcs": [
            {
                "id": a.id,
                "endpoints": list(a.endpoints),
                "kind": a.kind.value,
                "faces": list(a.faces),
            }
            for a in skeleton.arcs
        ],
        "faces": [
            {
                "id": f.id,
                "boundary_edge": f.boundary_edge,
                "nodes": list(f.node_ids),
                "area": areas[f.id],
            }
            for f in skeleton.faces
        ],
    }


def _subface_to_dict(cell: Subface) -> dict[str, Any]:
    return {
        "id": cell.id,
        "parent_face": cell.parent_face,
        "vertices": [_xy(v) for v in cell.vertices],
        "edge_tags": [t.value for t in cell.edge_tags],
        "points": list(cell.point_ids),
    }


def sss_to_dict(
    sss: SplitSkeleton, cycle: Optional[SubfaceCycle] = None
) -> dict[str, Any]:
    out: dict[str, Any] = {
        "splitting_segments": [[_xy(s.a), _xy(s.b)] for s in sss.splitting_segments],
        "subfaces": [_subface_to_dict(c) for c in sss.subfaces],
    }
    if cycle is not None:
        opening = cycle.opening
        out["cycle"] = {
            "subfaces": [_subface_to_dict(c) for c in cycle.subfaces],
            "opening": [_xy(opening.a), _xy(opening.b)] if opening else None,
            "threaded": cycle.threaded,
        }
    return out


def partition_to_dict(result: PartitionResult) -> dict[str, Any]:
    return {
        "q": result.point,
        "center": _xy(result.center),
        "chord": [_xy(result.chord.a), _xy(result.chord.b)],
        "left": [_subface_to_dict(c) for c in result.left],
        "right": [_subface_to_dict(c) for c in result.right],
        "left_count": result.left_count,
        "right_count": result.right_count,
        "threaded": result.cycle.threaded,
    }


def _backbone_to_dict(backbone: Backbone) -> list[list[float]]:
    return [_xy(v) for v in backbone.vertices]


def embedding_to_dict(embedding: Embedding) -> dict[str, Any]:
    return {
        "assignment": {str(k): v for k, v in sorted(embedding.assignment.items())},
        "routes": [
            {
                "parent": a,
                "child": b,
                "polyline": [_xy(v) for v in route.vertices],
                "bends": route.bends(),
            }
            for (a, b), route in sorted(embedding.routes.items())
        ],
        "max_bends": embedding.max_bends,
        "total_bends": embedding.total_bends,
        "backbones": [_backbone_to_dict(b) for b in embedding.backbones],
    }


def embedding_from_dict(
    data: dict[str, Any], tree: BalancedBinaryTree, points: PointSet
) -> Embedding:
    try:
        doc = EmbeddingDocument.model_validate(data)
    except ValidationError as e:
        raise InstanceValidationError(e.errors()[0]["msg"], _location(e)) from e
    embedding = Embedding(tree, points)
    try:
        embedding.assignment = {int(k): v for k, v in doc.assignment.items()}
    except ValueError as e:
        raise InstanceValidationError("Node ids must be integers", "assignment") from e
    for i, r in enumerate(doc.routes):
        try:
            route = Polyline(tuple(Point(x, y) for x, y in r.polyline))
        except ValueError as e:
            raise InstanceValidationError(str(e), f"routes[{i}].polyline") from e
        embedding.routes[(r.parent, r.child)] = route
    return embedding


def report_to_dict(report: ValidationReport) -> dict[str, Any]:
    return report.to_dict()
