"""
SVG rendering of pipeline artifacts with matplotlib's SVG backend.

Every drawn element gets a stable gid, the id salt is fixed and the date
metadata is dropped, so the same artifacts always render to the same bytes.
"""

import io
import logging
from typing import Optional, Sequence

import matplotlib
from matplotlib.figure import Figure
from pydantic import BaseModel, Field, field_validator

from ..config import LAYERS, Settings, get_settings
from .geometry import Point
from .pipeline import PipelineResult

__all__ = ["RenderSpec", "emit_svg"]

logger = logging.getLogger("skeleton-embed.render")

_SVG_RC = {
    "svg.hashsalt": "skeleton-embed",
    "svg.fonttype": "none",
    "path.simplify": False,
}


class RenderSpec(BaseModel):
    """Canvas size, stroke widths and the layers to draw."""

    canvas_size: int = Field(default=800, gt=0)
    stroke_width: float = Field(default=1.5, gt=0)
    skeleton_width: float = Field(default=0.8, gt=0)
    point_size: float = Field(default=4.0, gt=0)
    layers: list[str] = Field(
        default_factory=lambda: ["polygon", "points", "embedding"]
    )

    @field_validator("layers")
    @classmethod
    def known_layers(cls, value: list[str]) -> list[str]:
        unknown = sorted(set(value) - set(LAYERS))
        if unknown:
            raise ValueError(f"Unknown layers: {', '.join(unknown)}")
        return value

    @classmethod
    def from_settings(
        cls, settings: Optional[Settings] = None, layers: Optional[list[str]] = None
    ) -> "RenderSpec":
        settings = settings or get_settings()
        return cls(
            canvas_size=settings.canvas_size,
            stroke_width=settings.stroke_width,
            layers=list(settings.default_layers if layers is None else layers),
        )


def _closed(vertices: Sequence[Point]) -> tuple[list[float], list[float]]:
    ring = [*vertices, vertices[0]]
    return [v[0] for v in ring], [v[1] for v in ring]


def emit_svg(artifacts: PipelineResult, spec: RenderSpec) -> str:
    """
    Render the requested layers of ``artifacts``. Layers whose artifact was
    not computed are skipped.
    """
    inches = spec.canvas_size / 100.0
    fig = Figure(figsize=(inches, inches), dpi=100)
    ax = fig.add_axes((0.02, 0.02, 0.96, 0.96))
    ax.set_aspect("equal", adjustable="datalim")
    ax.set_axis_off()
    layers = set(spec.layers)
    polygon = artifacts.instance.polygon

    if "sss" in layers and artifacts.sss is not None:
        for cell in artifacts.sss.subfaces:
            xs, ys = _closed(cell.vertices)
            (line,) = ax.plot(xs, ys, color="#9ecae1", linewidth=spec.skeleton_width)
            line.set_gid(f"subface-{cell.id}")
        for i, seg in enumerate(artifacts.sss.splitting_segments):
            (line,) = ax.plot(
                [seg.a.x, seg.b.x],
                [seg.a.y, seg.b.y],
                color="#3182bd",
                linewidth=spec.skeleton_width,
            )
            line.set_gid(f"splitting-{i}")

    if "skeleton" in layers and artifacts.skeleton is not None:
        skeleton = artifacts.skeleton
        for arc in skeleton.arcs:
            a, b = (skeleton.position(v) for v in arc.endpoints)
            (line,) = ax.plot(
                [a.x, b.x],
                [a.y, b.y],
                color="#636363",
                linestyle="--",
                linewidth=spec.skeleton_width,
            )
            line.set_gid(f"skeleton-arc-{arc.id}")

    if "polygon" in layers:
        xs, ys = _closed(polygon.vertices)
        (line,) = ax.plot(xs, ys, color="black", linewidth=spec.stroke_width)
        line.set_gid("polygon")

    if "backbone" in layers and artifacts.embedding is not None:
        for i, backbone in enumerate(artifacts.embedding.backbones):
            vs = backbone.vertices
            (line,) = ax.plot(
                [v.x for v in vs],
                [v.y for v in vs],
                color="#fd8d3c",
                linestyle=":",
                linewidth=spec.skeleton_width,
            )
            line.set_gid(f"backbone-{i}")

    if "embedding" in layers and artifacts.embedding is not None:
        for (a, b), route in sorted(artifacts.embedding.routes.items()):
            vs = route.vertices
            (line,) = ax.plot(
                [v.x for v in vs],
                [v.y for v in vs],
                color="#d62728",
                linewidth=spec.stroke_width,
            )
            line.set_gid(f"edge-{a}-{b}")

    if "points" in layers:
        points = artifacts.instance.points
        for i, p in enumerate(points):
            (dot,) = ax.plot(
                [p.x], [p.y], marker="o", markersize=spec.point_size, color="#08519c"
            )
            dot.set_gid(f"point-{i}")

    lo_x, lo_y, hi_x, hi_y = polygon.shape.bounds
    pad = 0.03 * max(hi_x - lo_x, hi_y - lo_y, 1e-12)
    ax.set_xlim(lo_x - pad, hi_x + pad)
    ax.set_ylim(lo_y - pad, hi_y + pad)

    buffer = io.StringIO()
    with matplotlib.rc_context(_SVG_RC):
        fig.savefig(buffer, format="svg", metadata={"Date": None})
    logger.debug("SVG rendered", extra={"layers": sorted(layers)})
    return buffer.getvalue()
