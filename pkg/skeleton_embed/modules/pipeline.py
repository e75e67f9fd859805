"""
Stage driver shared by the CLI and the library entry points.

Runs skeleton -> sss -> partition -> embed -> validate up to a requested
stage, keeping every intermediate artifact for dumping and rendering.
"""

import logging
import time
from contextlib import contextmanager
from dataclasses import dataclass, field
from typing import Iterator, Optional

from ..config import Settings, get_settings
from .embedder import Embedding, embed_partitioned
from .geometry import Point
from .instance_io import Instance
from .partition import PartitionResult, partition_cycle
from .skeleton import StraightSkeleton, compute_straight_skeleton
from .sss import (
    SplitSkeleton,
    SubfaceCycle,
    middle_point,
    open_cycle,
    split_reflex_vertices,
)
from .validator import (
    ValidationReport,
    check_sss,
    validate_embedding,
    validate_partition,
    validate_skeleton,
)

__all__ = ["STAGES", "PipelineResult", "run_pipeline"]

logger = logging.getLogger("skeleton-embed.pipeline")

STAGES = ("skeleton", "sss", "partition", "embed", "validate")


@dataclass
class PipelineResult:
    instance: Instance
    skeleton: Optional[StraightSkeleton] = None
    sss: Optional[SplitSkeleton] = None
    middle: Optional[tuple[Point, int]] = None
    cycle: Optional[SubfaceCycle] = None
    partition: Optional[PartitionResult] = None
    embedding: Optional[Embedding] = None
    report: ValidationReport = field(default_factory=ValidationReport)
    timings: dict[str, float] = field(default_factory=dict)

    @property
    def eps(self) -> float:
        if self.skeleton is not None:
            return self.skeleton.eps
        return self.instance.polygon.eps()


@contextmanager
def _stage(result: PipelineResult, name: str) -> Iterator[None]:
    start = time.perf_counter()
    yield
    elapsed = time.perf_counter() - start
    result.timings[name] = elapsed
    logger.info("Stage %s finished in %.4fs", name, elapsed)


def run_pipeline(
    instance: Instance,
    settings: Optional[Settings] = None,
    until: str = "validate",
    bend_budget: Optional[int] = None,
) -> PipelineResult:
    """
    Run the pipeline on ``instance`` through stage ``until``.

    Validation checks of the stages that ran are collected in
    ``result.report``; only the ``validate`` stage checks the embedding.
    """
    if until not in STAGES:
        raise ValueError(f"Unknown stage: {until}")
    settings = settings or get_settings()
    last = STAGES.index(until)
    result = PipelineResult(instance)
    polygon, points, tree = instance.polygon, instance.points, instance.tree

    with _stage(result, "skeleton"):
        result.skeleton = compute_straight_skeleton(
            polygon, settings.tolerance, settings.max_skeleton_events_factor
        )
    result.report.extend(validate_skeleton(result.skeleton))
    if last < 1:
        return result

    with _stage(result, "sss"):
        ms, sf = middle_point(result.skeleton)
        result.middle = (ms, sf)
        result.sss = split_reflex_vertices(result.skeleton, start_face=sf)
        result.cycle = open_cycle(result.sss, ms, sf)
    result.report.checks.append(check_sss(result.sss))
    result.report.degenerate_flags["threaded"] = result.cycle.threaded
    if last < 2:
        return result

    eps = result.eps
    if tree.root is not None:
        left_size = tree.size(tree.left[tree.root])
        with _stage(result, "partition"):
            result.partition = partition_cycle(result.cycle, points, left_size, eps)
        result.report.extend(
            validate_partition(polygon, points, tree, result.partition, eps)
        )
    if last < 3:
        return result

    # an empty tree has no partition and embeds as an empty drawing
    with _stage(result, "embed"):
        result.embedding = Embedding(tree, points)
        if result.partition is not None:
            embed_partitioned(
                result.partition,
                result.embedding,
                eps,
                settings.perturbation_steps,
                settings.merge_convex_cells,
            )
    result.report.degenerate_flags["bent_backbone"] = any(
        b.bent for b in result.embedding.backbones
    )
    if last < 4:
        return result

    budget = settings.bend_budget(polygon.m) if bend_budget is None else bend_budget
    with _stage(result, "validate"):
        result.report.extend(
            validate_embedding(polygon, points, tree, result.embedding, budget, eps)
        )
    logger.info(
        "Pipeline finished",
        extra={"passed": result.report.passed, "checks": len(result.report.checks)},
    )
    return result
