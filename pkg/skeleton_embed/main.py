"""
Command line entry point for the skeleton embedding pipeline.

Every pipeline stage is its own subcommand so intermediate artifacts can be
inspected. Results go to --out (or stdout), logs go to stderr.
"""

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Any, Optional, Sequence

from pydantic import ValidationError

from skeleton_embed.config import Settings, get_settings
from skeleton_embed.exceptions import (
    EXIT_INPUT_ERROR,
    EXIT_VALIDATION_FAILURE,
    EmbeddingPipelineError,
    ParseError,
)
from skeleton_embed.modules.instance_io import (
    Instance,
    dumps,
    embedding_from_dict,
    embedding_to_dict,
    generate_instance,
    instance_to_json,
    parse_instance,
    partition_to_dict,
    skeleton_to_dict,
    sss_to_dict,
)
from skeleton_embed.modules.pipeline import PipelineResult, run_pipeline
from skeleton_embed.modules.render import RenderSpec, emit_svg
from skeleton_embed.modules.validator import validate_embedding
from skeleton_embed.utils.custom_logging import setup_logging

logger = logging.getLogger("skeleton-embed.main")

EXIT_OK = 0


def _build_parser(settings: Settings) -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", help="Output file (stdout when omitted)")
    common.add_argument("--svg", help="Also render the result to this SVG file")
    common.add_argument(
        "--tolerance", type=float, default=None, help="Relative geometric tolerance"
    )
    common.add_argument(
        "--layers", default=None, help="Comma-separated SVG layers to draw"
    )
    common.add_argument(
        "--log-level",
        default=settings.log_level,
        help="Log level (default: %(default)s)",
    )

    with_input = argparse.ArgumentParser(add_help=False, parents=[common])
    with_input.add_argument(
        "--in", dest="input", required=True, help="Instance JSON file"
    )

    parser = argparse.ArgumentParser(
        prog="skeleton-embed",
        description="Embed a balanced binary tree onto points inside a simple polygon",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    stages = {
        "skeleton": "Straight skeleton of the polygon",
        "sss": "Split straight skeleton and subface chain",
        "partition": "Root partition of the chain",
        "embed": "Embed the tree",
    }
    for name, text in stages.items():
        sub.add_parser(name, parents=[with_input], help=text)

    validate = sub.add_parser(
        "validate", parents=[with_input], help="Validate an embedding"
    )
    validate.add_argument(
        "--embedding", help="Embedding JSON to check instead of embedding anew"
    )
    validate.add_argument(
        "--bend-budget", type=int, default=None, help="Bends allowed per edge"
    )

    gen = sub.add_parser("gen", parents=[common], help="Generate random instances")
    gen.add_argument("--m", type=int, required=True, help="Polygon vertices")
    gen.add_argument("--n", type=int, required=True, help="Points and tree nodes")
    gen.add_argument("--seed", type=int, default=0, help="Seed of the first instance")
    gen.add_argument("--count", type=int, default=1, help="Instances to write")

    sub.add_parser("render", parents=[with_input], help="Render the pipeline as SVG")
    return parser


def _settings_for(args: argparse.Namespace, settings: Settings) -> Settings:
    update: dict[str, Any] = {}
    if args.tolerance is not None:
        update["tolerance"] = args.tolerance
    if args.layers is not None:
        update["default_layers"] = [
            p.strip() for p in args.layers.split(",") if p.strip()
        ]
    if not update:
        return settings
    try:
        return Settings.model_validate({**settings.model_dump(), **update})
    except ValidationError as e:
        raise ParseError(e.errors()[0]["msg"], "flags") from e


def _write(text: str, target: Optional[str]) -> None:
    if target:
        Path(target).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _load(path: str, settings: Settings) -> Instance:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise ParseError(f"Cannot read {path}: {e.strerror}", path) from e
    return parse_instance(text, settings.tolerance)


def _render(result: PipelineResult, target: str, settings: Settings) -> None:
    spec = RenderSpec.from_settings(settings)
    Path(target).write_text(emit_svg(result, spec), encoding="utf-8")
    logger.info("SVG written to %s", target)


def _stage_command(args: argparse.Namespace, settings: Settings) -> int:
    instance = _load(args.input, settings)
    until = "embed" if args.command == "render" else args.command
    result = run_pipeline(instance, settings, until=until)
    if args.command == "render":
        svg = emit_svg(result, RenderSpec.from_settings(settings))
        _write(svg, args.out or args.svg)
        return EXIT_OK
    if args.command == "skeleton":
        payload = skeleton_to_dict(result.skeleton)
    elif args.command == "sss":
        payload = sss_to_dict(result.sss, result.cycle)
    elif args.command == "partition":
        payload = partition_to_dict(result.partition) if result.partition else {}
    else:
        payload = embedding_to_dict(result.embedding)

    _write(dumps(payload), args.out)
    if args.svg:
        _render(result, args.svg, settings)
    return EXIT_OK


def _validate_command(args: argparse.Namespace, settings: Settings) -> int:
    instance = _load(args.input, settings)
    if args.embedding:
        try:
            data = json.loads(Path(args.embedding).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as e:
            raise ParseError(
                f"Cannot read embedding {args.embedding}: {e}", args.embedding
            ) from e
        embedding = embedding_from_dict(data, instance.tree, instance.points)
        polygon = instance.polygon
        budget = (
            settings.bend_budget(polygon.m)
            if args.bend_budget is None
            else args.bend_budget
        )
        eps = polygon.eps(settings.tolerance)
        report = validate_embedding(
            polygon, instance.points, instance.tree, embedding, budget, eps
        )
        result = PipelineResult(instance, embedding=embedding, report=report)
    else:
        result = run_pipeline(
            instance, settings, until="validate", bend_budget=args.bend_budget
        )
    _write(dumps(result.report.to_dict()), args.out)
    if args.svg:
        _render(result, args.svg, settings)
    if not result.report.passed:
        failures = [c.name for c in result.report.failures]
        logger.error("Validation failed", extra={"failures": failures})
        return EXIT_VALIDATION_FAILURE
    return EXIT_OK


def _gen_command(args: argparse.Namespace, settings: Settings) -> int:
    if args.count < 1:
        raise ParseError("--count must be positive", "flags")
    if args.count == 1:
        instance = generate_instance(args.m, args.n, args.seed, settings.tolerance)
        _write(instance_to_json(instance), args.out)
        return EXIT_OK
    if not args.out:
        raise ParseError("--out directory is required with --count > 1", "flags")
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    for seed in range(args.seed, args.seed + args.count):
        instance = generate_instance(args.m, args.n, seed, settings.tolerance)
        (out_dir / f"instance_{seed}.json").write_text(
            instance_to_json(instance), encoding="utf-8"
        )
    logger.info("Generated %d instances in %s", args.count, out_dir)
    return EXIT_OK


def main(argv: Optional[Sequence[str]] = None) -> int:
    """
    Parse arguments, run the requested subcommand and return its exit code:
    0 on success, 1 on a failed validation or pipeline error, 2 on bad input.
    """
    settings = get_settings()
    parser = _build_parser(settings)
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code == 0 else EXIT_INPUT_ERROR
    try:
        setup_logging(args.log_level.upper())
    except ValueError:
        print(f"Error (flags): unknown log level {args.log_level}", file=sys.stderr)
        return EXIT_INPUT_ERROR

    try:
        settings = _settings_for(args, settings)
        if args.command == "validate":
            return _validate_command(args, settings)
        if args.command == "gen":
            return _gen_command(args, settings)
        return _stage_command(args, settings)
    except EmbeddingPipelineError as e:
        logger.error(
            "Pipeline error",
            extra={"error": type(e).__name__, "phase": e.phase, "details": e.details},
        )
        print(f"Error ({e.phase}): {e.message}", file=sys.stderr)
        return e.exit_code


if __name__ == "__main__":
    sys.exit(main())
