"""
Exceptions raised by the skeleton embedding pipeline.
"""

from typing import Any, Optional

__all__ = [
    "CountMismatch",
    "DegenerateInput",
    "EmbeddingPipelineError",
    "GenerationFailure",
    "InputError",
    "InstanceValidationError",
    "InsufficientPoints",
    "NonMonotoneFace",
    "NumericFailure",
    "ParseError",
    "PerturbationFailure",
]

EXIT_VALIDATION_FAILURE = 1
EXIT_INPUT_ERROR = 2


class EmbeddingPipelineError(Exception):
    """Base exception for pipeline errors, tagged with the failing phase."""

    exit_code = EXIT_VALIDATION_FAILURE

    def __init__(
        self,
        phase: str,
        message: str,
        details: Optional[dict[str, Any]] = None,
    ):
        self.phase = phase
        self.message = message
        self.details = details or {}
        super().__init__(self.message)

    def to_dict(self) -> dict[str, Any]:
        return {
            "error": type(self).__name__,
            "phase": self.phase,
            "message": self.message,
            "details": self.details,
        }


class InputError(EmbeddingPipelineError):
    """Errors caused by the caller's input rather than by the pipeline."""

    exit_code = EXIT_INPUT_ERROR


class DegenerateInput(InputError):
    """Repeated vertices, zero-length edges or zero-area polygons."""

    def __init__(self, message: str, details: Optional[dict[str, Any]] = None):
        super().__init__("geometry", message, details)


class NumericFailure(EmbeddingPipelineError):
    """The wavefront event queue stalled or ran past its iteration guard."""

    def __init__(self, message: str, details: Optional[dict[str, Any]] = None):
        super().__init__("skeleton", message, details)


class NonMonotoneFace(EmbeddingPipelineError):
    """A splitting line met its face in more than one piece."""

    def __init__(self, face_id: int, message: str):
        super().__init__("sss", message, {"face": face_id})
        self.face_id = face_id


class InsufficientPoints(EmbeddingPipelineError):
    def __init__(self, required: int, available: int):
        super().__init__(
            "partition",
            f"cell holds {available} points, {required} required",
            {"required": required, "available": available},
        )
        self.required = required
        self.available = available


class PerturbationFailure(EmbeddingPipelineError):
    """No backbone or threading configuration produced proper convex cells."""

    def __init__(self, message: str, details: Optional[dict[str, Any]] = None):
        super().__init__("embed", message, details)


class CountMismatch(EmbeddingPipelineError):
    """A region's point count disagrees with the size of the subtree sent to it."""

    def __init__(self, expected: int, found: int, phase: str = "embed"):
        super().__init__(
            phase,
            f"region holds {found} points but subtree has {expected} nodes",
            {"expected": expected, "found": found},
        )
        self.expected = expected
        self.found = found


class ParseError(InputError):
    def __init__(self, message: str, location: str = "$"):
        super().__init__("io", message, {"location": location})
        self.location = location


class InstanceValidationError(InputError):
    """Well-formed instance that violates an Instance invariant."""

    def __init__(self, message: str, location: str):
        super().__init__("io", message, {"location": location})
        self.location = location


class GenerationFailure(EmbeddingPipelineError):
    def __init__(self, message: str, details: Optional[dict[str, Any]] = None):
        super().__init__("generate", message, details)
