"""
Pydantic schemas for instance and embedding files.
"""

from typing import Any, Optional

from pydantic import BaseModel, Field, field_validator

Coordinate = tuple[float, float]


class InstanceDocument(BaseModel):
    """
    Schema of an instance file: polygon ring, point set and the tree, either
    ``{"balanced": n}`` or a nested ``{"left": ..., "right": ...}`` structure.
    """

    polygon: list[Coordinate] = Field(min_length=3)
    points: list[Coordinate]
    tree: dict[str, Any]

    @field_validator("tree")
    @classmethod
    def check_tree_shape(cls, value: dict[str, Any]) -> dict[str, Any]:
        if "balanced" in value:
            size = value["balanced"]
            if isinstance(size, bool) or not isinstance(size, int) or size < 0:
                raise ValueError("balanced tree size must be a non-negative integer")
            if set(value) != {"balanced"}:
                raise ValueError("balanced tree spec takes no other keys")
        elif set(value) - {"left", "right"}:
            raise ValueError("nested tree nodes only have 'left' and 'right'")
        return value


class EmbeddingDocument(BaseModel):
    """Schema of an embedding file as written by the ``embed`` subcommand."""

    assignment: dict[str, int]
    routes: list["RouteDocument"]
    max_bends: Optional[int] = None


class RouteDocument(BaseModel):
    parent: int
    child: int
    polyline: list[Coordinate] = Field(min_length=2)
    bends: Optional[int] = None


EmbeddingDocument.model_rebuild()
