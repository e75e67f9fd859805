"""
Configuration module for the skeleton embedding pipeline.

Settings come from pydantic-settings, so every field can be overridden with a
SKELETON_EMBED_* environment variable or a .env file. CLI flags override
settings per invocation.
"""

import logging
from functools import lru_cache
from typing import Annotated, Any

from pydantic import Field, field_validator
from pydantic_settings import BaseSettings, NoDecode, SettingsConfigDict

__all__ = ["LAYERS", "Settings", "get_settings"]

LAYERS = ("polygon", "skeleton", "sss", "backbone", "points", "embedding")


class Settings(BaseSettings):
    """
    Pipeline settings.

    Attributes:
        tolerance: Relative tolerance; predicates use tolerance * bbox diameter.
        bend_budget_factor: Bends allowed per edge, as a multiple of m.
        perturbation_steps: Backbone point positions tried on each side of the midpoint.
        merge_convex_cells: Merge neighbouring chain cells whose union is convex.
        max_skeleton_events_factor: Event guard for the wavefront, times m squared.
        canvas_size: SVG canvas edge in pixels.
        stroke_width: Default SVG stroke width in pixels.
        default_layers: Layers drawn when --layers is not given.
        log_level: Root log level.
    """

    app_name: str = "skeleton-embed"
    version: str = "1.0.0"

    tolerance: float = Field(default=1e-9, gt=0, lt=1e-3)
    bend_budget_factor: int = Field(default=4, ge=1)
    perturbation_steps: int = Field(default=8, ge=1, le=64)
    merge_convex_cells: bool = True
    max_skeleton_events_factor: int = Field(default=64, ge=4)

    canvas_size: int = Field(default=800, gt=0)
    stroke_width: float = Field(default=1.5, gt=0)
    default_layers: Annotated[list[str], NoDecode] = Field(
        default_factory=lambda: ["polygon", "points", "embedding"],
        description="Comma-separated in the environment",
    )

    log_level: str = "INFO"

    @field_validator("default_layers", mode="before")
    @classmethod
    def split_layers(cls, value: Any) -> Any:
        """Accept 'a,b,c' as well as a list."""
        if isinstance(value, str):
            value = [part for part in value.split(",") if part.strip()]
        if isinstance(value, (list, tuple)):
            return [str(part).strip().lower() for part in value]
        return value

    @field_validator("default_layers", mode="after")
    @classmethod
    def known_layers(cls, value: list[str]) -> list[str]:
        unknown = sorted(set(value) - set(LAYERS))
        if unknown:
            raise ValueError(f"Unknown layers: {', '.join(unknown)}")
        return value

    @field_validator("log_level", mode="before")
    @classmethod
    def normalize_log_level(cls, value: Any) -> str:
        level = (str(value) if value else "INFO").strip().upper()
        if not isinstance(logging.getLevelName(level), int):
            raise ValueError(f"Unknown log level: {value}")
        return level

    def bend_budget(self, m: int) -> int:
        return self.bend_budget_factor * m

    model_config = SettingsConfigDict(
        env_prefix="SKELETON_EMBED_",
        env_file=".env",
        env_file_encoding="utf-8",
        extra="ignore",
    )


@lru_cache
def get_settings() -> Settings:
    """
    Returns a cached instance of the settings.
    """
    return Settings()
