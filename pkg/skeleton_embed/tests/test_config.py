"""Tests for settings loading and validation."""

import pytest
from pydantic import ValidationError

from skeleton_embed.config import Settings, get_settings


def test_defaults():
    settings = Settings()
    assert settings.tolerance == 1e-9
    assert settings.bend_budget(5) == 20
    assert settings.default_layers == ["polygon", "points", "embedding"]
    assert settings.log_level == "INFO"


def test_environment_overrides(monkeypatch):
    monkeypatch.setenv("SKELETON_EMBED_TOLERANCE", "1e-7")
    monkeypatch.setenv("SKELETON_EMBED_DEFAULT_LAYERS", "Polygon, skeleton,")
    monkeypatch.setenv("SKELETON_EMBED_LOG_LEVEL", "debug")
    settings = Settings()
    assert settings.tolerance == 1e-7
    assert settings.default_layers == ["polygon", "skeleton"]
    assert settings.log_level == "DEBUG"


def test_unknown_layer_rejected():
    with pytest.raises(ValidationError):
        Settings(default_layers=["polygon", "heatmap"])


def test_unknown_log_level_rejected():
    with pytest.raises(ValidationError):
        Settings(log_level="chatty")


@pytest.mark.parametrize("value", [0.0, 1e-2])
def test_tolerance_bounds(value):
    with pytest.raises(ValidationError):
        Settings(tolerance=value)


def test_get_settings_is_cached():
    assert get_settings() is get_settings()
