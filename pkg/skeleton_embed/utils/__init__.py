"""Utility helpers for skeleton_embed."""
