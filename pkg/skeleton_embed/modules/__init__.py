"""Skeleton embedding module package."""
