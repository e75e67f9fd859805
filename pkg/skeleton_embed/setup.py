"""
Setup script for the skeleton_embed package.
Handles package metadata and installation via setuptools.
"""

from setuptools import setup

if __name__ == "__main__":
    setup()
