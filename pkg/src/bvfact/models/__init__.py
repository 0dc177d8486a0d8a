"""Bundled model registry files."""
