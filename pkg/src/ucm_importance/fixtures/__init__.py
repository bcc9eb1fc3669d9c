"""Bundled example inputs."""

from __future__ import annotations

from importlib import resources
from pathlib import Path


def fixture_dir(name: str = "telephone") -> Path:
    return Path(str(resources.files(__package__).joinpath(name)))


def fixture_file(kind: str, name: str = "telephone") -> Path:
    """Path of ``model``, ``scenarios`` or ``objects`` JSON of a bundled fixture."""
    return fixture_dir(name) / f"{kind}.json"
