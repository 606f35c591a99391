"""Bundled desk-scale fixtures (toy-a: 2-bus, med-b: 6-bus)."""

from importlib import resources
from pathlib import Path


def fixture_path(name: str) -> Path:
    """Filesystem path of a bundled fixture file, e.g. 'toy-a.json'."""
    path = resources.files(__package__) / name
    return Path(str(path))
