"""Access to the scenario and model files shipped with the package."""

from __future__ import annotations

from importlib import resources


def data_text(name: str) -> str:
    """Contents of a shipped data file (e.g. ``road.ts.json``)."""
    return (resources.files("normsup") / "data" / name).read_text(encoding="utf-8")


def data_names() -> list[str]:
    root = resources.files("normsup") / "data"
    return sorted(p.name for p in root.iterdir() if p.is_file())
