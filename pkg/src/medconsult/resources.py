"""Paths to data bundled with the package: demo graph, templates, lexicons."""

from __future__ import annotations

from importlib import resources
from pathlib import Path

_DATA = Path(str(resources.files("medconsult").joinpath("data")))


def fixture_graph_dir() -> Path:
    """The bundled 20-disease demo graph (CSV tables + manifest + assets)."""
    return _DATA / "fixture_graph"


def template_path(locale: str = "en") -> Path:
    return _DATA / "templates" / f"{locale}.tpl"


def negation_cues_path(locale: str = "en") -> Path:
    return _DATA / "lexicons" / f"negation_{locale}.txt"


def intents_path(locale: str = "en") -> Path:
    return _DATA / "lexicons" / f"intents_{locale}.json"
