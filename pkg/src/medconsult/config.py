"""Service configuration: defaults, JSON config file, environment overrides.

Precedence (lowest to highest): built-in defaults, config file, environment.
Environment variables use the ``MEDCONSULT_`` prefix.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field, fields
from pathlib import Path

from .resources import fixture_graph_dir, template_path

_ENV_PREFIX = "MEDCONSULT_"


@dataclass
class AppConfig:
    graph_dir: str = ""
    templates_path: str = ""
    locale: str = "en"
    asset_root: str = ""
    store_dir: str = "./sessions"
    listen: str = "127.0.0.1:8080"
    generator_url: str = ""
    generator_timeout: float = 5.0
    webui_dir: str = ""
    history_window: int = 8
    link_threshold: float = 0.85
    extras: dict = field(default_factory=dict)

    def resolved_graph_dir(self) -> Path:
        return Path(self.graph_dir) if self.graph_dir else fixture_graph_dir()

    def resolved_templates_path(self) -> Path:
        return Path(self.templates_path) if self.templates_path else template_path(self.locale)

    def resolved_asset_root(self) -> Path:
        return Path(self.asset_root) if self.asset_root else self.resolved_graph_dir()

    @property
    def host(self) -> str:
        return self.listen.rsplit(":", 1)[0]

    @property
    def port(self) -> int:
        return int(self.listen.rsplit(":", 1)[1])


def load_config(path: str | Path | None = None, env: dict[str, str] | None = None) -> AppConfig:
    """Merge defaults, an optional JSON config file, and environment overrides."""
    env = os.environ if env is None else env
    cfg = AppConfig()
    known = {f.name for f in fields(AppConfig)}

    if path is not None:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
        for key, value in data.items():
            if key in known and key != "extras":
                setattr(cfg, key, value)
            else:
                cfg.extras[key] = value

    casts = {"history_window": int, "generator_timeout": float, "link_threshold": float}
    for name in known - {"extras"}:
        raw = env.get(_ENV_PREFIX + name.upper())
        if raw is not None:
            setattr(cfg, name, casts.get(name, str)(raw))
    return cfg
