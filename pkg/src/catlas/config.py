"""Engine configuration: TOML file plus ATLAS_-prefixed env overrides.

Flat keys override as ATLAS_<KEY>, section keys as ATLAS_<SECTION>__<KEY>
(double underscore), e.g. ATLAS_SERVICE__PORT=9000. Values are coerced to
the type of the default they replace.
"""

from __future__ import annotations

import os
import sys
from dataclasses import dataclass, field, fields
from pathlib import Path

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

ENV_PREFIX = "ATLAS_"


@dataclass
class ServiceConfig:
    host: str = "127.0.0.1"
    port: int = 8787
    thumb_max_px: int = 256
    cache_capacity: int = 128


@dataclass
class StreetviewConfig:
    endpoint: str = ""
    api_key_env: str = "ATLAS_STREETVIEW_KEY"
    image_size: str = "640x640"
    retry_attempts: int = 3
    retry_initial_delay: float = 1.0
    parallelism: int = 4


@dataclass
class Config:
    backend: str = "toy"
    seed: int = 0
    logit_scale: float = 100.0
    service: ServiceConfig = field(default_factory=ServiceConfig)
    streetview: StreetviewConfig = field(default_factory=StreetviewConfig)


def _coerce(value: str, like) -> object:
    if isinstance(like, bool):
        return value.lower() in ("1", "true", "yes", "on")
    if isinstance(like, int):
        return int(value)
    if isinstance(like, float):
        return float(value)
    return value


def _apply_section(section_obj, data: dict) -> None:
    for f in fields(section_obj):
        if f.name in data:
            setattr(section_obj, f.name, data[f.name])


def load_config(
    path: str | Path | None = None, env: dict[str, str] | None = None
) -> Config:
    """Build a Config from defaults, an optional TOML file, then env vars."""
    env = os.environ if env is None else env
    cfg = Config()
    if path is not None:
        with open(path, "rb") as fh:
            data = tomllib.load(fh)
        for key in ("backend", "seed", "logit_scale"):
            if key in data:
                setattr(cfg, key, data[key])
        _apply_section(cfg.service, data.get("service", {}))
        _apply_section(cfg.streetview, data.get("streetview", {}))

    for key, value in env.items():
        if not key.startswith(ENV_PREFIX):
            continue
        rest = key[len(ENV_PREFIX) :].lower()
        if "__" in rest:
            section_name, field_name = rest.split("__", 1)
            section = getattr(cfg, section_name, None)
            if section is not None and hasattr(section, field_name):
                current = getattr(section, field_name)
                setattr(section, field_name, _coerce(value, current))
        elif hasattr(cfg, rest) and rest not in ("service", "streetview"):
            setattr(cfg, rest, _coerce(value, getattr(cfg, rest)))
    return cfg
