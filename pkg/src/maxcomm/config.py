"""Versioned threshold configuration for the statistical checks."""
from __future__ import annotations

import copy
import json
import sys
from importlib import resources
from pathlib import Path

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .errors import ValidationError

SUPPORTED_VERSIONS = (1,)


def default_config():
    text = resources.files("maxcomm").joinpath("data/thresholds.json").read_text(encoding="utf-8")
    return json.loads(text)


def _merge(base, over):
    out = copy.deepcopy(base)
    for k, v in over.items():
        if isinstance(v, dict) and isinstance(out.get(k), dict):
            out[k] = _merge(out[k], v)
        else:
            out[k] = v
    return out


def load_config(path=None):
    """Defaults overlaid with a JSON or TOML file (chosen by suffix)."""
    cfg = default_config()
    if path is None:
        return cfg
    p = Path(path)
    raw = p.read_bytes()
    if p.suffix.lower() == ".toml":
        user = tomllib.loads(raw.decode("utf-8"))
    else:
        user = json.loads(raw.decode("utf-8"))
    version = user.get("version", cfg["version"])
    if version not in SUPPORTED_VERSIONS:
        raise ValidationError(f"unsupported config version {version!r}")
    return _merge(cfg, user)
