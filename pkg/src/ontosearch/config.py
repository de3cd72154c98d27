"""Application configuration: JSON file, environment, and flag overrides.

Precedence: flags > environment > config file > defaults. Relative paths
inside a config file resolve against the file's own directory.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Mapping, Optional

from .search import RankingWeights


class ConfigError(ValueError):
    pass


ENV_PREFIX = "ONTOSEARCH_"

_PATH_KEYS = (
    "history_export_path",
    "html_cache_dir",
    "ontology_path",
    "stopword_path",
    "state_dir",
    "web_root",
)
_INT_KEYS = ("poll_interval_s", "k_default")
_FLOAT_KEYS = ("w_class", "w_overlap", "w_visits")


@dataclass
class AppConfig:
    history_export_path: str
    html_cache_dir: str
    ontology_path: str
    stopword_path: Optional[str] = None
    state_dir: str = "state"
    poll_interval_s: int = 900
    listen_addr: str = "127.0.0.1:8080"
    weights: RankingWeights = field(default_factory=RankingWeights)
    k_default: int = 10
    web_root: Optional[str] = None

    def __post_init__(self) -> None:
        for name in ("history_export_path", "html_cache_dir", "ontology_path", "state_dir"):
            if not getattr(self, name):
                raise ConfigError(f"{name} must be set and non-empty")
        if self.poll_interval_s < 1:
            raise ConfigError("poll_interval_s must be >= 1")
        if self.k_default < 1:
            raise ConfigError("k_default must be >= 1")
        if ":" not in self.listen_addr:
            raise ConfigError("listen_addr must look like host:port")

    @property
    def host(self) -> str:
        return self.listen_addr.rsplit(":", 1)[0]

    @property
    def port(self) -> int:
        try:
            return int(self.listen_addr.rsplit(":", 1)[1])
        except ValueError as e:
            raise ConfigError(f"bad port in listen_addr: {self.listen_addr!r}") from e


def _coerce(key: str, value):
    if key in _INT_KEYS:
        try:
            return int(value)
        except (TypeError, ValueError) as e:
            raise ConfigError(f"{key} must be an integer, got {value!r}") from e
    if key in _FLOAT_KEYS:
        try:
            return float(value)
        except (TypeError, ValueError) as e:
            raise ConfigError(f"{key} must be a number, got {value!r}") from e
    return value


def _from_file(path: Path) -> dict:
    try:
        data = json.loads(path.read_text("utf-8"))
    except OSError as e:
        raise ConfigError(f"cannot read config file {path}: {e}") from e
    except json.JSONDecodeError as e:
        raise ConfigError(f"config file {path} is not valid JSON: {e}") from e
    if not isinstance(data, dict):
        raise ConfigError(f"config file {path} must hold a JSON object")
    out: dict = {}
    weights = data.pop("weights", {})
    if not isinstance(weights, dict):
        raise ConfigError("config key 'weights' must be an object")
    for key, value in {**data, **weights}.items():
        out[key] = value
    # Paths are relative to the config file, not the process CWD.
    for key in _PATH_KEYS:
        if out.get(key):
            out[key] = str((path.parent / out[key]).resolve())
    return out


def _from_env(env: Mapping[str, str]) -> dict:
    out: dict = {}
    known = {f.name for f in fields(AppConfig) if f.name != "weights"} | set(_FLOAT_KEYS)
    for key in known:
        value = env.get(ENV_PREFIX + key.upper())
        if value is not None and value != "":
            out[key] = value
    return out


def load_config(
    config_path: Optional[str] = None,
    env: Optional[Mapping[str, str]] = None,
    overrides: Optional[Mapping[str, object]] = None,
) -> AppConfig:
    """Merge defaults, config file, environment, and flag overrides."""
    merged: dict = {}
    if config_path:
        merged.update(_from_file(Path(config_path)))
    merged.update(_from_env(env if env is not None else os.environ))
    for key, value in (overrides or {}).items():
        if value is not None:
            merged[key] = value

    unknown = set(merged) - {f.name for f in fields(AppConfig)} - set(_FLOAT_KEYS)
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")

    weight_args = {}
    for key in _FLOAT_KEYS:
        if key in merged:
            weight_args[key] = _coerce(key, merged.pop(key))
    kwargs = {key: _coerce(key, value) for key, value in merged.items()}
    if weight_args:
        kwargs["weights"] = RankingWeights(**weight_args)

    missing = [
        name
        for name in ("history_export_path", "html_cache_dir", "ontology_path")
        if name not in kwargs
    ]
    if missing:
        raise ConfigError(f"missing required config keys: {missing}")
    try:
        return AppConfig(**kwargs)
    except ValueError as e:
        raise ConfigError(str(e)) from e
