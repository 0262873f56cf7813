"""Shared configuration: JSON file plus CLI-flag overrides.

Precedence is defaults < config file < explicit flags. The only
environment variable honored is ANIMO_CONFIG, and it only points at the
config file.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, fields

from .engine import DEFAULT_ALPHA, T_HIGH, T_LOW
from .errors import ConfigError
from .relay import DEFAULT_REPLY_WINDOW_SECS, DEFAULT_TTL_SECS

ENV_CONFIG_PATH = "ANIMO_CONFIG"


@dataclass(slots=True)
class Config:
    port: int = 7464
    ws_port: int = 7465
    ttl_secs: float = DEFAULT_TTL_SECS
    reply_window_secs: float = DEFAULT_REPLY_WINDOW_SECS
    loss: float = 0.0
    t_low: float = T_LOW
    t_high: float = T_HIGH
    alpha: float = DEFAULT_ALPHA
    catalog_path: str | None = None  # None -> packaged catalog
    log_path: str = "events.jsonl"
    registry_path: str | None = None
    seed: int = 0
    model: dict | None = None  # behavior-model defaults for `simulate`

    def validate(self) -> "Config":
        if not 0 < self.port < 65536 or not 0 < self.ws_port < 65536:
            raise ConfigError("ports must be in 1..65535")
        if self.port == self.ws_port:
            raise ConfigError("port and ws_port must differ")
        if self.ttl_secs <= 0:
            raise ConfigError("ttl_secs must be positive")
        if self.reply_window_secs <= 0:
            raise ConfigError("reply_window_secs must be positive")
        if not 0.0 <= self.loss <= 1.0:
            raise ConfigError("loss must be in [0, 1]")
        if not 0.0 <= self.t_low < self.t_high <= 1.0:
            raise ConfigError("need 0 <= t_low < t_high <= 1")
        if not 0.0 < self.alpha <= 1.0:
            raise ConfigError("alpha must be in (0, 1]")
        if self.model is not None:
            if not isinstance(self.model, dict):
                raise ConfigError("model must be an object")
            from .errors import InvalidModel
            from .simulator import BehaviorModel

            try:
                BehaviorModel.from_dict(self.model)
            except InvalidModel as exc:
                raise ConfigError(f"bad model in config: {exc}") from exc
        return self


def load_config(path: str | None = None) -> Config:
    """Build a Config from the given file, the ANIMO_CONFIG file, or defaults."""
    path = path if path is not None else os.environ.get(ENV_CONFIG_PATH)
    if path is None:
        return Config().validate()
    try:
        with open(path, encoding="utf-8") as fh:
            raw = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid json: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError(f"config {path} must be a json object")
    known = {f.name for f in fields(Config)}
    unknown = set(raw) - known
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    try:
        cfg = Config(**raw)
    except TypeError as exc:
        raise ConfigError(f"bad config value: {exc}") from exc
    return cfg.validate()
