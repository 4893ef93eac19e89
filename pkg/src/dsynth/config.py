"""Run configuration: flat key-value file, DSYN_ env overrides, CLI overrides.

Precedence is defaults < file < environment < command-line flags.  Every value
is validated with an error that names the offending field, before any work
starts.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, fields

from .params import ADD_REMOVE, REPLACE

ENV_PREFIX = "DSYN_"

#: omega may be this literal in config files, meaning "resample everything"
OMEGA_ALL = "m"


class ConfigError(ValueError):
    """A configuration value failed validation; message names the field."""


@dataclass
class RunConfig:
    input_csv: str = ""
    output_dir: str = "dsynth_out"
    model_file: str = ""
    fractions: tuple[float, float, float] = (0.4, 0.3, 0.3)
    k: int = 5
    gamma: float = 4.0
    omega: float | str = OMEGA_ALL
    epsilon_s: float = math.inf
    epsilon_p: float = math.inf
    epsilon_0: float = math.inf
    adjacency: str = ADD_REMOVE
    rng_seed: int = 0
    max_parents: int = 2
    complexity_cap: int = 10000
    bins: int = 8
    max_categories: int = 32
    max_candidates_per_release: int = 50
    folds: int = 5
    learning_rate: float = 0.1
    epochs: int = 300
    l2: float = 1e-4
    batch_size: int = 32
    workers: int = 0  # 0 = one per processor

    def resolved_model_file(self) -> str:
        return self.model_file or os.path.join(self.output_dir, "model.txt")

    def resolved_workers(self) -> int:
        return self.workers if self.workers > 0 else (os.cpu_count() or 1)

    def resolve_omega(self, m: int) -> float:
        if self.omega == OMEGA_ALL:
            return float(m)
        value = float(self.omega)
        if value > m:
            raise ConfigError(f"omega must be <= m={m} (got {value!r})")
        return value


def _parse_int(field: str, raw: str) -> int:
    try:
        return int(raw)
    except ValueError:
        raise ConfigError(f"{field} must be an integer (got {raw!r})") from None


def _parse_float(field: str, raw: str) -> float:
    try:
        return float(raw)
    except ValueError:
        raise ConfigError(f"{field} must be a number (got {raw!r})") from None


def _parse_fractions(field: str, raw: str) -> tuple[float, float, float]:
    parts = [p.strip() for p in raw.split(",")]
    if len(parts) != 3:
        raise ConfigError(f"{field} must be three comma-separated numbers (got {raw!r})")
    return tuple(_parse_float(field, p) for p in parts)  # type: ignore[return-value]


def _parse_omega(field: str, raw: str):
    if raw.strip() == OMEGA_ALL:
        return OMEGA_ALL
    return _parse_float(field, raw)


_PARSERS = {
    "input_csv": lambda f, r: r,
    "output_dir": lambda f, r: r,
    "model_file": lambda f, r: r,
    "fractions": _parse_fractions,
    "k": _parse_int,
    "gamma": _parse_float,
    "omega": _parse_omega,
    "epsilon_s": _parse_float,
    "epsilon_p": _parse_float,
    "epsilon_0": _parse_float,
    "adjacency": lambda f, r: r,
    "rng_seed": _parse_int,
    "max_parents": _parse_int,
    "complexity_cap": _parse_int,
    "bins": _parse_int,
    "max_categories": _parse_int,
    "max_candidates_per_release": _parse_int,
    "folds": _parse_int,
    "learning_rate": _parse_float,
    "epochs": _parse_int,
    "l2": _parse_float,
    "batch_size": _parse_int,
    "workers": _parse_int,
}

FIELD_NAMES = tuple(f.name for f in fields(RunConfig))


def _validate(cfg: RunConfig) -> None:
    if cfg.k < 1:
        raise ConfigError(f"k must be >= 1 (got {cfg.k})")
    if not cfg.gamma >= 1.0:
        raise ConfigError(f"gamma must be >= 1 (got {cfg.gamma})")
    if cfg.omega != OMEGA_ALL and not float(cfg.omega) >= 0.0:
        raise ConfigError(f"omega must be >= 0 or '{OMEGA_ALL}' (got {cfg.omega})")
    for name in ("epsilon_s", "epsilon_p", "epsilon_0"):
        if not getattr(cfg, name) > 0:
            raise ConfigError(f"{name} must be positive (got {getattr(cfg, name)})")
    if cfg.adjacency not in (ADD_REMOVE, REPLACE):
        raise ConfigError(
            f"adjacency must be '{ADD_REMOVE}' or '{REPLACE}' (got {cfg.adjacency!r})"
        )
    if any(f < 0 for f in cfg.fractions):
        raise ConfigError(f"fractions must be nonnegative (got {cfg.fractions})")
    if abs(sum(cfg.fractions) - 1.0) > 1e-9:
        raise ConfigError(f"fractions must sum to 1 (got {cfg.fractions})")
    if cfg.max_parents < 0:
        raise ConfigError(f"max_parents must be >= 0 (got {cfg.max_parents})")
    if cfg.complexity_cap < 1:
        raise ConfigError(f"complexity_cap must be >= 1 (got {cfg.complexity_cap})")
    if cfg.bins < 1:
        raise ConfigError(f"bins must be >= 1 (got {cfg.bins})")
    if cfg.max_categories < 1:
        raise ConfigError(f"max_categories must be >= 1 (got {cfg.max_categories})")
    if cfg.max_candidates_per_release < 1:
        raise ConfigError(
            f"max_candidates_per_release must be >= 1 (got {cfg.max_candidates_per_release})"
        )
    if cfg.folds < 2:
        raise ConfigError(f"folds must be >= 2 (got {cfg.folds})")
    if not cfg.learning_rate > 0:
        raise ConfigError(f"learning_rate must be positive (got {cfg.learning_rate})")
    if cfg.epochs < 1:
        raise ConfigError(f"epochs must be >= 1 (got {cfg.epochs})")
    if cfg.l2 < 0:
        raise ConfigError(f"l2 must be >= 0 (got {cfg.l2})")
    if cfg.batch_size < 1:
        raise ConfigError(f"batch_size must be >= 1 (got {cfg.batch_size})")
    if cfg.workers < 0:
        raise ConfigError(f"workers must be >= 0 (got {cfg.workers})")


def parse_config_file(path: str) -> dict[str, str]:
    values: dict[str, str] = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected 'key = value', got {line!r}")
            key, value = line.split("=", 1)
            key = key.strip()
            if key not in FIELD_NAMES:
                raise ConfigError(f"{path}:{lineno}: unknown config key {key!r}")
            values[key] = value.strip()
    return values


def env_overrides(environ=None) -> dict[str, str]:
    env = os.environ if environ is None else environ
    out: dict[str, str] = {}
    for name in FIELD_NAMES:
        raw = env.get(ENV_PREFIX + name.upper())
        if raw is not None:
            out[name] = raw
    return out


def load_run_config(
    config_path: str | None = None,
    overrides: dict[str, str] | None = None,
    environ=None,
) -> RunConfig:
    """Merge file, environment, and explicit overrides into a validated config."""
    raw: dict[str, str] = {}
    if config_path:
        raw.update(parse_config_file(config_path))
    raw.update(env_overrides(environ))
    if overrides:
        for key in overrides:
            if key not in FIELD_NAMES:
                raise ConfigError(f"unknown config key {key!r}")
        raw.update(overrides)
    cfg = RunConfig()
    for key, value in raw.items():
        setattr(cfg, key, _PARSERS[key](key, value))
    _validate(cfg)
    return cfg
