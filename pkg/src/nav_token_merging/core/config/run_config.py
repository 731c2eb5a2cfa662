"""
Run configuration.

One flat JSON document; every key can be overridden on the command line as
``--key=value`` (dashes and underscores are interchangeable). Values are read as
JSON when they parse, else as plain strings. Environment variables provide the
lowest-priority defaults.
"""

import json
from os import getenv
from pathlib import Path
from typing import Any, Literal

from pydantic import BaseModel, ConfigDict, Field, model_validator

from nav_token_merging.core.errors import ConfigError
from nav_token_merging.packages.executor.latency import LatencyModel, parse_latency
from nav_token_merging.packages.features.extractor import FeatureConfig
from nav_token_merging.packages.memory.merge_memory import MergeConfig
from nav_token_merging.packages.nav_agents.nav_enum import ExecutorKind
from nav_token_merging.packages.world.episode import GenerationConfig
from nav_token_merging.packages.world.world_enum import TaskKind

ENV_DEFAULTS = {"out": "NTM_OUT_DIR", "workers": "NTM_WORKERS"}


class RunConfig(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    # run
    task: TaskKind = TaskKind.OBJECT_NAV
    episodes: int = Field(default=10, ge=0)
    seed: int = 0
    policy: str = "oracle"
    epsilon: float = Field(default=0.2, ge=0.0, le=1.0)
    executor: ExecutorKind = ExecutorKind.BLOCKING
    workers: int = Field(default=1, ge=1)
    out: str = "out"
    encode_observations: bool = False

    # features and memory
    n_x: int = 256
    c: int = 32
    feature_seed: int = 0
    alpha_curr: int = 2
    alpha_short: int = 8
    alpha_long: int = 16
    buffer_len: int = 64
    tau: float = 0.95

    # latency
    inference_s: float = 0.2
    comm_s: float = 0.3
    action_s: float = 1.0

    # world
    scene_cells: int = 40
    obstacle_density: float = 0.12
    view_radius: int = Field(default=8, ge=1)

    # profile
    horizon: int = Field(default=600, ge=1)
    stream: Literal["constant", "random", "orthogonal"] = "random"
    sweep_taus: list[float] = Field(default_factory=list)
    timing: bool = True

    # collect and replay
    successful_only: bool = True
    low_level: bool = False
    dagger: bool = False
    samples: str | None = None

    @model_validator(mode="after")
    def _nested_configs(self) -> "RunConfig":
        # build every nested view once so bad combinations fail before any run
        _ = (self.feature_config, self.merge_config, self.latency_model, self.generation_config)
        if any(not 0.0 <= tau <= 1.0 for tau in self.sweep_taus):
            raise ValueError("sweep_taus values must lie in [0, 1]")
        return self

    @property
    def feature_config(self) -> FeatureConfig:
        return FeatureConfig(n_x=self.n_x, c=self.c, feature_seed=self.feature_seed)

    @property
    def merge_config(self) -> MergeConfig:
        return MergeConfig(
            alpha_curr=self.alpha_curr,
            alpha_short=self.alpha_short,
            alpha_long=self.alpha_long,
            buffer_len=self.buffer_len,
            tau=self.tau,
        )

    @property
    def latency_model(self) -> LatencyModel:
        return LatencyModel(
            inference_s=self.inference_s, comm_s=self.comm_s, action_s=self.action_s
        )

    @property
    def generation_config(self) -> GenerationConfig:
        return GenerationConfig(
            scene_cells=self.scene_cells, obstacle_density=self.obstacle_density
        )

    @property
    def out_dir(self) -> Path:
        return Path(self.out)

    def episode_seeds(self) -> list[int]:
        return [self.seed + index for index in range(self.episodes)]


def parse_overrides(args: list[str]) -> dict[str, Any]:
    """Turn ``--key=value`` (or ``--key value``) flags into config entries.

    A flag with no value means true.

    Raises:
        ConfigError: an argument is not a ``--key`` flag
    """
    values: dict[str, Any] = {}
    pending = list(args)
    while pending:
        arg = pending.pop(0)
        if not arg.startswith("--") or len(arg) == 2:
            raise ConfigError(f"expected --key=value, got {arg!r}")
        key, sep, raw = arg[2:].partition("=")
        key = key.replace("-", "_")
        if not sep and pending and not pending[0].startswith("--"):
            raw, sep = pending.pop(0), "="
        if key == "latency":
            values.update(parse_latency(raw))
            continue
        if not sep:
            values[key] = True
            continue
        try:
            values[key] = json.loads(raw)
        except json.JSONDecodeError:
            values[key] = raw
    return values


def _read_config_file(path: Path) -> dict[str, Any]:
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigError(f"cannot read config file {path}: {e}") from e
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError(f"{path}: invalid JSON at line {e.lineno}, column {e.colno}") from e
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: top level must be a JSON object")
    return data


def load_run_config(path: Path | None = None, overrides: list[str] | None = None) -> RunConfig:
    """Merge environment defaults, the config file and command-line overrides, in that order.

    Raises:
        ConfigError: unreadable file, invalid JSON or malformed flag
        pydantic.ValidationError: unknown key or invalid value
    """
    merged: dict[str, Any] = {}
    for key, env_name in ENV_DEFAULTS.items():
        value = getenv(env_name)
        if value:
            merged[key] = value
    if path is not None:
        merged.update(_read_config_file(Path(path)))
    merged.update(parse_overrides(overrides or []))
    return RunConfig.model_validate(merged)
