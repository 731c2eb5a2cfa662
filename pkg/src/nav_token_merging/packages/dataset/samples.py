"""
Navigation samples and their JSONL file format.

Line 1 is a ``SampleFileHeader``; every following line is one ``NavSample``.
Samples carry a replay reference instead of frames: the episode is regenerated
from its seed with the header's generation config, the action prefix is
re-executed, and the frames come out identical.
"""

import logging
from pathlib import Path
from typing import Literal

from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from nav_token_merging.core.constants.navigation import Sensing
from nav_token_merging.core.errors import SampleIoError, SchemaMismatch
from nav_token_merging.packages.dataset.augmentation import make_low_level_episode
from nav_token_merging.packages.nav_agents.policies import ActionBatch
from nav_token_merging.packages.world.episode import Episode, GenerationConfig, generate_episode
from nav_token_merging.packages.world.local_view import LocalView
from nav_token_merging.packages.world.simulator import replay_actions
from nav_token_merging.packages.world.world_enum import Action, TaskKind

logger = logging.getLogger(__name__)

SAMPLE_FORMAT = "nav-samples"
SAMPLE_VERSION = 1


class SampleFileHeader(BaseModel):
    model_config = ConfigDict(frozen=True)

    format: Literal["nav-samples"] = SAMPLE_FORMAT
    version: Literal[1] = SAMPLE_VERSION
    generation: GenerationConfig = Field(default_factory=GenerationConfig)
    view_radius: int = Sensing.VIEW_RADIUS_CELLS


class ReplayReference(BaseModel):
    """Enough to rebuild the episode and the history up to the labelled step."""

    model_config = ConfigDict(frozen=True)

    task_kind: TaskKind
    episode_seed: int
    action_prefix: list[Action] = Field(default_factory=list)
    low_level_actions: list[Action] | None = None


class NavSample(BaseModel):
    model_config = ConfigDict(frozen=True)

    episode_id: str
    task_kind: TaskKind
    instruction: str
    history: ReplayReference
    label: ActionBatch | None = None
    answer: str | None = None
    executed_action: Action | None = None

    @model_validator(mode="after")
    def _one_target(self) -> "NavSample":
        if (self.label is None) == (self.answer is None):
            raise ValueError("a sample carries either an action label or an answer")
        return self


def write_samples(
    samples: list[NavSample], path: Path, header: SampleFileHeader | None = None
) -> None:
    """Write the header line and one sample per line.

    Raises:
        SampleIoError: the file cannot be written
    """
    header = header or SampleFileHeader()
    try:
        with Path(path).open("w", encoding="utf-8") as handle:
            handle.write(header.model_dump_json() + "\n")
            for sample in samples:
                handle.write(sample.model_dump_json(exclude_none=True) + "\n")
    except OSError as e:
        raise SampleIoError(f"cannot write samples to {path}: {e}") from e
    logger.info("wrote %d samples to %s", len(samples), path)


def read_sample_file(path: Path) -> tuple[SampleFileHeader, list[NavSample]]:
    """Parse a sample file.

    Raises:
        SampleIoError: the file cannot be read
        SchemaMismatch: a line does not parse; carries its 1-based line number
    """
    try:
        lines = Path(path).read_text(encoding="utf-8").splitlines()
    except OSError as e:
        raise SampleIoError(f"cannot read samples from {path}: {e}") from e
    if not lines:
        raise SchemaMismatch("missing header line", line_number=1)

    try:
        header = SampleFileHeader.model_validate_json(lines[0])
    except ValidationError as e:
        raise SchemaMismatch(f"bad header: {e.errors()[0]['msg']}", line_number=1) from e

    samples = []
    for line_number, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        try:
            samples.append(NavSample.model_validate_json(line))
        except ValidationError as e:
            raise SchemaMismatch(e.errors()[0]["msg"], line_number=line_number) from e
    return header, samples


def read_samples(path: Path) -> list[NavSample]:
    return read_sample_file(path)[1]


def regenerate_episode(reference: ReplayReference, header: SampleFileHeader) -> Episode:
    episode = generate_episode(reference.task_kind, header.generation, reference.episode_seed)
    if reference.low_level_actions is not None:
        episode = make_low_level_episode(episode, reference.low_level_actions)
    return episode


def regenerate_frames(sample: NavSample, header: SampleFileHeader) -> list[LocalView]:
    """Frames the sample's history saw: the start view, then one per prefix action."""
    episode = regenerate_episode(sample.history, header)
    _, frames = replay_actions(episode, sample.history.action_prefix, header.view_radius)
    return frames


def recorded_actions(samples: list[NavSample]) -> dict[str, list[Action]]:
    """Longest executed action sequence per episode id."""
    recorded: dict[str, list[Action]] = {}
    for sample in samples:
        prefix = list(sample.history.action_prefix)
        if sample.executed_action is not None:
            prefix.append(sample.executed_action)
        elif sample.label is not None:
            prefix.append(sample.label.first)
        if len(prefix) > len(recorded.get(sample.episode_id, [])):
            recorded[sample.episode_id] = prefix
    return recorded
