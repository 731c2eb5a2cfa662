"""
Episode service: dump generated episodes and replay recorded samples.
"""

import logging
from pathlib import Path

from pydantic import BaseModel

from nav_token_merging.core.config.run_config import RunConfig
from nav_token_merging.core.constants.navigation import OutputFiles
from nav_token_merging.core.errors import ConfigError
from nav_token_merging.packages.dataset.samples import (
    read_sample_file,
    recorded_actions,
    regenerate_episode,
)
from nav_token_merging.packages.world.episode import Episode, generate_episode
from nav_token_merging.packages.world.geometry import Pose
from nav_token_merging.packages.world.simulator import reset
from nav_token_merging.packages.world.success import check_success
from nav_token_merging.packages.world.world_enum import Action

logger = logging.getLogger(__name__)


class ReplayStep(BaseModel):
    """One re-executed action of a recorded episode."""

    episode_id: str
    step: int
    action: Action
    pose: Pose
    collided: bool
    done: bool


class EpisodeService:
    def __init__(self, config: RunConfig):
        self.config = config

    def dump(self) -> Episode:
        """Write the first configured episode as indented JSON."""
        cfg = self.config
        episode = generate_episode(cfg.task, cfg.generation_config, cfg.seed)
        cfg.out_dir.mkdir(parents=True, exist_ok=True)
        path = cfg.out_dir / OutputFiles.EPISODE
        path.write_text(episode.model_dump_json(indent=2) + "\n", encoding="utf-8")
        logger.info("episode %s written to %s", episode.episode_id, path)
        return episode

    def replay(self) -> list[ReplayStep]:
        """Regenerate every episode in the sample file and re-execute its recorded actions.

        Raises:
            ConfigError: no sample file configured
            SampleIoError, SchemaMismatch: the sample file is unreadable
        """
        if not self.config.samples:
            raise ConfigError("replay needs --samples=<file>", key="samples")
        header, samples = read_sample_file(Path(self.config.samples))
        actions = recorded_actions(samples)

        episodes: dict[str, Episode] = {}
        for sample in samples:
            if sample.episode_id not in episodes:
                history = sample.history.model_copy(update={"action_prefix": []})
                episodes[sample.episode_id] = regenerate_episode(history, header)

        steps: list[ReplayStep] = []
        for episode_id, episode in episodes.items():
            state = reset(episode, header.view_radius)
            for action in actions.get(episode_id, []):
                if state.done:
                    break
                result = state.step(action, render=False)
                steps.append(
                    ReplayStep(
                        episode_id=episode_id,
                        step=state.step_count,
                        action=action,
                        pose=result.new_pose,
                        collided=result.collided,
                        done=result.done,
                    )
                )
            record = check_success(episode, state.trajectory)
            logger.info(
                "replayed %s: %d steps, success=%s", episode_id, state.step_count, record.success
            )

        cfg = self.config
        cfg.out_dir.mkdir(parents=True, exist_ok=True)
        lines = "".join(step.model_dump_json() + "\n" for step in steps)
        (cfg.out_dir / OutputFiles.TRACE).write_text(lines, encoding="utf-8")
        return steps
