"""
Collect service: ground-truth or DAgger samples to ``samples.jsonl``.
"""

import logging

from nav_token_merging.core.config.run_config import RunConfig
from nav_token_merging.core.constants.navigation import OutputFiles
from nav_token_merging.packages.dataset.collection import collect_gt_samples
from nav_token_merging.packages.dataset.samples import (
    NavSample,
    SampleFileHeader,
    write_samples,
)
from nav_token_merging.packages.nav_agents.dagger import dagger_collect
from nav_token_merging.packages.nav_agents.nav_enum import PolicyKind
from nav_token_merging.packages.nav_agents.policies import NoisyExpertAgent, OracleAgent, Policy
from nav_token_merging.packages.nav_agents.registry import build_policy
from nav_token_merging.packages.world.episode import Episode, generate_episode

logger = logging.getLogger(__name__)


class CollectService:
    def __init__(self, config: RunConfig):
        self.config = config

    def episodes(self) -> list[Episode]:
        cfg = self.config
        return [
            generate_episode(cfg.task, cfg.generation_config, seed)
            for seed in cfg.episode_seeds()
        ]

    def student(self) -> Policy:
        """The configured policy, or the noisy expert when the policy is the oracle itself."""
        cfg = self.config
        if cfg.policy == PolicyKind.ORACLE.value:
            return NoisyExpertAgent(epsilon=cfg.epsilon, seed=cfg.seed)
        return build_policy(cfg.policy, epsilon=cfg.epsilon, seed=cfg.seed)

    def collect(self) -> list[NavSample]:
        cfg = self.config
        episodes = self.episodes()
        expert = OracleAgent()
        if cfg.dagger:
            return dagger_collect(episodes, self.student(), expert, cfg.view_radius)
        return collect_gt_samples(
            episodes,
            expert,
            successful_only=cfg.successful_only,
            low_level=cfg.low_level,
            view_radius=cfg.view_radius,
        )

    def run(self) -> list[NavSample]:
        """Collect and write the sample file.

        Raises:
            SampleIoError: the sample file cannot be written
        """
        samples = self.collect()
        out_dir = self.config.out_dir
        out_dir.mkdir(parents=True, exist_ok=True)
        header = SampleFileHeader(
            generation=self.config.generation_config, view_radius=self.config.view_radius
        )
        write_samples(samples, out_dir / OutputFiles.SAMPLES, header)
        mode = "dagger" if self.config.dagger else "ground-truth"
        logger.info(
            "collected %d %s samples from %d episodes", len(samples), mode, self.config.episodes
        )
        return samples
