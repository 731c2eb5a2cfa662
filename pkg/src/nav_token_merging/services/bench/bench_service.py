"""
Benchmark service: roll out seeded episodes and report navigation metrics.

Writes ``report.json`` and ``episodes.csv`` under the output directory, plus
``trace.jsonl`` when the non-blocking executor is selected.
"""

import logging
from concurrent.futures import ProcessPoolExecutor

from nav_token_merging.core.config.run_config import RunConfig
from nav_token_merging.core.constants.navigation import OutputFiles
from nav_token_merging.packages.executor.blocking import run_blocking
from nav_token_merging.packages.executor.nonblocking import run_nonblocking
from nav_token_merging.packages.executor.observation import ObservationPipeline
from nav_token_merging.packages.metrics.navigation_metrics import (
    EpisodeOutcome,
    MetricsReport,
    aggregate,
    make_outcome,
)
from nav_token_merging.packages.metrics.report import write_episodes_csv, write_report_json
from nav_token_merging.packages.nav_agents.nav_enum import ExecutorKind
from nav_token_merging.packages.nav_agents.registry import build_policy
from nav_token_merging.packages.world.episode import generate_episode
from nav_token_merging.packages.world.success import check_success

logger = logging.getLogger(__name__)


def run_benchmark_episode(config: RunConfig, index: int, seed: int) -> tuple[EpisodeOutcome, str]:
    """Outcome of one episode and its event trace as JSONL (empty when blocking)."""
    episode = generate_episode(config.task, config.generation_config, seed)
    policy = build_policy(config.policy, epsilon=config.epsilon, seed=config.seed)
    pipeline = ObservationPipeline(
        episode.instruction,
        config.feature_config,
        config.merge_config,
        enabled=config.encode_observations,
    )
    trace_text = ""
    if config.executor is ExecutorKind.NONBLOCKING:
        result, trace = run_nonblocking(
            episode, policy, config.latency_model, pipeline, config.view_radius
        )
        trace_text = trace.to_jsonl()
    else:
        result = run_blocking(episode, policy, pipeline, config.view_radius)

    record = check_success(episode, result.trajectory, result.answer)
    return make_outcome(index, episode, result.trajectory, record), trace_text


class BenchService:
    """Runs benchmark episodes, optionally across worker processes."""

    def __init__(self, config: RunConfig):
        self.config = config

    def run_episodes(self) -> list[tuple[EpisodeOutcome, str]]:
        """Results ordered by episode index regardless of the worker count."""
        seeds = self.config.episode_seeds()
        indices = list(range(len(seeds)))
        if self.config.workers > 1 and len(seeds) > 1:
            with ProcessPoolExecutor(max_workers=self.config.workers) as pool:
                configs = [self.config] * len(seeds)
                return list(pool.map(run_benchmark_episode, configs, indices, seeds))
        return [
            run_benchmark_episode(self.config, index, seed)
            for index, seed in zip(indices, seeds, strict=True)
        ]

    def run(self) -> MetricsReport:
        """Run, aggregate and write the artifacts.

        Raises:
            EmptyInput: zero episodes were requested
        """
        results = self.run_episodes()
        outcomes = [outcome for outcome, _ in results]
        report = aggregate(outcomes)

        out_dir = self.config.out_dir
        out_dir.mkdir(parents=True, exist_ok=True)
        write_episodes_csv(outcomes, out_dir / OutputFiles.EPISODES)
        write_report_json(report, out_dir / OutputFiles.REPORT)
        if self.config.executor is ExecutorKind.NONBLOCKING:
            traces = "".join(trace for _, trace in results)
            (out_dir / OutputFiles.TRACE).write_text(traces, encoding="utf-8")
        logger.info("benchmark of %d episodes written to %s", len(outcomes), out_dir)
        return report
