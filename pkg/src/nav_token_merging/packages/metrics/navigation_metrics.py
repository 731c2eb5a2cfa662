"""
Per-episode outcomes and their aggregation.

Rates are percentages over episodes. Sums use ``math.fsum`` so the aggregate does
not depend on the order of the outcomes.
"""

from math import fsum

from pydantic import BaseModel, Field

from nav_token_merging.core.errors import DegenerateEpisode, EmptyInput
from nav_token_merging.packages.world.episode import TASK_ORDER, Episode, reference_path_length
from nav_token_merging.packages.world.simulator import Trajectory
from nav_token_merging.packages.world.success import SuccessRecord
from nav_token_merging.packages.world.world_enum import TaskKind


def spl(success: bool, p: float, l: float) -> float:  # noqa: E741
    """Success weighted by path length: S * l / max(p, l).

    Raises:
        DegenerateEpisode: l is not positive
    """
    if l <= 0:
        raise DegenerateEpisode(f"shortest path length must be positive, got {l}")
    if p < 0:
        raise ValueError(f"path length must not be negative, got {p}")
    return (1.0 if success else 0.0) * l / max(p, l)


def follow_rates(flags: list[bool], collided_episode: bool) -> tuple[float, int]:
    """(fraction of following steps, 1 if the episode had a human collision else 0)."""
    rate = sum(flags) / len(flags) if flags else 0.0
    return rate, int(collided_episode)


class EpisodeOutcome(BaseModel):
    episode_index: int
    episode_id: str
    task_kind: TaskKind
    success: bool
    oracle_success: bool | None = None
    path_length: float = Field(ge=0.0)
    geodesic_shortest: float = Field(ge=0.0)
    nav_error: float = Field(ge=0.0)
    steps: int = Field(ge=0)
    follow_steps: int | None = None
    total_steps: int | None = None
    human_collision: bool | None = None
    answer_correct: bool | None = None

    @property
    def spl_score(self) -> float:
        # a start already inside the goal region has no path to weigh
        if self.geodesic_shortest <= 0:
            return 1.0 if self.success else 0.0
        return spl(self.success, self.path_length, self.geodesic_shortest)

    @property
    def follow_rate(self) -> float | None:
        if self.total_steps is None or self.follow_steps is None:
            return None
        return self.follow_steps / self.total_steps if self.total_steps else 0.0


def make_outcome(
    episode_index: int, episode: Episode, trajectory: Trajectory, record: SuccessRecord
) -> EpisodeOutcome:
    is_follow = episode.task_kind is TaskKind.FOLLOW
    _, collided = follow_rates(record.following_flags, record.human_collision)
    return EpisodeOutcome(
        episode_index=episode_index,
        episode_id=episode.episode_id,
        task_kind=episode.task_kind,
        success=record.success,
        oracle_success=record.oracle_success,
        path_length=trajectory.path_length,
        geodesic_shortest=reference_path_length(episode),
        nav_error=record.nav_error,
        steps=trajectory.steps,
        follow_steps=sum(record.following_flags) if is_follow else None,
        total_steps=len(record.following_flags) if is_follow else None,
        human_collision=bool(collided) if is_follow else None,
        answer_correct=record.answer_correct,
    )


class TaskMetrics(BaseModel):
    """Aggregates for one task; rates in percent, lengths in meters."""

    task_kind: TaskKind
    episodes: int
    sr: float
    osr: float | None = None
    spl: float | None = None
    tl: float | None = None
    ne: float | None = None
    fr: float | None = None
    cr: float | None = None
    acc: float | None = None


class MetricsReport(BaseModel):
    episodes: int
    tasks: list[TaskMetrics]

    def for_task(self, task_kind: TaskKind) -> TaskMetrics:
        for metrics in self.tasks:
            if metrics.task_kind is task_kind:
                return metrics
        raise KeyError(task_kind.value)


def _mean(values: list[float]) -> float:
    return fsum(values) / len(values)


def _percent(flags: list[bool]) -> float:
    return 100.0 * _mean([1.0 if f else 0.0 for f in flags])


def _task_metrics(task_kind: TaskKind, outcomes: list[EpisodeOutcome]) -> TaskMetrics:
    metrics = TaskMetrics(
        task_kind=task_kind,
        episodes=len(outcomes),
        sr=_percent([o.success for o in outcomes]),
    )
    if task_kind is TaskKind.FOLLOW:
        metrics.fr = 100.0 * _mean([o.follow_rate or 0.0 for o in outcomes])
        metrics.cr = _percent([bool(o.human_collision) for o in outcomes])
        return metrics

    metrics.osr = _percent([bool(o.oracle_success) for o in outcomes])
    metrics.spl = 100.0 * _mean([o.spl_score for o in outcomes])
    metrics.tl = _mean([o.path_length for o in outcomes])
    metrics.ne = _mean([o.nav_error for o in outcomes])
    if task_kind is TaskKind.EQA:
        metrics.acc = _percent([bool(o.answer_correct) for o in outcomes])
    return metrics


def aggregate(outcomes: list[EpisodeOutcome]) -> MetricsReport:
    """Per-task means over episodes, tasks in a fixed order.

    Raises:
        EmptyInput: no outcomes
    """
    if not outcomes:
        raise EmptyInput("cannot aggregate zero episodes")
    tasks = [
        _task_metrics(kind, [o for o in outcomes if o.task_kind is kind])
        for kind in TASK_ORDER
        if any(o.task_kind is kind for o in outcomes)
    ]
    return MetricsReport(episodes=len(outcomes), tasks=tasks)
