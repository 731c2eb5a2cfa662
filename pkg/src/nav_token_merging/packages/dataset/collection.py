"""
Ground-truth sample collection.

The expert is rolled out one action per step; each visited step yields one sample
labelled with the expert's four-action plan. EQA episodes add one answer sample
after STOP. Short VLN routes are optionally re-collected under a step-by-step
low-level instruction.
"""

import logging

from nav_token_merging.core.constants.navigation import Sensing
from nav_token_merging.packages.dataset.augmentation import (
    LOW_LEVEL_MAX_STEPS,
    make_low_level_episode,
)
from nav_token_merging.packages.dataset.samples import NavSample, ReplayReference
from nav_token_merging.packages.nav_agents.policies import ActionBatch, Policy, PolicyRequest
from nav_token_merging.packages.world.episode import Episode, VLNGoal
from nav_token_merging.packages.world.simulator import EpisodeState, reset
from nav_token_merging.packages.world.success import check_success
from nav_token_merging.packages.world.world_enum import Action, TaskKind

logger = logging.getLogger(__name__)


def _reference(episode: Episode, prefix: list[Action]) -> ReplayReference:
    goal = episode.goal
    low_level = goal.low_level_actions if isinstance(goal, VLNGoal) else None
    return ReplayReference(
        task_kind=episode.task_kind,
        episode_seed=episode.seed,
        action_prefix=list(prefix),
        low_level_actions=low_level,
    )


def action_sample(
    episode: Episode, prefix: list[Action], label: ActionBatch, executed: Action
) -> NavSample:
    return NavSample(
        episode_id=episode.episode_id,
        task_kind=episode.task_kind,
        instruction=episode.instruction.text,
        history=_reference(episode, prefix),
        label=label,
        executed_action=executed,
    )


def answer_sample(episode: Episode, prefix: list[Action], answer: str) -> NavSample:
    return NavSample(
        episode_id=episode.episode_id,
        task_kind=episode.task_kind,
        instruction=episode.instruction.text,
        history=_reference(episode, prefix),
        answer=answer,
    )


def _roll_expert(
    episode: Episode, expert: Policy, view_radius: int
) -> tuple[EpisodeState, list[NavSample], str | None]:
    state = reset(episode, view_radius)
    samples: list[NavSample] = []
    while not state.done:
        label = expert.next_actions(PolicyRequest(state=state))
        samples.append(action_sample(episode, state.trajectory.actions, label, label.first))
        state.step(label.first, render=False)

    answer = None
    if episode.task_kind is TaskKind.EQA:
        answer = expert.answer(PolicyRequest(state=state))
        samples.append(answer_sample(episode, state.trajectory.actions, answer))
    return state, samples, answer


def collect_gt_samples(
    episodes: list[Episode],
    expert: Policy,
    successful_only: bool = True,
    low_level: bool = False,
    view_radius: int = Sensing.VIEW_RADIUS_CELLS,
) -> list[NavSample]:
    """One sample per expert step, in episode order.

    Args:
        episodes: Episodes to roll out
        expert: Policy providing labels and executed actions
        successful_only: Drop episodes the expert did not solve
        low_level: Also collect VLN routes under LOW_LEVEL_MAX_STEPS steps with
            literal low-level instructions
        view_radius: Local view radius recorded for regeneration
    """
    collected: list[NavSample] = []
    for episode in episodes:
        state, samples, answer = _roll_expert(episode, expert, view_radius)
        success = check_success(episode, state.trajectory, answer).success
        if successful_only and not success:
            logger.info("skipping unsuccessful episode %s", episode.episode_id)
            continue
        collected.extend(samples)

        short = state.trajectory.steps < LOW_LEVEL_MAX_STEPS
        if low_level and episode.task_kind is TaskKind.VLN and short and success:
            literal = make_low_level_episode(episode, list(state.trajectory.actions))
            _, literal_samples, _ = _roll_expert(literal, expert, view_radius)
            collected.extend(literal_samples)
    return collected
