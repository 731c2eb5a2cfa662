import logging

from nav_token_merging.core.constants.navigation import Sensing
from nav_token_merging.packages.dataset.collection import action_sample, answer_sample
from nav_token_merging.packages.dataset.samples import NavSample
from nav_token_merging.packages.world.episode import Episode
from nav_token_merging.packages.world.simulator import reset
from nav_token_merging.packages.world.world_enum import TaskKind

from .policies import Policy, PolicyRequest

logger = logging.getLogger(__name__)


def dagger_collect(
    episodes: list[Episode],
    student: Policy,
    expert: Policy,
    view_radius: int = Sensing.VIEW_RADIUS_CELLS,
) -> list[NavSample]:
    """Roll out the student and label every visited state with the expert's batch.

    The student's first planned action is executed each step; EQA episodes end
    with one expert answer sample.
    """
    samples: list[NavSample] = []
    for episode in episodes:
        state = reset(episode, view_radius)
        while not state.done:
            request = PolicyRequest(state=state)
            label = expert.next_actions(request)
            executed = student.next_actions(request).first
            samples.append(action_sample(episode, state.trajectory.actions, label, executed))
            state.step(executed, render=False)
        if episode.task_kind is TaskKind.EQA:
            answer = expert.answer(PolicyRequest(state=state))
            samples.append(answer_sample(episode, state.trajectory.actions, answer))
        logger.debug("dagger %s: %d steps", episode.episode_id, state.step_count)
    return samples
