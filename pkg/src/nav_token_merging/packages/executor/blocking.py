import logging

from nav_token_merging.core.constants.navigation import Sensing
from nav_token_merging.packages.nav_agents.policies import Policy, PolicyRequest
from nav_token_merging.packages.prompt.token_sequence import visual_token_count
from nav_token_merging.packages.world.episode import Episode
from nav_token_merging.packages.world.simulator import EpisodeState, reset
from nav_token_merging.packages.world.world_enum import Action, TaskKind

from .observation import ObservationPipeline, RolloutResult

logger = logging.getLogger(__name__)


def answer_if_needed(
    state: EpisodeState, policy: Policy, pipeline: ObservationPipeline
) -> str | None:
    """After an EQA STOP the policy answers from a prompt without the navigation tag."""
    if state.task_kind is not TaskKind.EQA or not state.stopped:
        return None
    return policy.answer(PolicyRequest(state=state, token_sequence=pipeline.prompt(nav_mode=False)))


def run_blocking(
    episode: Episode,
    policy: Policy,
    pipeline: ObservationPipeline | None = None,
    view_radius: int = Sensing.VIEW_RADIUS_CELLS,
) -> RolloutResult:
    """Synchronous rollout: execute a whole batch, observe, re-plan.

    STOP ends the episode only as the first action of a batch; a later STOP cuts
    the batch short and triggers a new plan.
    """
    pipeline = pipeline or ObservationPipeline(episode.instruction, enabled=False)
    state = reset(episode, view_radius)
    pipeline.observe(state.render_local_view() if pipeline.enabled else None)

    batches = 0
    max_tokens = 0
    while not state.done:
        prompt = pipeline.prompt()
        if prompt is not None:
            max_tokens = max(max_tokens, visual_token_count(prompt))
        batch = policy.next_actions(PolicyRequest(state=state, token_sequence=prompt))
        batches += 1
        for position, action in enumerate(batch.actions):
            if action is Action.STOP and position > 0:
                break
            result = state.step(action, render=pipeline.enabled)
            pipeline.observe(result.frame)
            if state.done:
                break

    logger.debug(
        "%s finished after %d steps and %d batches", episode.episode_id, state.step_count, batches
    )
    return RolloutResult(
        trajectory=state.trajectory,
        answer=answer_if_needed(state, policy, pipeline),
        batches=batches,
        visual_tokens=max_tokens,
    )
