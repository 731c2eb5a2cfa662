from nav_token_merging.packages.dataset.templates import low_level_instruction
from nav_token_merging.packages.world.episode import Episode, VLNGoal
from nav_token_merging.packages.world.simulator import reset
from nav_token_merging.packages.world.world_enum import Action

# Only short expert routes are re-described step by step.
LOW_LEVEL_MAX_STEPS = 20


def make_low_level_episode(episode: Episode, actions: list[Action]) -> Episode:
    """Same scene and start, re-instructed with the literal action runs of ``actions``.

    The destination is where the literal actions lead from the start pose.
    """
    state = reset(episode)
    for action in actions:
        if state.done:
            break
        state.step(action, render=False)
    goal = VLNGoal(destination=state.pose.point, low_level_actions=list(actions))
    return episode.model_copy(
        update={
            "episode_id": f"{episode.episode_id}-low",
            "instruction": low_level_instruction(actions, task_kind=episode.task_kind),
            "goal": goal,
        }
    )
