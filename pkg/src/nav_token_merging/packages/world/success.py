import string

from pydantic import BaseModel, Field

from nav_token_merging.core.constants.navigation import SuccessRadius
from nav_token_merging.packages.world.episode import (
    EQAGoal,
    Episode,
    FollowGoal,
    ObjectNavGoal,
    VLNGoal,
)
from nav_token_merging.packages.world.geometry import angle_between, bearing_deg, distance
from nav_token_merging.packages.world.simulator import Trajectory, min_distance_along

_PUNCTUATION = str.maketrans("", "", string.punctuation)


class SuccessRecord(BaseModel):
    """Success flag and the per-task extras needed by the metrics."""

    success: bool
    oracle_success: bool | None = None  # undefined for Follow
    nav_error: float = Field(ge=0.0)
    answer_correct: bool | None = None
    nearest_instance_m: float | None = None
    following_flags: list[bool] = Field(default_factory=list)
    collision_flags: list[bool] = Field(default_factory=list)
    human_collision: bool = False


def normalize_answer(text: str) -> str:
    """Lowercase, strip punctuation, collapse whitespace."""
    return " ".join(text.lower().translate(_PUNCTUATION).split())


def check_success(
    episode: Episode, trajectory: Trajectory, answer: str | None = None
) -> SuccessRecord:
    """Judge a finished rollout. Every task requires an executed STOP."""
    goal = episode.goal
    final = trajectory.final_pose
    stopped = trajectory.stopped

    if isinstance(goal, VLNGoal):
        error = distance(final.point, goal.destination)
        closest = min_distance_along(trajectory, goal.destination)
        return SuccessRecord(
            success=stopped and error <= SuccessRadius.VLN,
            oracle_success=closest <= SuccessRadius.VLN,
            nav_error=error,
        )

    if isinstance(goal, ObjectNavGoal):
        points = [episode.scene.object_by_id(i).point for i in goal.instance_ids]
        error = min(distance(final.point, p) for p in points)
        closest = min(min_distance_along(trajectory, p) for p in points)
        return SuccessRecord(
            success=stopped and error <= SuccessRadius.OBJECT_NAV,
            oracle_success=closest <= SuccessRadius.OBJECT_NAV,
            nav_error=error,
            nearest_instance_m=error,
        )

    if isinstance(goal, EQAGoal):
        target = episode.scene.object_by_id(goal.target_object_id).point
        correct = answer is not None and normalize_answer(answer) == normalize_answer(goal.answer)
        return SuccessRecord(
            success=stopped and correct,
            oracle_success=min_distance_along(trajectory, target) <= SuccessRadius.EQA,
            nav_error=distance(final.point, target),
            answer_correct=correct,
        )

    assert isinstance(goal, FollowGoal)
    human = episode.scene.human_by_id(goal.target_human_id)
    target = trajectory.target_positions[-1] if trajectory.target_positions else human.path[0]
    error = distance(final.point, target)
    facing = error == 0.0 or (
        angle_between(bearing_deg(final.point, target), final.heading)
        <= SuccessRadius.FOLLOW_FACING_DEG
    )
    return SuccessRecord(
        success=stopped and trajectory.target_finished and error <= SuccessRadius.FOLLOW and facing,
        nav_error=error,
        following_flags=list(trajectory.following),
        collision_flags=list(trajectory.human_collision),
        human_collision=any(trajectory.human_collision),
    )
