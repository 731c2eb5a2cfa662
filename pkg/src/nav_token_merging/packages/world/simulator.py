"""
Episode state and the step function.

A FORWARD whose landing disc overlaps an occupied cell or a human disc is
blocked: the pose stays, the step still counts. Humans advance along their paths
after the agent moves and wait while their next position would overlap the agent.
"""

import logging
from dataclasses import dataclass, field
from math import inf

import numpy as np

from nav_token_merging.core.constants.navigation import (
    ActionGeometry,
    Embodiment,
    Sensing,
    SuccessRadius,
)
from nav_token_merging.core.errors import EpisodeFinished
from nav_token_merging.packages.world.episode import (
    Episode,
    FollowGoal,
    GoalTarget,
    VLNGoal,
    goal_targets,
)
from nav_token_merging.packages.world.geometry import (
    Pose,
    angle_between,
    bearing_deg,
    distance,
)
from nav_token_merging.packages.world.local_view import CellState, LocalView, VisibleTag
from nav_token_merging.packages.world.scene import HumanAvatar, Point, Scene
from nav_token_merging.packages.world.world_enum import Action, TaskKind

logger = logging.getLogger(__name__)

CONTACT_M = Embodiment.AGENT_RADIUS_M + Embodiment.HUMAN_RADIUS_M


@dataclass
class Trajectory:
    """What happened during one rollout; ``poses[0]`` is the start pose."""

    poses: list[Pose]
    actions: list[Action] = field(default_factory=list)
    collided: list[bool] = field(default_factory=list)
    human_collision: list[bool] = field(default_factory=list)
    following: list[bool] = field(default_factory=list)
    target_positions: list[Point] = field(default_factory=list)
    stopped: bool = False
    target_finished: bool = False

    @property
    def steps(self) -> int:
        return len(self.actions)

    @property
    def forward_moves(self) -> int:
        return sum(
            1
            for action, blocked in zip(self.actions, self.collided, strict=True)
            if action is Action.FORWARD and not blocked
        )

    @property
    def path_length(self) -> float:
        return self.forward_moves * ActionGeometry.FORWARD_STEP_M

    @property
    def final_pose(self) -> Pose:
        return self.poses[-1]

    def copy(self) -> "Trajectory":
        return Trajectory(
            poses=list(self.poses),
            actions=list(self.actions),
            collided=list(self.collided),
            human_collision=list(self.human_collision),
            following=list(self.following),
            target_positions=list(self.target_positions),
            stopped=self.stopped,
            target_finished=self.target_finished,
        )


@dataclass(frozen=True)
class StepResult:
    new_pose: Pose
    collided: bool
    frame: LocalView | None
    done: bool
    human_collision: bool = False


class EpisodeState:
    """Mutable rollout state for one episode; single writer."""

    def __init__(
        self,
        episode: Episode,
        view_radius: int = Sensing.VIEW_RADIUS_CELLS,
        field_cache: dict | None = None,
    ):
        self.episode = episode
        self.view_radius = view_radius
        self.pose = episode.start_pose
        self.step_count = 0
        self.done = False
        self.stopped = False
        self.targets: list[GoalTarget] = goal_targets(episode)
        self.next_landmark = 0
        self.human_progress: dict[int, float] = {h.human_id: 0.0 for h in episode.scene.humans}
        self.blocked_humans: set[int] = set()
        self.field_cache: dict = {} if field_cache is None else field_cache
        self.trajectory = Trajectory(poses=[self.pose])
        self._advance_landmarks()

    @property
    def scene(self) -> Scene:
        return self.episode.scene

    @property
    def task_kind(self) -> TaskKind:
        return self.episode.task_kind

    @property
    def landmark_count(self) -> int:
        goal = self.episode.goal
        return len(goal.landmarks) if isinstance(goal, VLNGoal) else 0

    def current_target(self) -> GoalTarget:
        """Next route leg: the next non-arrived landmark, else the final goal."""
        return self.targets[min(self.next_landmark, len(self.targets) - 1)]

    def human_position(self, human_id: int) -> Point:
        return self.scene.human_by_id(human_id).position_at(self.human_progress[human_id])

    def human_positions(self) -> dict[int, Point]:
        return {
            h.human_id: h.position_at(self.human_progress[h.human_id]) for h in self.scene.humans
        }

    @property
    def target_human(self) -> HumanAvatar | None:
        goal = self.episode.goal
        if isinstance(goal, FollowGoal):
            return self.scene.human_by_id(goal.target_human_id)
        return None

    def target_finished(self) -> bool:
        human = self.target_human
        return human is not None and self.human_progress[human.human_id] >= human.path_length

    def landing_blocked(self, point: Point) -> tuple[bool, bool]:
        """(obstacle, human) overlap of the agent disc placed at ``point``."""
        if self.scene.disc_hits_obstacle(point, Embodiment.AGENT_RADIUS_M):
            return True, False
        hit = any(distance(point, p) < CONTACT_M for p in self.human_positions().values())
        return False, hit

    def step(self, action: Action, render: bool = True) -> StepResult:
        """Apply one action.

        Raises:
            EpisodeFinished: the episode already ended
        """
        if self.done:
            raise EpisodeFinished(f"episode {self.episode.episode_id} already finished")

        collided = human_hit = False
        if action is Action.FORWARD:
            landing = self.pose.forward_point()
            obstacle, human_hit = self.landing_blocked(landing)
            collided = obstacle or human_hit
            if not collided:
                self.pose = self.pose.moved_to(landing)
        elif action in (Action.TURN_LEFT, Action.TURN_RIGHT):
            self.pose = self.pose.turned(action)

        self._move_humans()
        self._advance_landmarks()
        self.step_count += 1
        if action is Action.STOP:
            self.stopped = True
        self.done = self.stopped or self.step_count >= self.episode.max_steps
        self._record(action, collided, human_hit)

        frame = self.render_local_view() if render else None
        return StepResult(
            new_pose=self.pose,
            collided=collided,
            frame=frame,
            done=self.done,
            human_collision=human_hit,
        )

    def _move_humans(self) -> None:
        for human in self.scene.humans:
            progress = self.human_progress[human.human_id]
            if progress >= human.path_length:
                continue
            advanced = min(progress + human.speed, human.path_length)
            if distance(human.position_at(advanced), self.pose.point) < CONTACT_M:
                self.blocked_humans.add(human.human_id)
            else:
                self.human_progress[human.human_id] = advanced
                self.blocked_humans.discard(human.human_id)

    def _advance_landmarks(self) -> None:
        goal = self.episode.goal
        if not isinstance(goal, VLNGoal):
            return
        while self.next_landmark < len(goal.landmarks) and (
            distance(self.pose.point, goal.landmarks[self.next_landmark])
            <= SuccessRadius.LANDMARK
        ):
            self.next_landmark += 1

    def _record(self, action: Action, collided: bool, human_hit: bool) -> None:
        trajectory = self.trajectory
        trajectory.poses.append(self.pose)
        trajectory.actions.append(action)
        trajectory.collided.append(collided)
        trajectory.human_collision.append(human_hit)
        trajectory.stopped = self.stopped
        human = self.target_human
        if human is not None:
            position = self.human_position(human.human_id)
            trajectory.target_positions.append(position)
            trajectory.following.append(
                distance(self.pose.point, position) <= SuccessRadius.FOLLOW
            )
            trajectory.target_finished = self.target_finished()

    def render_local_view(self) -> LocalView:
        """Egocentric occupancy patch with tags of objects and humans in the field of view."""
        r = self.view_radius
        row, col = self.scene.cell_of(self.pose.point)
        padded = np.pad(self.scene.occupancy, r, constant_values=True)
        window = padded[row : row + 2 * r + 1, col : col + 2 * r + 1]
        patch = np.where(window, CellState.OBSTACLE, CellState.FREE).astype(np.int8)

        tags: list[VisibleTag] = []
        for human_id, position in self.human_positions().items():
            spot = self._patch_index(position, row, col)
            if spot is None:
                continue
            patch[spot] = CellState.HUMAN
            if self._in_view(position):
                label = self.scene.human_by_id(human_id).description
                tags.append(VisibleTag("human", label, *spot))
        for instance in self.scene.objects:
            spot = self._patch_index(instance.point, row, col)
            if spot is not None and self._in_view(instance.point):
                tags.append(VisibleTag("object", instance.name, *spot))
        return LocalView(occupancy=patch, heading=self.pose.heading, tags=tuple(tags))

    def _patch_index(self, point: Point, row: int, col: int) -> tuple[int, int] | None:
        r = self.view_radius
        cell = self.scene.cell_of(point)
        i, j = cell[0] - row + r, cell[1] - col + r
        if 0 <= i <= 2 * r and 0 <= j <= 2 * r:
            return (i, j)
        return None

    def _in_view(self, point: Point) -> bool:
        if distance(self.pose.point, point) == 0.0:
            return True
        bearing = bearing_deg(self.pose.point, point)
        return angle_between(bearing, self.pose.heading) <= Sensing.FIELD_OF_VIEW_DEG / 2

    def snapshot(self) -> "EpisodeState":
        """Independent copy for look-ahead; shares the episode and the field cache."""
        clone = EpisodeState.__new__(EpisodeState)
        clone.__dict__.update(self.__dict__)
        clone.human_progress = dict(self.human_progress)
        clone.blocked_humans = set(self.blocked_humans)
        clone.trajectory = self.trajectory.copy()
        return clone


def reset(episode: Episode, view_radius: int = Sensing.VIEW_RADIUS_CELLS) -> EpisodeState:
    return EpisodeState(episode, view_radius=view_radius)


def replay_actions(
    episode: Episode,
    actions: list[Action],
    view_radius: int = Sensing.VIEW_RADIUS_CELLS,
) -> tuple[EpisodeState, list[LocalView]]:
    """Re-execute ``actions`` from the start; frames include the initial view."""
    state = reset(episode, view_radius)
    frames = [state.render_local_view()]
    for action in actions:
        result = state.step(action)
        frames.append(result.frame)  # type: ignore[arg-type]
    return state, frames


def min_distance_along(trajectory: Trajectory, point: Point) -> float:
    return min((distance(p.point, point) for p in trajectory.poses), default=inf)
