"""
Privileged shortest-path expert.

Static goals are planned over the poses the agent can actually reach: a weighted
A* over (position, heading) whose forward moves use the simulator's own landing
test, guided by the grid distance field. Plans are cached per route leg in the
episode's field cache, so later calls from a pose on the plan are lookups.
Each call simulates its own four actions on a snapshot of the episode state, so
humans and landmark arrivals inside the batch are accounted for.
"""

import heapq
from math import inf, isfinite

import numpy as np

from nav_token_merging.core.constants.navigation import (
    ActionGeometry,
    Embodiment,
    EpisodeLimits,
    SuccessRadius,
)
from nav_token_merging.core.errors import EpisodeFinished
from nav_token_merging.packages.world.episode import GoalTarget, VLNGoal
from nav_token_merging.packages.world.geometry import (
    Pose,
    bearing_deg,
    distance,
    quantize_heading,
    turn_toward,
)
from nav_token_merging.packages.world.scene import Cell, Point, Scene
from nav_token_merging.packages.world.simulator import EpisodeState
from nav_token_merging.packages.world.world_enum import Action, TaskKind

from .planner import astar_cells, descend, distance_field

STOP_MARGIN_M = 0.15
LOOKAHEAD_CELLS = 8

# Pose search
PLAN_WEIGHT = 1.5
PLAN_BIN_M = 0.05
MAX_EXPANSIONS = 60_000

# Human following
FOLLOW_NEAR_M = 1.0
FOLLOW_STOP_M = SuccessRadius.FOLLOW - 0.25
RETREAT_M = 0.75
HUMAN_CLEARANCE_M = 0.53

HEADINGS = tuple(range(0, 360, ActionGeometry.TURN_DEG))

PoseKey = tuple[float, float, int]


def oracle_next_actions(state: EpisodeState) -> list[Action]:
    """Up to ``FORESIGHT`` expert actions, ending early at STOP or at the step cap.

    Raises:
        EpisodeFinished: the episode already ended
        Unreachable: the planner cannot reach the human being followed
    """
    if state.done:
        raise EpisodeFinished(f"episode {state.episode.episode_id} already finished")
    sim = state.snapshot()
    actions: list[Action] = []
    while len(actions) < EpisodeLimits.FORESIGHT:
        action = oracle_action(sim)
        actions.append(action)
        if action is Action.STOP:
            break
        sim.step(action, render=False)
        if sim.done:
            break
    return actions


def oracle_action(state: EpisodeState) -> Action:
    """The single next expert action for ``state``."""
    goal = state.episode.goal
    if isinstance(goal, VLNGoal) and goal.low_level_actions is not None:
        literal = goal.low_level_actions
        return literal[state.step_count] if state.step_count < len(literal) else Action.STOP
    if state.task_kind is TaskKind.FOLLOW:
        return _follow_action(state)

    target = state.current_target()
    here = state.pose.point
    final_leg = state.next_landmark >= state.landmark_count
    if final_leg and target.distance_from(here) <= target.radius - STOP_MARGIN_M:
        return Action.STOP
    planned = _planned_action(state, target, final_leg)
    if planned is not None:
        return planned
    return _descend_action(state, _field(state, target), target)


def _field(state: EpisodeState, target: GoalTarget) -> np.ndarray:
    cache = state.field_cache
    if target.key not in cache:
        cache[target.key] = distance_field(state.scene, target.cells(state.scene))
    return cache[target.key]


def _pose_key(pose: Pose) -> PoseKey:
    return (pose.x, pose.y, pose.heading)


def _pose_bin(pose: Pose) -> tuple[int, int, int]:
    return (round(pose.x / PLAN_BIN_M), round(pose.y / PLAN_BIN_M), pose.heading)


def _steps_to_go(scene: Scene, field: np.ndarray, point: Point) -> float:
    """Forward steps to the goal region through the best nearby traversable cell."""
    row, col = scene.cell_of(point)
    best = inf
    for dr in (-1, 0, 1):
        for dc in (-1, 0, 1):
            cell = (row + dr, col + dc)
            if scene.in_bounds(cell) and isfinite(field[cell]):
                via = field[cell] * Embodiment.CELL_SIZE_M
                best = min(best, float(via) + distance(point, scene.cell_center(cell)))
    return best / ActionGeometry.FORWARD_STEP_M


def _planned_action(state: EpisodeState, target: GoalTarget, final_leg: bool) -> Action | None:
    """Next action of the cached pose plan for this leg, planning from the pose if needed.

    ``None`` when no plan reaches the leg within the search budget.
    """
    plan: dict[PoseKey, Action] = state.field_cache.setdefault(("plan", target.key), {})
    key = _pose_key(state.pose)
    if key not in plan:
        reach = target.radius - (STOP_MARGIN_M if final_leg else 0.0)
        steps = search_poses(state.scene, _field(state, target), target, reach, state.pose, plan)
        for pose_key, action in steps or []:
            plan.setdefault(pose_key, action)
    return plan.get(key)


def search_poses(
    scene: Scene,
    field: np.ndarray,
    target: GoalTarget,
    reach: float,
    start: Pose,
    known: dict[PoseKey, Action] | None = None,
) -> list[tuple[PoseKey, Action]] | None:
    """(pose, action) pairs from ``start`` until within ``reach`` of the target.

    Every action costs one step. The search also ends at any pose of ``known``, whose
    stored actions continue to the target. Poses are merged into 5 cm bins per
    heading. ``None`` when the budget runs out or nothing reachable remains.
    """
    known = known or {}
    start_h = _steps_to_go(scene, field, start.point)
    if not isfinite(start_h):
        return None
    parent: dict[PoseKey, tuple[PoseKey, Action]] = {}
    seen = {_pose_bin(start)}
    heap: list[tuple[float, int, int, Pose]] = [(PLAN_WEIGHT * start_h, 0, 0, start)]
    pushed = 0
    for _ in range(MAX_EXPANSIONS):
        if not heap:
            return None
        _, cost, _, pose = heapq.heappop(heap)
        key = _pose_key(pose)
        if pose is not start and (key in known or target.distance_from(pose.point) <= reach):
            steps: list[tuple[PoseKey, Action]] = []
            while key in parent:
                key, action = parent[key]
                steps.append((key, action))
            steps.reverse()
            return steps
        for action in (Action.FORWARD, Action.TURN_LEFT, Action.TURN_RIGHT):
            if action is Action.FORWARD:
                landing = pose.forward_point()
                if scene.disc_hits_obstacle(landing, Embodiment.AGENT_RADIUS_M):
                    continue
                nxt = pose.moved_to(landing)
            else:
                nxt = pose.turned(action)
            cell_bin = _pose_bin(nxt)
            if cell_bin in seen:
                continue
            h = _steps_to_go(scene, field, nxt.point)
            if not isfinite(h):
                continue
            seen.add(cell_bin)
            parent[_pose_key(nxt)] = (key, action)
            pushed += 1
            heapq.heappush(heap, (cost + 1 + PLAN_WEIGHT * h, cost + 1, pushed, nxt))
    return None


def _field_at(scene: Scene, field: np.ndarray, point: Point) -> float:
    cell = scene.cell_of(point)
    if not scene.is_traversable_cell(cell):
        return float("inf")
    return float(field[cell])


def _landing(pose: Pose, heading: int) -> Point:
    return Pose(x=pose.x, y=pose.y, heading=heading).forward_point()


def _clear_of_humans(state: EpisodeState, point: Point, clearance: float) -> bool:
    return all(distance(point, p) >= clearance for p in state.human_positions().values())


def _farthest_visible(scene: Scene, here: Point, cells: list[Cell]) -> Point | None:
    for cell in reversed(cells):
        center = scene.cell_center(cell)
        if scene.line_traversable(here, center):
            return center
    return None


def _steer(pose: Pose, desired: int | None) -> Action:
    if desired is None:
        return Action.TURN_LEFT
    return turn_toward(pose.heading, desired) or Action.FORWARD


def _descend_action(state: EpisodeState, field: np.ndarray, target: GoalTarget) -> Action:
    scene, pose = state.scene, state.pose
    here = pose.point

    def feasible(heading: int) -> bool:
        landing = _landing(pose, heading)
        return isfinite(_field_at(scene, field, landing)) and not any(
            state.landing_blocked(landing)
        )

    desired: int | None = None
    if isfinite(_field_at(scene, field, here)):
        chain = descend(scene, field, scene.cell_of(here), LOOKAHEAD_CELLS)
        waypoint = _farthest_visible(scene, here, chain)
        if waypoint is None:
            waypoint = scene.cell_center(chain[0]) if chain else min(
                target.points, key=lambda p: distance(here, p)
            )
        desired = quantize_heading(bearing_deg(here, waypoint))
        if not feasible(desired):
            desired = None

    if desired is None:
        # strictly downhill landings only
        current = _field_at(scene, field, here)
        scored = [
            (_field_at(scene, field, _landing(pose, h)), h) for h in HEADINGS if feasible(h)
        ]
        downhill = [s for s in scored if s[0] < current] if isfinite(current) else scored
        desired = min(downhill)[1] if downhill else None
    return _steer(pose, desired)


def _follow_action(state: EpisodeState) -> Action:
    human = state.target_human
    assert human is not None
    scene, pose = state.scene, state.pose
    here = pose.point
    there = state.human_position(human.human_id)
    gap = distance(here, there)
    facing = quantize_heading(bearing_deg(here, there))
    aligned = pose.heading == facing

    if state.target_finished() and gap <= FOLLOW_STOP_M:
        return Action.STOP if aligned else _steer(pose, facing)

    def feasible(heading: int) -> bool:
        landing = _landing(pose, heading)
        return (
            scene.is_traversable_point(landing)
            and not any(state.landing_blocked(landing))
            and _clear_of_humans(state, landing, HUMAN_CLEARANCE_M)
        )

    if gap <= FOLLOW_NEAR_M:
        if gap < RETREAT_M and human.human_id in state.blocked_humans:
            # the target is walking into the agent: step out of its way
            scored = [(-distance(_landing(pose, h), there), h) for h in HEADINGS if feasible(h)]
            if scored:
                return _steer(pose, min(scored)[1])
        if not aligned:
            return _steer(pose, facing)
        return Action.TURN_LEFT  # idle in place; the next call turns back

    waypoint = there if scene.line_traversable(here, there) else _route_waypoint(state, there)
    desired: int | None = quantize_heading(bearing_deg(here, waypoint))
    if not feasible(desired):
        scored = [(distance(_landing(pose, h), waypoint), h) for h in HEADINGS if feasible(h)]
        desired = min(scored)[1] if scored else None
    return _steer(pose, desired)


def _route_waypoint(state: EpisodeState, there: Point) -> Point:
    scene, here = state.scene, state.pose.point
    human = state.target_human
    assert human is not None
    candidates = sorted([there, *human.path], key=lambda p: distance(there, p))
    goal = next((scene.cell_of(p) for p in candidates if scene.is_traversable_point(p)), None)
    start = scene.cell_of(here)
    if goal is None or not scene.is_traversable_cell(start):
        return there
    path = astar_cells(scene, start, goal)[:LOOKAHEAD_CELLS]
    if not path:
        return there
    return _farthest_visible(scene, here, path) or scene.cell_center(path[0])
