"""
Episode records and seeded per-task generation.

Every episode is generated from ``numpy.random.default_rng([seed, task_index])`` so
the same (task, config, seed) always yields the same layout, start and goal.
Objects and humans sit on traversable cells of the largest connected component,
which makes every goal reachable from every start by construction.
"""

import logging
from dataclasses import dataclass
from typing import Annotated, Literal, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from nav_token_merging.core.constants.navigation import (
    ActionGeometry,
    Embodiment,
    EpisodeLimits,
    SuccessRadius,
)
from nav_token_merging.core.errors import GenerationFailed
from nav_token_merging.packages.dataset.templates import (
    COLORS,
    EQA_COLOR_TEMPLATE,
    EQA_ROOM_TEMPLATE,
    FOLLOW_TEMPLATE,
    GENDERS,
    OBJECT_CATEGORIES,
    OBJECT_NAV_TEMPLATE,
    VLN_TEMPLATE,
    describe_human,
    render_instruction,
)
from nav_token_merging.packages.nav_agents.planner import (
    distance_field,
    geodesic_distance,
    largest_component,
    plan_shortest_path,
)
from nav_token_merging.packages.prompt.token_sequence import Instruction
from nav_token_merging.packages.world.geometry import Pose, bearing_deg, distance, quantize_heading
from nav_token_merging.packages.world.scene import Cell, HumanAvatar, ObjectInstance, Point, Scene
from nav_token_merging.packages.world.world_enum import Action, TaskKind

logger = logging.getLogger(__name__)

CELL = Embodiment.CELL_SIZE_M

# Goal regions keep cell centres this far inside the success radius, so
# reaching any region cell satisfies the radius from anywhere in that cell.
REGION_MARGIN_M = 0.35

TASK_ORDER = (TaskKind.VLN, TaskKind.OBJECT_NAV, TaskKind.EQA, TaskKind.FOLLOW)


class GenerationConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    scene_cells: int = Field(default=40, ge=20, le=60)
    obstacle_density: float = Field(default=0.12, ge=0.0, le=0.3)
    object_count: int = Field(default=8, ge=3, le=16)
    human_count_min: int = Field(default=2, ge=2, le=6)
    human_count_max: int = Field(default=6, ge=2, le=6)
    human_speed: float = Field(default=0.125, gt=0.0, le=ActionGeometry.FORWARD_STEP_M)
    min_start_m: float = Field(default=2.0, ge=0.0)
    max_retries: int = Field(default=50, ge=1)

    @model_validator(mode="after")
    def _human_range(self) -> "GenerationConfig":
        if self.human_count_min > self.human_count_max:
            raise ValueError("human_count_min must not exceed human_count_max")
        return self


class VLNGoal(BaseModel):
    """Ordered landmarks, then the destination. Low-level episodes carry literal actions."""

    kind: Literal["vln"] = "vln"
    landmarks: list[Point] = Field(default_factory=list)
    landmark_names: list[str] = Field(default_factory=list)
    destination: Point
    destination_name: str = ""
    low_level_actions: list[Action] | None = None


class ObjectNavGoal(BaseModel):
    kind: Literal["objectnav"] = "objectnav"
    category: str
    instance_ids: list[int]


class EQAGoal(BaseModel):
    kind: Literal["eqa"] = "eqa"
    question: str
    answer: str
    target_object_id: int


class FollowGoal(BaseModel):
    kind: Literal["follow"] = "follow"
    target_human_id: int


Goal = Annotated[Union[VLNGoal, ObjectNavGoal, EQAGoal, FollowGoal], Field(discriminator="kind")]


class Episode(BaseModel):
    model_config = ConfigDict(frozen=True)

    episode_id: str
    task_kind: TaskKind
    scene: Scene
    start_pose: Pose
    instruction: Instruction
    goal: Goal
    max_steps: int = Field(default=EpisodeLimits.MAX_STEPS, ge=1)
    seed: int


@dataclass(frozen=True)
class GoalTarget:
    """One leg of a route: reach within ``radius`` of any of ``points``."""

    key: str
    points: tuple[Point, ...]
    radius: float

    def distance_from(self, point: Point) -> float:
        return min(distance(point, p) for p in self.points)

    def cells(self, scene: Scene) -> list[Cell]:
        cells: list[Cell] = []
        for p in self.points:
            cells.extend(region_cells(scene, p, self.radius))
        return sorted(set(cells))


def region_cells(scene: Scene, point: Point, radius: float) -> list[Cell]:
    """Traversable cells whose centre lies within ``radius - REGION_MARGIN_M`` of ``point``."""
    reach = max(radius - REGION_MARGIN_M, 0.0)
    rows, cols = np.nonzero(scene.traversable)
    xs, ys = (cols + 0.5) * CELL, (rows + 0.5) * CELL
    inside = np.hypot(xs - point[0], ys - point[1]) <= reach
    cells = [(int(r), int(c)) for r, c in zip(rows[inside], cols[inside], strict=True)]
    if not cells and scene.is_traversable_point(point):
        cells = [scene.cell_of(point)]
    return cells


def goal_targets(episode: Episode) -> list[GoalTarget]:
    """Route legs a navigating agent has to reach, in order."""
    goal = episode.goal
    if isinstance(goal, VLNGoal):
        legs = [
            GoalTarget(f"landmark-{i}", (p,), SuccessRadius.LANDMARK)
            for i, p in enumerate(goal.landmarks)
        ]
        legs.append(GoalTarget("destination", (goal.destination,), SuccessRadius.LANDMARK))
        return legs
    if isinstance(goal, ObjectNavGoal):
        points = tuple(episode.scene.object_by_id(i).point for i in goal.instance_ids)
        return [GoalTarget(f"category-{goal.category}", points, SuccessRadius.OBJECT_NAV)]
    if isinstance(goal, EQAGoal):
        target = episode.scene.object_by_id(goal.target_object_id)
        return [GoalTarget(f"object-{target.object_id}", (target.point,), SuccessRadius.EQA)]
    human = episode.scene.human_by_id(goal.target_human_id)
    return [GoalTarget(f"human-{human.human_id}", (human.path[-1],), SuccessRadius.FOLLOW)]


def reference_path_length(episode: Episode) -> float:
    """Grid geodesic of the route, summed over legs, in meters.

    Literal low-level episodes use the length of their forward moves.

    Raises:
        Unreachable: a leg cannot be completed
    """
    goal = episode.goal
    if isinstance(goal, VLNGoal) and goal.low_level_actions is not None:
        return goal.low_level_actions.count(Action.FORWARD) * ActionGeometry.FORWARD_STEP_M

    scene = episode.scene
    here = episode.start_pose.point
    total = 0.0
    for target in goal_targets(episode):
        total += geodesic_distance(scene, here, target.cells(scene))
        here = min(target.points, key=lambda p: distance(here, p))
    return total


# ---------------------------------------------------------------------------
# Generation
# ---------------------------------------------------------------------------


def generate_episode(task_kind: TaskKind, cfg: GenerationConfig, seed: int) -> Episode:
    """Generate a solvable episode, deterministic in (task_kind, cfg, seed).

    Raises:
        GenerationFailed: no layout passed the checks within ``cfg.max_retries``
    """
    rng = np.random.default_rng([seed, TASK_ORDER.index(task_kind)])
    builders = {
        TaskKind.VLN: _build_vln,
        TaskKind.OBJECT_NAV: _build_object_nav,
        TaskKind.EQA: _build_eqa,
        TaskKind.FOLLOW: _build_follow,
    }
    for attempt in range(cfg.max_retries):
        scene, component = _generate_layout(rng, cfg)
        if scene is None:
            logger.debug("seed %d attempt %d: connected area too small", seed, attempt)
            continue
        episode = builders[task_kind](rng, cfg, seed, scene, component)
        if episode is not None:
            return episode
        logger.debug("seed %d attempt %d: no valid %s start", seed, attempt, task_kind.value)
    raise GenerationFailed(
        f"no solvable {task_kind.value} episode for seed {seed} after {cfg.max_retries} attempts"
    )


def _generate_layout(rng: np.random.Generator, cfg: GenerationConfig):
    n = cfg.scene_cells
    grid = np.zeros((n, n), dtype=bool)
    grid[0, :] = grid[-1, :] = grid[:, 0] = grid[:, -1] = True
    target = cfg.obstacle_density * (n - 2) ** 2
    for _ in range(20 * n):
        if grid[1:-1, 1:-1].sum() >= target:
            break
        h, w = (int(v) for v in rng.integers(1, 5, size=2))
        r = int(rng.integers(1, n - h))
        c = int(rng.integers(1, n - w))
        grid[r : r + h, c : c + w] = True

    scene = Scene(occupancy=grid)
    component = largest_component(scene)
    if component.sum() < 0.25 * (n - 2) ** 2:
        return None, component

    cells = _cells(component)
    picks = rng.choice(len(cells), size=cfg.object_count, replace=False)
    objects = []
    for object_id, index in enumerate(sorted(int(i) for i in picks)):
        point = scene.cell_center(cells[index])
        objects.append(
            ObjectInstance(
                object_id=object_id,
                category=OBJECT_CATEGORIES[int(rng.integers(len(OBJECT_CATEGORIES)))],
                color=COLORS[int(rng.integers(len(COLORS)))],
                x=point[0],
                y=point[1],
                room=scene.room_at(point),
            )
        )
    return scene.model_copy(update={"objects": objects}), component


def _cells(mask: np.ndarray) -> list[Cell]:
    return [(int(r), int(c)) for r, c in np.argwhere(mask)]


def _centers(cells: list[Cell]) -> np.ndarray:
    array = np.asarray(cells, dtype=np.float64).reshape(-1, 2)
    return np.stack([(array[:, 1] + 0.5) * CELL, (array[:, 0] + 0.5) * CELL], axis=1)


def _min_distance(centers: np.ndarray, points: list[Point]) -> np.ndarray:
    """Distance from each centre to the nearest of ``points``."""
    if not points:
        return np.full(len(centers), np.inf)
    pts = np.asarray(points, dtype=np.float64)
    diff = centers[:, None, :] - pts[None, :, :]
    return np.hypot(diff[..., 0], diff[..., 1]).min(axis=1)


def _pick_start(
    rng: np.random.Generator,
    scene: Scene,
    component: np.ndarray,
    keep: np.ndarray,
) -> Pose | None:
    cells = _cells(component)
    candidates = [cell for cell, ok in zip(cells, keep, strict=True) if ok]
    if not candidates:
        return None
    x, y = scene.cell_center(candidates[int(rng.integers(len(candidates)))])
    heading = int(rng.integers(ActionGeometry.HEADING_COUNT)) * ActionGeometry.TURN_DEG
    return Pose(x=x, y=y, heading=heading)


def _start_far_from(
    rng: np.random.Generator,
    scene: Scene,
    component: np.ndarray,
    target: GoalTarget,
    min_euclid: float,
    min_geodesic: float,
) -> Pose | None:
    cells = _cells(component)
    centers = _centers(cells)
    field = distance_field(scene, target.cells(scene))
    geodesic = np.array([field[cell] for cell in cells]) * CELL
    keep = (_min_distance(centers, list(target.points)) > min_euclid) & (geodesic >= min_geodesic)
    keep &= np.isfinite(geodesic)
    return _pick_start(rng, scene, component, keep)


def _episode(task_kind, seed, scene, start, instruction, goal) -> Episode:
    return Episode(
        episode_id=f"{task_kind.value}-{seed}",
        task_kind=task_kind,
        scene=scene,
        start_pose=start,
        instruction=instruction,
        goal=goal,
        seed=seed,
    )


def _build_vln(rng, cfg, seed, scene: Scene, component) -> Episode | None:
    order = [int(i) for i in rng.permutation(len(scene.objects))]
    n_landmarks = int(rng.integers(1, 3))
    destination = scene.objects[order[0]]
    landmarks = [scene.objects[i] for i in order[1 : 1 + n_landmarks]]

    cells = _cells(component)
    centers = _centers(cells)
    far_from_destination = _min_distance(centers, [destination.point]) > SuccessRadius.VLN + 0.5
    landmark_points = [o.point for o in landmarks]
    far_from_landmarks = _min_distance(centers, landmark_points) > max(1.5, cfg.min_start_m)
    keep = far_from_destination & far_from_landmarks
    start = _pick_start(rng, scene, component, keep)
    if start is None:
        return None

    instruction = render_instruction(
        VLN_TEMPLATE,
        {"route": " and the ".join(o.name for o in landmarks), "destination": destination.name},
        seed=seed,
    )
    goal = VLNGoal(
        landmarks=[o.point for o in landmarks],
        landmark_names=[o.name for o in landmarks],
        destination=destination.point,
        destination_name=destination.name,
    )
    return _episode(TaskKind.VLN, seed, scene, start, instruction, goal)


def _build_object_nav(rng, cfg, seed, scene: Scene, component) -> Episode | None:
    category = scene.objects[int(rng.integers(len(scene.objects)))].category
    instances = scene.objects_of(category)
    target = GoalTarget(
        f"category-{category}", tuple(o.point for o in instances), SuccessRadius.OBJECT_NAV
    )
    start = _start_far_from(
        rng, scene, component, target, SuccessRadius.OBJECT_NAV + 0.5, cfg.min_start_m
    )
    if start is None:
        return None
    instruction = render_instruction(OBJECT_NAV_TEMPLATE, {"object": category}, seed=seed)
    goal = ObjectNavGoal(category=category, instance_ids=[o.object_id for o in instances])
    return _episode(TaskKind.OBJECT_NAV, seed, scene, start, instruction, goal)


def _build_eqa(rng, cfg, seed, scene: Scene, component) -> Episode | None:
    unique = [o for o in scene.objects if len(scene.objects_of(o.category)) == 1]
    if not unique:
        return None
    target_object = unique[int(rng.integers(len(unique)))]
    target = GoalTarget(
        f"object-{target_object.object_id}", (target_object.point,), SuccessRadius.EQA
    )
    start = _start_far_from(rng, scene, component, target, SuccessRadius.EQA + 0.5, cfg.min_start_m)
    if start is None:
        return None

    if int(rng.integers(2)) == 0:
        template, answer = EQA_COLOR_TEMPLATE, target_object.color
    else:
        template, answer = EQA_ROOM_TEMPLATE, target_object.room
    instruction = render_instruction(template, {"object": target_object.category}, seed=seed)
    goal = EQAGoal(
        question=instruction.text, answer=answer, target_object_id=target_object.object_id
    )
    return _episode(TaskKind.EQA, seed, scene, start, instruction, goal)


def _build_follow(rng, cfg: GenerationConfig, seed, scene: Scene, component) -> Episode | None:
    cells = _cells(component)
    centers = _centers(cells)

    # target walks one shortest path of 3 to 6 m
    source = cells[int(rng.integers(len(cells)))]
    field = distance_field(scene, [source])
    lengths = np.array([field[cell] for cell in cells]) * CELL
    ends = [cell for cell, d in zip(cells, lengths, strict=True) if 3.0 <= d <= 6.0]
    if not ends:
        return None
    end = ends[int(rng.integers(len(ends)))]
    route = [scene.cell_center(source)]
    route.extend(scene.cell_center(c) for c in plan_shortest_path(scene, source, end).cells)
    waypoints = [route[len(route) // 3], route[2 * len(route) // 3], route[-1]]
    waypoints = [p for i, p in enumerate(waypoints) if i == 0 or p != waypoints[i - 1]]

    # robot sits behind the target, clear of its whole route, with the target in view
    near = np.hypot(*(centers - np.asarray(route[0])).T)
    keep = (near >= 1.0) & (near <= 1.75) & (_min_distance(centers, route) >= 1.0)
    keep &= np.array([scene.line_traversable(tuple(c), route[0]) for c in centers])
    robot_cells = [cell for cell, ok in zip(cells, keep, strict=True) if ok]
    if not robot_cells:
        return None
    robot_point = scene.cell_center(robot_cells[int(rng.integers(len(robot_cells)))])
    start = Pose(
        x=robot_point[0],
        y=robot_point[1],
        heading=quantize_heading(bearing_deg(robot_point, route[0])),
    )

    n_humans = int(rng.integers(cfg.human_count_min, cfg.human_count_max + 1))
    looks = [(g, s, p) for g in GENDERS for s in COLORS for p in COLORS]
    descriptors = [
        describe_human(*looks[int(i)]) for i in rng.choice(len(looks), n_humans, replace=False)
    ]
    ids = [int(i) for i in rng.permutation(n_humans)]

    humans = [
        HumanAvatar(
            human_id=ids[0],
            description=descriptors[0],
            waypoints=waypoints,
            path=route,
            speed=cfg.human_speed,
        )
    ]
    distractor_starts: list[Point] = []
    for index in range(1, n_humans):
        path = _distractor_path(rng, scene, cells, centers, route, robot_point, distractor_starts)
        if path is None:
            return None
        distractor_starts.append(path[0])
        humans.append(
            HumanAvatar(
                human_id=ids[index],
                description=descriptors[index],
                waypoints=path[-1:],
                path=path,
                speed=cfg.human_speed,
            )
        )

    scene = scene.model_copy(update={"humans": sorted(humans, key=lambda h: h.human_id)})
    instruction = render_instruction(FOLLOW_TEMPLATE, {"descriptor": descriptors[0]}, seed=seed)
    return _episode(
        TaskKind.FOLLOW, seed, scene, start, instruction, FollowGoal(target_human_id=ids[0])
    )


def _distractor_path(
    rng: np.random.Generator,
    scene: Scene,
    cells: list[Cell],
    centers: np.ndarray,
    route: list[Point],
    robot: Point,
    others: list[Point],
) -> list[Point] | None:
    """A short local wander kept away from the target route and the robot."""
    clear = (_min_distance(centers, route) >= 2.0) & (_min_distance(centers, [robot]) >= 1.5)
    clear &= _min_distance(centers, others) >= 1.0
    options = [cell for cell, ok in zip(cells, clear, strict=True) if ok]
    if not options:
        return None
    start = options[int(rng.integers(len(options)))]
    start_point = scene.cell_center(start)

    nearby = [
        cell
        for cell, ok in zip(cells, clear, strict=True)
        if ok and cell != start and distance(scene.cell_center(cell), start_point) <= 1.5
    ]
    for _ in range(min(5, len(nearby))):
        goal = nearby[int(rng.integers(len(nearby)))]
        path = [start_point]
        path.extend(scene.cell_center(c) for c in plan_shortest_path(scene, start, goal).cells)
        if _min_distance(np.asarray(path), route).min() >= 2.0 and all(
            distance(p, robot) >= 1.0 for p in path
        ):
            return path
    return [start_point]
