"""
Deterministic shortest paths on the traversable grid.

Moves are 8-connected with cost 1 (straight) and sqrt(2) (diagonal) cells. Among
equal-cost paths the one with fewer heading changes wins, then the one whose
cells have the smaller row-major index.
"""

import heapq
from dataclasses import dataclass
from math import inf, sqrt

import numpy as np

from nav_token_merging.core.constants.navigation import Embodiment
from nav_token_merging.core.errors import Unreachable
from nav_token_merging.packages.world.geometry import Pose
from nav_token_merging.packages.world.scene import Cell, Point, Scene

SQRT2 = sqrt(2.0)

# (d_row, d_col, straight_moves, diagonal_moves)
MOVES: tuple[tuple[int, int, int, int], ...] = (
    (-1, 0, 1, 0),
    (-1, 1, 0, 1),
    (0, 1, 1, 0),
    (1, 1, 0, 1),
    (1, 0, 1, 0),
    (1, -1, 0, 1),
    (0, -1, 1, 0),
    (-1, -1, 0, 1),
)


@dataclass(frozen=True)
class PlannedPath:
    """Cells after the start up to and including the goal."""

    cells: tuple[Cell, ...]
    cost_cells: float
    turns: int

    @property
    def cost_m(self) -> float:
        return self.cost_cells * Embodiment.CELL_SIZE_M


def _as_cell(scene: Scene, where: Pose | Point | Cell) -> Cell:
    if isinstance(where, Pose):
        return scene.cell_of(where.point)
    if isinstance(where[0], int) and isinstance(where[1], int):
        return (where[0], where[1])  # type: ignore[return-value]
    return scene.cell_of((float(where[0]), float(where[1])))


def _neighbors(scene: Scene, cell: Cell):
    mask = scene.traversable
    rows, cols = mask.shape
    for direction, (dr, dc, straight, diagonal) in enumerate(MOVES):
        r, c = cell[0] + dr, cell[1] + dc
        if 0 <= r < rows and 0 <= c < cols and mask[r, c]:
            yield direction, (r, c), straight, diagonal


def plan_shortest_path(scene: Scene, start: Pose | Point | Cell, goal: Point | Cell) -> PlannedPath:
    """Lexicographically smallest (cost, heading changes, cell index) path.

    Points are mapped to the cell that contains them.

    Raises:
        Unreachable: an endpoint is not traversable or no path connects them
    """
    start_cell = _as_cell(scene, start)
    goal_cell = _as_cell(scene, goal)
    for label, cell in (("start", start_cell), ("goal", goal_cell)):
        if not scene.is_traversable_cell(cell):
            raise Unreachable(f"{label} cell {cell} is not traversable")
    if start_cell == goal_cell:
        return PlannedPath(cells=(), cost_cells=0.0, turns=0)

    # state = (cell, incoming direction); -1 marks the start
    start_state = (start_cell, -1)
    best: dict[tuple[Cell, int], tuple[int, int, int]] = {start_state: (0, 0, 0)}
    parent: dict[tuple[Cell, int], tuple[Cell, int]] = {}
    heap: list[tuple[float, int, int, int, Cell, int]] = [
        (0.0, 0, scene.cell_index(start_cell), -1, start_cell, -1)
    ]
    settled: set[tuple[Cell, int]] = set()

    while heap:
        cost, turns, _, _, cell, direction = heapq.heappop(heap)
        state = (cell, direction)
        if state in settled:
            continue
        settled.add(state)
        if cell == goal_cell:
            path = [cell]
            while state in parent:
                state = parent[state]
                path.append(state[0])
            path.reverse()
            return PlannedPath(cells=tuple(path[1:]), cost_cells=cost, turns=turns)

        straight0, diagonal0, _ = best[state]
        for new_direction, neighbor, straight, diagonal in _neighbors(scene, cell):
            new_state = (neighbor, new_direction)
            if new_state in settled:
                continue
            s, d = straight0 + straight, diagonal0 + diagonal
            new_cost = s + d * SQRT2
            new_turns = turns + int(direction not in (-1, new_direction))
            known = best.get(new_state)
            if known is not None:
                known_cost = known[0] + known[1] * SQRT2
                if (known_cost, known[2]) <= (new_cost, new_turns):
                    continue
            best[new_state] = (s, d, new_turns)
            parent[new_state] = state
            heapq.heappush(
                heap,
                (
                    new_cost,
                    new_turns,
                    scene.cell_index(neighbor),
                    new_direction,
                    neighbor,
                    new_direction,
                ),
            )

    raise Unreachable(f"no path from {start_cell} to {goal_cell}")


def distance_field(scene: Scene, goal_cells: list[Cell]) -> np.ndarray:
    """Grid geodesic (in cells) from every traversable cell to the nearest goal cell.

    Non-traversable or disconnected cells hold ``inf``.
    """
    mask = scene.traversable
    field = np.full(mask.shape, inf)
    heap: list[tuple[float, int, Cell]] = []
    for cell in goal_cells:
        if scene.is_traversable_cell(cell) and field[cell] > 0.0:
            field[cell] = 0.0
            heapq.heappush(heap, (0.0, scene.cell_index(cell), cell))

    while heap:
        cost, _, cell = heapq.heappop(heap)
        if cost > field[cell]:
            continue
        for _, neighbor, straight, _ in _neighbors(scene, cell):
            new_cost = cost + (1.0 if straight else SQRT2)
            if new_cost < field[neighbor]:
                field[neighbor] = new_cost
                heapq.heappush(heap, (new_cost, scene.cell_index(neighbor), neighbor))
    field.setflags(write=False)
    return field


def descend(scene: Scene, field: np.ndarray, cell: Cell, max_cells: int) -> list[Cell]:
    """Follow the distance field downhill from ``cell``; ties go to the smaller cell index."""
    chain: list[Cell] = []
    current = cell
    for _ in range(max_cells):
        if not scene.in_bounds(current) or field[current] == 0.0:
            break
        best: tuple[float, int, Cell] | None = None
        for _, neighbor, straight, _ in _neighbors(scene, current):
            total = field[neighbor] + (1.0 if straight else SQRT2)
            key = (total, scene.cell_index(neighbor), neighbor)
            if field[neighbor] < field[current] and (best is None or key < best):
                best = key
        if best is None:
            break
        current = best[2]
        chain.append(current)
    return chain


def astar_cells(scene: Scene, start: Cell, goal: Cell) -> list[Cell]:
    """Shortest path by A* with the octile heuristic; excludes ``start``.

    Raises:
        Unreachable: no path
    """
    if not (scene.is_traversable_cell(start) and scene.is_traversable_cell(goal)):
        raise Unreachable(f"no traversable path from {start} to {goal}")

    def octile(cell: Cell) -> float:
        dr, dc = abs(cell[0] - goal[0]), abs(cell[1] - goal[1])
        return (SQRT2 - 1.0) * min(dr, dc) + max(dr, dc)

    g: dict[Cell, float] = {start: 0.0}
    parent: dict[Cell, Cell] = {}
    heap = [(octile(start), 0.0, scene.cell_index(start), start)]
    closed: set[Cell] = set()
    while heap:
        _, cost, _, cell = heapq.heappop(heap)
        if cell in closed:
            continue
        closed.add(cell)
        if cell == goal:
            path = [cell]
            while path[-1] in parent:
                path.append(parent[path[-1]])
            path.reverse()
            return path[1:]
        for _, neighbor, straight, _ in _neighbors(scene, cell):
            new_cost = cost + (1.0 if straight else SQRT2)
            if new_cost < g.get(neighbor, inf):
                g[neighbor] = new_cost
                parent[neighbor] = cell
                priority = new_cost + octile(neighbor)
                heapq.heappush(heap, (priority, new_cost, scene.cell_index(neighbor), neighbor))
    raise Unreachable(f"no path from {start} to {goal}")


def geodesic_distance(scene: Scene, start: Point, goal_cells: list[Cell]) -> float:
    """Grid geodesic in meters from the cell containing ``start`` to the nearest goal cell."""
    field = distance_field(scene, goal_cells)
    value = field[scene.cell_of(start)] if scene.in_bounds(scene.cell_of(start)) else inf
    if value == inf:
        raise Unreachable(f"no path from {start} to the goal region")
    return float(value) * Embodiment.CELL_SIZE_M


def largest_component(scene: Scene) -> np.ndarray:
    """Mask of the largest 8-connected traversable component."""
    mask = scene.traversable
    labels = np.full(mask.shape, -1, dtype=np.int32)
    sizes: list[int] = []
    for r, c in zip(*np.nonzero(mask), strict=True):
        if labels[r, c] >= 0:
            continue
        label = len(sizes)
        labels[r, c] = label
        stack: list[Cell] = [(int(r), int(c))]
        size = 0
        while stack:
            cell = stack.pop()
            size += 1
            for _, neighbor, _, _ in _neighbors(scene, cell):
                if labels[neighbor] < 0:
                    labels[neighbor] = label
                    stack.append(neighbor)
        sizes.append(size)
    if not sizes:
        return np.zeros(mask.shape, dtype=bool)
    return labels == int(np.argmax(sizes))
