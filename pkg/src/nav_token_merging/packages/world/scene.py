"""
Occupancy-grid scenes.

Cell ``(row, col)`` covers ``x in [col * s, (col + 1) * s)`` and
``y in [row * s, (row + 1) * s)`` with ``s = 0.25`` m. A cell is traversable when it
and its eight neighbours are free: any point inside a traversable cell keeps the
agent disc clear of every obstacle.
"""

from functools import cached_property
from math import floor, hypot
from typing import Any

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_serializer, field_validator

from nav_token_merging.core.constants.navigation import Embodiment

CELL = Embodiment.CELL_SIZE_M

Cell = tuple[int, int]
Point = tuple[float, float]

ROOM_NAMES = ("bedroom", "kitchen", "living room", "bathroom")


class ObjectInstance(BaseModel):
    model_config = ConfigDict(frozen=True)

    object_id: int
    category: str
    color: str
    x: float
    y: float
    room: str

    @property
    def point(self) -> Point:
        return (self.x, self.y)

    @property
    def name(self) -> str:
        return f"{self.color} {self.category}"


class HumanAvatar(BaseModel):
    """A human walking a fixed polyline at constant speed."""

    model_config = ConfigDict(frozen=True)

    human_id: int
    description: str
    waypoints: list[Point]
    path: list[Point] = Field(min_length=1)
    speed: float = Field(default=0.125, gt=0.0)

    @cached_property
    def cumulative_lengths(self) -> np.ndarray:
        points = np.asarray(self.path, dtype=np.float64)
        seg = np.hypot(*np.diff(points, axis=0).T) if len(points) > 1 else np.zeros(0)
        return np.concatenate([[0.0], np.cumsum(seg)])

    @property
    def path_length(self) -> float:
        return float(self.cumulative_lengths[-1])

    def position_at(self, progress: float) -> Point:
        """Point at arc length ``progress`` along the path."""
        cumulative = self.cumulative_lengths
        progress = min(max(progress, 0.0), float(cumulative[-1]))
        i = int(np.searchsorted(cumulative, progress, side="right")) - 1
        if i >= len(self.path) - 1:
            return self.path[-1]
        span = cumulative[i + 1] - cumulative[i]
        frac = 0.0 if span == 0 else (progress - cumulative[i]) / span
        (x0, y0), (x1, y1) = self.path[i], self.path[i + 1]
        return (x0 + frac * (x1 - x0), y0 + frac * (y1 - y0))


def encode_rows(grid: np.ndarray) -> list[list[list[int]]]:
    """Run-length rows: each row is a list of [value, run] pairs."""
    rows = []
    for row in grid.astype(np.int8):
        runs: list[list[int]] = []
        for value in row.tolist():
            if runs and runs[-1][0] == value:
                runs[-1][1] += 1
            else:
                runs.append([value, 1])
        rows.append(runs)
    return rows


def decode_rows(rows: list[list[list[int]]]) -> np.ndarray:
    decoded = [[value for value, run in runs for _ in range(run)] for runs in rows]
    widths = {len(row) for row in decoded}
    if len(widths) != 1:
        raise ValueError("run-length rows have inconsistent widths")
    return np.asarray(decoded, dtype=bool)


class Scene(BaseModel):
    """Static layout: occupancy grid, object instances and human avatars."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    occupancy: np.ndarray
    objects: list[ObjectInstance] = Field(default_factory=list)
    humans: list[HumanAvatar] = Field(default_factory=list)

    @field_validator("occupancy", mode="before")
    @classmethod
    def _parse_grid(cls, value: Any) -> np.ndarray:
        grid = value if isinstance(value, np.ndarray) else decode_rows(value)
        grid = np.array(grid, dtype=bool)
        if grid.ndim != 2 or min(grid.shape) < 3:
            raise ValueError(f"occupancy must be a 2-D grid of at least 3x3, got {grid.shape}")
        grid.setflags(write=False)
        return grid

    @field_serializer("occupancy")
    def _dump_grid(self, grid: np.ndarray) -> list[list[list[int]]]:
        return encode_rows(grid)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Scene):
            return NotImplemented
        return self.model_dump_json() == other.model_dump_json()

    __hash__ = None  # type: ignore[assignment]

    @property
    def rows(self) -> int:
        return self.occupancy.shape[0]

    @property
    def cols(self) -> int:
        return self.occupancy.shape[1]

    @property
    def width_m(self) -> float:
        return self.cols * CELL

    @property
    def height_m(self) -> float:
        return self.rows * CELL

    @cached_property
    def traversable(self) -> np.ndarray:
        padded = np.pad(self.occupancy, 1, constant_values=True)
        blocked = np.zeros_like(self.occupancy)
        for dr in range(3):
            for dc in range(3):
                blocked |= padded[dr : dr + self.rows, dc : dc + self.cols]
        mask = ~blocked
        mask.setflags(write=False)
        return mask

    def cell_of(self, point: Point) -> Cell:
        return (floor(point[1] / CELL), floor(point[0] / CELL))

    def cell_center(self, cell: Cell) -> Point:
        return ((cell[1] + 0.5) * CELL, (cell[0] + 0.5) * CELL)

    def cell_index(self, cell: Cell) -> int:
        return cell[0] * self.cols + cell[1]

    def in_bounds(self, cell: Cell) -> bool:
        return 0 <= cell[0] < self.rows and 0 <= cell[1] < self.cols

    def is_traversable_cell(self, cell: Cell) -> bool:
        return self.in_bounds(cell) and bool(self.traversable[cell])

    def is_traversable_point(self, point: Point) -> bool:
        return self.is_traversable_cell(self.cell_of(point))

    def disc_hits_obstacle(self, point: Point, radius: float) -> bool:
        """True if a disc overlaps an occupied cell or leaves the grid."""
        x, y = point
        if x - radius < 0 or y - radius < 0:
            return True
        if x + radius > self.width_m or y + radius > self.height_m:
            return True
        r0, c0 = self.cell_of((x - radius, y - radius))
        r1, c1 = self.cell_of((x + radius, y + radius))
        for r in range(max(r0, 0), min(r1, self.rows - 1) + 1):
            for c in range(max(c0, 0), min(c1, self.cols - 1) + 1):
                if not self.occupancy[r, c]:
                    continue
                nearest_x = min(max(x, c * CELL), (c + 1) * CELL)
                nearest_y = min(max(y, r * CELL), (r + 1) * CELL)
                if hypot(x - nearest_x, y - nearest_y) < radius:
                    return True
        return False

    def line_traversable(self, start: Point, end: Point, spacing: float = 0.05) -> bool:
        """Every sampled point of the segment lies in a traversable cell."""
        length = hypot(end[0] - start[0], end[1] - start[1])
        samples = max(1, int(length / spacing))
        for i in range(samples + 1):
            f = i / samples
            point = (start[0] + f * (end[0] - start[0]), start[1] + f * (end[1] - start[1]))
            if not self.is_traversable_point(point):
                return False
        return True

    def room_at(self, point: Point) -> str:
        """Rooms are the four quadrants of the scene."""
        right = point[0] >= self.width_m / 2
        bottom = point[1] >= self.height_m / 2
        return ROOM_NAMES[2 * int(bottom) + int(right)]

    def objects_of(self, category: str) -> list[ObjectInstance]:
        return [o for o in self.objects if o.category == category]

    def object_by_id(self, object_id: int) -> ObjectInstance:
        for o in self.objects:
            if o.object_id == object_id:
                return o
        raise KeyError(f"no object with id {object_id}")

    def human_by_id(self, human_id: int) -> HumanAvatar:
        for h in self.humans:
            if h.human_id == human_id:
                return h
        raise KeyError(f"no human with id {human_id}")
