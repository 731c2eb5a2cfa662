"""
Poses and discrete kinematics.

Screen coordinates: x grows right, y grows down, heading 0 points along +x and a
positive rotation is clockwise on screen. TURN_RIGHT adds 30 degrees, TURN_LEFT
subtracts 30 degrees.
"""

from math import atan2, cos, degrees, hypot, radians, sin

from pydantic import BaseModel, ConfigDict, field_validator

from nav_token_merging.core.constants.navigation import ActionGeometry
from nav_token_merging.packages.world.world_enum import Action

TURN = ActionGeometry.TURN_DEG
STEP = ActionGeometry.FORWARD_STEP_M


def _snap(value: float) -> float:
    for exact in (-1.0, -0.5, 0.0, 0.5, 1.0):
        if abs(value - exact) < 1e-12:
            return exact
    return value


# Unit vectors per heading; axis-aligned and 60-degree components are exact
HEADING_VECTORS: dict[int, tuple[float, float]] = {
    h: (_snap(cos(radians(h))), _snap(sin(radians(h)))) for h in range(0, 360, TURN)
}


class Pose(BaseModel):
    model_config = ConfigDict(frozen=True)

    x: float
    y: float
    heading: int = 0

    @field_validator("heading")
    @classmethod
    def _on_compass(cls, value: int) -> int:
        if value % TURN != 0:
            raise ValueError(f"heading must be a multiple of {TURN} degrees, got {value}")
        return value % 360

    @property
    def point(self) -> tuple[float, float]:
        return (self.x, self.y)

    def forward_point(self, distance: float = STEP) -> tuple[float, float]:
        ux, uy = HEADING_VECTORS[self.heading]
        return (self.x + distance * ux, self.y + distance * uy)

    def turned(self, action: Action) -> "Pose":
        if action is Action.TURN_LEFT:
            return self.model_copy(update={"heading": (self.heading - TURN) % 360})
        if action is Action.TURN_RIGHT:
            return self.model_copy(update={"heading": (self.heading + TURN) % 360})
        return self

    def moved_to(self, point: tuple[float, float]) -> "Pose":
        return self.model_copy(update={"x": point[0], "y": point[1]})


def distance(a: tuple[float, float], b: tuple[float, float]) -> float:
    return hypot(b[0] - a[0], b[1] - a[1])


def bearing_deg(origin: tuple[float, float], target: tuple[float, float]) -> float:
    """Screen-space bearing from origin to target in [0, 360)."""
    return degrees(atan2(target[1] - origin[1], target[0] - origin[0])) % 360.0


def quantize_heading(angle_deg: float) -> int:
    """Nearest heading on the 12-point compass."""
    return (round(angle_deg / TURN) % ActionGeometry.HEADING_COUNT) * TURN


def angle_between(a: float, b: float) -> float:
    """Smallest absolute difference between two angles, degrees."""
    diff = abs(a - b) % 360.0
    return min(diff, 360.0 - diff)


def turn_toward(current: int, desired: int) -> Action | None:
    """Turn that shortens the rotation to ``desired``; ties turn left."""
    diff = (desired - current) % 360
    if diff == 0:
        return None
    if diff < 180:
        return Action.TURN_RIGHT
    return Action.TURN_LEFT
