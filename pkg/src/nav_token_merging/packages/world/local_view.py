from dataclasses import dataclass
from enum import IntEnum

import numpy as np


class CellState(IntEnum):
    """Values stored in an egocentric occupancy patch."""

    FREE = 0
    OBSTACLE = 1  # also used for cells outside the scene
    HUMAN = 2


@dataclass(frozen=True, order=True)
class VisibleTag:
    """An object or human inside the field of view, at a patch cell."""

    kind: str
    label: str
    row: int
    col: int


@dataclass(frozen=True, eq=False)
class LocalView:
    """Occupancy patch of (2r+1)^2 cells centred on the agent, plus visible tags."""

    occupancy: np.ndarray
    heading: int
    tags: tuple[VisibleTag, ...] = ()

    def __post_init__(self):
        occupancy = np.array(self.occupancy, dtype=np.int8)
        if occupancy.ndim != 2 or occupancy.shape[0] != occupancy.shape[1]:
            raise ValueError(f"occupancy patch must be square, got {occupancy.shape}")
        if occupancy.shape[0] % 2 != 1:
            raise ValueError("occupancy patch side must be odd")
        occupancy.setflags(write=False)
        object.__setattr__(self, "occupancy", occupancy)
        object.__setattr__(self, "tags", tuple(sorted(self.tags)))

    @property
    def radius(self) -> int:
        return self.occupancy.shape[0] // 2

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, LocalView):
            return NotImplemented
        return (
            self.heading == other.heading
            and self.tags == other.tags
            and np.array_equal(self.occupancy, other.occupancy)
        )

    __hash__ = None  # type: ignore[assignment]
