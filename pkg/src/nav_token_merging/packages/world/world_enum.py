from enum import Enum


class TaskKind(Enum):
    """Enum for supported navigation tasks."""

    VLN = "vln"
    OBJECT_NAV = "objectnav"
    EQA = "eqa"
    FOLLOW = "follow"

    def toText(self) -> str:
        """Convert enum value to a more human-readable string."""
        display_names = {
            TaskKind.VLN: "Vision-and-language navigation",
            TaskKind.OBJECT_NAV: "Object goal navigation",
            TaskKind.EQA: "Embodied question answering",
            TaskKind.FOLLOW: "Human following",
        }
        return display_names.get(self, self.value)


class Action(Enum):
    """Enum for the discrete navigation actions."""

    FORWARD = "FORWARD"
    TURN_LEFT = "TURN_LEFT"
    TURN_RIGHT = "TURN_RIGHT"
    STOP = "STOP"


# Order used when sampling random actions
MOTION_ACTIONS = (Action.FORWARD, Action.TURN_LEFT, Action.TURN_RIGHT)
ALL_ACTIONS = (*MOTION_ACTIONS, Action.STOP)
