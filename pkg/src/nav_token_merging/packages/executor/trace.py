from enum import Enum
from itertools import pairwise
from pathlib import Path

from pydantic import BaseModel, Field

from nav_token_merging.packages.world.world_enum import Action


class EventKind(Enum):
    FRAME_SENT = "FrameSent"
    BATCH_ARRIVED = "BatchArrived"
    ACTION_STARTED = "ActionStarted"
    ACTION_FINISHED = "ActionFinished"
    BATCH_SUPERSEDED = "BatchSuperseded"


class TraceEvent(BaseModel):
    """One timestamped event; fields that do not apply are left out of the JSON."""

    time_us: int = Field(ge=0)
    event: EventKind
    episode_id: str | None = None
    frame: int | None = None
    batch_id: int | None = None
    batch: list[Action] | None = None
    action: Action | None = None
    step: int | None = None
    dropped: list[Action] | None = None


class EventTrace(BaseModel):
    episode_id: str | None = None
    events: list[TraceEvent] = Field(default_factory=list)

    def add(self, time_us: int, event: EventKind, **fields) -> None:
        self.events.append(
            TraceEvent(time_us=time_us, event=event, episode_id=self.episode_id, **fields)
        )

    def count(self, event: EventKind) -> int:
        return sum(1 for e in self.events if e.event is event)

    def is_ordered(self) -> bool:
        times = [e.time_us for e in self.events]
        return all(a <= b for a, b in pairwise(times))

    def actions_matched(self) -> bool:
        """Every ActionStarted is followed by its ActionFinished before the next start."""
        open_step = None
        for e in self.events:
            if e.event is EventKind.ACTION_STARTED:
                if open_step is not None:
                    return False
                open_step = e.step
            elif e.event is EventKind.ACTION_FINISHED:
                if open_step != e.step:
                    return False
                open_step = None
        return open_step is None

    def to_jsonl(self) -> str:
        return "".join(e.model_dump_json(exclude_none=True) + "\n" for e in self.events)

    def write_jsonl(self, path: Path) -> None:
        Path(path).write_text(self.to_jsonl(), encoding="utf-8")
