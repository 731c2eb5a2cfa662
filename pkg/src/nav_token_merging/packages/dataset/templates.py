"""
Instruction templates and low-level instruction text.

Templates hold one or more patterns with ``{slot}`` placeholders; the seed picks
the pattern (``seed % len(patterns)``) so rendering is deterministic. Rephrasing
goes through a pluggable ``Paraphraser``; the default leaves text unchanged.
"""

import re
from abc import ABC, abstractmethod
from string import Formatter

from pydantic import BaseModel, ConfigDict, Field

from nav_token_merging.core.errors import MissingSlot
from nav_token_merging.packages.prompt.token_sequence import Instruction
from nav_token_merging.packages.world.world_enum import Action, TaskKind

OBJECT_CATEGORIES = ("couch", "bed", "chair", "toilet", "plant", "tv")
COLORS = ("red", "blue", "green", "white", "black", "brown", "gray", "yellow")
GENDERS = ("man", "woman")


class Paraphraser(ABC):
    """Base interface for instruction rephrasing."""

    @abstractmethod
    def rephrase(self, text: str, seed: int) -> str:
        """Return a rephrased instruction with the same meaning."""
        pass


class IdentityParaphraser(Paraphraser):
    def rephrase(self, text: str, seed: int) -> str:
        return text


class InstructionTemplate(BaseModel):
    model_config = ConfigDict(frozen=True)

    task_kind: TaskKind
    patterns: tuple[str, ...] = Field(min_length=1)
    slot_vocab: dict[str, tuple[str, ...]] = Field(default_factory=dict)

    def slot_names(self, pattern: str) -> set[str]:
        return {name for _, name, _, _ in Formatter().parse(pattern) if name}


OBJECT_NAV_TEMPLATE = InstructionTemplate(
    task_kind=TaskKind.OBJECT_NAV,
    patterns=("Search for a/an {object}.",),
    slot_vocab={"object": OBJECT_CATEGORIES},
)

VLN_TEMPLATE = InstructionTemplate(
    task_kind=TaskKind.VLN,
    patterns=(
        "Walk past the {route}, then go to the {destination} and stop.",
        "Go by the {route} and stop near the {destination}.",
    ),
)

EQA_COLOR_TEMPLATE = InstructionTemplate(
    task_kind=TaskKind.EQA,
    patterns=("What color is the {object}?",),
    slot_vocab={"object": OBJECT_CATEGORIES},
)

EQA_ROOM_TEMPLATE = InstructionTemplate(
    task_kind=TaskKind.EQA,
    patterns=("What room is the {object} located in?",),
    slot_vocab={"object": OBJECT_CATEGORIES},
)

FOLLOW_TEMPLATE = InstructionTemplate(
    task_kind=TaskKind.FOLLOW,
    patterns=("follow the {descriptor}", "stay behind the {descriptor}"),
)


def render_instruction(
    template: InstructionTemplate,
    slots: dict[str, str],
    seed: int = 0,
    paraphraser: Paraphraser | None = None,
) -> Instruction:
    """Fill a template pattern chosen by ``seed``.

    Raises:
        MissingSlot: a placeholder of the chosen pattern has no value
    """
    pattern = template.patterns[seed % len(template.patterns)]
    missing = template.slot_names(pattern) - set(slots)
    if missing:
        raise MissingSlot(f"missing slot(s): {', '.join(sorted(missing))}")
    text = pattern.format(**slots)
    text = (paraphraser or IdentityParaphraser()).rephrase(text, seed)
    return Instruction(text=text, task_kind=template.task_kind)


def describe_human(gender: str, shirt: str, pants: str) -> str:
    return f"{gender} wearing a {shirt} shirt and {pants} pants"


_PHRASES = {
    Action.FORWARD: "move forward",
    Action.TURN_LEFT: "turn left",
    Action.TURN_RIGHT: "turn right",
}
_PHRASE_PATTERN = re.compile(r"(move forward|turn left|turn right)\s+(\d+)\s+steps?")


def low_level_instruction(actions: list[Action], task_kind: TaskKind = TaskKind.VLN) -> Instruction:
    """Describe an action sequence as runs, e.g. "move forward 4 steps, then turn right 3 steps."

    A trailing STOP adds ", then stop"; any other STOP is rejected.
    """
    stop = bool(actions) and actions[-1] is Action.STOP
    motions = actions[:-1] if stop else list(actions)
    if Action.STOP in motions:
        raise ValueError("STOP may only end a low-level instruction")
    if not motions:
        raise ValueError("low-level instruction needs at least one motion")

    runs: list[list] = []
    for action in motions:
        if runs and runs[-1][0] is action:
            runs[-1][1] += 1
        else:
            runs.append([action, 1])
    phrases = [f"{_PHRASES[a]} {n} step{'s' if n != 1 else ''}" for a, n in runs]
    if stop:
        phrases.append("stop")

    if len(phrases) == 1:
        text = phrases[0]
    elif len(phrases) == 2:
        text = f"{phrases[0]}, then {phrases[1]}"
    else:
        text = f"{phrases[0]}, then {', then '.join(phrases[1:-1])}, and finally {phrases[-1]}"
    return Instruction(text=f"{text}.", task_kind=task_kind)


def parse_low_level_instruction(text: str) -> list[Action]:
    """Inverse of ``low_level_instruction``; case-insensitive."""
    lowered = text.lower()
    by_phrase = {phrase: action for action, phrase in _PHRASES.items()}
    actions: list[Action] = []
    for phrase, count in _PHRASE_PATTERN.findall(lowered):
        actions.extend([by_phrase[phrase]] * int(count))
    if re.search(r"\bstop\b", lowered):
        actions.append(Action.STOP)
    return actions
