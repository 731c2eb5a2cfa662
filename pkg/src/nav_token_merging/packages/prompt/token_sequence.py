"""
Model-input token sequence assembly.

Layout: ``<obs> {long}{short}{current} <nav> {instruction}`` with one frame
separator between the visual runs of adjacent frames. A fused long-term token is
one run. The navigation tag is dropped when the model is asked to answer instead
of act.
"""

from dataclasses import dataclass
from enum import Enum
from typing import Callable

import numpy as np
from pydantic import BaseModel, field_validator

from nav_token_merging.core.errors import EmptyMemory
from nav_token_merging.packages.memory.merge_memory import MemoryState
from nav_token_merging.packages.world.world_enum import TaskKind

Projector = Callable[[np.ndarray], np.ndarray]


class Instruction(BaseModel):
    """Natural-language instruction for one episode."""

    text: str
    task_kind: TaskKind

    @field_validator("text")
    @classmethod
    def _not_blank(cls, value: str) -> str:
        if not value.strip():
            raise ValueError("instruction text must not be empty")
        return value

    def words(self) -> list[str]:
        """Stub tokenizer: whitespace split."""
        return self.text.split()


class TokenKind(Enum):
    OBS_BEGIN = "OBS"
    VISUAL = "VIS"
    FRAME_SEP = "SEP"
    NAV = "NAV"
    INSTR = "INSTR"


@dataclass(frozen=True, eq=False)
class TaggedToken:
    kind: TokenKind
    vector: np.ndarray | None = None
    symbol: str | None = None
    run: int | None = None


@dataclass(frozen=True)
class TokenSequence:
    items: tuple[TaggedToken, ...]

    def __len__(self) -> int:
        return len(self.items)

    def count(self, kind: TokenKind) -> int:
        return sum(1 for item in self.items if item.kind is kind)

    @property
    def has_nav_tag(self) -> bool:
        return any(item.kind is TokenKind.NAV for item in self.items)

    def visual_matrix(self) -> np.ndarray:
        """Stack the visual token vectors in sequence order."""
        vectors = [item.vector for item in self.items if item.kind is TokenKind.VISUAL]
        return np.stack(vectors, axis=0)  # type: ignore[arg-type]

    def instruction_symbols(self) -> list[str]:
        return [item.symbol or "" for item in self.items if item.kind is TokenKind.INSTR]

    def validate(self) -> None:
        """Raise ValueError if the layout rules are broken."""
        kinds = [item.kind for item in self.items]
        obs_count = kinds.count(TokenKind.OBS_BEGIN)
        if not kinds or kinds[0] is not TokenKind.OBS_BEGIN or obs_count != 1:
            raise ValueError("sequence must start with exactly one observation indicator")
        if kinds.count(TokenKind.NAV) > 1:
            raise ValueError("at most one navigation tag")
        visual_end = max(i for i, kind in enumerate(kinds) if kind is TokenKind.VISUAL)
        for i, item in enumerate(self.items):
            if item.kind is TokenKind.FRAME_SEP:
                before, after = self.items[i - 1], self.items[i + 1]
                if before.kind is not TokenKind.VISUAL or after.kind is not TokenKind.VISUAL:
                    raise ValueError(f"separator at {i} is not between visual runs")
                if before.run == after.run:
                    raise ValueError(f"separator at {i} splits a single frame run")
            elif item.kind is TokenKind.INSTR and i < visual_end:
                raise ValueError(f"instruction token at {i} precedes visual tokens")
            elif item.kind is TokenKind.NAV and i < visual_end:
                raise ValueError("navigation tag must follow the visual block")

    def pretty(self) -> str:
        """One tagged token per line."""
        lines = []
        for item in self.items:
            if item.kind is TokenKind.VISUAL:
                dim = 0 if item.vector is None else item.vector.shape[0]
                lines.append(f"{item.kind.value} run={item.run} dim={dim}")
            elif item.kind is TokenKind.INSTR:
                lines.append(f"{item.kind.value} {item.symbol}")
            else:
                lines.append(item.kind.value)
        return "\n".join(lines)


def _identity(tokens: np.ndarray) -> np.ndarray:
    return tokens


def assemble(
    state: MemoryState,
    instr: Instruction,
    nav_mode: bool,
    projector: Projector | None = None,
) -> TokenSequence:
    """Build the token sequence for one inference call.

    Args:
        state: Memory after at least one frame
        instr: Instruction appended after the visual block
        nav_mode: Emit the navigation tag (False for answering after STOP)
        projector: Map applied to every visual run; identity by default
    """
    if state.t == 0 or state.curr is None:
        raise EmptyMemory("cannot assemble a prompt before the first frame")
    project = projector or _identity

    runs: list[np.ndarray] = [entry.token for entry in state.long]
    runs.extend(entry.tokens for entry in state.short)
    runs.append(state.curr)

    items: list[TaggedToken] = [TaggedToken(TokenKind.OBS_BEGIN)]
    for run_index, run in enumerate(runs):
        if run_index:
            items.append(TaggedToken(TokenKind.FRAME_SEP))
        items.extend(
            TaggedToken(TokenKind.VISUAL, vector=vector, run=run_index) for vector in project(run)
        )
    if nav_mode:
        items.append(TaggedToken(TokenKind.NAV))
    items.extend(TaggedToken(TokenKind.INSTR, symbol=word) for word in instr.words())
    return TokenSequence(items=tuple(items))


def visual_token_count(seq: TokenSequence) -> int:
    return seq.count(TokenKind.VISUAL)
