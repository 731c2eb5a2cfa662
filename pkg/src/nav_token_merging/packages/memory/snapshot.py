"""JSON dumps of memory states for golden tests."""

from typing import Literal

import numpy as np
from pydantic import BaseModel, model_validator

from nav_token_merging.packages.memory.merge_memory import LongEntry, MemoryState, ShortEntry


class TokenMatrix(BaseModel):
    """Row-major token matrix with an explicit shape header."""

    shape: tuple[int, int]
    data: list[float]

    @model_validator(mode="after")
    def _size_matches(self) -> "TokenMatrix":
        if len(self.data) != self.shape[0] * self.shape[1]:
            raise ValueError(f"{len(self.data)} values do not fill shape {self.shape}")
        return self

    @classmethod
    def from_array(cls, array: np.ndarray) -> "TokenMatrix":
        rows, cols = array.shape
        return cls(shape=(rows, cols), data=[float(v) for v in array.ravel(order="C")])

    def to_array(self) -> np.ndarray:
        array = np.asarray(self.data, dtype=np.float64).reshape(self.shape)
        array.setflags(write=False)
        return array


class ShortSnapshot(BaseModel):
    frame_index: int
    tokens: TokenMatrix


class LongSnapshot(BaseModel):
    k_merged: int
    first_frame: int
    last_frame: int
    token: TokenMatrix


class MemorySnapshot(BaseModel):
    format: Literal["nav-token-memory"] = "nav-token-memory"
    version: Literal[1] = 1
    t: int
    merges: int
    curr_frame: int
    curr: TokenMatrix | None
    short: list[ShortSnapshot]
    long: list[LongSnapshot]


def dump_snapshot(state: MemoryState) -> str:
    snapshot = MemorySnapshot(
        t=state.t,
        merges=state.merges,
        curr_frame=state.curr_frame,
        curr=None if state.curr is None else TokenMatrix.from_array(state.curr),
        short=[
            ShortSnapshot(frame_index=e.frame_index, tokens=TokenMatrix.from_array(e.tokens))
            for e in state.short
        ],
        long=[
            LongSnapshot(
                k_merged=e.k_merged,
                first_frame=e.first_frame,
                last_frame=e.last_frame,
                token=TokenMatrix.from_array(e.token),
            )
            for e in state.long
        ],
    )
    return snapshot.model_dump_json()


def load_snapshot(text: str) -> MemoryState:
    snapshot = MemorySnapshot.model_validate_json(text)
    return MemoryState(
        curr=None if snapshot.curr is None else snapshot.curr.to_array(),
        curr_frame=snapshot.curr_frame,
        short=tuple(
            ShortEntry(tokens=s.tokens.to_array(), frame_index=s.frame_index)
            for s in snapshot.short
        ),
        long=tuple(
            LongEntry(
                token=entry.token.to_array(),
                k_merged=entry.k_merged,
                first_frame=entry.first_frame,
                last_frame=entry.last_frame,
            )
            for entry in snapshot.long
        ),
        t=snapshot.t,
        merges=snapshot.merges,
    )
