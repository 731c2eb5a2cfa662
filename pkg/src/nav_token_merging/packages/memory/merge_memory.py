"""
Online visual token merging.

Three tiers of visual tokens are kept for a stream of frames:

- current: the newest frame pooled by ``alpha_curr`` (64 tokens by default)
- short-term: up to ``buffer_len`` older frames, each pooled to 4 tokens
- long-term: frames leaving the buffer, pooled to 1 token; a new one is fused
  into the newest long-term token by running mean when their cosine exceeds ``tau``

Every push does a constant amount of work: one pooling of the previous current
tokens, one pooling of the new frame, and at most one pooling, one cosine and one
fusion for the entry leaving the buffer.
"""

from dataclasses import dataclass

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from nav_token_merging.core.decorators.op_counter import count_operation
from nav_token_merging.core.errors import EmptyMemory, ShapeMismatch
from nav_token_merging.packages.features.frame_features import (
    FrameFeatures,
    PoolScale,
    cosine_similarity,
    grid_pool,
    grid_side,
)


class MergeConfig(BaseModel):
    """Pooling factors, buffer length and fusion threshold."""

    model_config = ConfigDict(frozen=True)

    alpha_curr: int = Field(default=2, ge=1)
    alpha_short: int = Field(default=8, ge=1)
    alpha_long: int = Field(default=16, ge=1)
    buffer_len: int = Field(default=64, ge=1)
    tau: float = Field(default=0.95, ge=0.0, le=1.0)

    @model_validator(mode="after")
    def _nested_scales(self) -> "MergeConfig":
        if not self.alpha_curr < self.alpha_short < self.alpha_long:
            raise ValueError("pooling factors must satisfy alpha_curr < alpha_short < alpha_long")
        if self.alpha_short % self.alpha_curr or self.alpha_long % self.alpha_short:
            raise ValueError("each pooling factor must divide the next coarser one")
        return self

    @property
    def curr_to_short(self) -> PoolScale:
        return PoolScale(self.alpha_short // self.alpha_curr)

    @property
    def short_to_long(self) -> PoolScale:
        return PoolScale(self.alpha_long // self.alpha_short)

    def check_grid(self, n_tokens: int) -> None:
        """Raise if a frame of ``n_tokens`` cannot be pooled at every scale."""
        side = grid_side(n_tokens)
        for alpha in (self.alpha_curr, self.alpha_short, self.alpha_long):
            if side % alpha:
                raise ShapeMismatch(f"alpha={alpha} does not divide grid side {side}")

    def tokens_per_frame(self, n_x: int) -> tuple[int, int, int]:
        """Token counts of one frame in the current, short-term and long-term tiers."""
        side = grid_side(n_x)
        return (
            (side // self.alpha_curr) ** 2,
            (side // self.alpha_short) ** 2,
            (side // self.alpha_long) ** 2,
        )


def _frozen(array: np.ndarray) -> np.ndarray:
    array.setflags(write=False)
    return array


@dataclass(frozen=True, eq=False)
class ShortEntry:
    tokens: np.ndarray
    frame_index: int


@dataclass(frozen=True, eq=False)
class LongEntry:
    """A long-term token and how many popped frames it averages."""

    token: np.ndarray
    k_merged: int
    first_frame: int
    last_frame: int


@dataclass(frozen=True, eq=False)
class MemoryState:
    """Immutable three-tier token store; ``t`` counts the frames ingested."""

    curr: np.ndarray | None = None
    curr_frame: int = -1
    short: tuple[ShortEntry, ...] = ()
    long: tuple[LongEntry, ...] = ()
    t: int = 0
    merges: int = 0

    @property
    def channels(self) -> int | None:
        return None if self.curr is None else self.curr.shape[1]

    def token_count(self) -> int:
        if self.curr is None:
            return 0
        return (
            self.curr.shape[0]
            + sum(entry.tokens.shape[0] for entry in self.short)
            + len(self.long)
        )


@count_operation
def fuse_running_mean(token: np.ndarray, k_merged: int, candidate: np.ndarray) -> np.ndarray:
    """(K * token + candidate) / (K + 1)."""
    return (k_merged * token + candidate) / (k_merged + 1)


def push_frame(state: MemoryState, x: FrameFeatures, cfg: MergeConfig) -> MemoryState:
    """Ingest one frame and return the next memory state."""
    cfg.check_grid(x.n_tokens)
    if state.curr is not None:
        expected_rows = state.curr.shape[0] * cfg.alpha_curr**2
        if x.n_tokens != expected_rows or x.channels != state.curr.shape[1]:
            raise ShapeMismatch(
                f"frame of shape {x.tokens.shape} does not match memory of "
                f"({expected_rows}, {state.curr.shape[1]})"
            )

    t = state.t + 1
    short = state.short
    if state.curr is not None:
        pooled = _frozen(grid_pool(state.curr, cfg.curr_to_short))
        short = (*short, ShortEntry(tokens=pooled, frame_index=state.curr_frame))

    curr = _frozen(grid_pool(x, cfg.alpha_curr))

    long = state.long
    merges = state.merges
    if t > cfg.buffer_len + 1:
        popped, short = short[0], short[1:]
        candidate = _frozen(grid_pool(popped.tokens, cfg.short_to_long))
        if t > cfg.buffer_len + 2 and cosine_similarity(long[-1].token, candidate) > cfg.tau:
            last = long[-1]
            fused = _frozen(fuse_running_mean(last.token, last.k_merged, candidate))
            long = (
                *long[:-1],
                LongEntry(
                    token=fused,
                    k_merged=last.k_merged + 1,
                    first_frame=last.first_frame,
                    last_frame=popped.frame_index,
                ),
            )
            merges += 1
        else:
            entry = LongEntry(
                token=candidate,
                k_merged=1,
                first_frame=popped.frame_index,
                last_frame=popped.frame_index,
            )
            long = (*long, entry)

    return MemoryState(
        curr=curr,
        curr_frame=x.frame_index,
        short=short,
        long=long,
        t=t,
        merges=merges,
    )


def fold_frames(frames: list[FrameFeatures], cfg: MergeConfig) -> MemoryState:
    state = MemoryState()
    for frame in frames:
        state = push_frame(state, frame, cfg)
    return state


def token_sequence(state: MemoryState) -> np.ndarray:
    """Tokens in order long (oldest first), short (oldest first), current."""
    if state.t == 0 or state.curr is None:
        raise EmptyMemory("no frame has been pushed yet")
    parts = [entry.token for entry in state.long]
    parts.extend(entry.tokens for entry in state.short)
    parts.append(state.curr)
    return np.concatenate(parts, axis=0)
