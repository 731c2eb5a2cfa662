"""
From-scratch reference for the merge memory, and the no-merge baseline.

``batch_oracle`` groups frames by timestamp and pools each one directly at its
group's scale, then replays long-term fusion in timestamp order, averaging the
absorbed candidates with a plain mean instead of a running one.
"""

import numpy as np

from nav_token_merging.core.errors import EmptyInput
from nav_token_merging.packages.features.frame_features import (
    FrameFeatures,
    cosine_similarity,
    grid_pool,
)
from nav_token_merging.packages.memory.merge_memory import (
    LongEntry,
    MemoryState,
    MergeConfig,
    ShortEntry,
)


def batch_oracle(frames: list[FrameFeatures], cfg: MergeConfig) -> MemoryState:
    if not frames:
        raise EmptyInput("batch_oracle needs at least one frame")
    for frame in frames:
        cfg.check_grid(frame.n_tokens)

    t = len(frames)
    buffer_len = cfg.buffer_len
    short_count = min(t - 1, buffer_len)
    long_count = max(t - buffer_len - 1, 0)

    # frames[:long_count] went long, the next short_count are short, the last is current
    curr_frame = frames[-1]
    curr = grid_pool(curr_frame, cfg.alpha_curr)
    short = tuple(
        ShortEntry(tokens=grid_pool(frame, cfg.alpha_short), frame_index=frame.frame_index)
        for frame in frames[long_count : long_count + short_count]
    )

    groups: list[list[int]] = []
    candidates = [grid_pool(frame, cfg.alpha_long) for frame in frames[:long_count]]
    for i, candidate in enumerate(candidates):
        pop_time = i + buffer_len + 2
        if groups and pop_time > buffer_len + 2:
            newest = np.mean([candidates[j] for j in groups[-1]], axis=0)
            if cosine_similarity(newest, candidate) > cfg.tau:
                groups[-1].append(i)
                continue
        groups.append([i])

    long = tuple(
        LongEntry(
            token=np.mean([candidates[j] for j in group], axis=0),
            k_merged=len(group),
            first_frame=frames[group[0]].frame_index,
            last_frame=frames[group[-1]].frame_index,
        )
        for group in groups
    )
    return MemoryState(
        curr=curr,
        curr_frame=curr_frame.frame_index,
        short=short,
        long=long,
        t=t,
        merges=long_count - len(groups),
    )


def naive_memory(frames: list[FrameFeatures], cfg: MergeConfig | None = None) -> np.ndarray:
    """Every frame kept at current-token resolution, no merging."""
    if not frames:
        raise EmptyInput("naive_memory needs at least one frame")
    alpha = (cfg or MergeConfig()).alpha_curr
    return np.concatenate([grid_pool(frame, alpha) for frame in frames], axis=0)
