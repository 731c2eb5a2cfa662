"""
Profile service: token growth of the merge memory against naive storage.

``profile.csv`` has one row per frame with the merged and naive token counts and
the wall time of that push. With ``sweep_taus`` set, ``profile_sweep.csv`` repeats
the stream once per threshold and records the long-term tier and merge count.
"""

import csv
import logging
from dataclasses import dataclass
from pathlib import Path
from time import perf_counter_ns

from nav_token_merging.core.config.run_config import RunConfig
from nav_token_merging.core.constants.navigation import OutputFiles
from nav_token_merging.packages.features.frame_features import FrameFeatures
from nav_token_merging.packages.features.streams import frame_stream
from nav_token_merging.packages.memory.merge_memory import MemoryState, MergeConfig, push_frame

logger = logging.getLogger(__name__)

PROFILE_COLUMNS = ("t", "merged_tokens", "naive_tokens", "push_micros")
SWEEP_COLUMNS = ("tau", "t", "merged_tokens", "long_tokens", "merges")
TIMING_REPEATS = 5


@dataclass(frozen=True)
class ProfileRow:
    t: int
    merged_tokens: int
    naive_tokens: int
    push_micros: float


def _timed_push(
    state: MemoryState, frame: FrameFeatures, cfg: MergeConfig, timing: bool
) -> tuple[MemoryState, float]:
    if not timing:
        return push_frame(state, frame, cfg), 0.0
    best = None
    pushed = state
    for _ in range(TIMING_REPEATS):
        start = perf_counter_ns()
        pushed = push_frame(state, frame, cfg)
        elapsed = perf_counter_ns() - start
        best = elapsed if best is None else min(best, elapsed)
    return pushed, (best or 0) / 1000.0


class ProfileService:
    def __init__(self, config: RunConfig):
        self.config = config

    def _frames(self):
        cfg = self.config
        return frame_stream(cfg.stream, cfg.n_x, cfg.c, cfg.feature_seed)

    def profile(self) -> list[ProfileRow]:
        """Push ``horizon`` frames and record the token counts after each push."""
        cfg = self.config.merge_config
        per_frame_naive = cfg.tokens_per_frame(self.config.n_x)[0]
        state = MemoryState()
        rows: list[ProfileRow] = []
        frames = self._frames()
        for t in range(1, self.config.horizon + 1):
            state, micros = _timed_push(state, next(frames), cfg, self.config.timing)
            rows.append(
                ProfileRow(
                    t=t,
                    merged_tokens=state.token_count(),
                    naive_tokens=t * per_frame_naive,
                    push_micros=micros,
                )
            )
        return rows

    def sweep(self) -> list[tuple[float, int, int, int, int]]:
        """(tau, t, merged_tokens, long_tokens, merges) for every threshold and frame."""
        rows = []
        for tau in self.config.sweep_taus:
            cfg = self.config.merge_config.model_copy(update={"tau": tau})
            state = MemoryState()
            frames = self._frames()
            for t in range(1, self.config.horizon + 1):
                state = push_frame(state, next(frames), cfg)
                rows.append((tau, t, state.token_count(), len(state.long), state.merges))
            logger.info("tau=%.3f: %d long-term tokens after %d frames", tau, len(state.long), t)
        return rows

    def run(self) -> list[ProfileRow]:
        out_dir = self.config.out_dir
        out_dir.mkdir(parents=True, exist_ok=True)

        rows = self.profile()
        _write_csv(
            out_dir / OutputFiles.PROFILE,
            PROFILE_COLUMNS,
            [(r.t, r.merged_tokens, r.naive_tokens, f"{r.push_micros:.3f}") for r in rows],
        )
        if self.config.sweep_taus:
            _write_csv(out_dir / OutputFiles.PROFILE_SWEEP, SWEEP_COLUMNS, self.sweep())

        last = rows[-1]
        logger.info(
            "profiled %d frames of a %s stream: %d merged vs %d naive tokens",
            last.t,
            self.config.stream,
            last.merged_tokens,
            last.naive_tokens,
        )
        return rows


def _write_csv(path: Path, columns: tuple[str, ...], rows) -> None:
    with path.open("w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(columns)
        writer.writerows(rows)
