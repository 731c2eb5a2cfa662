"""
Deterministic synthetic feature extractor.

Stands in for a vision encoder: the occupancy patch is resampled onto the token
grid, mixed with seeded per-state, per-position and per-heading embeddings, tagged
objects add a seeded embedding at their grid cell, and the grid is box-smoothed so
neighbouring patches correlate.
"""

from functools import lru_cache
from hashlib import blake2b

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator

from nav_token_merging.core.constants.navigation import ActionGeometry
from nav_token_merging.packages.features.frame_features import FrameFeatures, grid_side
from nav_token_merging.packages.world.local_view import CellState, LocalView


class FeatureConfig(BaseModel):
    """Token grid shape and extractor seed."""

    model_config = ConfigDict(frozen=True)

    n_x: int = Field(default=256, ge=1)
    c: int = Field(default=32, ge=1)
    feature_seed: int = 0

    @field_validator("n_x")
    @classmethod
    def _square(cls, value: int) -> int:
        grid_side(value)
        return value

    @property
    def side(self) -> int:
        return grid_side(self.n_x)


@lru_cache(maxsize=32)
def _embedding_tables(n_x: int, c: int, seed: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    side = grid_side(n_x)
    rng = np.random.default_rng(seed)
    state_embed = rng.standard_normal((len(CellState), c))
    position_embed = 0.25 * rng.standard_normal((side, side, c))
    heading_embed = 0.5 * rng.standard_normal((ActionGeometry.HEADING_COUNT, c))
    for table in (state_embed, position_embed, heading_embed):
        table.setflags(write=False)
    return state_embed, position_embed, heading_embed


@lru_cache(maxsize=1024)
def _tag_embedding(key: str, c: int, seed: int) -> np.ndarray:
    digest = int.from_bytes(blake2b(key.encode("utf-8"), digest_size=8).digest(), "big")
    embedding = np.random.default_rng([seed, digest]).standard_normal(c)
    embedding.setflags(write=False)
    return embedding


@lru_cache(maxsize=32)
def _area_weights(patch_side: int, side: int) -> np.ndarray:
    """(side, patch_side) matrix of overlap fractions; every row sums to 1."""
    edges = np.arange(side + 1) * (patch_side / side)
    lo = np.maximum(edges[:-1, None], np.arange(patch_side)[None, :])
    hi = np.minimum(edges[1:, None], np.arange(1, patch_side + 1)[None, :])
    weights = np.clip(hi - lo, 0.0, None) / (patch_side / side)
    weights.setflags(write=False)
    return weights


def _box_smooth(grid: np.ndarray) -> np.ndarray:
    side = grid.shape[0]
    padded = np.pad(grid, ((1, 1), (1, 1), (0, 0)), mode="edge")
    total = np.zeros_like(grid)
    for di in range(3):
        for dj in range(3):
            total += padded[di : di + side, dj : dj + side]
    return total / 9.0


def extract_features(view: LocalView, config: FeatureConfig, frame_index: int = 0) -> FrameFeatures:
    """Encode a local view into an (n_x, c) token matrix.

    Identical views give bitwise-identical features for the same config.
    """
    side = config.side
    state_embed, position_embed, heading_embed = _embedding_tables(
        config.n_x, config.c, config.feature_seed
    )
    patch_side = view.occupancy.shape[0]
    weights = _area_weights(patch_side, side)

    grid = position_embed.copy()
    for state in CellState:
        fraction = weights @ (view.occupancy == state).astype(np.float64) @ weights.T
        grid += fraction[:, :, None] * state_embed[state]
    grid += heading_embed[(view.heading // ActionGeometry.TURN_DEG) % ActionGeometry.HEADING_COUNT]

    for tag in view.tags:
        gi = min(side - 1, tag.row * side // patch_side)
        gj = min(side - 1, tag.col * side // patch_side)
        grid[gi, gj] += _tag_embedding(f"{tag.kind}:{tag.label}", config.c, config.feature_seed)

    tokens = _box_smooth(grid).reshape(side * side, config.c)
    return FrameFeatures(tokens=tokens, frame_index=frame_index)
