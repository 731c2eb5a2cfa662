"""
Dense frame features, grid pooling and cosine similarity.

Tokens of one frame form a square patch grid stored row-major: token ``i * side + j``
is the patch in grid row ``i``, column ``j``. All arithmetic runs in float64.
"""

from dataclasses import dataclass
from math import isqrt

import numpy as np

from nav_token_merging.core.decorators.op_counter import count_operation
from nav_token_merging.core.errors import (
    DimensionMismatch,
    IncompatibleScale,
    NonSquareTokenGrid,
)


def grid_side(n_tokens: int) -> int:
    """Side length of a square token grid, or raise if not square."""
    side = isqrt(n_tokens)
    if n_tokens <= 0 or side * side != n_tokens:
        raise NonSquareTokenGrid(f"{n_tokens} tokens do not form a square grid")
    return side


def _frozen(array: np.ndarray) -> np.ndarray:
    array.setflags(write=False)
    return array


@dataclass(frozen=True)
class PoolScale:
    """Grid pooling factor: an alpha x alpha block of patches becomes one token."""

    alpha: int

    def __post_init__(self):
        if isinstance(self.alpha, bool) or not isinstance(self.alpha, int) or self.alpha < 1:
            raise IncompatibleScale(f"pooling factor must be a positive integer, got {self.alpha}")

    def check_side(self, side: int) -> None:
        if side % self.alpha != 0:
            raise IncompatibleScale(f"alpha={self.alpha} does not divide grid side {side}")

    def pooled_count(self, n_tokens: int) -> int:
        side = grid_side(n_tokens)
        self.check_side(side)
        return (side // self.alpha) ** 2


@dataclass(frozen=True, eq=False)
class FrameFeatures:
    """One frame's token matrix (N_x tokens by C channels) and its time step."""

    tokens: np.ndarray
    frame_index: int = 0

    def __post_init__(self):
        tokens = np.array(self.tokens, dtype=np.float64)
        if tokens.ndim != 2 or tokens.shape[1] < 1:
            raise NonSquareTokenGrid(f"expected a 2-D token matrix, got shape {tokens.shape}")
        grid_side(tokens.shape[0])
        if not np.all(np.isfinite(tokens)):
            raise ValueError("frame features must be finite")
        if self.frame_index < 0:
            raise ValueError(f"frame_index must be non-negative, got {self.frame_index}")
        object.__setattr__(self, "tokens", _frozen(tokens))

    @property
    def n_tokens(self) -> int:
        return self.tokens.shape[0]

    @property
    def channels(self) -> int:
        return self.tokens.shape[1]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, FrameFeatures):
            return NotImplemented
        return self.frame_index == other.frame_index and np.array_equal(
            self.tokens, other.tokens
        )

    __hash__ = None  # type: ignore[assignment]


@count_operation
def grid_pool(x: FrameFeatures | np.ndarray, alpha: PoolScale | int) -> np.ndarray:
    """Average a square token grid over alpha x alpha blocks.

    Args:
        x: Frame features or a raw (N, C) token matrix with N a perfect square
        alpha: Pooling factor dividing the grid side

    Returns:
        A new (N / alpha**2, C) float64 matrix, row-major over the pooled grid
    """
    tokens = x.tokens if isinstance(x, FrameFeatures) else np.asarray(x, dtype=np.float64)
    scale = alpha if isinstance(alpha, PoolScale) else PoolScale(int(alpha))
    if tokens.ndim != 2:
        raise NonSquareTokenGrid(f"expected a 2-D token matrix, got shape {tokens.shape}")
    n_tokens, channels = tokens.shape
    side = grid_side(n_tokens)
    scale.check_side(side)

    a = scale.alpha
    out_side = side // a
    blocks = tokens.reshape(out_side, a, out_side, a, channels)
    return blocks.mean(axis=(1, 3), dtype=np.float64).reshape(out_side * out_side, channels)


@count_operation
def cosine_similarity(a: np.ndarray, b: np.ndarray) -> float:
    """Cosine of two token vectors; 0.0 when either has zero norm."""
    va = np.asarray(a, dtype=np.float64).ravel()
    vb = np.asarray(b, dtype=np.float64).ravel()
    if va.shape != vb.shape:
        raise DimensionMismatch(f"cannot compare {va.shape[0]} and {vb.shape[0]} channels")

    norm_a = float(np.linalg.norm(va))
    norm_b = float(np.linalg.norm(vb))
    if norm_a == 0.0 or norm_b == 0.0:
        return 0.0
    cos = float(np.dot(va, vb)) / (norm_a * norm_b)
    return min(1.0, max(-1.0, cos))
