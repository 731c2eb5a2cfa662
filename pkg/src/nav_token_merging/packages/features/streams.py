"""Synthetic frame streams for profiling and property tests."""

from collections.abc import Iterator
from enum import Enum

import numpy as np

from .frame_features import FrameFeatures


class StreamKind(Enum):
    CONSTANT = "constant"
    RANDOM = "random"
    ORTHOGONAL = "orthogonal"


def frame_stream(
    kind: StreamKind | str, n_x: int, c: int, seed: int = 0
) -> Iterator[FrameFeatures]:
    """Endless stream of frames of ``n_x`` tokens by ``c`` channels.

    constant: the same seeded random frame every step, so every long-term
    candidate fuses. random: fresh standard-normal tokens per step. orthogonal:
    every token of frame t equals the basis vector e_(t mod c), so consecutive
    frames have cosine 0 at every pooling scale.
    """
    kind = StreamKind(kind)
    rng = np.random.default_rng(seed)
    base = rng.standard_normal((n_x, c))
    t = 0
    while True:
        if kind is StreamKind.CONSTANT:
            tokens = base
        elif kind is StreamKind.RANDOM:
            tokens = rng.standard_normal((n_x, c))
        else:
            tokens = np.zeros((n_x, c))
            tokens[:, t % c] = 1.0
        yield FrameFeatures(tokens=tokens, frame_index=t)
        t += 1


def take_frames(
    kind: StreamKind | str, count: int, n_x: int, c: int, seed: int = 0
) -> list[FrameFeatures]:
    stream = frame_stream(kind, n_x, c, seed)
    return [next(stream) for _ in range(count)]
