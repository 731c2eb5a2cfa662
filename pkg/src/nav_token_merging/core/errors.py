# src/nav_token_merging/core/errors.py
"""Error types raised across the package."""


class NavTokenMergingError(Exception):
    """Base class for every error raised by this package."""


class ConfigError(NavTokenMergingError):
    """Invalid or unknown run configuration."""

    def __init__(self, message: str, key: str | None = None):
        self.key = key
        super().__init__(f"{key}: {message}" if key else message)


# Token grids


class NonSquareTokenGrid(NavTokenMergingError, ValueError):
    """Token count is not a perfect square."""


class IncompatibleScale(NavTokenMergingError, ValueError):
    """Pooling factor does not divide the grid side."""


class DimensionMismatch(NavTokenMergingError, ValueError):
    """Two vectors have different channel counts."""


class ShapeMismatch(NavTokenMergingError, ValueError):
    """A frame disagrees with the configured token grid."""


class EmptyMemory(NavTokenMergingError):
    """The memory has not ingested any frame yet."""


# World and planning


class EpisodeFinished(NavTokenMergingError):
    """An action was applied after the episode ended."""


class GenerationFailed(NavTokenMergingError):
    """No solvable layout was found within the retry budget."""


class Unreachable(NavTokenMergingError):
    """No obstacle-free path connects the requested endpoints."""


# Metrics


class DegenerateEpisode(NavTokenMergingError, ValueError):
    """Shortest path length is not positive."""


class EmptyInput(NavTokenMergingError, ValueError):
    """An aggregate was requested over no items."""


# Dataset


class SchemaMismatch(NavTokenMergingError):
    """A sample file line does not match the expected schema."""

    def __init__(self, message: str, line_number: int):
        self.line_number = line_number
        super().__init__(f"line {line_number}: {message}")


class SampleIoError(NavTokenMergingError):
    """Reading or writing a sample file failed."""


class MissingSlot(NavTokenMergingError, KeyError):
    """An instruction template slot was not provided."""
