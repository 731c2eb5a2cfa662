from itertools import pairwise

import numpy as np
import pytest
from pydantic import ValidationError

from nav_token_merging.packages.features.extractor import FeatureConfig, extract_features
from nav_token_merging.packages.features.frame_features import cosine_similarity, grid_pool
from nav_token_merging.packages.features.streams import StreamKind, frame_stream, take_frames
from nav_token_merging.packages.world.local_view import CellState, LocalView, VisibleTag


class TestExtractFeatures:
    """Test cases for the synthetic feature extractor."""

    @pytest.fixture
    def config(self):
        """Default token grid."""
        return FeatureConfig()

    @pytest.fixture
    def view(self):
        """A 17x17 patch with a wall on the left and one tagged chair."""
        occupancy = np.zeros((17, 17), dtype=np.int8)
        occupancy[:, 0] = CellState.OBSTACLE
        tags = (VisibleTag(kind="object", label="chair", row=4, col=10),)
        return LocalView(occupancy=occupancy, heading=90, tags=tags)

    def test_output_shape(self, view, config):
        """Features are n_x tokens by c channels."""
        features = extract_features(view, config, frame_index=3)

        assert features.tokens.shape == (256, 32)
        assert features.frame_index == 3

    def test_deterministic(self, view, config):
        """Same view and seed give bitwise-identical features."""
        first = extract_features(view, config)
        second = extract_features(LocalView(view.occupancy.copy(), view.heading, view.tags), config)

        assert np.array_equal(first.tokens, second.tokens)

    def test_seed_changes_features(self, view):
        """A different extractor seed gives different features."""
        a = extract_features(view, FeatureConfig(feature_seed=0))
        b = extract_features(view, FeatureConfig(feature_seed=1))

        assert not np.array_equal(a.tokens, b.tokens)

    def test_one_cell_difference_is_visible(self, view, config):
        """Changing one occupancy cell lowers the cosine of the fully pooled token."""
        occupancy = view.occupancy.copy()
        occupancy[8, 12] = CellState.OBSTACLE
        changed = LocalView(occupancy=occupancy, heading=view.heading, tags=view.tags)

        a = grid_pool(extract_features(view, config), 16)
        b = grid_pool(extract_features(changed, config), 16)

        assert cosine_similarity(a, b) < 1.0

    def test_heading_changes_features(self, view, config):
        """The same patch seen from another heading encodes differently."""
        turned = LocalView(occupancy=view.occupancy, heading=120, tags=view.tags)

        a = extract_features(view, config)
        b = extract_features(turned, config)

        assert not np.array_equal(a.tokens, b.tokens)

    def test_small_grid(self, view):
        """Non-default grids resample the patch."""
        features = extract_features(view, FeatureConfig(n_x=16, c=4))

        assert features.tokens.shape == (16, 4)

    def test_non_square_grid_rejected(self):
        """n_x must be a perfect square."""
        with pytest.raises(ValidationError):
            FeatureConfig(n_x=250)


class TestFrameStreams:
    """Test cases for synthetic frame streams."""

    def test_constant_stream_repeats(self):
        """Every frame of a constant stream has the same tokens."""
        frames = take_frames(StreamKind.CONSTANT, 3, n_x=16, c=4, seed=5)

        assert np.array_equal(frames[0].tokens, frames[2].tokens)
        assert [f.frame_index for f in frames] == [0, 1, 2]

    def test_orthogonal_stream(self):
        """Consecutive orthogonal frames have cosine 0 after any pooling."""
        frames = take_frames("orthogonal", 3, n_x=256, c=8)

        for a, b in pairwise(frames):
            assert cosine_similarity(grid_pool(a, 16), grid_pool(b, 16)) == 0.0

    def test_random_stream_is_seeded(self):
        """The same seed reproduces a random stream."""
        a = next(frame_stream("random", 16, 4, seed=9))
        b = next(frame_stream("random", 16, 4, seed=9))

        assert np.array_equal(a.tokens, b.tokens)
