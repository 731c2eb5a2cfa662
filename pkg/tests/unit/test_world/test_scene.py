import numpy as np
import pytest
from pydantic import ValidationError

from nav_token_merging.packages.world.scene import Scene, decode_rows, encode_rows


class TestScene:
    """Test cases for occupancy-grid scenes."""

    @pytest.fixture
    def scene(self, make_room):
        """Walled 8x10 room with one pillar at (4, 5)."""
        grid = make_room(8, 10)
        grid[4, 5] = True
        return Scene(occupancy=grid)

    def test_dimensions(self, scene):
        assert (scene.rows, scene.cols) == (8, 10)
        assert scene.width_m == 2.5
        assert scene.height_m == 2.0

    def test_traversable_needs_free_neighbourhood(self, scene):
        """A cell is traversable only when its 3x3 block is free."""
        assert scene.is_traversable_cell((2, 2))
        assert not scene.is_traversable_cell((1, 1))
        assert not scene.is_traversable_cell((3, 4))
        assert not scene.is_traversable_cell((4, 5))
        assert not scene.is_traversable_cell((20, 2))

    def test_cell_of_and_centre(self, scene):
        """Cells are (row, col); x runs along columns."""
        assert scene.cell_of((0.6, 1.1)) == (4, 2)
        assert scene.cell_center((4, 2)) == (0.625, 1.125)

    def test_disc_hits_obstacle(self, scene):
        """Discs overlapping a wall or leaving the grid are blocked."""
        assert not scene.disc_hits_obstacle((0.625, 0.625), 0.18)
        assert scene.disc_hits_obstacle((0.375, 0.375), 0.18)
        assert scene.disc_hits_obstacle((1.125, 1.125), 0.18)
        assert scene.disc_hits_obstacle((-0.1, 1.0), 0.01)

    def test_line_traversable(self, scene):
        """Segments through the pillar's neighbourhood are not traversable."""
        assert scene.line_traversable((0.625, 0.625), (0.625, 1.375))
        assert not scene.line_traversable((0.625, 1.125), (2.125, 1.125))

    def test_room_at_quadrants(self, scene):
        assert scene.room_at((0.1, 0.1)) == "bedroom"
        assert scene.room_at((2.4, 0.1)) == "kitchen"
        assert scene.room_at((0.1, 1.9)) == "living room"
        assert scene.room_at((2.4, 1.9)) == "bathroom"

    def test_json_round_trip(self, scene):
        """Scenes serialise the grid run-length encoded."""
        restored = Scene.model_validate_json(scene.model_dump_json())

        assert restored == scene
        assert np.array_equal(restored.occupancy, scene.occupancy)

    def test_grid_is_read_only(self, scene):
        with pytest.raises(ValueError):
            scene.occupancy[2, 2] = True

    def test_tiny_grid_rejected(self):
        """Grids smaller than 3x3 are invalid."""
        with pytest.raises(ValidationError):
            Scene(occupancy=np.zeros((2, 5), dtype=bool))

    def test_lookup_errors(self, scene):
        with pytest.raises(KeyError):
            scene.object_by_id(3)
        with pytest.raises(KeyError):
            scene.human_by_id(0)


class TestRunLengthRows:
    def test_encode(self):
        grid = np.array([[1, 1, 0, 1], [0, 0, 0, 0]], dtype=bool)

        assert encode_rows(grid) == [[[1, 2], [0, 1], [1, 1]], [[0, 4]]]

    def test_ragged_rows_rejected(self):
        with pytest.raises(ValueError):
            decode_rows([[[1, 2]], [[0, 3]]])
