import numpy as np
import pytest

from nav_token_merging.core.errors import Unreachable
from nav_token_merging.packages.nav_agents.planner import (
    SQRT2,
    astar_cells,
    descend,
    distance_field,
    geodesic_distance,
    largest_component,
    plan_shortest_path,
)
from nav_token_merging.packages.world.scene import Scene


def path_cost(start, cells) -> float:
    """Cost in cells of walking ``start`` then ``cells``."""
    total = 0.0
    previous = start
    for cell in cells:
        dr, dc = abs(cell[0] - previous[0]), abs(cell[1] - previous[1])
        assert max(dr, dc) == 1
        total += SQRT2 if dr and dc else 1.0
        previous = cell
    return total


class TestPlanShortestPath:
    """Test cases for the deterministic planner."""

    @pytest.fixture
    def corridor(self, make_room):
        """5x15 room whose only traversable row is row 2, columns 2 to 12."""
        return Scene(occupancy=make_room(5, 15))

    def test_corridor(self, corridor):
        path = plan_shortest_path(corridor, (2, 2), (2, 12))

        assert path.cells == tuple((2, c) for c in range(3, 13))
        assert path.cost_m == 2.5
        assert path.turns == 0

    def test_points_map_to_cells(self, corridor):
        """A metric point plans from the cell that contains it."""
        path = plan_shortest_path(corridor, (0.625, 0.625), (3.125, 0.625))

        assert path.cells[-1] == (2, 12)

    def test_same_cell(self, corridor):
        path = plan_shortest_path(corridor, (2, 5), (2, 5))

        assert path.cells == ()
        assert path.cost_cells == 0.0

    def test_non_traversable_endpoint(self, corridor):
        with pytest.raises(Unreachable):
            plan_shortest_path(corridor, (1, 5), (2, 12))

    def test_disconnected(self, make_room):
        grid = make_room(9, 15)
        grid[:, 7] = True

        with pytest.raises(Unreachable):
            plan_shortest_path(Scene(occupancy=grid), (4, 2), (4, 12))

    def test_fewer_turns_win_ties(self, make_room):
        """In an open room the optimal path bends exactly once."""
        scene = Scene(occupancy=make_room(12, 12))

        path = plan_shortest_path(scene, (2, 2), (4, 8))

        assert path.cost_cells == pytest.approx(4 + 2 * SQRT2)
        assert path.turns == 1

    @pytest.mark.parametrize("seed", range(5))
    def test_matches_brute_force_distances(self, make_room, seed):
        """Planner, A* and the distance field agree on cost in random rooms."""
        rng = np.random.default_rng(seed)
        grid = make_room(16, 16)
        grid |= rng.random((16, 16)) < 0.04
        scene = Scene(occupancy=grid)
        component = np.argwhere(largest_component(scene))
        start, goal = (tuple(int(v) for v in component[i]) for i in (0, -1))

        planned = plan_shortest_path(scene, start, goal)
        field = distance_field(scene, [goal])

        assert planned.cost_cells == pytest.approx(field[start])
        assert path_cost(start, planned.cells) == pytest.approx(planned.cost_cells)
        assert path_cost(start, astar_cells(scene, start, goal)) == pytest.approx(field[start])


class TestDistanceField:
    """Test cases for the multi-source distance field."""

    def test_values(self, make_room):
        scene = Scene(occupancy=make_room(12, 12))

        field = distance_field(scene, [(5, 5)])

        assert field[5, 5] == 0.0
        assert field[5, 8] == 3.0
        assert field[7, 7] == pytest.approx(2 * SQRT2)
        assert field[0, 0] == np.inf

    def test_descend_reaches_goal(self, make_room):
        scene = Scene(occupancy=make_room(12, 12))
        field = distance_field(scene, [(5, 5)])

        chain = descend(scene, field, (2, 9), max_cells=20)

        assert chain[-1] == (5, 5)
        assert path_cost((2, 9), chain) == pytest.approx(field[2, 9])

    def test_geodesic_distance_in_meters(self, make_room):
        scene = Scene(occupancy=make_room(5, 15))

        assert geodesic_distance(scene, (0.625, 0.625), [(2, 12)]) == 2.5


class TestLargestComponent:
    def test_picks_bigger_side(self, make_room):
        """A wall at column 5 leaves a small left room and a bigger right room."""
        grid = make_room(10, 16)
        grid[:, 5] = True
        scene = Scene(occupancy=grid)

        mask = largest_component(scene)

        assert mask[4, 10]
        assert not mask[4, 2]

    def test_no_free_cells(self):
        scene = Scene(occupancy=np.ones((5, 5), dtype=bool))

        assert not largest_component(scene).any()
