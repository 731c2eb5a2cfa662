# tests/unit/conftest.py
import numpy as np
import pytest
from dotenv import load_dotenv

from nav_token_merging.core.decorators.op_counter import count_operation
from nav_token_merging.packages.prompt.token_sequence import Instruction
from nav_token_merging.packages.world.episode import Episode, ObjectNavGoal
from nav_token_merging.packages.world.geometry import Pose
from nav_token_merging.packages.world.scene import Cell, ObjectInstance, Scene
from nav_token_merging.packages.world.world_enum import TaskKind


@pytest.fixture(scope="session", autouse=True)
def load_test_env():
    """Load test environment variables."""
    print("Loading test environment variables...")
    load_dotenv(".env.test", override=True)


@pytest.fixture(autouse=True)
def clear_run_env(monkeypatch):
    """Keep the developer's NTM_* settings out of config tests."""
    for name in ("NTM_OUT_DIR", "NTM_WORKERS"):
        monkeypatch.delenv(name, raising=False)


@pytest.fixture
def op_counts():
    """The shared operation counter, emptied before and after the test."""
    count_operation.reset()
    yield count_operation
    count_operation.reset()


def room_grid(rows: int, cols: int) -> np.ndarray:
    """Occupancy grid with a one-cell wall around the border."""
    grid = np.zeros((rows, cols), dtype=bool)
    grid[0, :] = grid[-1, :] = grid[:, 0] = grid[:, -1] = True
    return grid


@pytest.fixture
def make_room():
    """Factory for walled occupancy grids."""
    return room_grid


@pytest.fixture
def make_object_nav_episode():
    """Factory for hand-built ObjectNav episodes in a walled room."""

    def build(
        grid: np.ndarray,
        start: Pose,
        objects: list[tuple[str, Cell]],
        category: str | None = None,
        max_steps: int = 500,
    ) -> Episode:
        scene = Scene(occupancy=grid)
        instances = []
        for object_id, (name, cell) in enumerate(objects):
            x, y = scene.cell_center(cell)
            instances.append(
                ObjectInstance(
                    object_id=object_id,
                    category=name,
                    color="red",
                    x=x,
                    y=y,
                    room=scene.room_at((x, y)),
                )
            )
        scene = scene.model_copy(update={"objects": instances})
        category = category or objects[0][0]
        return Episode(
            episode_id="objectnav-test",
            task_kind=TaskKind.OBJECT_NAV,
            scene=scene,
            start_pose=start,
            instruction=Instruction(
                text=f"Search for a {category}.", task_kind=TaskKind.OBJECT_NAV
            ),
            goal=ObjectNavGoal(
                category=category,
                instance_ids=[i.object_id for i in instances if i.category == category],
            ),
            max_steps=max_steps,
            seed=0,
        )

    return build
