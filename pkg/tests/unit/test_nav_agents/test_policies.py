import pytest
from pydantic import ValidationError

from nav_token_merging.core.constants.navigation import Embodiment
from nav_token_merging.core.errors import EpisodeFinished
from nav_token_merging.packages.executor.blocking import run_blocking
from nav_token_merging.packages.nav_agents.oracle import oracle_next_actions, search_poses
from nav_token_merging.packages.nav_agents.planner import distance_field
from nav_token_merging.packages.nav_agents.policies import (
    ActionBatch,
    LiteralInstructionAgent,
    NoisyExpertAgent,
    OracleAgent,
    PolicyRequest,
    RandomAgent,
    ReplayAgent,
)
from nav_token_merging.packages.prompt.token_sequence import Instruction
from nav_token_merging.packages.world.episode import (
    EQAGoal,
    GenerationConfig,
    generate_episode,
    reference_path_length,
)
from nav_token_merging.packages.world.geometry import Pose
from nav_token_merging.packages.world.simulator import reset
from nav_token_merging.packages.world.success import check_success
from nav_token_merging.packages.world.world_enum import MOTION_ACTIONS, Action, TaskKind

F, L, R, S = Action.FORWARD, Action.TURN_LEFT, Action.TURN_RIGHT, Action.STOP
START = Pose(x=1.125, y=1.125, heading=0)
AGENT_RADIUS = Embodiment.AGENT_RADIUS_M


@pytest.fixture
def chair_ahead(make_room, make_object_nav_episode):
    """Chair 1.25 m straight ahead in an open room."""
    return make_object_nav_episode(make_room(12, 12), START, [("chair", (4, 9))])


@pytest.fixture
def chair_behind(make_room, make_object_nav_episode):
    """Same room, agent facing away from the chair."""
    start = START.model_copy(update={"heading": 180})
    return make_object_nav_episode(make_room(12, 12), start, [("chair", (4, 9))])


class TestActionBatch:
    """Test cases for four-action batches."""

    def test_padded(self):
        """Everything after the first STOP becomes STOP."""
        batch = ActionBatch.padded([F, S, F])

        assert batch.actions == (F, S, S, S)
        assert batch.effective() == [F, S]
        assert batch.first is F

    def test_truncated(self):
        assert ActionBatch.padded([L, L, F, F, F, R]).actions == (L, L, F, F)

    def test_empty_is_all_stop(self):
        assert ActionBatch.padded([]).actions == (S, S, S, S)

    def test_motion_after_stop_rejected(self):
        with pytest.raises(ValidationError):
            ActionBatch(actions=(S, F, S, S))

    def test_length_is_four(self):
        with pytest.raises(ValidationError):
            ActionBatch(actions=(F, F, F))


class TestOracle:
    """Test cases for the shortest-path expert."""

    def test_walks_straight_then_stops(self, chair_ahead):
        """Two steps bring the agent within the stop margin."""
        state = reset(chair_ahead)

        assert oracle_next_actions(state) == [F, F, S]
        assert OracleAgent().next_actions(PolicyRequest(state)).actions == (F, F, S, S)

    def test_turns_toward_goal(self, chair_behind):
        """A half turn goes left first."""
        state = reset(chair_behind)

        assert oracle_next_actions(state) == [L, L, L, L]

    def test_does_not_advance_state(self, chair_ahead):
        """Look-ahead runs on a snapshot."""
        state = reset(chair_ahead)

        oracle_next_actions(state)

        assert state.step_count == 0
        assert state.pose == START
        assert state.trajectory.actions == []

    def test_finished_episode(self, chair_ahead):
        state = reset(chair_ahead)
        state.step(S)

        with pytest.raises(EpisodeFinished):
            oracle_next_actions(state)

    def test_rollout_succeeds(self, chair_behind):
        """Executing first actions one at a time solves the episode."""
        state = reset(chair_behind)
        agent = OracleAgent()
        while not state.done:
            state.step(agent.next_actions(PolicyRequest(state)).first, render=False)

        assert state.stopped
        assert check_success(chair_behind, state.trajectory).success

    def test_answers_eqa(self, chair_ahead):
        episode = chair_ahead.model_copy(
            update={
                "task_kind": TaskKind.EQA,
                "goal": EQAGoal(
                    question="What color is the chair?", answer="red", target_object_id=0
                ),
            }
        )

        assert OracleAgent().answer(PolicyRequest(reset(episode))) == "red"
        assert OracleAgent().answer(PolicyRequest(reset(chair_ahead))) == ""


class TestNoisyExpert:
    """Test cases for the noisy expert."""

    def test_zero_noise_is_the_oracle(self, chair_behind):
        state = reset(chair_behind)

        noisy = NoisyExpertAgent(epsilon=0.0).next_actions(PolicyRequest(state))

        assert noisy == OracleAgent().next_actions(PolicyRequest(state))

    def test_full_noise_keeps_stop(self, chair_ahead):
        """Only motions are replaced; STOP stays."""
        state = reset(chair_ahead)

        batch = NoisyExpertAgent(epsilon=1.0, seed=3).next_actions(PolicyRequest(state))

        assert batch.actions[2:] == (S, S)
        assert all(a in MOTION_ACTIONS for a in batch.actions[:2])

    def test_seeded(self, chair_behind):
        state = reset(chair_behind)
        agent = NoisyExpertAgent(epsilon=0.5, seed=7)

        assert agent.next_actions(PolicyRequest(state)) == agent.next_actions(
            PolicyRequest(state)
        )

    def test_epsilon_range(self):
        with pytest.raises(ValueError):
            NoisyExpertAgent(epsilon=1.5)


class TestRandomAgent:
    def test_seeded_per_step(self, chair_ahead):
        """Same seed and step give the same batch."""
        state = reset(chair_ahead)

        a = RandomAgent(seed=1).next_actions(PolicyRequest(state))
        b = RandomAgent(seed=1).next_actions(PolicyRequest(state))

        assert a == b
        assert len(a.actions) == 4

    def test_answers_nothing(self, chair_ahead):
        assert RandomAgent().answer(PolicyRequest(reset(chair_ahead))) == ""


class TestRecordedAgents:
    """Test cases for literal and replay policies."""

    def test_literal_follows_text(self, chair_ahead):
        """The instruction is parsed into actions and read from the current step."""
        text = "move forward 2 steps, then turn left 1 step, and finally stop."
        episode = chair_ahead.model_copy(
            update={"instruction": Instruction(text=text, task_kind=TaskKind.VLN)}
        )
        state = reset(episode)
        agent = LiteralInstructionAgent()

        assert agent.next_actions(PolicyRequest(state)).actions == (F, F, L, S)
        state.step(F)
        state.step(F)
        assert agent.next_actions(PolicyRequest(state)).actions == (L, S, S, S)

    def test_replay(self, chair_ahead):
        state = reset(chair_ahead)
        agent = ReplayAgent({chair_ahead.episode_id: [R, R, F, L, F]})

        assert agent.next_actions(PolicyRequest(state)).actions == (R, R, F, L)
        state.step(R)
        assert agent.next_actions(PolicyRequest(state)).actions == (R, F, L, F)

    def test_replay_unknown_episode_stops(self, chair_ahead):
        agent = ReplayAgent({})

        assert agent.next_actions(PolicyRequest(reset(chair_ahead))).actions == (S, S, S, S)


class TestOracleGeneratedEpisodes:
    """Seeded static episodes whose layouts trapped a cell-by-cell descent."""

    @pytest.mark.parametrize(
        ("task", "seed"),
        [
            (TaskKind.VLN, 44),
            (TaskKind.OBJECT_NAV, 93),
            (TaskKind.OBJECT_NAV, 95),
            (TaskKind.EQA, 34),
        ],
    )
    def test_solved(self, task, seed):
        episode = generate_episode(task, GenerationConfig(), seed)

        rollout = run_blocking(episode, OracleAgent())

        record = check_success(episode, rollout.trajectory, rollout.answer)
        assert record.success
        assert rollout.trajectory.stopped
        assert rollout.trajectory.path_length <= 1.3 * reference_path_length(episode) + 0.5


class TestSearchPoses:
    """Test cases for the pose-level search."""

    def test_goes_around_a_wall(self, make_room, make_object_nav_episode):
        """The plan leads around a wall the straight line would cross."""
        grid = make_room(16, 16)
        grid[1:12, 7] = True
        episode = make_object_nav_episode(grid, START, [("chair", (4, 12))])
        state = reset(episode)
        target = state.current_target()
        field = distance_field(state.scene, target.cells(state.scene))

        steps = search_poses(state.scene, field, target, target.radius, START)

        assert steps is not None
        assert steps[0][0] == (START.x, START.y, START.heading)
        pose = START
        for key, action in steps:
            assert key == (pose.x, pose.y, pose.heading)
            if action is F:
                assert not state.scene.disc_hits_obstacle(pose.forward_point(), AGENT_RADIUS)
                pose = pose.moved_to(pose.forward_point())
            else:
                pose = pose.turned(action)
        assert target.distance_from(pose.point) <= target.radius
        assert max(key[1] for key, _ in steps) > 3.0

    def test_unreachable_goal(self, make_room, make_object_nav_episode):
        grid = make_room(12, 12)
        grid[:, 6] = True
        episode = make_object_nav_episode(grid, START, [("chair", (4, 9))])
        state = reset(episode)
        target = state.current_target()
        field = distance_field(state.scene, target.cells(state.scene))

        assert search_poses(state.scene, field, target, target.radius, START) is None

    def test_stops_at_a_known_pose(self, chair_ahead):
        """A pose already planned ends the search."""
        state = reset(chair_ahead)
        target = state.current_target()
        field = distance_field(state.scene, target.cells(state.scene))
        ahead = START.moved_to(START.forward_point())
        known = {(ahead.x, ahead.y, ahead.heading): F}

        steps = search_poses(state.scene, field, target, 0.0, START, known)

        assert steps == [((START.x, START.y, START.heading), F)]
