import json

import numpy as np
import pytest

from nav_token_merging.core.errors import ConfigError
from nav_token_merging.packages.executor.blocking import run_blocking
from nav_token_merging.packages.executor.latency import LatencyModel, parse_latency
from nav_token_merging.packages.executor.nonblocking import run_nonblocking
from nav_token_merging.packages.executor.observation import ObservationPipeline
from nav_token_merging.packages.executor.trace import EventKind, EventTrace
from nav_token_merging.packages.nav_agents.policies import (
    ActionBatch,
    NoisyExpertAgent,
    OracleAgent,
    ReplayAgent,
)
from nav_token_merging.packages.world.episode import EQAGoal, GenerationConfig, generate_episode
from nav_token_merging.packages.world.geometry import Pose
from nav_token_merging.packages.world.world_enum import Action, TaskKind

F, L, S = Action.FORWARD, Action.TURN_LEFT, Action.STOP
START = Pose(x=1.125, y=1.125, heading=0)
SECOND = 1_000_000


@pytest.fixture
def episode(make_room, make_object_nav_episode):
    """Chair 1.25 m straight ahead in an open room."""
    return make_object_nav_episode(make_room(12, 12), START, [("chair", (4, 9))])


def replaying(episode, actions):
    return ReplayAgent({episode.episode_id: list(actions)})


def timeline(trace: EventTrace) -> list[tuple]:
    return [(e.time_us, e.event.value, e.batch_id, e.action, e.step) for e in trace.events]


class TestRunNonblocking:
    """Golden traces of the discrete-event executor."""

    def test_zero_latency(self, episode):
        """Every fresh batch supersedes the leftover queue immediately."""
        latency = LatencyModel(inference_s=0.0, comm_s=0.0, action_s=1.0)

        rollout, trace = run_nonblocking(episode, replaying(episode, [F, F, S]), latency)

        assert rollout.trajectory.actions == [F, F, S]
        assert timeline(trace) == [
            (0, "FrameSent", None, None, 0),
            (0, "BatchArrived", 0, None, None),
            (0, "ActionStarted", 0, F, 1),
            (SECOND, "ActionFinished", None, F, 1),
            (SECOND, "FrameSent", None, None, 1),
            (SECOND, "BatchArrived", 1, None, None),
            (SECOND, "BatchSuperseded", 0, None, None),
            (SECOND, "ActionStarted", 1, F, 2),
            (2 * SECOND, "ActionFinished", None, F, 2),
            (2 * SECOND, "FrameSent", None, None, 2),
            (2 * SECOND, "BatchArrived", 2, None, None),
            (2 * SECOND, "BatchSuperseded", 1, None, None),
            (2 * SECOND, "ActionStarted", 2, S, 3),
            (3 * SECOND, "ActionFinished", None, S, 3),
        ]
        assert trace.events[6].dropped == [F, S]
        assert rollout.batches == 3

    def test_slow_actions_run_stale_plans(self, episode):
        """With 10 s actions the robot keeps executing the previous batch's next action."""
        latency = LatencyModel(inference_s=0.2, comm_s=0.3, action_s=10.0)

        rollout, trace = run_nonblocking(episode, replaying(episode, [F, F, S]), latency)

        assert rollout.trajectory.actions == [F, F, F, S]
        assert timeline(trace) == [
            (0, "FrameSent", None, None, 0),
            (800_000, "BatchArrived", 0, None, None),
            (800_000, "ActionStarted", 0, F, 1),
            (10_800_000, "ActionFinished", None, F, 1),
            (10_800_000, "FrameSent", None, None, 1),
            (10_800_000, "ActionStarted", 0, F, 2),
            (11_600_000, "BatchArrived", 1, None, None),
            (11_600_000, "BatchSuperseded", 0, None, None),
            (20_800_000, "ActionFinished", None, F, 2),
            (20_800_000, "FrameSent", None, None, 2),
            (20_800_000, "ActionStarted", 1, F, 3),
            (21_600_000, "BatchArrived", 2, None, None),
            (21_600_000, "BatchSuperseded", 1, None, None),
            (30_800_000, "ActionFinished", None, F, 3),
            (30_800_000, "FrameSent", None, None, 3),
            (30_800_000, "ActionStarted", 2, S, 4),
            (31_600_000, "BatchArrived", 3, None, None),
            (31_600_000, "BatchSuperseded", 2, None, None),
            (40_800_000, "ActionFinished", None, S, 4),
        ]
        assert trace.events[-2].dropped == []
        assert trace.is_ordered()
        assert trace.actions_matched()

    def test_stop_only(self, episode):
        """A first batch of STOP ends the episode after one round."""
        latency = LatencyModel(inference_s=0.0, comm_s=0.0, action_s=1.0)

        rollout, trace = run_nonblocking(episode, replaying(episode, []), latency)

        assert rollout.trajectory.actions == [S]
        assert rollout.batches == 1
        assert [e.event for e in trace.events] == [
            EventKind.FRAME_SENT,
            EventKind.BATCH_ARRIVED,
            EventKind.ACTION_STARTED,
            EventKind.ACTION_FINISHED,
        ]
        assert trace.events[-1].time_us == SECOND

    def test_server_queues_requests(self, episode):
        """Inference longer than an action delays later batches behind the busy server."""
        latency = LatencyModel(inference_s=3.0, comm_s=0.0, action_s=1.0)

        _, trace = run_nonblocking(episode, replaying(episode, [F, F, F, F, F, S]), latency)

        arrivals = [e.time_us for e in trace.events if e.event is EventKind.BATCH_ARRIVED]
        assert arrivals[:3] == [3 * SECOND, 7 * SECOND, 10 * SECOND]

    def test_oracle_solves_episode(self, episode):
        latency = LatencyModel()

        rollout, trace = run_nonblocking(episode, OracleAgent(), latency)

        assert rollout.trajectory.stopped
        assert trace.is_ordered()
        assert trace.actions_matched()

    @pytest.mark.parametrize("seed", [1, 2, 3])
    def test_slow_actions_supersede_every_batch(self, seed):
        """Each arrival after the first replaces the previous batch."""
        episode = generate_episode(TaskKind.OBJECT_NAV, GenerationConfig(), seed)
        latency = LatencyModel(inference_s=0.2, comm_s=0.3, action_s=10.0)

        rollout, trace = run_nonblocking(episode, OracleAgent(), latency)

        steps = rollout.trajectory.steps
        assert rollout.batches == steps
        assert trace.count(EventKind.BATCH_SUPERSEDED) == steps - 1
        superseded = [e.batch_id for e in trace.events if e.event is EventKind.BATCH_SUPERSEDED]
        assert superseded == list(range(steps - 1))

    def test_actions_come_from_the_newest_batch(self):
        """Under random latencies every started action is the next one of the newest batch."""
        rng = np.random.default_rng(11)
        for seed in range(10):
            episode = generate_episode(TaskKind.OBJECT_NAV, GenerationConfig(), seed)
            latency = LatencyModel(
                inference_s=float(rng.uniform(0.0, 2.0)),
                comm_s=float(rng.uniform(0.0, 1.0)),
                action_s=float(rng.uniform(0.1, 3.0)),
            )
            policy = NoisyExpertAgent(epsilon=0.3, seed=seed)

            rollout, trace = run_nonblocking(episode, policy, latency)

            newest, pending = None, []
            for event in trace.events:
                if event.event is EventKind.BATCH_ARRIVED:
                    newest, pending = event.batch_id, ActionBatch(actions=event.batch).effective()
                elif event.event is EventKind.ACTION_STARTED:
                    assert event.batch_id == newest
                    assert event.action == pending.pop(0)
            assert trace.count(EventKind.ACTION_STARTED) == rollout.trajectory.steps

    def test_trace_jsonl_omits_unset_fields(self, episode):
        latency = LatencyModel(inference_s=0.0, comm_s=0.0, action_s=1.0)

        _, trace = run_nonblocking(episode, replaying(episode, []), latency)

        first = json.loads(trace.to_jsonl().splitlines()[0])
        assert first == {
            "time_us": 0,
            "event": "FrameSent",
            "episode_id": episode.episode_id,
            "frame": 0,
            "step": 0,
        }


class TestRunBlocking:
    """Test cases for the synchronous executor."""

    def test_full_batches(self, episode):
        """Four actions run per plan."""
        rollout = run_blocking(episode, replaying(episode, [L, L, L, L, S]))

        assert rollout.trajectory.actions == [L, L, L, L, S]
        assert rollout.batches == 2

    def test_stop_mid_batch_replans(self, episode):
        """A STOP after the first position ends the batch, not the episode."""
        rollout = run_blocking(episode, replaying(episode, [F, S]))

        assert rollout.trajectory.actions == [F, S]
        assert rollout.batches == 2

    def test_pipeline_tracks_visual_tokens(self, episode):
        """The prompt grows by one short-term entry per observed frame."""
        pipeline = ObservationPipeline(episode.instruction)

        rollout = run_blocking(episode, replaying(episode, [F, S]), pipeline=pipeline)

        assert pipeline.memory.t == 3
        assert rollout.visual_tokens == 64 + 4

    def test_eqa_answer(self, episode):
        eqa = episode.model_copy(
            update={
                "task_kind": TaskKind.EQA,
                "goal": EQAGoal(
                    question="What color is the chair?", answer="red", target_object_id=0
                ),
            }
        )

        rollout = run_blocking(eqa, OracleAgent())

        assert rollout.answer == "red"
        assert rollout.trajectory.stopped

    def test_no_answer_outside_eqa(self, episode):
        assert run_blocking(episode, OracleAgent()).answer is None


class TestLatency:
    """Test cases for latency settings."""

    def test_parse(self):
        assert parse_latency("inference=0.1, comm=0,action=2") == {
            "inference_s": 0.1,
            "comm_s": 0.0,
            "action_s": 2.0,
        }

    @pytest.mark.parametrize("text", ["speed=1", "inference", "comm=fast"])
    def test_parse_errors(self, text):
        with pytest.raises(ConfigError) as exc_info:
            parse_latency(text)

        assert exc_info.value.key == "latency"

    def test_microseconds(self):
        model = LatencyModel()

        assert (model.inference_us, model.comm_us, model.action_us) == (200_000, 300_000, SECOND)
