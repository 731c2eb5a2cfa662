"""
Discrete-event model of non-blocking deployment.

The robot sends a frame at the start and after every completed action, except
after the terminal one. The policy plans from the state at capture time; the
batch reaches the server after ``comm``, waits for the server, takes
``inference`` and returns after another ``comm``. Every arrival after the first
supersedes the previous batch, even when its queue is already empty; the action
in flight always completes. Times are integer microseconds and same-time events
run batch arrivals first, then robot events, then insertion order.
"""

import heapq
import logging
from itertools import count

from nav_token_merging.core.constants.navigation import Sensing
from nav_token_merging.packages.nav_agents.policies import ActionBatch, Policy, PolicyRequest
from nav_token_merging.packages.prompt.token_sequence import visual_token_count
from nav_token_merging.packages.world.episode import Episode
from nav_token_merging.packages.world.local_view import LocalView
from nav_token_merging.packages.world.simulator import reset
from nav_token_merging.packages.world.world_enum import Action

from .blocking import answer_if_needed
from .latency import LatencyModel
from .observation import ObservationPipeline, RolloutResult
from .trace import EventKind, EventTrace

logger = logging.getLogger(__name__)

ARRIVAL_PRIORITY = 0
ROBOT_PRIORITY = 1

_ARRIVE = "arrive"
_START = "start"
_FINISH = "finish"


def run_nonblocking(
    episode: Episode,
    policy: Policy,
    latency: LatencyModel,
    pipeline: ObservationPipeline | None = None,
    view_radius: int = Sensing.VIEW_RADIUS_CELLS,
) -> tuple[RolloutResult, EventTrace]:
    pipeline = pipeline or ObservationPipeline(episode.instruction, enabled=False)
    state = reset(episode, view_radius)
    trace = EventTrace(episode_id=episode.episode_id)
    heap: list[tuple[int, int, int, str, object]] = []
    order = count()

    def schedule(time_us: int, priority: int, kind: str, payload: object = None) -> None:
        heapq.heappush(heap, (time_us, priority, next(order), kind, payload))

    server_free_us = 0
    frames_sent = 0
    max_tokens = 0

    def send_frame(now: int, view: LocalView | None) -> None:
        nonlocal server_free_us, frames_sent, max_tokens
        pipeline.observe(view)
        frame = frames_sent
        frames_sent += 1
        trace.add(now, EventKind.FRAME_SENT, frame=frame, step=state.step_count)

        prompt = pipeline.prompt()
        if prompt is not None:
            max_tokens = max(max_tokens, visual_token_count(prompt))
        batch = policy.next_actions(PolicyRequest(state=state.snapshot(), token_sequence=prompt))
        start = max(now + latency.comm_us, server_free_us)
        server_free_us = start + latency.inference_us
        schedule(server_free_us + latency.comm_us, ARRIVAL_PRIORITY, _ARRIVE, (frame, batch))

    queue: list[Action] = []
    queue_batch: int | None = None
    busy = False
    batches = 0

    send_frame(0, state.render_local_view() if pipeline.enabled else None)
    while heap:
        now, _, _, kind, payload = heapq.heappop(heap)

        if kind == _ARRIVE:
            frame, batch = payload  # type: ignore[misc]
            assert isinstance(batch, ActionBatch)
            batches += 1
            trace.add(now, EventKind.BATCH_ARRIVED, batch_id=frame, batch=list(batch.actions))
            if queue_batch is not None:
                trace.add(
                    now, EventKind.BATCH_SUPERSEDED, batch_id=queue_batch, dropped=list(queue)
                )
            queue, queue_batch = batch.effective(), frame
            if not busy:
                schedule(now, ROBOT_PRIORITY, _START)

        elif kind == _START:
            if busy or not queue:
                continue
            action = queue.pop(0)
            busy = True
            trace.add(
                now,
                EventKind.ACTION_STARTED,
                batch_id=queue_batch,
                action=action,
                step=state.step_count + 1,
            )
            schedule(now + latency.action_us, ROBOT_PRIORITY, _FINISH, action)

        else:
            assert isinstance(payload, Action)
            step = state.step(payload, render=pipeline.enabled)
            busy = False
            trace.add(now, EventKind.ACTION_FINISHED, action=payload, step=state.step_count)
            if state.done:
                break
            send_frame(now, step.frame)
            schedule(now, ROBOT_PRIORITY, _START)

    logger.debug(
        "%s finished after %d steps, %d superseded batches",
        episode.episode_id,
        state.step_count,
        trace.count(EventKind.BATCH_SUPERSEDED),
    )
    rollout = RolloutResult(
        trajectory=state.trajectory,
        answer=answer_if_needed(state, policy, pipeline),
        batches=batches,
        visual_tokens=max_tokens,
    )
    return rollout, trace
