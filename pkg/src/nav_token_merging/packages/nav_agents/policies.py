from abc import ABC, abstractmethod
from dataclasses import dataclass

import numpy as np
from pydantic import BaseModel, ConfigDict, field_validator

from nav_token_merging.core.constants.navigation import EpisodeLimits
from nav_token_merging.packages.dataset.templates import parse_low_level_instruction
from nav_token_merging.packages.prompt.token_sequence import TokenSequence
from nav_token_merging.packages.world.episode import EQAGoal
from nav_token_merging.packages.world.simulator import EpisodeState
from nav_token_merging.packages.world.world_enum import ALL_ACTIONS, MOTION_ACTIONS, Action

from .nav_enum import PolicyKind
from .oracle import oracle_next_actions


class ActionBatch(BaseModel):
    """Exactly four planned actions; everything after the first STOP is STOP."""

    model_config = ConfigDict(frozen=True)

    actions: tuple[Action, Action, Action, Action]

    @field_validator("actions")
    @classmethod
    def _stop_padding(cls, actions: tuple[Action, ...]) -> tuple[Action, ...]:
        if Action.STOP in actions:
            first = actions.index(Action.STOP)
            if any(a is not Action.STOP for a in actions[first:]):
                raise ValueError("actions after a STOP must be STOP")
        return actions

    @classmethod
    def padded(cls, actions: list[Action]) -> "ActionBatch":
        """Cut at the first STOP and pad with STOP to the batch size."""
        kept: list[Action] = []
        for action in actions[: EpisodeLimits.FORESIGHT]:
            kept.append(action)
            if action is Action.STOP:
                break
        kept.extend([Action.STOP] * (EpisodeLimits.FORESIGHT - len(kept)))
        return cls(actions=tuple(kept))  # type: ignore[arg-type]

    @property
    def first(self) -> Action:
        return self.actions[0]

    def effective(self) -> list[Action]:
        """Actions up to and including the first STOP."""
        out: list[Action] = []
        for action in self.actions:
            out.append(action)
            if action is Action.STOP:
                break
        return out


@dataclass(frozen=True)
class PolicyRequest:
    """Inputs for one inference; only privileged policies read ``state``."""

    state: EpisodeState
    token_sequence: TokenSequence | None = None


class Policy(ABC):
    """Base interface for all navigation policies."""

    kind: PolicyKind

    @abstractmethod
    def next_actions(self, request: PolicyRequest) -> ActionBatch:
        """Plan the next four actions.

        Args:
            request: Prompt tokens and the episode state handle

        Returns:
            A batch of exactly four actions
        """
        pass

    def answer(self, request: PolicyRequest) -> str:
        """Answer the episode question after STOP; navigation-only policies answer nothing."""
        return ""


class OracleAgent(Policy):
    """Shortest-path expert reading the privileged episode state."""

    kind = PolicyKind.ORACLE

    def next_actions(self, request: PolicyRequest) -> ActionBatch:
        return ActionBatch.padded(oracle_next_actions(request.state))

    def answer(self, request: PolicyRequest) -> str:
        goal = request.state.episode.goal
        return goal.answer if isinstance(goal, EQAGoal) else ""


def _step_rng(seed: int, state: EpisodeState) -> np.random.Generator:
    return np.random.default_rng([seed, state.episode.seed, state.step_count])


class NoisyExpertAgent(OracleAgent):
    """Expert whose motions are replaced by a random motion with probability ``epsilon``."""

    kind = PolicyKind.NOISY_EXPERT

    def __init__(self, epsilon: float = 0.2, seed: int = 0):
        if not 0.0 <= epsilon <= 1.0:
            raise ValueError(f"epsilon must be in [0, 1], got {epsilon}")
        self.epsilon = epsilon
        self.seed = seed

    def next_actions(self, request: PolicyRequest) -> ActionBatch:
        expert = super().next_actions(request).effective()
        rng = _step_rng(self.seed, request.state)
        noisy = []
        for action in expert:
            flip = rng.random() < self.epsilon
            if flip and action is not Action.STOP:
                action = MOTION_ACTIONS[int(rng.integers(len(MOTION_ACTIONS)))]
            noisy.append(action)
        return ActionBatch.padded(noisy)


class RandomAgent(Policy):
    kind = PolicyKind.RANDOM

    def __init__(self, seed: int = 0):
        self.seed = seed

    def next_actions(self, request: PolicyRequest) -> ActionBatch:
        rng = _step_rng(self.seed, request.state)
        picks = rng.integers(len(ALL_ACTIONS), size=EpisodeLimits.FORESIGHT)
        return ActionBatch.padded([ALL_ACTIONS[int(i)] for i in picks])


def _recorded_batch(actions: list[Action], step: int) -> ActionBatch:
    return ActionBatch.padded(actions[step : step + EpisodeLimits.FORESIGHT])


class LiteralInstructionAgent(Policy):
    """Executes a low-level instruction word for word and ignores geometry."""

    kind = PolicyKind.LITERAL

    def next_actions(self, request: PolicyRequest) -> ActionBatch:
        state = request.state
        actions = parse_low_level_instruction(state.episode.instruction.text)
        return _recorded_batch(actions, state.step_count)


class ReplayAgent(Policy):
    """Replays recorded action sequences keyed by episode id."""

    kind = PolicyKind.REPLAY

    def __init__(self, recorded: dict[str, list[Action]]):
        self.recorded = recorded

    def next_actions(self, request: PolicyRequest) -> ActionBatch:
        state = request.state
        actions = self.recorded.get(state.episode.episode_id, [])
        return _recorded_batch(actions, state.step_count)
