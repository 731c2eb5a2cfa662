from enum import Enum


class PolicyKind(Enum):
    """Enum for selectable policies."""

    ORACLE = "oracle"
    NOISY_EXPERT = "noisy-expert"
    RANDOM = "random"
    LITERAL = "literal"
    REPLAY = "replay"

    def toText(self) -> str:
        """Convert enum value to a more human-readable string."""
        display_names = {
            PolicyKind.ORACLE: "Shortest-path oracle",
            PolicyKind.NOISY_EXPERT: "Oracle with random action noise",
            PolicyKind.RANDOM: "Uniform random actions",
            PolicyKind.LITERAL: "Literal low-level instruction execution",
            PolicyKind.REPLAY: "Replay of recorded actions",
        }
        return display_names.get(self, self.value)


class ExecutorKind(Enum):
    """Enum for rollout executors."""

    BLOCKING = "blocking"
    NONBLOCKING = "nonblocking"
