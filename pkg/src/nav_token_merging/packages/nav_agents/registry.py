from pathlib import Path

from nav_token_merging.core.errors import ConfigError
from nav_token_merging.packages.dataset.samples import read_samples, recorded_actions

from .nav_enum import PolicyKind
from .policies import (
    LiteralInstructionAgent,
    NoisyExpertAgent,
    OracleAgent,
    Policy,
    RandomAgent,
    ReplayAgent,
)


def build_policy(selector: str, epsilon: float = 0.2, seed: int = 0) -> Policy:
    """Create a policy from its config name.

    Names are ``oracle``, ``noisy-expert``, ``random``, ``literal`` and ``replay:<file>``.

    Raises:
        ConfigError: unknown policy name or missing replay file name
    """
    name, _, argument = selector.partition(":")
    try:
        kind = PolicyKind(name)
    except ValueError as e:
        choices = ", ".join(k.value for k in PolicyKind)
        message = f"unknown policy {selector!r}; expected one of {choices}"
        raise ConfigError(message, key="policy") from e

    if kind is PolicyKind.ORACLE:
        return OracleAgent()
    if kind is PolicyKind.NOISY_EXPERT:
        return NoisyExpertAgent(epsilon=epsilon, seed=seed)
    if kind is PolicyKind.RANDOM:
        return RandomAgent(seed=seed)
    if kind is PolicyKind.LITERAL:
        return LiteralInstructionAgent()
    if not argument:
        raise ConfigError("replay needs a sample file, e.g. replay:samples.jsonl", key="policy")
    return ReplayAgent(recorded_actions(read_samples(Path(argument))))
