"""
Robot-side observation pipeline: frame -> features -> merge memory -> prompt.
"""

from dataclasses import dataclass

from nav_token_merging.packages.features.extractor import FeatureConfig, extract_features
from nav_token_merging.packages.memory.merge_memory import MemoryState, MergeConfig, push_frame
from nav_token_merging.packages.prompt.token_sequence import (
    Instruction,
    Projector,
    TokenSequence,
    assemble,
)
from nav_token_merging.packages.world.local_view import LocalView
from nav_token_merging.packages.world.simulator import Trajectory


class ObservationPipeline:
    """Encodes every captured frame into the merge memory.

    When disabled, frames are ignored and prompts are ``None``; privileged
    policies do not read them.
    """

    def __init__(
        self,
        instruction: Instruction,
        feature_config: FeatureConfig | None = None,
        merge_config: MergeConfig | None = None,
        projector: Projector | None = None,
        enabled: bool = True,
    ):
        self.instruction = instruction
        self.feature_config = feature_config or FeatureConfig()
        self.merge_config = merge_config or MergeConfig()
        self.projector = projector
        self.enabled = enabled
        self.memory = MemoryState()
        self.frames_seen = 0

    def observe(self, view: LocalView | None) -> None:
        if not self.enabled or view is None:
            return
        features = extract_features(view, self.feature_config, frame_index=self.frames_seen)
        self.memory = push_frame(self.memory, features, self.merge_config)
        self.frames_seen += 1

    def prompt(self, nav_mode: bool = True) -> TokenSequence | None:
        if not self.enabled or self.memory.t == 0:
            return None
        return assemble(self.memory, self.instruction, nav_mode, self.projector)


@dataclass
class RolloutResult:
    trajectory: Trajectory
    answer: str | None = None
    batches: int = 0
    visual_tokens: int = 0
