# src/nav_token_merging/core/constants/navigation.py
"""Navigation constants shared by the world, the policies and the metrics."""


# Discrete action semantics
class ActionGeometry:
    FORWARD_STEP_M = 0.25
    TURN_DEG = 30
    HEADING_COUNT = 12  # 360 / TURN_DEG


class Embodiment:
    AGENT_RADIUS_M = 0.18
    HUMAN_RADIUS_M = 0.3
    CELL_SIZE_M = 0.25


class EpisodeLimits:
    MAX_STEPS = 500
    FORESIGHT = 4


# Success radii per task, meters
class SuccessRadius:
    VLN = 3.0
    OBJECT_NAV = 1.0
    EQA = 1.0
    FOLLOW = 2.0
    LANDMARK = 1.0
    FOLLOW_FACING_DEG = 30.0


class OutputFiles:
    REPORT = "report.json"
    EPISODES = "episodes.csv"
    PROFILE = "profile.csv"
    PROFILE_SWEEP = "profile_sweep.csv"
    SAMPLES = "samples.jsonl"
    TRACE = "trace.jsonl"
    EPISODE = "episode.json"


class Sensing:
    VIEW_RADIUS_CELLS = 8
    FIELD_OF_VIEW_DEG = 90.0
