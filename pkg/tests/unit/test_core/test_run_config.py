import json
import os
from unittest.mock import patch

import pytest
from pydantic import ValidationError

from nav_token_merging.core.config.run_config import (
    RunConfig,
    load_run_config,
    parse_overrides,
)
from nav_token_merging.core.errors import ConfigError
from nav_token_merging.packages.nav_agents.nav_enum import ExecutorKind
from nav_token_merging.packages.world.world_enum import TaskKind


class TestParseOverrides:
    """Test cases for command-line override parsing."""

    def test_json_values_are_decoded(self):
        """Numbers, booleans and lists are read as JSON."""
        values = parse_overrides(
            ["--episodes=5", "--tau=0.9", "--dagger=true", "--sweep_taus=[0.5]"]
        )

        assert values == {"episodes": 5, "tau": 0.9, "dagger": True, "sweep_taus": [0.5]}

    def test_plain_strings_are_kept(self):
        """Values that are not JSON stay strings."""
        assert parse_overrides(["--task=vln"]) == {"task": "vln"}

    def test_dashes_map_to_underscores(self):
        """--buffer-len and --buffer_len name the same key."""
        assert parse_overrides(["--buffer-len=32"]) == {"buffer_len": 32}

    def test_separate_value_argument(self):
        """--key value is accepted as well as --key=value."""
        assert parse_overrides(["--episodes", "3", "--task", "eqa"]) == {
            "episodes": 3,
            "task": "eqa",
        }

    def test_bare_flag_means_true(self):
        """A flag followed by another flag has no value."""
        assert parse_overrides(["--dagger", "--low-level"]) == {"dagger": True, "low_level": True}

    def test_latency_expands_to_three_keys(self):
        """--latency sets the three latency keys at once."""
        values = parse_overrides(["--latency=inference=0.1,comm=0.05,action=0.5"])

        assert values == {"inference_s": 0.1, "comm_s": 0.05, "action_s": 0.5}

    def test_latency_rejects_unknown_name(self):
        """Unknown latency names are config errors keyed on latency."""
        with pytest.raises(ConfigError) as exc_info:
            parse_overrides(["--latency=network=1"])

        assert exc_info.value.key == "latency"

    def test_positional_argument_is_rejected(self):
        """Arguments must be --key flags."""
        with pytest.raises(ConfigError):
            parse_overrides(["episodes=5"])


class TestRunConfig:
    """Test cases for RunConfig validation and derived views."""

    def test_defaults(self):
        """Defaults match the documented values."""
        config = RunConfig()

        assert config.task is TaskKind.OBJECT_NAV
        assert config.executor is ExecutorKind.BLOCKING
        assert config.merge_config.buffer_len == 64
        assert config.merge_config.tau == 0.95
        assert config.latency_model.comm_s == 0.3
        assert config.feature_config.n_x == 256

    def test_unknown_key_is_rejected(self):
        """Extra keys fail validation."""
        with pytest.raises(ValidationError):
            RunConfig.model_validate({"episode_count": 3})

    def test_bad_pooling_factors_fail_at_load(self):
        """Nested configs are validated with the run config."""
        with pytest.raises(ValidationError):
            RunConfig(alpha_curr=3)

    def test_sweep_taus_out_of_range(self):
        """Sweep thresholds must lie in [0, 1]."""
        with pytest.raises(ValidationError):
            RunConfig(sweep_taus=[0.5, 1.5])

    def test_episode_seeds_are_consecutive(self):
        """Episode i uses seed + i."""
        assert RunConfig(seed=7, episodes=3).episode_seeds() == [7, 8, 9]


class TestLoadRunConfig:
    """Test cases for merging environment, file and flags."""

    @pytest.fixture
    def config_file(self, tmp_path):
        """Write a small JSON config file."""
        path = tmp_path / "run.json"
        path.write_text(json.dumps({"task": "vln", "episodes": 4, "out": "from-file"}))
        return path

    def test_file_values(self, config_file):
        """Keys from the file are applied."""
        config = load_run_config(config_file)

        assert config.task is TaskKind.VLN
        assert config.episodes == 4

    def test_flags_override_file(self, config_file):
        """Command-line flags win over the file."""
        config = load_run_config(config_file, ["--episodes=9"])

        assert config.episodes == 9
        assert config.task is TaskKind.VLN

    @patch.dict(os.environ, {"NTM_OUT_DIR": "from-env", "NTM_WORKERS": "3"})
    def test_environment_provides_defaults(self, config_file):
        """Environment values apply unless the file or a flag sets the key."""
        config = load_run_config(config_file)

        assert config.out == "from-file"
        assert config.workers == 3

    def test_invalid_json_reports_line(self, tmp_path):
        """Malformed files name the failing line."""
        path = tmp_path / "bad.json"
        path.write_text('{\n  "episodes": 3,\n  oops\n}')

        with pytest.raises(ConfigError, match="line 3"):
            load_run_config(path)

    def test_missing_file(self, tmp_path):
        """Unreadable files are config errors."""
        with pytest.raises(ConfigError):
            load_run_config(tmp_path / "missing.json")

    def test_top_level_must_be_object(self, tmp_path):
        """A JSON list is not a config."""
        path = tmp_path / "list.json"
        path.write_text("[1, 2]")

        with pytest.raises(ConfigError):
            load_run_config(path)
