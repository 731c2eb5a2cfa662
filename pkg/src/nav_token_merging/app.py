import argparse
import logging
from os import getenv
from pathlib import Path

from dotenv import load_dotenv
from pydantic import ValidationError

from nav_token_merging.core.config.run_config import RunConfig, load_run_config
from nav_token_merging.core.errors import ConfigError, NavTokenMergingError
from nav_token_merging.packages.metrics.report import format_report_table
from nav_token_merging.services.bench.bench_service import BenchService
from nav_token_merging.services.collect.collect_service import CollectService
from nav_token_merging.services.episode.episode_service import EpisodeService
from nav_token_merging.services.profile.profile_service import ProfileService

EXIT_OK = 0
EXIT_CONFIG_ERROR = 1
EXIT_RUNTIME_ERROR = 2

COMMANDS = ("bench", "profile", "collect", "dump-episode", "replay")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nav-token-merging",
        description="Online visual token merging and a desk-scale navigation harness.",
        epilog="Any config key can be overridden with --key=value.",
        allow_abbrev=False,
    )
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--config", type=Path, default=None, help="JSON run configuration")
    return parser


class App:
    """
    Command-line application: loads the run configuration and dispatches a subcommand.
    """

    def __init__(self, config: RunConfig):
        self.config = config

    def bench(self) -> None:
        print(f"🚀 Running {self.config.episodes} {self.config.task.value} episodes")
        report = BenchService(self.config).run()
        print(format_report_table(report))
        print(f"✅ Report written to {self.config.out_dir}")

    def profile(self) -> None:
        print(f"🚀 Profiling {self.config.horizon} frames ({self.config.stream} stream)")
        rows = ProfileService(self.config).run()
        last = rows[-1]
        print(f"✅ t={last.t}: {last.merged_tokens} merged vs {last.naive_tokens} naive tokens")

    def collect(self) -> None:
        mode = "DAgger" if self.config.dagger else "ground-truth"
        print(f"🚀 Collecting {mode} samples from {self.config.episodes} episodes")
        samples = CollectService(self.config).run()
        print(f"✅ {len(samples)} samples written to {self.config.out_dir}")

    def dump_episode(self) -> None:
        episode = EpisodeService(self.config).dump()
        print(f"✅ Episode {episode.episode_id} written to {self.config.out_dir}")

    def replay(self) -> None:
        steps = EpisodeService(self.config).replay()
        print(f"✅ Replayed {len(steps)} steps into {self.config.out_dir}")

    def run(self, command: str) -> None:
        handlers = {
            "bench": self.bench,
            "profile": self.profile,
            "collect": self.collect,
            "dump-episode": self.dump_episode,
            "replay": self.replay,
        }
        handlers[command]()


def _configure_logging() -> None:
    level = getenv("NTM_LOG_LEVEL", "INFO").upper()
    logging.basicConfig(
        level=getattr(logging, level, logging.INFO),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )


def main(argv: list[str] | None = None) -> int:
    """Entry point; returns 0 on success, 1 on a config error, 2 on a runtime error."""
    load_dotenv()
    _configure_logging()

    args, overrides = _build_parser().parse_known_args(argv)
    try:
        config = load_run_config(args.config, overrides)
    except ConfigError as e:
        print(f"❌ Config error: {e}")
        return EXIT_CONFIG_ERROR
    except ValidationError as e:
        for error in e.errors():
            key = ".".join(str(part) for part in error["loc"]) or "config"
            print(f"❌ Config error: {key}: {error['msg']}")
        return EXIT_CONFIG_ERROR

    try:
        App(config).run(args.command)
    except ConfigError as e:
        print(f"❌ Config error: {e}")
        return EXIT_CONFIG_ERROR
    except (NavTokenMergingError, OSError) as e:
        print(f"❌ {type(e).__name__}: {e}")
        return EXIT_RUNTIME_ERROR
    return EXIT_OK
