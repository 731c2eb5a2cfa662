import csv
from pathlib import Path

from .navigation_metrics import EpisodeOutcome, MetricsReport

EPISODE_COLUMNS = (
    "episode_index",
    "episode_id",
    "task",
    "success",
    "oracle_success",
    "spl",
    "path_length",
    "geodesic_shortest",
    "nav_error",
    "steps",
    "follow_rate",
    "human_collision",
    "answer_correct",
)

TABLE_COLUMNS = ("task", "episodes", "SR", "OSR", "SPL", "TL", "NE", "FR", "CR", "ACC")


def _cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, float):
        return f"{value:.6f}"
    return str(value)


def episode_row(outcome: EpisodeOutcome) -> list[str]:
    values = (
        outcome.episode_index,
        outcome.episode_id,
        outcome.task_kind.value,
        outcome.success,
        outcome.oracle_success,
        outcome.spl_score,
        outcome.path_length,
        outcome.geodesic_shortest,
        outcome.nav_error,
        outcome.steps,
        outcome.follow_rate,
        outcome.human_collision,
        outcome.answer_correct,
    )
    return [_cell(v) for v in values]


def write_episodes_csv(outcomes: list[EpisodeOutcome], path: Path) -> None:
    """One row per episode in episode-index order, columns as in ``EPISODE_COLUMNS``."""
    with Path(path).open("w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(EPISODE_COLUMNS)
        for outcome in sorted(outcomes, key=lambda o: o.episode_index):
            writer.writerow(episode_row(outcome))


def write_report_json(report: MetricsReport, path: Path) -> None:
    Path(path).write_text(report.model_dump_json(indent=2) + "\n", encoding="utf-8")


def format_report_table(report: MetricsReport) -> str:
    """Aligned plain-text table; '-' marks metrics a task does not report."""

    def number(value: float | None) -> str:
        return "-" if value is None else f"{value:.2f}"

    rows = [list(TABLE_COLUMNS)]
    for m in report.tasks:
        rows.append(
            [m.task_kind.value, str(m.episodes)]
            + [number(v) for v in (m.sr, m.osr, m.spl, m.tl, m.ne, m.fr, m.cr, m.acc)]
        )
    widths = [max(len(row[i]) for row in rows) for i in range(len(TABLE_COLUMNS))]
    lines = []
    for row in rows:
        first = row[0].ljust(widths[0])
        rest = [cell.rjust(width) for cell, width in zip(row[1:], widths[1:], strict=True)]
        lines.append("  ".join([first, *rest]))
    return "\n".join(lines)
