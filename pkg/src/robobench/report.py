"""Aggregate episode logs into a table, a CSV file, and figures.

The report does not trust log footers: per-task success is recomputed from
the logged per-step metrics with the task's own evaluator, and the safety
totals are recounted from the raw logged joint state. Disagreements with the
footer are surfaced in a `footer_mismatches` column instead of being silently
absorbed.

Safety charts come in both normalizations (raw totals and per-step rates),
since a long episode with a brief brush against a limit and a short episode
pinned at one look identical in only one of them.
"""

from __future__ import annotations

import csv
import io
import os
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence

import numpy as np

from .registry import make_task
from .safety import SafetyAccumulator, SafetyLimits, count_step
from .trajlog import EpisodeLog, atomic_write_bytes, atomic_write_text, \
    read_episode_logs
from .version import REPORT_SCHEMA, VERSION

SAFETY_KINDS = ("position", "velocity", "current")


@dataclass
class TaskAggregate:
    task: str
    episodes: int = 0
    successes: int = 0
    returns: List[float] = field(default_factory=list)
    final_scores: List[float] = field(default_factory=list)
    safety: SafetyAccumulator = field(default_factory=SafetyAccumulator)
    footer_mismatches: int = 0
    flagged_episodes: int = 0  # truncated by a policy error

    @property
    def success_fraction(self) -> float:
        return self.successes / self.episodes if self.episodes else 0.0

    @property
    def mean_return(self) -> float:
        return float(np.mean(self.returns)) if self.returns else 0.0

    @property
    def mean_final_score(self) -> float:
        return float(np.mean(self.final_scores)) if self.final_scores else 0.0


def limits_from_meta(meta: Dict) -> SafetyLimits:
    block = meta["limits"]
    return SafetyLimits(
        lower=np.asarray(block["lower"], dtype=float),
        upper=np.asarray(block["upper"], dtype=float),
        velocity_max=np.asarray(block["velocity_max"], dtype=float),
        current_max=np.asarray(block["current_max"], dtype=float),
        margin=float(block["margin"]),
    )


def recount_safety(log: EpisodeLog) -> SafetyAccumulator:
    """Re-derive the episode's violation counts from the raw logged state."""
    limits = limits_from_meta(log.meta)
    acc = SafetyAccumulator()
    for record in log.records:
        acc.add(count_step(limits, record["qpos"], record["qvel"],
                           record["current"]))
    return acc


def recompute_success(log: EpisodeLog) -> bool:
    """Run the task's evaluator over the logged metrics sequence."""
    if log.footer.get("policy_error"):
        return False
    task = make_task(log.meta["task"], dt=float(log.meta["dt"]))
    return task.success([record["metrics"] for record in log.records])


def aggregate_logs(logs: Sequence[EpisodeLog]) -> List[TaskAggregate]:
    by_task: Dict[str, TaskAggregate] = {}
    for log in logs:
        agg = by_task.setdefault(log.task, TaskAggregate(task=log.task))
        agg.episodes += 1
        success = recompute_success(log)
        agg.successes += int(success)
        if bool(log.footer["success"]) != success:
            agg.footer_mismatches += 1
        agg.returns.append(float(log.footer["total_reward"]))
        agg.final_scores.append(float(log.footer["final_score"]))
        recount = recount_safety(log)
        footer_totals = log.footer["safety_totals"]
        if recount.totals() != {k: int(footer_totals[k])
                                for k in SAFETY_KINDS}:
            agg.footer_mismatches += 1
        agg.safety.merge(recount)
        if log.footer.get("policy_error"):
            agg.flagged_episodes += 1
    return [by_task[name] for name in sorted(by_task)]


def digest_of(logs: Sequence[EpisodeLog]) -> str:
    digests = sorted({log.meta.get("config_digest", "") for log in logs})
    if len(digests) == 1:
        return digests[0]
    return "mixed"


# -- rendering -------------------------------------------------------------------


def format_table(aggregates: Sequence[TaskAggregate]) -> str:
    header = (f"{'task':<26} {'eps':>4} {'success':>8} {'return':>10} "
              f"{'score':>9} {'pos':>5} {'vel':>5} {'cur':>5} {'flags':>6}")
    rows = [header, "-" * len(header)]
    for agg in aggregates:
        totals = agg.safety.totals()
        flags = agg.footer_mismatches + agg.flagged_episodes
        rows.append(
            f"{agg.task:<26} {agg.episodes:>4} {agg.success_fraction:>8.2f} "
            f"{agg.mean_return:>10.2f} {agg.mean_final_score:>9.3f} "
            f"{totals['position']:>5} {totals['velocity']:>5} "
            f"{totals['current']:>5} {flags:>6}"
        )
    return "\n".join(rows)


def write_report_csv(path: str, aggregates: Sequence[TaskAggregate],
                     digest: str) -> None:
    buffer = io.StringIO()
    buffer.write(f"# {REPORT_SCHEMA} version={VERSION}\n")
    buffer.write(f"# config_digest={digest}\n")
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow([
        "task", "episodes", "successes", "success_fraction",
        "mean_return", "mean_final_score",
        "position_total", "velocity_total", "current_total",
        "position_per_step", "velocity_per_step", "current_per_step",
        "footer_mismatches", "flagged_episodes",
    ])
    for agg in aggregates:
        totals = agg.safety.totals()
        rates = agg.safety.per_step()
        writer.writerow([
            agg.task, agg.episodes, agg.successes,
            repr(agg.success_fraction),
            repr(agg.mean_return), repr(agg.mean_final_score),
            totals["position"], totals["velocity"], totals["current"],
            repr(rates["position"]), repr(rates["velocity"]),
            repr(rates["current"]),
            agg.footer_mismatches, agg.flagged_episodes,
        ])
    atomic_write_text(path, buffer.getvalue())


def _save_png(fig, path: str) -> None:
    buffer = io.BytesIO()
    fig.savefig(buffer, format="png", dpi=110)
    atomic_write_bytes(path, buffer.getvalue())


def render_figures(aggregates: Sequence[TaskAggregate],
                   directory: str) -> List[str]:
    """Success bar chart plus safety charts in both normalizations."""
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    names = [agg.task for agg in aggregates]
    x = np.arange(len(names))
    written: List[str] = []

    fig, ax = plt.subplots(figsize=(max(6.0, 0.6 * len(names) + 2), 4))
    ax.bar(x, [agg.success_fraction for agg in aggregates], color="#33699e")
    ax.set_xticks(x)
    ax.set_xticklabels(names, rotation=45, ha="right", fontsize=8)
    ax.set_ylim(0, 1.05)
    ax.set_ylabel("success fraction")
    ax.set_title("Success rate by task")
    fig.tight_layout()
    path = os.path.join(directory, "success_rate.png")
    _save_png(fig, path)
    plt.close(fig)
    written.append(path)

    for suffix, extract, ylabel in (
        ("totals", lambda a: a.safety.totals(), "violations (total)"),
        ("per_step", lambda a: a.safety.per_step(), "violations per step"),
    ):
        fig, ax = plt.subplots(figsize=(max(6.0, 0.8 * len(names) + 2), 4))
        width = 0.25
        for i, kind in enumerate(SAFETY_KINDS):
            values = [extract(agg)[kind] for agg in aggregates]
            ax.bar(x + (i - 1) * width, values, width, label=kind)
        ax.set_xticks(x)
        ax.set_xticklabels(names, rotation=45, ha="right", fontsize=8)
        ax.set_ylabel(ylabel)
        ax.set_title(f"Safety violations by task ({suffix.replace('_', ' ')})")
        ax.legend()
        fig.tight_layout()
        path = os.path.join(directory, f"safety_{suffix}.png")
        _save_png(fig, path)
        plt.close(fig)
        written.append(path)
    return written


def build_report(log_directory: str, output_directory: Optional[str] = None,
                 figures: bool = True) -> str:
    """Read all logs, write report.csv (+ figures), return the stdout table."""
    logs = read_episode_logs(log_directory)
    aggregates = aggregate_logs(logs)
    out_dir = output_directory or log_directory
    os.makedirs(out_dir, exist_ok=True)
    write_report_csv(os.path.join(out_dir, "report.csv"), aggregates,
                     digest_of(logs))
    if figures:
        render_figures(aggregates, out_dir)
    return format_table(aggregates)
