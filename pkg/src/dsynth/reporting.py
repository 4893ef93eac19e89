"""Writers for run outputs: release CSV, stats, evaluation report, timing.

Metric files use fixed decimal formatting so a seeded run is byte-stable.
Wall-clock numbers are quarantined in ``timing.txt``, the one output that is
expected to differ between otherwise identical runs.  The per-record release
log withholds the noisy threshold of randomized tests; only the base k is
written.
"""

from __future__ import annotations

import csv
import math
import os

from .evaluation import EvalReport, timing_report
from .model import fmt_float
from .privacy import RANDOMIZED, ReleaseRecord, RunStats
from .schema import DiscreteTable
from .synthesis import SynthesisConfig

STATS_FILE = "synthesis_stats.txt"
RELEASE_FILE = "synthetic.csv"
RELEASE_LOG_FILE = "release_log.csv"
EVAL_REPORT_FILE = "eval_report.txt"
TVD_FILE = "tvd.csv"
TIMING_FILE = "timing.txt"
FIGURES_DIR = "figures"


def _write_lines(path, lines) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def release_table(releases: list[ReleaseRecord], schema) -> DiscreteTable:
    rows = [r.record for r in releases]
    return DiscreteTable(tuple(schema), rows if rows else [])


def write_release_csv(releases: list[ReleaseRecord], schema, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow([a.name for a in schema])
        for rel in releases:
            writer.writerow([schema[j].domain[v] for j, v in enumerate(rel.record)])


def write_release_log(releases: list[ReleaseRecord], k: int, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["release", "plausible_count", "threshold", "mode", "passed"])
        for idx, rel in enumerate(releases):
            rep = rel.report
            shown = float(k) if rep.mode == RANDOMIZED else rep.threshold_used
            writer.writerow([idx, rep.plausible_count, f"{shown:g}", rep.mode, rep.passed])


def write_stats_file(stats: RunStats, config: SynthesisConfig, n_requested: int, path) -> None:
    lines = [
        "format = dsynth-stats",
        "version = 1",
        f"status = {stats.status}",
        f"attempts = {stats.attempts}",
        f"releases = {stats.releases}",
        f"pass_rate = {fmt_float(stats.pass_rate)}",
        f"n_requested = {n_requested}",
        f"k = {config.k}",
        f"gamma = {fmt_float(config.gamma)}",
        f"omega = {fmt_float(config.omega)}",
        f"epsilon_0 = {fmt_float(config.epsilon_0)}",
        f"epsilon_s = {fmt_float(config.epsilon_s)}",
        f"epsilon_p = {fmt_float(config.epsilon_p)}",
        f"max_candidates_per_release = {config.max_candidates_per_release}",
        f"rng_seed = {config.rng_seed}",
    ]
    _write_lines(path, lines)


def read_stats_file(path) -> dict[str, str]:
    out: dict[str, str] = {}
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.rstrip("\n")
            if " = " in line:
                key, value = line.split(" = ", 1)
                out[key] = value
    return out


def write_timing_file(stats: RunStats, extra_phases: dict[str, float], path) -> None:
    report = timing_report(stats)
    phases = dict(extra_phases)
    phases.update(report["phase_seconds"])
    lines = [
        "format = dsynth-timing",
        "version = 1",
        f"records_per_second = {report['records_per_second']:.6f}",
        f"total_seconds = {report['total_seconds']:.6f}",
    ]
    for name in sorted(phases):
        lines.append(f"phase.{name}_seconds = {phases[name]:.6f}")
    _write_lines(path, lines)


def write_eval_report(report: EvalReport, schema, path) -> None:
    pass_rate = "NA" if report.pass_rate is None else f"{report.pass_rate:.6f}"
    lines = [
        "format = dsynth-eval",
        "version = 1",
        f"pass_rate = {pass_rate}",
        f"folds = {report.folds}",
        f"lr_accuracy = {report.lr_accuracy:.6f}",
        f"lr_sd = {report.lr_sd:.6f}",
        f"svm_accuracy = {report.svm_accuracy:.6f}",
        f"svm_sd = {report.svm_sd:.6f}",
        f"mean_tvd = {report.mean_tvd:.6f}",
    ]
    for attr, tvd in zip(schema, report.tvd):
        lines.append(f"tvd.{attr.name} = {tvd:.6f}")
    _write_lines(path, lines)


def write_tvd_csv(report: EvalReport, schema, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["attribute", "tvd"])
        for attr, tvd in zip(schema, report.tvd):
            writer.writerow([attr.name, f"{tvd:.6f}"])


def load_pass_rate(stats_path) -> float | None:
    if not os.path.exists(stats_path):
        return None
    kv = read_stats_file(stats_path)
    raw = kv.get("pass_rate")
    if raw is None:
        return None
    value = float(raw)
    return value if math.isfinite(value) else None
