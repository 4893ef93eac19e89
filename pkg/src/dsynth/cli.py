"""Command-line pipeline: learn, synthesize, evaluate, report.

Every subcommand reads one flat config file (flags override environment
overrides override the file), works under the configured output directory,
and logs one line per phase.  Failures print a single machine-parsable
``error: <phase>: <message>`` line and exit 1; a synthesis run that exhausts
its attempt budget exits 3 so callers can tell it apart from a hard failure.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
import time

import numpy as np

from . import evaluation, figures, privacy, reporting
from .config import ConfigError, FIELD_NAMES, RunConfig, load_run_config
from .model import (
    SynthModel,
    load_model,
    load_split_manifest,
    manifest_from_split,
    save_model,
    save_schema,
    save_split_manifest,
    split_from_manifest,
)
from .params import count_vectors, estimate_cpts, learn_hyperparameter
from .schema import DataError, apply_schema, discretize, infer_schema, ingest_csv, split
from .structure import StructureNoise, greedy_parent_search
from .synthesis import SynthesisConfig

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_EXHAUSTED = 3

SCHEMA_FILE = "schema.txt"
SPLIT_FILE = "split_manifest.txt"

# rng stream ids, one per phase, all derived from (rng_seed, id)
_STREAM_SPLIT = 0
_STREAM_STRUCTURE = 1
_STREAM_PARAMS = 2
_STREAM_SYNTH = 3
_STREAM_EVAL = 4


class _Phases:
    """Tracks the current phase for error messages and collects wall times."""

    def __init__(self, command: str):
        self.command = command
        self.current = "setup"
        self.seconds: dict[str, float] = {}

    def run(self, name: str, fn):
        self.current = name
        t0 = time.perf_counter()
        result = fn()
        dt = time.perf_counter() - t0
        self.seconds[name] = self.seconds.get(name, 0.0) + dt
        print(f"[{self.command}] {name}: {dt:.2f} s")
        return result


def _rng(cfg: RunConfig, stream: int) -> np.random.Generator:
    return np.random.default_rng([cfg.rng_seed, stream])


def _synthesis_config(cfg: RunConfig, m: int) -> SynthesisConfig:
    return SynthesisConfig(
        omega=cfg.resolve_omega(m),
        k=cfg.k,
        gamma=cfg.gamma,
        epsilon_0=cfg.epsilon_0,
        epsilon_s=cfg.epsilon_s,
        epsilon_p=cfg.epsilon_p,
        max_candidates_per_release=cfg.max_candidates_per_release,
        rng_seed=cfg.rng_seed,
    )


def _require_input(cfg: RunConfig) -> str:
    if not cfg.input_csv:
        raise ConfigError("input_csv must be set")
    return cfg.input_csv


# ----------------------------------------------------------- subcommands

def cmd_learn(cfg: RunConfig, phases: _Phases) -> int:
    path = _require_input(cfg)
    os.makedirs(cfg.output_dir, exist_ok=True)

    raw = phases.run("ingest", lambda: ingest_csv(path))
    table = phases.run(
        "discretize",
        lambda: discretize(raw, infer_schema(raw, cfg.max_categories), cfg.bins),
    )
    parts = phases.run(
        "split", lambda: split(table, cfg.fractions, _rng(cfg, _STREAM_SPLIT))
    )

    def learn_structure():
        noise = None
        if not math.isinf(cfg.epsilon_s):
            noise = StructureNoise(cfg.epsilon_s, _rng(cfg, _STREAM_STRUCTURE))
        return greedy_parent_search(parts.dt, cfg.max_parents, cfg.complexity_cap, noise)

    structure, _report = phases.run("structure", learn_structure)

    def learn_params():
        alpha = learn_hyperparameter(parts.dp)
        counts = count_vectors(parts.dp, structure)
        return estimate_cpts(counts, alpha, cfg.epsilon_p, cfg.adjacency, _rng(cfg, _STREAM_PARAMS))

    cpts = phases.run("params", learn_params)

    def persist():
        model = SynthModel(table.schema, structure, cpts, epsilon_s=cfg.epsilon_s)
        save_model(model, cfg.resolved_model_file())
        save_schema(table.schema, os.path.join(cfg.output_dir, SCHEMA_FILE))
        manifest = manifest_from_split(parts, cfg.rng_seed, cfg.fractions)
        save_split_manifest(manifest, os.path.join(cfg.output_dir, SPLIT_FILE))

    phases.run("persist", persist)
    print(f"[learn] model written to {cfg.resolved_model_file()}")
    return EXIT_OK


def cmd_synthesize(cfg: RunConfig, n: int, phases: _Phases) -> int:
    if n < 1:
        raise ConfigError(f"n must be >= 1 (got {n})")
    path = _require_input(cfg)
    os.makedirs(cfg.output_dir, exist_ok=True)
    model = phases.run("load_model", lambda: load_model(cfg.resolved_model_file()))
    syncfg = _synthesis_config(cfg, model.m)

    def rebuild_split():
        raw = ingest_csv(path, declared_schema=list(model.schema))
        table = apply_schema(raw, model.schema)
        manifest = load_split_manifest(os.path.join(cfg.output_dir, SPLIT_FILE))
        return split_from_manifest(table, manifest)

    parts = phases.run("ingest", rebuild_split)

    def run_mechanism():
        return privacy.mechanism_f(parts, model, syncfg, n, _rng(cfg, _STREAM_SYNTH))

    releases, stats = phases.run("synthesis_test", run_mechanism)

    def persist():
        reporting.write_release_csv(
            releases, model.schema, os.path.join(cfg.output_dir, reporting.RELEASE_FILE)
        )
        reporting.write_release_log(
            releases, cfg.k, os.path.join(cfg.output_dir, reporting.RELEASE_LOG_FILE)
        )
        reporting.write_stats_file(
            stats, syncfg, n, os.path.join(cfg.output_dir, reporting.STATS_FILE)
        )
        reporting.write_timing_file(
            stats, phases.seconds, os.path.join(cfg.output_dir, reporting.TIMING_FILE)
        )

    phases.run("persist", persist)
    print(
        f"[synthesize] status={stats.status} releases={stats.releases} "
        f"attempts={stats.attempts} pass_rate={stats.pass_rate:.4f}"
    )
    return EXIT_OK if stats.status == privacy.STATUS_COMPLETED else EXIT_EXHAUSTED


def _evaluate(cfg: RunConfig, real_path: str, synth_path: str, phases: _Phases, with_figures: bool) -> int:
    os.makedirs(cfg.output_dir, exist_ok=True)
    model = phases.run("load_model", lambda: load_model(cfg.resolved_model_file()))

    def load_tables():
        real = apply_schema(ingest_csv(real_path, list(model.schema)), model.schema)
        synth = apply_schema(ingest_csv(synth_path, list(model.schema)), model.schema)
        if synth.n_rows == 0:
            raise DataError("empty table: " + synth_path)
        if real.n_rows == 0:
            raise DataError("empty table: " + real_path)
        return real, synth

    real, synth = phases.run("ingest", load_tables)
    rng = _rng(cfg, _STREAM_EVAL)
    workers = cfg.resolved_workers()

    def classify():
        hyper = dict(
            learning_rate=cfg.learning_rate,
            epochs=cfg.epochs,
            l2=cfg.l2,
            batch_size=cfg.batch_size,
            workers=workers,
        )
        lr_acc, lr_sd = evaluation.distinguishability(
            real, synth, evaluation.LOGISTIC, cfg.folds, rng, **hyper
        )
        svm_acc, svm_sd = evaluation.distinguishability(
            real, synth, evaluation.HINGE, cfg.folds, rng, **hyper
        )
        return lr_acc, lr_sd, svm_acc, svm_sd

    lr_acc, lr_sd, svm_acc, svm_sd = phases.run("classifiers", classify)
    tvds = phases.run("fidelity", lambda: evaluation.all_marginal_tvds(real, synth))
    pass_rate = reporting.load_pass_rate(os.path.join(cfg.output_dir, reporting.STATS_FILE))
    report = evaluation.EvalReport(
        lr_accuracy=lr_acc,
        lr_sd=lr_sd,
        svm_accuracy=svm_acc,
        svm_sd=svm_sd,
        tvd=tvds,
        folds=cfg.folds,
        pass_rate=pass_rate,
    )

    def persist():
        reporting.write_eval_report(
            report, model.schema, os.path.join(cfg.output_dir, reporting.EVAL_REPORT_FILE)
        )
        reporting.write_tvd_csv(report, model.schema, os.path.join(cfg.output_dir, reporting.TVD_FILE))
        if with_figures:
            out = figures.render_all(
                real, synth, report, os.path.join(cfg.output_dir, reporting.FIGURES_DIR)
            )
            for p in out:
                print(f"[report] figure written: {p}")

    phases.run("persist", persist)
    print(
        f"[evaluate] lr_accuracy={lr_acc:.4f} svm_accuracy={svm_acc:.4f} "
        f"mean_tvd={report.mean_tvd:.4f}"
    )
    return EXIT_OK


def cmd_evaluate(cfg: RunConfig, real_path: str, synth_path: str, phases: _Phases) -> int:
    return _evaluate(cfg, real_path, synth_path, phases, with_figures=False)


def cmd_report(cfg: RunConfig, real_path: str, synth_path: str, phases: _Phases) -> int:
    return _evaluate(cfg, real_path, synth_path, phases, with_figures=True)


# ------------------------------------------------------------- arg parsing

def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("-c", "--config", default=None, help="path to a key = value config file")
    for name in FIELD_NAMES:
        flag = "--" + name.replace("_", "-")
        parser.add_argument(flag, dest=f"opt_{name}", default=None, metavar="V",
                            help=f"override config key {name}")


def _overrides(args: argparse.Namespace) -> dict[str, str]:
    out = {}
    for name in FIELD_NAMES:
        value = getattr(args, f"opt_{name}", None)
        if value is not None:
            out[name] = value
    return out


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dsynth",
        description="Privacy-preserving tabular synthesis with a plausible-deniability release test.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_learn = sub.add_parser("learn", help="ingest, split, and fit the generative model")
    _add_common(p_learn)

    p_syn = sub.add_parser("synthesize", help="generate and release tested records")
    _add_common(p_syn)
    p_syn.add_argument("-n", "--count", type=int, required=True, help="records to release")

    for name, helptext in (
        ("evaluate", "score a synthetic release against real data"),
        ("report", "evaluate and render figures"),
    ):
        p = sub.add_parser(name, help=helptext)
        _add_common(p)
        p.add_argument("--real", default=None, help="real CSV (default: input_csv)")
        p.add_argument("--synth", default=None, help="synthetic CSV (default: output_dir/synthetic.csv)")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    phases = _Phases(args.command)
    try:
        cfg = load_run_config(args.config, _overrides(args))
        if args.command == "learn":
            return cmd_learn(cfg, phases)
        if args.command == "synthesize":
            return cmd_synthesize(cfg, args.count, phases)
        real = args.real or _require_input(cfg)
        synth = args.synth or os.path.join(cfg.output_dir, reporting.RELEASE_FILE)
        if args.command == "evaluate":
            return cmd_evaluate(cfg, real, synth, phases)
        return cmd_report(cfg, real, synth, phases)
    except (ConfigError, DataError, OSError) as exc:
        print(f"error: {phases.current}: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
