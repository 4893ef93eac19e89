"""The release gate: plausible-seed counting, threshold tests, and the loop.

A candidate may be released only when enough dataset records could plausibly
have been its seed: the count of records whose seed-to-record probability is
within a factor gamma of the true seed's.  The threshold test is either a hard
``count >= k`` or, for differential privacy of the verdict itself, a
Laplace-noised threshold.  The generate-test loop draws seeds uniformly,
releases candidates that pass, discards the rest, and reports only aggregate
statistics about the discards.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from .model import SynthModel
from .schema import DataError, DatasetSplit, DiscreteTable
from .synthesis import (
    SynthesisConfig,
    generate_candidate,
    generation_probabilities,
    generation_probability,
    sample_keep_mask,
)

DETERMINISTIC = "deterministic"
RANDOMIZED = "randomized"

STATUS_COMPLETED = "completed"
STATUS_EXHAUSTED = "exhausted"


@dataclass(frozen=True)
class PrivacyTestReport:
    plausible_count: int
    threshold_used: float
    passed: bool
    mode: str


@dataclass(frozen=True)
class ReleaseRecord:
    """A released record; the seed's identity is deliberately absent."""

    record: tuple[int, ...]
    report: PrivacyTestReport


@dataclass
class RunStats:
    attempts: int
    releases: int
    pass_rate: float
    seconds: float
    status: str
    phase_seconds: dict = field(default_factory=dict)


def plausible_seed_count(
    y,
    seed,
    data: DiscreteTable,
    gamma: float,
    model: SynthModel,
    omega: float,
) -> int:
    """How many dataset records could plausibly have seeded record ``y``.

    Counts rows d with gamma^-1 <= Pr[y|seed] / Pr[y|d] <= gamma.  The seed
    itself has ratio 1 and is always counted when present in ``data``.  The
    infinity sentinel for gamma admits every row.
    """
    if not gamma >= 1.0:
        raise DataError(f"gamma must be >= 1 (got {gamma!r})")
    p_seed = generation_probability(y, seed, model.cpts, model.structure, omega)
    if p_seed <= 0.0:
        raise DataError("seed has zero probability of generating this record")
    if math.isinf(gamma):
        return data.n_rows
    probs = generation_probabilities(y, data.rows, model.cpts, model.structure, omega)
    ok = (p_seed <= gamma * probs) & (probs <= gamma * p_seed)
    return int(ok.sum())


def deterministic_test(count: int, k: int) -> PrivacyTestReport:
    """Hard threshold: pass iff at least k plausible seeds."""
    if k < 1:
        raise DataError(f"k must be >= 1 (got {k!r})")
    return PrivacyTestReport(
        plausible_count=int(count),
        threshold_used=float(k),
        passed=count >= k,
        mode=DETERMINISTIC,
    )


def randomized_test(
    count: int, k: int, epsilon_0: float, rng: np.random.Generator
) -> PrivacyTestReport:
    """Laplace-noised threshold: pass iff count >= k + Laplace(1/epsilon_0).

    The infinity sentinel draws no noise, so verdicts match the deterministic
    test exactly.  The noisy threshold stays in the in-memory report and is
    never written to per-record output.
    """
    if k < 1:
        raise DataError(f"k must be >= 1 (got {k!r})")
    if not epsilon_0 > 0:
        raise DataError(f"epsilon_0 must be positive (got {epsilon_0!r})")
    eta = 0.0 if math.isinf(epsilon_0) else float(rng.laplace(0.0, 1.0 / epsilon_0))
    threshold = k + eta
    return PrivacyTestReport(
        plausible_count=int(count),
        threshold_used=threshold,
        passed=count >= threshold,
        mode=RANDOMIZED,
    )


def mechanism_f(
    dataset_split: DatasetSplit,
    model: SynthModel,
    config: SynthesisConfig,
    n_requested: int,
    rng: np.random.Generator,
    on_attempt=None,
) -> tuple[list[ReleaseRecord], RunStats]:
    """Generate, test, and release/discard until n_requested records pass.

    Seeds are drawn uniformly from the seeding subset; each candidate is
    tested against that same subset.  The loop gives up (status "exhausted")
    after ``max_candidates_per_release * n_requested`` attempts.  The optional
    ``on_attempt(candidate, report)`` hook sees every attempt and exists for
    auditing; production callers leave it unset.
    """
    ds = dataset_split.ds
    if ds.n_rows == 0:
        raise DataError("seeding subset is empty")
    if n_requested < 0:
        raise DataError("n_requested must be >= 0")
    m = ds.m
    use_randomized = not math.isinf(config.epsilon_0)
    max_attempts = config.max_candidates_per_release * n_requested
    releases: list[ReleaseRecord] = []
    attempts = 0
    t0 = time.perf_counter()
    while len(releases) < n_requested and attempts < max_attempts:
        attempts += 1
        seed_row = int(rng.integers(ds.n_rows))
        seed = ds.rows[seed_row]
        mask = sample_keep_mask(m, config.omega, rng)
        cand = generate_candidate(seed, mask, model.structure, model.cpts, rng, seed_row=seed_row)
        count = plausible_seed_count(cand.record, seed, ds, config.gamma, model, config.omega)
        if use_randomized:
            report = randomized_test(count, config.k, config.epsilon_0, rng)
        else:
            report = deterministic_test(count, config.k)
        if on_attempt is not None:
            on_attempt(cand, report)
        if report.passed:
            releases.append(ReleaseRecord(tuple(int(v) for v in cand.record), report))
    seconds = time.perf_counter() - t0
    status = STATUS_COMPLETED if len(releases) >= n_requested else STATUS_EXHAUSTED
    pass_rate = (len(releases) / attempts) if attempts else 0.0
    stats = RunStats(
        attempts=attempts,
        releases=len(releases),
        pass_rate=pass_rate,
        seconds=seconds,
        status=status,
        phase_seconds={"synthesis_test": seconds},
    )
    return releases, stats
