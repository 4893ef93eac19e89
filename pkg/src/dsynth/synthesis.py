"""Seed-based candidate generation and the exact seed-to-record probability.

A candidate copies each seed attribute independently with probability
``1 - omega/m`` and resamples the rest from the conditional tables in the
learned sampling order (parents are already fixed, either copied or freshly
drawn).  Marginalizing the mask gives the closed form

    Pr[record | seed] = prod_i ( kappa * [seed_i == record_i] + (1-kappa) * p_i )

with kappa = 1 - omega/m and p_i the CPT probability of the record's value at
position i given the record's parent values.  That product is what the
plausible-deniability test compares across dataset records.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .params import CptSet
from .schema import DataError
from .structure import ParentSets


@dataclass(frozen=True)
class SynthesisConfig:
    """Knobs of one synthesis run; omega may be any real in [0, m]."""

    omega: float
    k: int
    gamma: float
    epsilon_0: float = math.inf
    epsilon_s: float = math.inf
    epsilon_p: float = math.inf
    max_candidates_per_release: int = 50
    rng_seed: int = 0

    def __post_init__(self) -> None:
        if self.k < 1:
            raise DataError(f"k must be >= 1 (got {self.k!r})")
        if not self.gamma >= 1.0:
            raise DataError(f"gamma must be >= 1 (got {self.gamma!r})")
        if not self.omega >= 0.0:
            raise DataError(f"omega must be >= 0 (got {self.omega!r})")
        for name in ("epsilon_0", "epsilon_s", "epsilon_p"):
            if not getattr(self, name) > 0:
                raise DataError(f"{name} must be positive (got {getattr(self, name)!r})")
        if self.max_candidates_per_release < 1:
            raise DataError("max_candidates_per_release must be >= 1")


@dataclass(frozen=True)
class Candidate:
    """A synthetic record, the index of its seed, and what was copied."""

    record: np.ndarray
    seed_row: int
    keep_mask: np.ndarray


def _keep_probability(m: int, omega: float) -> float:
    if not 0.0 <= omega <= m:
        raise DataError(f"omega must lie in [0, {m}] (got {omega!r})")
    return 1.0 - omega / m


def sample_keep_mask(m: int, omega: float, rng: np.random.Generator) -> np.ndarray:
    """Independent per-position booleans, kept with probability 1 - omega/m."""
    kappa = _keep_probability(m, omega)
    return rng.random(m) < kappa


def _draw(cum: np.ndarray, u: float) -> int:
    idx = int(np.searchsorted(cum, u, side="right"))
    return min(idx, len(cum) - 1)


def generate_candidate(
    seed,
    keep_mask,
    structure: ParentSets,
    cpts: CptSet,
    rng: np.random.Generator,
    seed_row: int = -1,
) -> Candidate:
    """Copy kept positions from the seed, resample the rest in sampling order."""
    seed = np.asarray(seed, dtype=np.int64)
    mask = np.asarray(keep_mask, dtype=bool)
    if seed.shape != mask.shape or seed.ndim != 1:
        raise DataError("seed and keep_mask must be equal-length vectors")
    y = seed.copy()
    for i in structure.order:
        if mask[i]:
            continue
        row = cpts.attributes[i].row_for(y)
        y[i] = _draw(np.cumsum(row), rng.random())
    return Candidate(record=y, seed_row=seed_row, keep_mask=mask)


def generate_candidates(
    seed,
    n: int,
    omega: float,
    structure: ParentSets,
    cpts: CptSet,
    rng: np.random.Generator,
) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized batch of n candidates from one seed; returns (records, masks)."""
    seed = np.asarray(seed, dtype=np.int64)
    m = seed.shape[0]
    kappa = _keep_probability(m, omega)
    masks = rng.random((n, m)) < kappa
    recs = np.tile(seed, (n, 1))
    for i in structure.order:
        need = ~masks[:, i]
        cnt = int(need.sum())
        if cnt == 0:
            continue
        cpt = cpts.attributes[i]
        if cpt.parents:
            keys = np.ravel_multi_index(
                tuple(recs[need][:, p] for p in cpt.parents), cpt.parent_dims
            )
        else:
            keys = np.zeros(cnt, dtype=np.int64)
        cum = np.cumsum(cpt.probs[keys], axis=1)
        cum[:, -1] = np.inf  # absorb float residue in the last bin
        u = rng.random(cnt)
        recs[need, i] = (u[:, None] < cum).argmax(axis=1)
    return recs, masks


def per_value_probs(y, structure: ParentSets, cpts: CptSet) -> np.ndarray:
    """p_i = p(y_i | y's parent values) for every position i."""
    y = np.asarray(y, dtype=np.int64)
    m = y.shape[0]
    p = np.empty(m)
    for i in range(m):
        p[i] = cpts.prob_given(i, y)
    return p


def generation_probabilities(
    y,
    data_rows: np.ndarray,
    cpts: CptSet,
    structure: ParentSets,
    omega: float,
) -> np.ndarray:
    """Pr[candidate == y | seed = d] for every row d of ``data_rows`` at once."""
    y = np.asarray(y, dtype=np.int64)
    m = y.shape[0]
    kappa = _keep_probability(m, omega)
    p = per_value_probs(y, structure, cpts)
    agree = data_rows == y
    factors = kappa * agree + (1.0 - kappa) * p
    return factors.prod(axis=1)


def generation_probability(y, d, cpts: CptSet, structure: ParentSets, omega: float) -> float:
    """Exact probability that the generator maps seed ``d`` to record ``y``."""
    d = np.asarray(d, dtype=np.int64)
    return float(generation_probabilities(y, d[None, :], cpts, structure, omega)[0])
