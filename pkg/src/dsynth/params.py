"""Conditional probability tables with Dirichlet smoothing and optional noise.

Counts come from the parameter-learning subset only.  Each attribute's count
family can be perturbed with Laplace noise calibrated to its per-record
sensitivity and an even share of the total budget, then clamped at zero; the
symmetric Dirichlet prior restores strictly positive, row-stochastic tables,
including rows for parent configurations never observed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator

import numpy as np

from .schema import DataError, DiscreteTable
from .structure import ParentSets

ADD_REMOVE = "add_remove"
REPLACE = "replace"


@dataclass(frozen=True)
class CountVector:
    """Counts of one target attribute's values under one parent configuration."""

    target: int
    parent_config: tuple[int, ...]
    counts: np.ndarray


@dataclass(frozen=True)
class AttributeCounts:
    """The whole count family of one attribute: one row per parent config."""

    target: int
    parents: tuple[int, ...]
    parent_dims: tuple[int, ...]
    counts: np.ndarray  # shape (n_configs, cardinality)

    @property
    def n_configs(self) -> int:
        return int(self.counts.shape[0])

    def config_index(self, parent_values) -> int:
        if not self.parents:
            return 0
        return int(np.ravel_multi_index(tuple(int(v) for v in parent_values), self.parent_dims))

    def vectors(self) -> Iterator[CountVector]:
        for flat in range(self.n_configs):
            cfg = np.unravel_index(flat, self.parent_dims) if self.parents else ()
            yield CountVector(self.target, tuple(int(c) for c in cfg), self.counts[flat])


@dataclass(frozen=True)
class AttributeCpt:
    """Row-stochastic p(target | parent configuration) for one attribute."""

    target: int
    parents: tuple[int, ...]
    parent_dims: tuple[int, ...]
    probs: np.ndarray  # shape (n_configs, cardinality), rows sum to 1

    def __post_init__(self) -> None:
        arr = np.asarray(self.probs, dtype=float)
        arr.setflags(write=False)
        object.__setattr__(self, "probs", arr)

    def config_index(self, record) -> int:
        if not self.parents:
            return 0
        vals = tuple(int(record[p]) for p in self.parents)
        return int(np.ravel_multi_index(vals, self.parent_dims))

    def row_for(self, record) -> np.ndarray:
        return self.probs[self.config_index(record)]


@dataclass(frozen=True)
class CptSet:
    """One conditional probability table per attribute plus the budget used."""

    attributes: tuple[AttributeCpt, ...]
    alpha: float
    epsilon_p: float
    adjacency: str

    @property
    def m(self) -> int:
        return len(self.attributes)

    def prob_given(self, i: int, record) -> float:
        cpt = self.attributes[i]
        return float(cpt.row_for(record)[int(record[i])])


def count_vectors(data: DiscreteTable, structure: ParentSets) -> list[AttributeCounts]:
    """Tally, per attribute, the target values under every parent configuration."""
    if structure.m != data.m:
        raise DataError("structure width does not match table width")
    out: list[AttributeCounts] = []
    rows = data.rows
    for i in range(data.m):
        parents = structure.parents[i]
        dims = tuple(data.schema[p].cardinality for p in parents)
        n_cfg = int(np.prod(dims, dtype=np.int64)) if dims else 1
        card = data.schema[i].cardinality
        counts = np.zeros((n_cfg, card), dtype=np.int64)
        if data.n_rows:
            if parents:
                keys = np.ravel_multi_index(
                    tuple(rows[:, p] for p in parents), dims
                )
            else:
                keys = np.zeros(data.n_rows, dtype=np.int64)
            np.add.at(counts, (keys, rows[:, i]), 1)
        out.append(AttributeCounts(i, parents, dims, counts))
    return out


def count_sensitivity(adjacency: str) -> float:
    """L1 sensitivity of one attribute's count family to one record."""
    if adjacency == ADD_REMOVE:
        return 1.0
    if adjacency == REPLACE:
        return 2.0
    raise DataError(f"unknown adjacency {adjacency!r}")


def learn_hyperparameter(dp: DiscreteTable) -> float:
    """Data-scaled symmetric Dirichlet strength: max(1, |dp| / (100 * m))."""
    m = max(dp.m, 1)
    return max(1.0, dp.n_rows / (100.0 * m))


def estimate_cpts(
    counts: list[AttributeCounts],
    alpha: float,
    epsilon_p: float,
    adjacency: str,
    rng: np.random.Generator,
) -> CptSet:
    """Smooth (optionally noised) count families into row-stochastic CPTs.

    A finite budget is split evenly over the attributes; every count cell then
    gets independent Laplace(sensitivity * m / epsilon_p) noise and is clamped
    at zero.  Rows become (count + alpha) / (row total + alpha * cardinality),
    renormalized exactly, so unseen configurations yield the uniform prior.
    """
    if not alpha > 0:
        raise DataError(f"alpha must be positive (got {alpha!r})")
    if not epsilon_p > 0:
        raise DataError(f"epsilon_p must be positive (got {epsilon_p!r})")
    sens = count_sensitivity(adjacency)
    m = len(counts)
    tables: list[AttributeCpt] = []
    noisy_scale = None if math.isinf(epsilon_p) else sens * m / epsilon_p
    for fam in counts:
        c = fam.counts.astype(float)
        if noisy_scale is not None:
            c = c + rng.laplace(0.0, noisy_scale, size=c.shape)
            c = np.maximum(c, 0.0)
        weighted = c + alpha
        probs = weighted / weighted.sum(axis=1, keepdims=True)
        tables.append(AttributeCpt(fam.target, fam.parents, fam.parent_dims, probs))
    return CptSet(tuple(tables), float(alpha), float(epsilon_p), adjacency)
