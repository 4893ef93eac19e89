"""Dependency-DAG learning over discretized attributes.

Each attribute greedily picks a parent set that maximizes a merit score built
from symmetric uncertainty: the numerator rewards parent-target correlation,
the denominator penalizes redundancy among parents.  Attributes are visited in
descending marginal-entropy order and may only take already-visited attributes
as parents, so the result is acyclic by construction and the visitation order
doubles as a topological (resampling) order.

When a noise budget is supplied, every count table read during the search is
perturbed once with Laplace noise and cached, so all merit evaluations see one
consistent noisy view of the data.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .schema import AttributeSchema, DataError, DiscreteTable

#: saturation sentinel returned by parent_complexity instead of a huge product;
#: past 2**53 the product is no longer float64-exact and no usable cap lives there
OVER_CAP = 1 << 53

#: a candidate parent must raise the merit by more than this to be accepted
IMPROVEMENT_EPS = 1e-9

#: per-cell L1 sensitivity of a count table to replacing one record
STRUCTURE_COUNT_SENSITIVITY = 2.0


@dataclass(frozen=True)
class ParentSets:
    """A learned DAG: per-attribute parents, sampling order, and scores."""

    parents: tuple[tuple[int, ...], ...]
    order: tuple[int, ...]
    scores: tuple[float, ...]

    def __post_init__(self) -> None:
        m = len(self.parents)
        if sorted(self.order) != list(range(m)):
            raise DataError("order is not a permutation of the attributes")
        if len(self.scores) != m:
            raise DataError("scores length does not match attribute count")
        pos = {a: i for i, a in enumerate(self.order)}
        for child, ps in enumerate(self.parents):
            for p in ps:
                if pos[p] >= pos[child]:
                    raise DataError(
                        f"parent {p} does not precede child {child} in the sampling order"
                    )
        if any(not math.isfinite(s) for s in self.scores):
            raise DataError("non-finite parent-set score")

    @property
    def m(self) -> int:
        return len(self.parents)

    def total_score(self) -> float:
        return float(sum(self.scores))


@dataclass(frozen=True)
class AttributeSearch:
    """Diagnostics for one attribute's greedy parent search."""

    attribute: int
    parents: tuple[int, ...]
    score: float
    examined: int
    cap_pruned: bool
    score_path: tuple[float, ...]  # score after each accepted addition, starting at 0


@dataclass(frozen=True)
class ScoreReport:
    attributes: tuple[AttributeSearch, ...]


@dataclass(frozen=True)
class StructureNoise:
    """Laplace budget for perturbing the count tables read by the search."""

    epsilon_s: float
    rng: np.random.Generator

    def __post_init__(self) -> None:
        if not self.epsilon_s > 0:
            raise DataError(f"epsilon_s must be positive (got {self.epsilon_s!r})")


# ------------------------------------------------------------ measures

def entropy(counts) -> float:
    """Shannon entropy in bits of the distribution proportional to ``counts``."""
    c = np.asarray(counts, dtype=float).ravel()
    if c.size == 0 or (c < 0).any():
        raise DataError("entropy needs a nonnegative histogram")
    total = c.sum()
    if total <= 0:
        raise DataError("entropy of an all-zero histogram is undefined")
    p = c[c > 0] / total
    return float(-(p * np.log2(p)).sum())


def symmetric_uncertainty(joint) -> float:
    """2*I(X;Y) / (H(X)+H(Y)) from a joint count table; 0 when both are constant."""
    j = np.asarray(joint, dtype=float)
    if j.ndim != 2:
        raise DataError("joint counts must be a 2-d table")
    if (j < 0).any():
        raise DataError("joint counts must be nonnegative")
    total = j.sum()
    if total <= 0:
        raise DataError("symmetric uncertainty of an empty joint table is undefined")
    hx = entropy(j.sum(axis=1))
    hy = entropy(j.sum(axis=0))
    denom = hx + hy
    if denom <= 0:
        return 0.0
    hxy = entropy(j)
    mi = max(hx + hy - hxy, 0.0)
    return float(min(2.0 * mi / denom, 1.0))


def parent_complexity(parent_set, schema) -> int:
    """Product of the parents' domain sizes, saturating at OVER_CAP."""
    prod = 1
    for j in parent_set:
        prod *= schema[j].cardinality
        if prod >= OVER_CAP:
            return OVER_CAP
    return prod


def joint_counts(data: DiscreteTable, i: int, j: int) -> np.ndarray:
    """Exact |dom_i| x |dom_j| contingency table of two columns."""
    ci = data.schema[i].cardinality
    cj = data.schema[j].cardinality
    if data.n_rows == 0:
        return np.zeros((ci, cj), dtype=np.int64)
    flat = data.column(i) * cj + data.column(j)
    return np.bincount(flat, minlength=ci * cj).reshape(ci, cj)


def perturb_counts(counts, epsilon_s: float, rng: np.random.Generator) -> np.ndarray:
    """Add Laplace(2/epsilon_s) noise per cell and clamp at zero.

    The infinity sentinel disables the noise and returns the counts unchanged.
    """
    if not epsilon_s > 0:
        raise DataError(f"epsilon_s must be positive (got {epsilon_s!r})")
    c = np.asarray(counts, dtype=float)
    if math.isinf(epsilon_s):
        return c.copy()
    noisy = c + rng.laplace(0.0, STRUCTURE_COUNT_SENSITIVITY / epsilon_s, size=c.shape)
    return np.maximum(noisy, 0.0)


def merit_score(target: int, parent_set, data: DiscreteTable) -> float:
    """CFS-style merit of a parent set for one target attribute.

    With p parents, mean parent-target SU r_ct and mean parent-parent SU r_pp:
    ``p * r_ct / sqrt(p + p*(p-1)*r_pp)``.  The empty set scores 0.
    """
    parents = sorted(set(int(p) for p in parent_set))
    if target in parents:
        raise DataError(f"target {target} cannot be its own parent")
    if not parents:
        return 0.0
    if data.n_rows == 0:
        raise DataError("merit_score needs a nonempty table")
    su = {}
    for a, b in itertools.combinations(sorted(parents + [target]), 2):
        su[(a, b)] = symmetric_uncertainty(joint_counts(data, a, b))
    lookup = lambda a, b: su[(min(a, b), max(a, b))]
    return _merit_from_su(lookup, target, parents)


def _merit_from_su(su_lookup, target: int, parents) -> float:
    p = len(parents)
    if p == 0:
        return 0.0
    r_ct = sum(su_lookup(c, target) for c in parents) / p
    if p < 2:
        r_pp = 0.0
    else:
        pairs = list(itertools.combinations(parents, 2))
        r_pp = sum(su_lookup(a, b) for a, b in pairs) / len(pairs)
    return (p * r_ct) / math.sqrt(p + p * (p - 1) * r_pp)


# ------------------------------------------------------------ count source

class _CountSource:
    """Count tables over the data, optionally noised once per table and cached."""

    def __init__(self, data: DiscreteTable, noise: StructureNoise | None):
        self._data = data
        self._noise = noise
        self._joint: dict[tuple[int, int], np.ndarray] = {}
        self._marginal: dict[int, np.ndarray] = {}

    def marginal(self, i: int) -> np.ndarray:
        tab = self._marginal.get(i)
        if tab is None:
            card = self._data.schema[i].cardinality
            if self._data.n_rows:
                tab = np.bincount(self._data.column(i), minlength=card).astype(float)
            else:
                tab = np.zeros(card)
            if self._noise is not None:
                tab = perturb_counts(tab, self._noise.epsilon_s, self._noise.rng)
            self._marginal[i] = tab
        return tab

    def joint(self, i: int, j: int) -> np.ndarray:
        a, b = (i, j) if i < j else (j, i)
        tab = self._joint.get((a, b))
        if tab is None:
            tab = joint_counts(self._data, a, b).astype(float)
            if self._noise is not None:
                tab = perturb_counts(tab, self._noise.epsilon_s, self._noise.rng)
            self._joint[(a, b)] = tab
        return tab if (i, j) == (a, b) else tab.T

    def su(self, i: int, j: int) -> float:
        tab = self.joint(i, j)
        if tab.sum() <= 0:
            return 0.0
        return symmetric_uncertainty(tab)

    def marginal_entropy(self, i: int) -> float:
        tab = self.marginal(i)
        if tab.sum() <= 0:
            return 0.0
        return entropy(tab)


# ------------------------------------------------------------ greedy search

def greedy_parent_search(
    data: DiscreteTable,
    max_parents: int,
    complexity_cap: int,
    noise: StructureNoise | None = None,
) -> tuple[ParentSets, ScoreReport]:
    """Greedy forward selection of parent sets under acyclicity and a size cap.

    Attributes are visited in descending marginal-entropy order (ties by
    column index) and may only pick already-visited parents.  Starting from
    the empty set, the single admissible attribute giving the largest merit
    increase (> IMPROVEMENT_EPS) is added until nothing improves, max_parents
    is reached, or every candidate would exceed the complexity cap.
    """
    if max_parents < 0:
        raise DataError("max_parents must be >= 0")
    if complexity_cap < 1:
        raise DataError("complexity_cap must be >= 1")
    m = data.m
    src = _CountSource(data, noise)
    ent = [src.marginal_entropy(i) for i in range(m)]
    visit = sorted(range(m), key=lambda i: (-ent[i], i))

    schema = data.schema
    parents: list[tuple[int, ...]] = [()] * m
    scores: list[float] = [0.0] * m
    diags: list[AttributeSearch | None] = [None] * m

    su_cache: dict[tuple[int, int], float] = {}

    def su(a: int, b: int) -> float:
        key = (a, b) if a < b else (b, a)
        val = su_cache.get(key)
        if val is None:
            val = src.su(*key)
            su_cache[key] = val
        return val

    for pos, target in enumerate(visit):
        candidates = visit[:pos]
        chosen: list[int] = []
        score = 0.0
        examined = 1  # the empty set
        cap_pruned = False
        path = [0.0]
        while len(chosen) < max_parents:
            best_cand = None
            best_score = score
            for c in candidates:
                if c in chosen:
                    continue
                if parent_complexity(chosen + [c], schema) > complexity_cap:
                    cap_pruned = True
                    continue
                trial = _merit_from_su(su, target, chosen + [c])
                examined += 1
                if trial > score + IMPROVEMENT_EPS and trial > best_score:
                    best_cand = c
                    best_score = trial
            if best_cand is None:
                break
            chosen.append(best_cand)
            score = best_score
            path.append(score)
        parents[target] = tuple(chosen)
        scores[target] = score
        diags[target] = AttributeSearch(
            attribute=target,
            parents=tuple(chosen),
            score=score,
            examined=examined,
            cap_pruned=cap_pruned,
            score_path=tuple(path),
        )

    result = ParentSets(tuple(parents), tuple(visit), tuple(scores))
    report = ScoreReport(tuple(d for d in diags if d is not None))
    return result, report
