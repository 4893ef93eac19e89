"""Shared builders and independent oracles for the test suite."""

from __future__ import annotations

import itertools
import math

import numpy as np

from dsynth.model import SynthModel
from dsynth.params import ADD_REMOVE, AttributeCpt, CptSet
from dsynth.schema import CATEGORICAL, AttributeSchema, DiscreteTable
from dsynth.structure import ParentSets


def make_schema(cards) -> tuple[AttributeSchema, ...]:
    return tuple(
        AttributeSchema(f"a{i}", CATEGORICAL, tuple(f"v{j}" for j in range(c)))
        for i, c in enumerate(cards)
    )


def build_model(cards, parents, order, prob_rows=None, rng=None, alpha=1.0) -> SynthModel:
    """Assemble a SynthModel from explicit cardinalities, parents, and order.

    ``prob_rows`` maps attribute index to a (n_configs, card) array; anything
    missing is drawn from a Dirichlet(1) with ``rng``.
    """
    schema = make_schema(cards)
    m = len(cards)
    parents = tuple(tuple(int(p) for p in ps) for ps in parents)
    structure = ParentSets(parents, tuple(int(o) for o in order), tuple(0.0 for _ in range(m)))
    tables = []
    for i in range(m):
        dims = tuple(cards[p] for p in parents[i])
        n_cfg = int(np.prod(dims)) if dims else 1
        if prob_rows is not None and i in prob_rows:
            probs = np.asarray(prob_rows[i], dtype=float)
        else:
            probs = rng.dirichlet(np.ones(cards[i]), size=n_cfg)
        assert probs.shape == (n_cfg, cards[i])
        tables.append(AttributeCpt(i, parents[i], dims, probs))
    cpts = CptSet(tuple(tables), alpha=alpha, epsilon_p=math.inf, adjacency=ADD_REMOVE)
    return SynthModel(schema, structure, cpts)


def random_model(rng, m=None, cards=None, max_parents=2) -> SynthModel:
    """A random DAG with random positive CPTs over small categorical domains."""
    if m is None:
        m = int(rng.integers(1, 8))
    if cards is None:
        cards = [int(c) for c in rng.integers(2, 4, size=m)]
    order = [int(a) for a in rng.permutation(m)]
    parents = [() for _ in range(m)]
    for pos, attr in enumerate(order):
        limit = min(pos, max_parents)
        if limit:
            k = int(rng.integers(0, limit + 1))
            if k:
                chosen = rng.choice(order[:pos], size=k, replace=False)
                parents[attr] = tuple(sorted(int(c) for c in chosen))
    return build_model(cards, parents, order, rng=rng)


def random_table(rng, n, cards) -> DiscreteTable:
    rows = np.stack([rng.integers(0, c, size=n) for c in cards], axis=1)
    return DiscreteTable(make_schema(cards), rows)


def brute_force_probability(y, d, model: SynthModel, omega: float) -> float:
    """Seed-to-record probability by summing over all 2^m keep masks."""
    y = np.asarray(y)
    d = np.asarray(d)
    m = len(y)
    kappa = 1.0 - omega / m
    p = [model.cpts.prob_given(i, y) for i in range(m)]
    total = 0.0
    for mask in itertools.product((True, False), repeat=m):
        term = 1.0
        for i, keep in enumerate(mask):
            if keep:
                term *= kappa * (1.0 if d[i] == y[i] else 0.0)
            else:
                term *= (1.0 - kappa) * p[i]
            if term == 0.0:
                break
        total += term
    return total


def sample_chain(rng, n, cards=(6, 5, 4, 3, 2), retain=0.9) -> DiscreteTable:
    """A Markov chain of noisy projections; true edges are consecutive pairs.

    Cardinalities strictly decrease so marginal entropies do too, which pins
    the search's visitation order to the chain order.
    """
    cols = []
    x = rng.integers(0, cards[0], size=n)
    cols.append(x)
    for c in cards[1:]:
        keep = rng.random(n) < retain
        x = np.where(keep, x % c, rng.integers(0, c, size=n))
        cols.append(x)
    return DiscreteTable(make_schema(cards), np.stack(cols, axis=1))


def chain_true_edges(m: int) -> set[frozenset]:
    return {frozenset((i, i + 1)) for i in range(m - 1)}


def undirected_edges(parents) -> set[frozenset]:
    out = set()
    for child, ps in enumerate(parents):
        for p in ps:
            out.add(frozenset((p, child)))
    return out
