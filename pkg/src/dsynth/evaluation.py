"""Release quality metrics: fidelity, throughput, and indistinguishability.

The real-vs-synthetic test trains small linear classifiers (logistic and
hinge loss, mini-batch gradient descent, written here so runs are fully
deterministic under a seed) on one-hot rows labeled real=0 / synthetic=1.
Held-out accuracy near 0.5 means the release is indistinguishable from the
real data; per-attribute total variation distance tracks marginal fidelity.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .privacy import RunStats
from .schema import DataError, DiscreteTable

LOGISTIC = "logistic"
HINGE = "hinge"


@dataclass(frozen=True)
class LinearModel:
    weights: np.ndarray
    bias: float
    loss: str
    epoch_losses: tuple[float, ...]

    def decision(self, features: np.ndarray) -> np.ndarray:
        return features @ self.weights + self.bias

    def predict(self, features: np.ndarray) -> np.ndarray:
        return (self.decision(features) >= 0.0).astype(np.int64)


@dataclass(frozen=True)
class EvalReport:
    lr_accuracy: float
    lr_sd: float
    svm_accuracy: float
    svm_sd: float
    tvd: tuple[float, ...]
    folds: int
    pass_rate: float | None = None
    records_per_second: float | None = None

    @property
    def mean_tvd(self) -> float:
        return float(np.mean(self.tvd)) if self.tvd else 0.0


# ------------------------------------------------------------- encoding

def encoded_width(schema) -> int:
    return int(sum(a.cardinality for a in schema))


def one_hot_encode(table: DiscreteTable) -> np.ndarray:
    """Expand every category index into an indicator block; m ones per row."""
    n = table.n_rows
    width = encoded_width(table.schema)
    out = np.zeros((n, width))
    if n == 0:
        return out
    offset = 0
    for j, attr in enumerate(table.schema):
        out[np.arange(n), offset + table.column(j)] = 1.0
        offset += attr.cardinality
    return out


# ------------------------------------------------------------- training

def logistic_loss_grad(weights, bias, features, labels, l2):
    """Mean logistic loss and its exact gradients (l2 applies to weights only)."""
    z = features @ weights + bias
    loss = float(np.mean(np.logaddexp(0.0, z) - labels * z) + 0.5 * l2 * np.dot(weights, weights))
    sig = 1.0 / (1.0 + np.exp(-z))
    resid = sig - labels
    grad_w = features.T @ resid / len(labels) + l2 * weights
    grad_b = float(np.mean(resid))
    return loss, grad_w, grad_b


def hinge_loss_grad(weights, bias, features, labels, l2):
    """Mean hinge loss over labels mapped to {-1, +1}, plus l2 on weights."""
    s = 2.0 * labels - 1.0
    z = features @ weights + bias
    margin = 1.0 - s * z
    loss = float(np.mean(np.maximum(margin, 0.0)) + 0.5 * l2 * np.dot(weights, weights))
    active = (margin > 0.0).astype(float)
    coef = -s * active
    grad_w = features.T @ coef / len(labels) + l2 * weights
    grad_b = float(np.mean(coef))
    return loss, grad_w, grad_b


_LOSSES = {LOGISTIC: logistic_loss_grad, HINGE: hinge_loss_grad}


def train_linear(
    features: np.ndarray,
    labels: np.ndarray,
    loss: str,
    learning_rate: float,
    epochs: int,
    l2: float,
    rng: np.random.Generator,
    batch_size: int = 32,
) -> LinearModel:
    """Mini-batch gradient descent from zero weights; per-epoch loss recorded."""
    if loss not in _LOSSES:
        raise DataError(f"unknown loss {loss!r}")
    labels = np.asarray(labels, dtype=float)
    n = len(labels)
    if n < 2 or len(np.unique(labels)) < 2:
        raise DataError("training needs at least two examples with both labels present")
    loss_grad = _LOSSES[loss]
    w = np.zeros(features.shape[1])
    b = 0.0
    history: list[float] = []
    for _ in range(epochs):
        perm = rng.permutation(n)
        for start in range(0, n, batch_size):
            batch = perm[start:start + batch_size]
            _, gw, gb = loss_grad(w, b, features[batch], labels[batch], l2)
            w = w - learning_rate * gw
            b = b - learning_rate * gb
        epoch_loss, _, _ = loss_grad(w, b, features, labels, l2)
        history.append(epoch_loss)
    return LinearModel(weights=w, bias=b, loss=loss, epoch_losses=tuple(history))


# ------------------------------------------------- real-vs-synthetic test

def _check_same_schema(real: DiscreteTable, synth: DiscreteTable) -> None:
    if len(real.schema) != len(synth.schema):
        raise DataError("tables have different attribute counts")
    for a, b in zip(real.schema, synth.schema):
        if a != b:
            raise DataError(f"schema mismatch at column {a.name!r}")


def _grouped_folds(rows: np.ndarray, folds: int, rng: np.random.Generator) -> np.ndarray:
    """Fold assignment that keeps identical rows together.

    Duplicate feature vectors, which occur freely in discrete tables and may
    carry both labels, must not straddle the train/test boundary: a lone twin
    in the training set flips the prediction for its held-out copy and drags
    accuracy systematically below chance.  Groups are dealt to the currently
    smallest fold in shuffled order.
    """
    _, inverse = np.unique(rows, axis=0, return_inverse=True)
    n_groups = int(inverse.max()) + 1
    if n_groups < folds:
        raise DataError(f"folds={folds} exceeds the {n_groups} distinct rows")
    group_sizes = np.bincount(inverse)
    fold_of_group = np.empty(n_groups, dtype=np.int64)
    fold_sizes = np.zeros(folds, dtype=np.int64)
    for g in rng.permutation(n_groups):
        f = int(np.argmin(fold_sizes))
        fold_of_group[g] = f
        fold_sizes[f] += group_sizes[g]
    return fold_of_group[inverse]


def distinguishability(
    real: DiscreteTable,
    synth: DiscreteTable,
    loss: str,
    folds: int,
    rng: np.random.Generator,
    learning_rate: float = 0.1,
    epochs: int = 300,
    l2: float = 1e-4,
    batch_size: int = 32,
    workers: int = 1,
) -> tuple[float, float]:
    """Cross-validated accuracy of a classifier separating real from synthetic.

    Classes are balanced by down-sampling the larger table, then scored with
    k-fold cross-validation whose folds keep identical rows together (so
    duplicated records cannot leak memorized labels across the boundary).
    Returns (mean accuracy, fold sd); 0.5 means the classifier cannot tell
    the tables apart.
    """
    _check_same_schema(real, synth)
    if real.n_rows == 0 or synth.n_rows == 0:
        raise DataError("empty table")
    if folds < 2:
        raise DataError("folds must be >= 2")
    n = min(real.n_rows, synth.n_rows)
    real_sub = real.take(rng.choice(real.n_rows, size=n, replace=False))
    synth_sub = synth.take(rng.choice(synth.n_rows, size=n, replace=False))
    features = np.concatenate([one_hot_encode(real_sub), one_hot_encode(synth_sub)])
    labels = np.concatenate([np.zeros(n), np.ones(n)])
    fold_of = _grouped_folds(np.concatenate([real_sub.rows, synth_sub.rows]), folds, rng)
    fold_seeds = rng.integers(0, 2**63 - 1, size=folds)

    def run_fold(f: int) -> float:
        test = fold_of == f
        train_labels = labels[~test]
        if len(np.unique(train_labels)) < 2 or not test.any():
            raise DataError(f"folds={folds} leaves fold {f} untrainable")
        model = train_linear(
            features[~test],
            train_labels,
            loss,
            learning_rate,
            epochs,
            l2,
            np.random.default_rng(fold_seeds[f]),
            batch_size=batch_size,
        )
        pred = model.predict(features[test])
        return float(np.mean(pred == labels[test]))

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            accs = list(pool.map(run_fold, range(folds)))
    else:
        accs = [run_fold(f) for f in range(folds)]
    return float(np.mean(accs)), float(np.std(accs))


# ------------------------------------------------------------- fidelity

def marginal_tvd(real: DiscreteTable, synth: DiscreteTable, attribute: int) -> float:
    """Total variation distance between one attribute's marginals."""
    _check_same_schema(real, synth)
    if real.n_rows == 0 or synth.n_rows == 0:
        raise DataError("empty table")
    card = real.schema[attribute].cardinality
    fr = np.bincount(real.column(attribute), minlength=card) / real.n_rows
    fs = np.bincount(synth.column(attribute), minlength=card) / synth.n_rows
    return float(0.5 * np.abs(fr - fs).sum())


def all_marginal_tvds(real: DiscreteTable, synth: DiscreteTable) -> tuple[float, ...]:
    return tuple(marginal_tvd(real, synth, j) for j in range(real.m))


def timing_report(stats: RunStats) -> dict:
    """Releases per second plus per-phase wall times; safe at zero releases."""
    if stats.releases <= 0:
        rps = 0.0
    else:
        rps = stats.releases / max(stats.seconds, 1e-12)
    return {
        "records_per_second": rps,
        "total_seconds": stats.seconds,
        "phase_seconds": dict(stats.phase_seconds),
    }
