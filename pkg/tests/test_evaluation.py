"""One-hot encoding, linear classifiers, distinguishability, TVD, timing."""

from __future__ import annotations

import numpy as np
import pytest

from dsynth.evaluation import (
    HINGE,
    LOGISTIC,
    distinguishability,
    encoded_width,
    hinge_loss_grad,
    logistic_loss_grad,
    marginal_tvd,
    one_hot_encode,
    timing_report,
    train_linear,
)
from dsynth.privacy import RunStats
from dsynth.schema import DataError, DiscreteTable

from conftest import make_schema, random_table


def _table(rows, cards):
    return DiscreteTable(make_schema(cards), np.asarray(rows, dtype=np.int64))


# ----------------------------------------------------------------- one-hot

def test_one_hot_single_attribute():
    mat = one_hot_encode(_table([[0]], (2,)))
    assert mat.tolist() == [[1.0, 0.0]]


def test_one_hot_two_attributes():
    mat = one_hot_encode(_table([[1, 0]], (2, 3)))
    assert mat.tolist() == [[0.0, 1.0, 1.0, 0.0, 0.0]]


def test_one_hot_empty_table_keeps_width():
    table = _table(np.zeros((0, 2), dtype=np.int64), (2, 3))
    mat = one_hot_encode(table)
    assert mat.shape == (0, 5)
    assert encoded_width(table.schema) == 5


def test_one_hot_has_m_ones_per_row():
    table = random_table(np.random.default_rng(0), 30, (2, 3, 4))
    mat = one_hot_encode(table)
    assert np.all(mat.sum(axis=1) == 3)


# ---------------------------------------------------------------- training

def test_train_separable_two_points():
    X = np.array([[1.0, 0.0], [0.0, 1.0]])
    y = np.array([0.0, 1.0])
    for loss in (LOGISTIC, HINGE):
        model = train_linear(X, y, loss, 0.5, 200, 1e-4, np.random.default_rng(0), batch_size=2)
        assert np.mean(model.predict(X) == y) == 1.0


def test_train_rejects_single_class():
    X = np.ones((4, 2))
    with pytest.raises(DataError):
        train_linear(X, np.zeros(4), LOGISTIC, 0.1, 10, 0.0, np.random.default_rng(0))


def test_train_deterministic_under_seed():
    rng = np.random.default_rng(1)
    X = rng.random((50, 6))
    y = (rng.random(50) < 0.5).astype(float)
    if y.sum() in (0, 50):
        y[0] = 1 - y[0]
    a = train_linear(X, y, LOGISTIC, 0.1, 30, 1e-4, np.random.default_rng(5))
    b = train_linear(X, y, LOGISTIC, 0.1, 30, 1e-4, np.random.default_rng(5))
    assert np.array_equal(a.weights, b.weights)
    assert a.bias == b.bias


def test_train_loss_history_recorded_and_improves():
    rng = np.random.default_rng(2)
    X = rng.random((120, 4))
    y = (X[:, 0] > 0.5).astype(float)
    model = train_linear(X, y, LOGISTIC, 0.2, 50, 1e-4, np.random.default_rng(3))
    assert len(model.epoch_losses) == 50
    assert model.epoch_losses[-1] <= model.epoch_losses[0]


def test_random_labels_give_chance_accuracy():
    rng = np.random.default_rng(4)
    X = rng.random((1000, 8))
    y = (rng.random(1000) < 0.5).astype(float)
    model = train_linear(X[:500], y[:500], LOGISTIC, 0.1, 60, 1e-4, np.random.default_rng(6))
    acc = float(np.mean(model.predict(X[500:]) == y[500:]))
    assert abs(acc - 0.5) < 0.05


# ----------------------------------------------------------- gradient check

def _central_difference(fn, x, h=1e-6):
    grad = np.zeros_like(x)
    for i in range(len(x)):
        step = np.zeros_like(x)
        step[i] = h
        grad[i] = (fn(x + step) - fn(x - step)) / (2 * h)
    return grad


def test_logistic_gradient_matches_finite_differences():
    rng = np.random.default_rng(7)
    for _ in range(10):
        n, d = int(rng.integers(3, 12)), int(rng.integers(1, 6))
        X = rng.normal(size=(n, d))
        y = (rng.random(n) < 0.5).astype(float)
        w = rng.normal(size=d)
        b = float(rng.normal())
        l2 = float(rng.uniform(0, 0.1))
        _, gw, gb = logistic_loss_grad(w, b, X, y, l2)
        fd_w = _central_difference(lambda v: logistic_loss_grad(v, b, X, y, l2)[0], w)
        fd_b = _central_difference(
            lambda v: logistic_loss_grad(w, float(v[0]), X, y, l2)[0], np.array([b])
        )[0]
        rel = np.linalg.norm(gw - fd_w) / max(np.linalg.norm(fd_w), 1e-12)
        assert rel < 1e-5
        assert abs(gb - fd_b) / max(abs(fd_b), 1e-12) < 1e-5


def test_hinge_descends_on_separable_data():
    X = np.array([[2.0, 0.1], [1.5, -0.2], [-1.8, 0.3], [-2.2, 0.0]])
    y = np.array([1.0, 1.0, 0.0, 0.0])
    loss0, _, _ = hinge_loss_grad(np.zeros(2), 0.0, X, y, 0.0)
    model = train_linear(X, y, HINGE, 0.3, 100, 0.0, np.random.default_rng(8), batch_size=4)
    assert model.epoch_losses[-1] < loss0
    assert np.mean(model.predict(X) == y) == 1.0


# ------------------------------------------------------- distinguishability

def test_distinguishability_identical_tables_near_half():
    table = random_table(np.random.default_rng(9), 400, (3, 2, 4))
    acc, sd = distinguishability(table, table, LOGISTIC, 5, np.random.default_rng(10), epochs=60)
    assert 0.40 <= acc <= 0.60
    assert sd >= 0.0


def test_distinguishability_detects_planted_constant():
    rng = np.random.default_rng(11)
    real = random_table(rng, 500, (8, 3))
    forced = real.rows.copy()
    forced[:, 0] = 2
    synth = DiscreteTable(real.schema, forced)
    # Bayes rate for the planted difference: real rows with a0 != v2 are a
    # giveaway, so accuracy should reach (1 + P(a0 != 2)) / 2 (approximately).
    p_diff = float(np.mean(real.column(0) != 2))
    bayes = (1 + p_diff) / 2
    acc, _ = distinguishability(real, synth, LOGISTIC, 5, np.random.default_rng(12), epochs=120)
    assert acc > 0.9
    assert acc <= bayes + 0.05


def test_distinguishability_fold_counts_both_calibrated():
    table = random_table(np.random.default_rng(13), 600, (2, 3))
    other = random_table(np.random.default_rng(14), 600, (2, 3))
    for folds in (2, 5):
        acc, _ = distinguishability(table, other, LOGISTIC, folds, np.random.default_rng(15), epochs=60)
        assert 0.45 <= acc <= 0.55


def test_distinguishability_schema_mismatch_names_column():
    a = random_table(np.random.default_rng(16), 20, (2, 3))
    schema_b = make_schema((2, 4))
    b = DiscreteTable(schema_b, np.zeros((20, 2), dtype=np.int64))
    with pytest.raises(DataError, match="a1"):
        distinguishability(a, b, LOGISTIC, 2, np.random.default_rng(0))


def test_distinguishability_rejects_empty():
    a = random_table(np.random.default_rng(17), 20, (2, 2))
    empty = a.take([])
    with pytest.raises(DataError, match="empty table"):
        distinguishability(a, empty, LOGISTIC, 2, np.random.default_rng(0))


def test_distinguishability_worker_count_does_not_change_result():
    real = random_table(np.random.default_rng(18), 240, (3, 2))
    synth = random_table(np.random.default_rng(19), 240, (3, 2))
    runs = [
        distinguishability(real, synth, HINGE, 4, np.random.default_rng(20), epochs=40, workers=w)
        for w in (1, 4)
    ]
    assert runs[0] == runs[1]


# ------------------------------------------------------------------- TVD

def test_tvd_identical_is_zero():
    table = random_table(np.random.default_rng(21), 50, (3, 2))
    assert marginal_tvd(table, table, 0) == 0.0
    assert marginal_tvd(table, table, 1) == 0.0


def test_tvd_disjoint_supports_is_one():
    real = _table([[0], [0]], (2,))
    synth = _table([[1], [1]], (2,))
    assert marginal_tvd(real, synth, 0) == 1.0


def test_tvd_hand_case():
    real = _table([[0], [0], [0], [1]], (2,))   # 0.75 / 0.25
    synth = _table([[0], [0], [1], [1]], (2,))  # 0.50 / 0.50
    assert marginal_tvd(real, synth, 0) == pytest.approx(0.25, abs=1e-12)


def test_tvd_axioms():
    rng = np.random.default_rng(22)
    for _ in range(20):
        a = random_table(rng, int(rng.integers(1, 40)), (4,))
        b = random_table(rng, int(rng.integers(1, 40)), (4,))
        ab = marginal_tvd(a, b, 0)
        ba = marginal_tvd(b, a, 0)
        assert ab == pytest.approx(ba, abs=1e-12)
        assert 0.0 <= ab <= 1.0


# ----------------------------------------------------------------- timing

def test_timing_zero_releases_no_division_error():
    stats = RunStats(attempts=10, releases=0, pass_rate=0.0, seconds=1.5, status="exhausted")
    rep = timing_report(stats)
    assert rep["records_per_second"] == 0.0


def test_timing_phases_carried_through():
    stats = RunStats(
        attempts=10, releases=5, pass_rate=0.5, seconds=2.0,
        status="completed", phase_seconds={"synthesis_test": 2.0},
    )
    rep = timing_report(stats)
    assert rep["records_per_second"] == pytest.approx(2.5)
    assert rep["phase_seconds"]["synthesis_test"] == 2.0
    assert rep["total_seconds"] == 2.0


def test_null_calibration_over_seeds():
    """Two samples from one distribution: accuracy within [0.45, 0.55] nearly always."""
    hits = 0
    for seed in range(20):
        rng = np.random.default_rng(1000 + seed)
        real = random_table(rng, 1000, (3, 2, 2))
        synth = random_table(rng, 1000, (3, 2, 2))
        acc, _ = distinguishability(
            real, synth, LOGISTIC, 3, np.random.default_rng(seed), epochs=40
        )
        hits += 0.45 <= acc <= 0.55
    assert hits >= 19
