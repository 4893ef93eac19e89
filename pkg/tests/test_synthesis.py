"""Keep masks, candidate generation, and the closed-form generation probability."""

from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dsynth.schema import DataError
from dsynth.synthesis import (
    SynthesisConfig,
    generate_candidate,
    generate_candidates,
    generation_probabilities,
    generation_probability,
    per_value_probs,
    sample_keep_mask,
)

from conftest import brute_force_probability, build_model, random_model


# ------------------------------------------------------------- config type

def test_config_validation():
    SynthesisConfig(omega=1.0, k=1, gamma=1.0)
    with pytest.raises(DataError):
        SynthesisConfig(omega=1.0, k=0, gamma=2.0)
    with pytest.raises(DataError):
        SynthesisConfig(omega=1.0, k=1, gamma=0.5)
    with pytest.raises(DataError):
        SynthesisConfig(omega=-0.5, k=1, gamma=2.0)
    with pytest.raises(DataError):
        SynthesisConfig(omega=1.0, k=1, gamma=2.0, epsilon_0=0.0)


# ---------------------------------------------------------- sample_keep_mask

def test_mask_omega_zero_keeps_everything():
    rng = np.random.default_rng(0)
    for _ in range(50):
        assert sample_keep_mask(6, 0.0, rng).all()


def test_mask_omega_m_keeps_nothing():
    rng = np.random.default_rng(0)
    for _ in range(50):
        assert not sample_keep_mask(6, 6.0, rng).any()


def test_mask_mean_kept_fraction():
    # Monte-Carlo against the Bernoulli mean at omega = m/2
    rng = np.random.default_rng(42)
    m, draws = 10, 100_000
    kept = sum(int(sample_keep_mask(m, m / 2, rng).sum()) for _ in range(draws // 10))
    frac = kept / (m * draws / 10)
    assert abs(frac - 0.5) < 0.01


def test_mask_rejects_out_of_range_omega():
    rng = np.random.default_rng(0)
    with pytest.raises(DataError):
        sample_keep_mask(4, 4.5, rng)
    with pytest.raises(DataError):
        sample_keep_mask(4, -0.1, rng)


# -------------------------------------------------------- generate_candidate

def test_candidate_all_kept_is_seed():
    rng = np.random.default_rng(1)
    model = random_model(rng, m=4)
    seed = np.array([0, 1, 0, 1])
    cand = generate_candidate(seed, np.ones(4, bool), model.structure, model.cpts, rng)
    assert np.array_equal(cand.record, seed)


def test_candidate_one_hot_cpts_force_record():
    one_hot = {0: np.array([[0.0, 1.0]]), 1: np.array([[1.0, 0.0, 0.0]])}
    model = build_model((2, 3), [(), ()], [0, 1], prob_rows=one_hot)
    rng = np.random.default_rng(2)
    for seed in ([0, 0], [1, 2]):
        cand = generate_candidate(np.array(seed), np.zeros(2, bool), model.structure, model.cpts, rng)
        assert list(cand.record) == [1, 0]


def test_candidate_deterministic_under_seed():
    model = random_model(np.random.default_rng(3), m=5)
    seed = np.zeros(5, dtype=np.int64)
    mask = np.array([True, False, True, False, False])
    a = generate_candidate(seed, mask, model.structure, model.cpts, np.random.default_rng(9))
    b = generate_candidate(seed, mask, model.structure, model.cpts, np.random.default_rng(9))
    assert np.array_equal(a.record, b.record)


def test_candidate_kept_positions_always_match_seed():
    rng = np.random.default_rng(4)
    model = random_model(rng, m=6)
    for _ in range(40):
        seed = np.array([rng.integers(0, len(a.domain)) for a in model.schema])
        mask = sample_keep_mask(6, 3.0, rng)
        cand = generate_candidate(seed, mask, model.structure, model.cpts, rng)
        assert np.array_equal(cand.record[mask], seed[mask])


# --------------------------------------------------- generation_probability

def test_probability_full_resampling_ignores_seed():
    rng = np.random.default_rng(5)
    model = random_model(rng, m=4)
    y = np.array([0, 1, 0, 1])
    p = per_value_probs(y, model.structure, model.cpts)
    expected = float(np.prod(p))
    for d in ([0, 0, 0, 0], [1, 1, 1, 1], [0, 1, 0, 1]):
        got = generation_probability(y, np.array(d), model.cpts, model.structure, omega=4.0)
        assert got == pytest.approx(expected, abs=1e-15)


def test_probability_pure_copy_is_indicator():
    rng = np.random.default_rng(6)
    model = random_model(rng, m=3)
    y = np.array([1, 0, 1])
    same = generation_probability(y, y, model.cpts, model.structure, omega=0.0)
    diff = generation_probability(y, np.array([1, 1, 1]), model.cpts, model.structure, omega=0.0)
    assert same == 1.0
    assert diff == 0.0


def test_probability_hand_case():
    # m=2, kappa=0.5, p=(0.5, 0.25), d=y: brute mask sum (0.125+0.25+0.5+1)/4
    rows = {0: np.array([[0.5, 0.5]]), 1: np.array([[0.25, 0.75]])}
    model = build_model((2, 2), [(), ()], [0, 1], prob_rows=rows)
    y = np.array([0, 0])
    got = generation_probability(y, y, model.cpts, model.structure, omega=1.0)
    assert got == pytest.approx(0.46875, abs=1e-15)
    assert got == pytest.approx((0.125 + 0.25 + 0.5 + 1.0) / 4.0, abs=1e-15)


def test_probability_matches_brute_force_over_random_models():
    rng = np.random.default_rng(7)
    for _ in range(40):
        m = int(rng.integers(1, 7))
        model = random_model(rng, m=m)
        cards = [a.cardinality for a in model.schema]
        y = np.array([rng.integers(0, c) for c in cards])
        d = np.array([rng.integers(0, c) for c in cards])
        omega = float(rng.uniform(0, m))
        got = generation_probability(y, d, model.cpts, model.structure, omega)
        want = brute_force_probability(y, d, model, omega)
        assert got == pytest.approx(want, abs=1e-12)


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**31 - 1))
def test_probability_monotone_in_agreement(seed):
    rng = np.random.default_rng(seed)
    m = int(rng.integers(2, 7))
    model = random_model(rng, m=m)
    cards = [a.cardinality for a in model.schema]
    y = np.array([rng.integers(0, c) for c in cards])
    d = np.array([rng.integers(0, c) for c in cards])
    # d_far disagrees wherever d disagrees, plus one more position
    agree = np.flatnonzero(d == y)
    if len(agree) == 0:
        return
    d_far = d.copy()
    pos = int(rng.choice(agree))
    d_far[pos] = (y[pos] + 1) % cards[pos]
    omega = float(rng.uniform(0, m))
    p_near = generation_probability(y, d, model.cpts, model.structure, omega)
    p_far = generation_probability(y, d_far, model.cpts, model.structure, omega)
    assert p_near >= p_far - 1e-15


def test_probability_positive_with_positive_cpts():
    rng = np.random.default_rng(8)
    for _ in range(20):
        m = int(rng.integers(1, 6))
        model = random_model(rng, m=m)
        cards = [a.cardinality for a in model.schema]
        y = np.array([rng.integers(0, c) for c in cards])
        d = np.array([rng.integers(0, c) for c in cards])
        omega = float(rng.uniform(0.5, m))  # omega > 0 so resampling is possible
        p = generation_probability(y, d, model.cpts, model.structure, omega)
        assert 0.0 < p <= 1.0


def test_vectorized_probabilities_match_scalar():
    rng = np.random.default_rng(9)
    model = random_model(rng, m=5)
    cards = [a.cardinality for a in model.schema]
    y = np.array([rng.integers(0, c) for c in cards])
    data = np.stack([[rng.integers(0, c) for c in cards] for _ in range(20)])
    vec = generation_probabilities(y, data, model.cpts, model.structure, omega=2.5)
    for i in range(20):
        one = generation_probability(y, data[i], model.cpts, model.structure, omega=2.5)
        assert vec[i] == pytest.approx(one, abs=1e-15)


# ----------------------------------------------------------- batch sampler

def _empirical_check(freqs, probs, n, sigmas):
    for key, p in probs.items():
        se = math.sqrt(max(p * (1 - p), 1e-12) / n)
        assert abs(freqs.get(key, 0.0) - p) <= sigmas * se + 1e-12


def test_batch_sampler_matches_probability():
    rng = np.random.default_rng(10)
    model = random_model(rng, m=2, cards=[2, 2])
    seed = np.array([0, 1])
    omega = 1.0
    n = 100_000
    recs, masks = generate_candidates(seed, n, omega, model.structure, model.cpts, np.random.default_rng(11))
    assert np.array_equal(recs[masks[:, 0], 0], np.full(int(masks[:, 0].sum()), seed[0]))
    keys, counts = np.unique(recs, axis=0, return_counts=True)
    freqs = {tuple(k): c / n for k, c in zip(keys, counts)}
    probs = {}
    for a in range(2):
        for b in range(2):
            y = np.array([a, b])
            probs[(a, b)] = generation_probability(y, seed, model.cpts, model.structure, omega)
    assert sum(probs.values()) == pytest.approx(1.0, abs=1e-12)
    _empirical_check(freqs, probs, n, sigmas=4.0)


def test_single_sampler_matches_probability():
    rng = np.random.default_rng(12)
    model = random_model(rng, m=2, cards=[2, 2])
    seed = np.array([1, 0])
    omega = 1.2
    n = 30_000
    draw_rng = np.random.default_rng(13)
    tallies: dict[tuple, int] = {}
    for _ in range(n):
        mask = sample_keep_mask(2, omega, draw_rng)
        cand = generate_candidate(seed, mask, model.structure, model.cpts, draw_rng)
        key = tuple(int(v) for v in cand.record)
        tallies[key] = tallies.get(key, 0) + 1
    freqs = {k: v / n for k, v in tallies.items()}
    probs = {
        (a, b): generation_probability(np.array([a, b]), seed, model.cpts, model.structure, omega)
        for a in range(2)
        for b in range(2)
    }
    _empirical_check(freqs, probs, n, sigmas=5.0)
