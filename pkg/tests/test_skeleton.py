"""Measure sampling, skeleton extraction, and the initial word system."""

import math

import numpy as np
import pytest

from nonhyp.codes import is_disjoint
from nonhyp.errors import SkeletonTooSmall
from nonhyp.fiber import FiberFamily, NorthSouthMap, Rotation
from nonhyp.skeleton import (
    MeasureSampler,
    Skeleton,
    build_initial_cifs,
    estimate_measure_stats,
    extract_skeleton,
)


# ----------------------------------------------------------------- sampler


def test_bernoulli_entropy_uniform():
    s = MeasureSampler(weights=np.array([0.5, 0.5]))
    assert s.entropy() == pytest.approx(math.log(2), rel=1e-15)


def test_bernoulli_entropy_formula(rng):
    w = rng.random(3)
    w /= w.sum()
    s = MeasureSampler(weights=w)
    assert s.entropy() == pytest.approx(float(-(w * np.log(w)).sum()))


def test_markov_entropy_against_direct_formula():
    p = np.array([[0.9, 0.1], [0.4, 0.6]])
    s = MeasureSampler(markov=p)
    pi = s.stationary()
    assert pi @ p == pytest.approx(pi)
    direct = -sum(
        pi[i] * p[i, j] * math.log(p[i, j]) for i in range(2) for j in range(2)
    )
    assert s.entropy() == pytest.approx(direct)


def test_sampler_validation():
    with pytest.raises(ValueError):
        MeasureSampler(weights=np.array([0.5, 0.6]))
    with pytest.raises(ValueError):
        MeasureSampler()


def test_markov_sampling_frequencies(rng):
    p = np.array([[0.8, 0.2], [0.3, 0.7]])
    s = MeasureSampler(markov=p)
    sym = s.sample_symbols((200, 300), rng)
    freq1 = np.mean(sym == 1)
    assert freq1 == pytest.approx(float(s.stationary()[0]), abs=0.02)


# ------------------------------------------------------------------- stats


def test_constant_contraction_alpha():
    """All maps share the attracting fixed point, so the sampled exponent
    is the log-derivative there."""
    fam = FiberFamily([NorthSouthMap(0.5), NorthSouthMap(0.3)])
    s = MeasureSampler(weights=np.array([0.5, 0.5]))
    stats = estimate_measure_stats(s, fam, horizon=200, trials=64, seed=1)
    expected = 0.5 * math.log(0.5) + 0.5 * math.log(0.7)
    assert stats.alpha == pytest.approx(expected, abs=0.01)


def test_two_matrix_alpha_matches_minus_twice_lambda1(two_matrix_family,
                                                      two_matrix_cocycle):
    from nonhyp.fiber import lyapunov_upper_batch

    s = MeasureSampler(weights=np.array([0.5, 0.5]))
    stats = estimate_measure_stats(s, two_matrix_family, horizon=600,
                                   trials=200, seed=3)
    rng = np.random.default_rng(11)
    lams = lyapunov_upper_batch(
        two_matrix_cocycle, rng.integers(1, 3, size=(16, 20000))
    )
    assert stats.alpha == pytest.approx(-2 * float(lams.mean()), abs=0.02)
    assert stats.alpha < 0


# ---------------------------------------------------------------- skeleton


def test_skeleton_constant_contraction_accepts_everything():
    fam = FiberFamily([NorthSouthMap(0.5), NorthSouthMap(0.5)])
    s = MeasureSampler(weights=np.array([0.5, 0.5]))
    sk = extract_skeleton(s, fam, n=5, eps_E=0.2, eps_H=0.5,
                          alpha=math.log(0.5), budget=4000, seed=2)
    assert sk.rejection_rate < 0.05
    assert sk.size <= 2**5
    assert sk.K0 < 1.5


def test_skeleton_words_distinct_and_reverify(mini_pipeline):
    sk = mini_pipeline.skeleton
    words = [w for w, _ in sk.entries]
    assert len(set(words)) == len(words)
    assert sk.reverify(mini_pipeline.family)


def test_skeleton_n_equals_one():
    fam = FiberFamily([NorthSouthMap(0.5), NorthSouthMap(0.5)])
    s = MeasureSampler(weights=np.array([0.5, 0.5]))
    sk = extract_skeleton(s, fam, n=1, eps_E=0.3, eps_H=0.5,
                          alpha=math.log(0.5), budget=512, seed=2)
    assert sk.size == 2
    assert all(len(w) == 1 for w, _ in sk.entries)


def test_skeleton_rejects_rotations():
    fam = FiberFamily([Rotation(0.1), Rotation(np.sqrt(2) - 1)])
    s = MeasureSampler(weights=np.array([0.5, 0.5]))
    with pytest.raises(SkeletonTooSmall):
        extract_skeleton(s, fam, n=8, eps_E=0.05, eps_H=0.4, budget=2000,
                         seed=2)


def test_skeleton_cardinality_bounds(mini_pipeline):
    sk = mini_pipeline.skeleton
    lo, hi = sk.cardinality_bounds()
    assert lo <= sk.size <= hi


def test_skeleton_warns_on_high_rejection(two_matrix_family):
    # a tight K0 cap rejects nearly every window and must warn
    s = MeasureSampler(weights=np.array([0.25, 0.75]))
    with pytest.warns(UserWarning, match="rejection"):
        extract_skeleton(s, two_matrix_family, n=12, eps_E=0.05, eps_H=0.4,
                         alpha=-0.14, K0_cap=2.0, budget=4000, seed=2)


# ------------------------------------------------------------ initial code


def test_initial_system_disjoint_and_certified(mini_pipeline):
    code = mini_pipeline.code
    cert = mini_pipeline.certificate
    assert is_disjoint(code)
    assert code.size >= 2
    assert cert.alpha < 0
    assert 0 < cert.eps < -cert.alpha
    # cardinality sandwich as reported by the build
    h, eps_h = mini_pipeline.stats.entropy, mini_pipeline.eps_H
    log_card = math.log(code.size)
    assert code.min_len * (h - eps_h) <= log_card <= code.max_len * (h + eps_h)


def test_initial_system_words_extend_skeleton_windows(mini_pipeline):
    n = mini_pipeline.skeleton.n
    prefixes = {w[:n] for w, _ in mini_pipeline.skeleton.entries}
    for w in mini_pipeline.code.words:
        assert w[:n] in prefixes


def test_tiny_skeleton_rejected(mini_pipeline):
    lone = Skeleton(
        entries=mini_pipeline.skeleton.entries[:1],
        n=mini_pipeline.skeleton.n,
        alpha=mini_pipeline.skeleton.alpha,
        eps_E=mini_pipeline.skeleton.eps_E,
        K0=mini_pipeline.skeleton.K0,
        L0=1.0,
        entropy=mini_pipeline.stats.entropy,
        eps_H=0.6,
        rejection_rate=0.0,
    )
    with pytest.raises(SkeletonTooSmall):
        build_initial_cifs(lone, mini_pipeline.family, mini_pipeline.blending,
                           seed=1)
