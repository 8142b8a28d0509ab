import math
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, strategies as st

from lgi_optics.fock import Coherent, DephasedCoherent, Fock, InputSpec, Mode, Thermal
from lgi_optics.montecarlo import (RunConfig, estimate_correlators, estimate_from_counts,
                                   expected_report, flip_matrix, noisy_k_study,
                                   pattern_distribution, sample_trial, simulate_counts)
from lgi_optics.observables import ClickPattern, QAssignment, Setup, assign_q, k_exact

from conftest import LAMBDA_M, LN2

X_PEAK = Coherent(math.sqrt(2 * LN2))


def test_run_config_validation():
    for kw in ({"epsilon": 1.0}, {"epsilon": -0.1}, {"n_trials": 0}, {"shards": 0}):
        with pytest.raises(ValueError):
            RunConfig(Fock(1), **kw)
    assert RunConfig(Thermal(1.0)).mirrored
    assert not RunConfig(InputSpec(Thermal(1.0), Mode.LEFT)).mirrored


def test_single_photon_pattern_frequencies():
    cfg = RunConfig(Fock(1))
    rng = np.random.default_rng(5)
    records = [sample_trial(cfg, Setup.DETECTOR_R, rng) for _ in range(4000)]
    discarded = [r for r in records if r.discarded]
    assert all(r.pattern == ClickPattern(True, False, False) and r.case_label == "2a"
               for r in discarded)
    assert abs(len(discarded) / 4000 - 0.5) < 4 * math.sqrt(0.25 / 4000)
    kept = [r for r in records if not r.discarded]
    assert all(r.case_label == "1b" and r.q2 == 1 for r in kept)
    p = pattern_distribution(cfg, Setup.DETECTOR_R)
    assert p[ClickPattern(False, True, False).index] == pytest.approx(0.25)
    assert p[ClickPattern(False, False, True).index] == pytest.approx(0.25)


@pytest.mark.parametrize("setup", list(Setup))
def test_vacuum_trial(setup):
    r = sample_trial(RunConfig(Fock(0)), setup, np.random.default_rng(0))
    assert r.pattern.index == 0 and r.q3 == -1 and not r.discarded
    if setup is not Setup.NO_DETECTOR:
        assert (r.q2, r.case_label) == (0, "1a")


@given(st.integers(0, 2 ** 32), st.floats(0.0, 0.5))
def test_trial_record_invariants(seed, eps):
    cfg = RunConfig(Coherent(1.3), epsilon=eps, gamma=0.5)
    rng = np.random.default_rng(seed)
    for setup in (Setup.DETECTOR_R, Setup.DETECTOR_L):
        r = sample_trial(cfg, setup, rng)
        assert r.discarded == (r.case_label == "2a")
        if r.case_label == "2b":
            assert r.q2 == 0


def test_flip_matrix_is_stochastic():
    for bits in (2, 3):
        t = flip_matrix(bits, 0.13)
        assert np.allclose(t.sum(axis=1), 1.0)
        assert np.allclose(t, t.T)
    assert np.array_equal(flip_matrix(3, 0.0), np.eye(8))


@pytest.mark.parametrize("dist,gamma", [(Fock(1), 1.0), (X_PEAK, 1.0), (X_PEAK, 0.0),
                                        (Thermal(LAMBDA_M), 1.0), (DephasedCoherent(0.8), 0.4)])
def test_expected_report_matches_exact(dist, gamma):
    cfg = RunConfig(dist, gamma=gamma)
    exp, ex = expected_report(cfg), k_exact(dist, cfg.experiment)
    # sampling renormalizes away the truncated tail
    assert (exp.c12, exp.c23, exp.c13, exp.k) == pytest.approx((ex.c12, ex.c23, ex.c13, ex.k),
                                                               abs=1e-12 + 2 * ex.tail)


def test_determinism_and_shard_independence():
    cfg = RunConfig(X_PEAK, n_trials=50_000, seed=11, block_size=4096, epsilon=0.02)
    a = estimate_correlators(cfg)
    assert a == estimate_correlators(cfg)
    for shards, workers in ((2, 1), (5, 3), (13, 4)):
        assert estimate_correlators(replace(cfg, shards=shards, workers=workers)) == a
    assert estimate_correlators(replace(cfg, seed=12)) != a


def test_counts_total():
    cfg = RunConfig(Thermal(1.0), n_trials=10_001, block_size=1000)
    for setup in Setup:
        assert simulate_counts(cfg, setup).sum() == 10_001


def test_single_photon_million_trials():
    cfg = RunConfig(Fock(1), n_trials=1_000_000, seed=7)
    r = estimate_correlators(cfg)
    assert r.stderr_k < 0.002
    assert abs(r.k - 2.0) < 3 * r.stderr_k
    for n_disc in r.n_discarded.values():
        assert abs(n_disc / cfg.n_trials - 0.5) < 3 * math.sqrt(0.25 / cfg.n_trials)


def test_peak_coherent_million_trials():
    r1 = estimate_correlators(RunConfig(X_PEAK, n_trials=1_000_000, seed=3))
    assert abs(r1.k - 1.5) < 3 * r1.stderr_k and r1.violated
    r0 = estimate_correlators(RunConfig(X_PEAK, gamma=0.0, n_trials=1_000_000, seed=3))
    assert r0.k < 1.0 + 3 * r0.stderr_k and not r0.violated


GRID = [(Fock(1), 1.0), (Fock(2), 0.5), (X_PEAK, 0.0), (X_PEAK, 1.0), (Coherent(1.7), 0.3),
        (DephasedCoherent(1.0), 0.7), (Thermal(LAMBDA_M), 1.0), (Thermal(1.5), 0.2)]


@pytest.mark.parametrize("dist,gamma", GRID)
def test_consistency_over_seeds(dist, gamma):
    exact = k_exact(dist, RunConfig(dist, gamma=gamma).experiment).k
    hits = 0
    for seed in range(50):
        r = estimate_correlators(RunConfig(dist, gamma=gamma, n_trials=100_000, seed=seed))
        hits += abs(r.k - exact) < 4 * r.stderr_k or r.stderr_k == 0 and r.k == exact
    assert hits / 50 >= 0.99


def _with_case_2b_q3(value):
    def assign(pattern, mirrored=False):
        a = assign_q(pattern, mirrored)
        if a.case == "2b":
            return QAssignment(a.q1, a.q2, value, a.case, a.discarded)
        return a
    return assign


def test_case_2b_q3_does_not_matter():
    cfg = RunConfig(Coherent(1.4), gamma=0.6, n_trials=60_000, seed=4, epsilon=0.05)
    counts = {s: simulate_counts(cfg, s) for s in Setup}
    base = estimate_from_counts(counts)
    for v in (-1, 0, 1):
        alt = estimate_from_counts(counts, assign=_with_case_2b_q3(v))
        assert alt.c23 == base.c23 and alt.k == base.k


def test_empty_setup_is_an_error():
    counts = {Setup.DETECTOR_R: np.zeros(8), Setup.DETECTOR_L: np.ones(8),
              Setup.NO_DETECTOR: np.ones(4)}
    with pytest.raises(ValueError):
        estimate_from_counts(counts)
    counts[Setup.DETECTOR_R] = np.ones(8)
    counts[Setup.NO_DETECTOR] = np.zeros(4)
    with pytest.raises(ValueError):
        estimate_from_counts(counts)


def test_noise_lowers_k_towards_expectation():
    cfg = RunConfig(X_PEAK, n_trials=200_000, seed=1)
    rows = noisy_k_study(cfg, [0.0, 0.05, 0.3])
    assert [r.threshold for r in rows] == [1.0, 1.28525, 2.314]
    assert rows[0].expected_k == pytest.approx(1.5, abs=1e-12)
    for r in rows:
        assert abs(r.measured_k - r.expected_k) < 4 * r.stderr_k
    assert rows[0].exceeds_bound and rows[1].exceeds_bound and not rows[2].exceeds_bound
    assert rows[0].expected_k > rows[1].expected_k > rows[2].expected_k
