"""Trial-level simulation of the three Mach-Zehnder setups.

Click patterns are drawn from the exact pattern distributions of the
exact engine, corrupted by independent detector flips, and turned into
(Q2, Q3) values with the discard rules of the negative-measurement
protocol. Only integer pattern counts leave a shard, so results do not
depend on how the trials are split across workers.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import Callable, Iterable

import numpy as np

from .analytic import detector_error_threshold
from .channels import HALF_PI
from .fock import DEFAULT_CUTOFF, InputSpec, Mode
from .observables import (ClickPattern, CorrelatorReport, ExperimentConfig, QAssignment,
                          Setup, assign_q, evolve)

SETUPS = (Setup.DETECTOR_R, Setup.NO_DETECTOR, Setup.DETECTOR_L)
_STREAM_ID = {Setup.DETECTOR_R: 0, Setup.NO_DETECTOR: 1, Setup.DETECTOR_L: 2}
BLOCK_SIZE = 1 << 16


@dataclass(frozen=True)
class RunConfig:
    input: InputSpec
    gamma: float = 1.0
    epsilon: float = 0.0
    n_trials: int = 100_000
    seed: int = 0
    n_max: int = DEFAULT_CUTOFF
    theta: float = HALF_PI
    shards: int = 1
    workers: int = 1
    block_size: int = BLOCK_SIZE

    def __post_init__(self):
        object.__setattr__(self, "input", InputSpec.coerce(self.input))
        if not 0.0 <= self.epsilon < 1.0:
            raise ValueError(f"epsilon must lie in [0, 1), got {self.epsilon!r}")
        if self.n_trials < 1:
            raise ValueError("n_trials must be >= 1")
        if self.shards < 1 or self.workers < 1 or self.block_size < 1:
            raise ValueError("shards, workers and block_size must be >= 1")

    @property
    def experiment(self) -> ExperimentConfig:
        return ExperimentConfig(gamma=self.gamma, theta=self.theta, n_max=self.n_max,
                                epsilon=self.epsilon)

    @property
    def mirrored(self) -> bool:
        return self.input.input_mode is Mode.RIGHT


@dataclass(frozen=True)
class TrialRecord:
    setup: Setup
    pattern: ClickPattern
    q2: int | None
    q3: int
    discarded: bool
    case_label: str | None


def pattern_distribution(config: RunConfig, setup: Setup) -> np.ndarray:
    """Noise-free click-pattern probabilities of ``setup``, checked to sum to one."""
    ev = evolve(config.input, config.experiment)
    p = ev.patterns[setup]
    total = p.sum()
    if abs(total - 1.0) > 1e-12 + ev.tail:
        raise ValueError(f"pattern distribution of {setup} sums to {total!r}")
    return np.clip(p, 0.0, None) / total


def flip_matrix(n_bits: int, epsilon: float) -> np.ndarray:
    """T[true, reported]: every detector bit flips independently with prob. epsilon."""
    size = 1 << n_bits
    flips = np.array([[bin(a ^ b).count("1") for b in range(size)] for a in range(size)])
    return epsilon ** flips * (1.0 - epsilon) ** (n_bits - flips)


def _n_bits(setup: Setup) -> int:
    return 2 if setup is Setup.NO_DETECTOR else 3


def _records(setup: Setup, mirrored: bool, assign=assign_q) -> list[QAssignment]:
    return [assign(ClickPattern.from_index(i, setup), mirrored) for i in range(setup.n_patterns)]


def sample_trial(config: RunConfig, setup: Setup, rng: np.random.Generator) -> TrialRecord:
    p = pattern_distribution(config, setup)
    true = int(rng.choice(len(p), p=p))
    flips = rng.random(_n_bits(setup)) < config.epsilon
    reported = true ^ int(np.dot(flips, 1 << np.arange(_n_bits(setup))[::-1]))
    pattern = ClickPattern.from_index(reported, setup)
    a = assign_q(pattern, config.mirrored)
    return TrialRecord(setup, pattern, a.q2, a.q3, a.discarded, a.case)


def block_generator(seed: int, setup: Setup, block: int) -> np.random.Generator:
    """Independent stream for one block of one setup, derived from the master seed."""
    ss = np.random.SeedSequence(seed, spawn_key=(_STREAM_ID[setup], block))
    return np.random.Generator(np.random.PCG64(ss))


def _simulate_blocks(config: RunConfig, setup: Setup, blocks: Iterable[int],
                     p: np.ndarray) -> np.ndarray:
    n_bits = _n_bits(setup)
    weights = 1 << np.arange(n_bits)[::-1]
    counts = np.zeros(len(p), dtype=np.int64)
    for b in blocks:
        size = min(config.block_size, config.n_trials - b * config.block_size)
        rng = block_generator(config.seed, setup, b)
        true = rng.choice(len(p), size=size, p=p)
        if config.epsilon > 0.0:
            flips = rng.random((size, n_bits)) < config.epsilon
            true = true ^ (flips @ weights)
        counts += np.bincount(true, minlength=len(p))
    return counts


def simulate_counts(config: RunConfig, setup: Setup) -> np.ndarray:
    """Reported-pattern counts of ``config.n_trials`` trials of one setup."""
    p = pattern_distribution(config, setup)
    n_blocks = -(-config.n_trials // config.block_size)
    shards = np.array_split(np.arange(n_blocks), min(config.shards, n_blocks))
    if config.workers > 1 and len(shards) > 1:
        with ThreadPoolExecutor(max_workers=config.workers) as pool:
            parts = list(pool.map(lambda s: _simulate_blocks(config, setup, s, p), shards))
    else:
        parts = [_simulate_blocks(config, setup, s, p) for s in shards]
    return np.sum(parts, axis=0)


def _mean_var(weights: np.ndarray, values: np.ndarray, n: float) -> tuple[float, float]:
    """Mean and variance of the estimator mean of ``values`` under pattern weights."""
    mean = float(weights @ values) / n
    if n <= 1:
        return mean, 0.0
    var = float(weights @ (values - mean) ** 2) / (n - 1)
    return mean, var / n


def estimate_from_counts(counts: dict, mirrored: bool = False,
                         assign: Callable[[ClickPattern, bool], QAssignment] = assign_q,
                         exact: bool = False) -> CorrelatorReport:
    """Correlators from per-setup pattern counts.

    Setup X contributes P(case 1b) to C12 and its non-discarded Q2*Q3 to C23;
    the sector it discards (case 2a) is the one its mirror setup measures
    negatively, so the completed estimate of either setup is the sum of the
    two setups' contributions. C13 is the mean Q3 without intermediate
    detector.

    With ``exact=True`` the counts are probabilities and no standard errors
    are reported.
    """
    parts = {}
    for setup in (Setup.DETECTOR_R, Setup.DETECTOR_L):
        c = np.asarray(counts[setup], dtype=float)
        n = float(c.sum())
        if n <= 0:
            raise ValueError(f"no usable trials in {setup}")
        rec = _records(setup, mirrored, assign)
        f12 = np.array([r.case == "1b" for r in rec], dtype=float)
        f23 = np.array([0.0 if r.discarded else r.q2 * r.q3 for r in rec])
        parts[setup] = (_mean_var(c, f12, n), _mean_var(c, f23, n), _mean_var(c, f12 + f23, n),
                        int(sum(ci for ci, r in zip(c, rec) if r.discarded)))
    c = np.asarray(counts[Setup.NO_DETECTOR], dtype=float)
    n_n = float(c.sum())
    if n_n <= 0:
        raise ValueError("no usable trials in the setup without intermediate detector")
    q3 = np.array([r.q3 for r in _records(Setup.NO_DETECTOR, mirrored, assign)], dtype=float)
    c13, v13 = _mean_var(c, q3, n_n)

    r, l = parts[Setup.DETECTOR_R], parts[Setup.DETECTOR_L]
    c12 = r[0][0] + l[0][0]
    c23 = r[1][0] + l[1][0]
    k = c12 + c23 - c13
    if exact:
        return CorrelatorReport(c12, c23, c13, k, bool(k > 1.0))
    stderr_k = math.sqrt(r[2][1] + l[2][1] + v13)
    return CorrelatorReport(
        c12, c23, c13, k, bool(k - 3.0 * stderr_k > 1.0),
        stderr_c12=math.sqrt(r[0][1] + l[0][1]), stderr_c23=math.sqrt(r[1][1] + l[1][1]),
        stderr_c13=math.sqrt(v13), stderr_k=stderr_k,
        n_trials=int(n_n),
        n_discarded={Setup.DETECTOR_R: r[3], Setup.DETECTOR_L: l[3]})


def estimate_correlators(config: RunConfig) -> CorrelatorReport:
    counts = {s: simulate_counts(config, s) for s in SETUPS}
    return estimate_from_counts(counts, config.mirrored)


def expected_report(config: RunConfig) -> CorrelatorReport:
    """Infinite-trial limit of ``estimate_correlators``, detector noise included."""
    probs = {s: pattern_distribution(config, s) @ flip_matrix(_n_bits(s), config.epsilon)
             for s in SETUPS}
    return estimate_from_counts(probs, config.mirrored, exact=True)


@dataclass(frozen=True)
class NoisyRow:
    epsilon: float
    eta: float
    threshold: float
    measured_k: float
    stderr_k: float
    expected_k: float

    @property
    def exceeds_bound(self) -> bool:
        return self.measured_k - 3.0 * self.stderr_k > self.threshold


def noisy_k_study(config: RunConfig, epsilons: Iterable[float]) -> list[NoisyRow]:
    rows = []
    for eps in epsilons:
        cfg = replace(config, epsilon=float(eps))
        eta, threshold = detector_error_threshold(eps)
        rep = estimate_correlators(cfg)
        rows.append(NoisyRow(float(eps), eta, threshold, rep.k, rep.stderr_k,
                             expected_report(cfg).k))
    return rows
