"""Beam splitter, dephasing channel and intermediate-detector updates."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .fock import CutoffMismatch, FockCutoff, Mode, TwoModeState

HALF_PI = math.pi / 2


def beam_splitter_blocks(theta: float, n_max: int) -> tuple[np.ndarray, ...]:
    """Per-block matrices U[S][k', k] = <k', S-k'| B |k, S-k>.

    B maps a_L^dag -> cos(t) a_L^dag - sin(t) a_R^dag and
    a_R^dag -> sin(t) a_L^dag + cos(t) a_R^dag with t = theta / 2, so at
    theta = pi/2 the right-mode creation operator goes to (L + R)/sqrt(2)
    and the left one to (L - R)/sqrt(2).

    Block S is grown from block S - 1 through the number operator:
    S B|k, l> = sqrt(k) B a_L^dag |k-1, l> + sqrt(l) B a_R^dag |k, l-1>,
    with B a^dag B^dag expanded as above. Averaging the two parents keeps
    the recursion numerically stable far beyond S = 500.
    """
    return _blocks(float(theta), int(n_max))


@lru_cache(maxsize=16)
def _blocks(theta: float, n_max: int) -> tuple[np.ndarray, ...]:
    c, s = math.cos(theta / 2), math.sin(theta / 2)
    blocks = [np.ones((1, 1))]
    for S in range(1, n_max + 1):
        prev = blocks[-1]
        raise_left = np.zeros((S + 1, S))
        raise_left[1:, :] = np.sqrt(np.arange(1, S + 1))[:, None] * prev
        raise_right = np.zeros((S + 1, S))
        raise_right[:S, :] = np.sqrt(S - np.arange(S))[:, None] * prev
        new = np.zeros((S + 1, S + 1))
        new[:, 1:] += np.sqrt(np.arange(1, S + 1)) * (c * raise_left - s * raise_right)
        new[:, :S] += np.sqrt(S - np.arange(S)) * (s * raise_left + c * raise_right)
        new /= S
        new.flags.writeable = False
        blocks.append(new)
    return tuple(blocks)


@dataclass(frozen=True)
class BeamSplitter:
    cutoff: FockCutoff
    theta: float = HALF_PI
    blocks: tuple = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "blocks", beam_splitter_blocks(self.theta, self.cutoff.n_max))

    def dense(self) -> np.ndarray:
        """Full block-diagonal unitary on the truncated basis."""
        u = np.zeros((self.cutoff.size, self.cutoff.size))
        for S, sl in self.cutoff.blocks():
            u[sl, sl] = self.blocks[S]
        return u


def _rows(blocks, cutoff: FockCutoff, rho: np.ndarray) -> np.ndarray:
    out = np.empty_like(rho)
    for S, sl in cutoff.blocks():
        out[sl] = blocks[S] @ rho[sl]
    return out


def apply_beam_splitter(state: TwoModeState, bs: BeamSplitter) -> TwoModeState:
    if state.cutoff != bs.cutoff:
        raise CutoffMismatch(f"state cutoff {state.cutoff} != beam splitter cutoff {bs.cutoff}")
    half = _rows(bs.blocks, state.cutoff, state.matrix)
    # U rho U^T = (U (U rho)^T)^T since U is real
    rho = _rows(bs.blocks, state.cutoff, np.ascontiguousarray(half.T)).T
    return state.with_matrix(rho)


def output_probabilities(state: TwoModeState, bs: BeamSplitter) -> np.ndarray:
    """Diagonal of B rho B^dag.

    B never mixes total-number blocks, so only the diagonal blocks of rho
    reach the output photon statistics.
    """
    if state.cutoff != bs.cutoff:
        raise CutoffMismatch(f"state cutoff {state.cutoff} != beam splitter cutoff {bs.cutoff}")
    p = np.empty(state.cutoff.size)
    for S, sl in state.cutoff.blocks():
        U = bs.blocks[S]
        p[sl] = ((U @ state.matrix[sl, sl]) * U).sum(axis=1).real
    return p


@dataclass(frozen=True)
class DephasingChannel:
    """Kraus set {sqrt(g) 1, sqrt(1-g)|n><n|} acting on one mode (or both)."""

    gamma: float
    target_mode: Mode | None = Mode.RIGHT  # None dephases both modes

    def __post_init__(self):
        if not 0.0 <= self.gamma <= 1.0:
            raise ValueError(f"gamma must lie in [0, 1], got {self.gamma!r}")

    def modes(self) -> tuple[Mode, ...]:
        return (Mode.LEFT, Mode.RIGHT) if self.target_mode is None else (self.target_mode,)


def apply_dephasing(state: TwoModeState, ch: DephasingChannel) -> TwoModeState:
    if ch.gamma == 1.0:
        return state
    factor = np.ones(state.matrix.shape)
    for mode in ch.modes():
        n = state.cutoff.mode_counts(mode)
        factor = factor * np.where(n[:, None] == n[None, :], 1.0, ch.gamma)
    return state.with_matrix(state.matrix * factor)


def negative_measurement_update(state: TwoModeState, detector_mode: Mode
                                ) -> tuple[TwoModeState, float]:
    """No click on ``detector_mode``: project it onto vacuum.

    Returns the unnormalized post-measurement state and its probability.
    """
    keep = state.cutoff.mode_counts(detector_mode) == 0
    rho = np.where(keep[:, None] & keep[None, :], state.matrix, 0.0)
    kept = state.with_matrix(rho)
    return kept, kept.trace()


def click_update(state: TwoModeState, detector_mode: Mode) -> tuple[TwoModeState, float]:
    """A click on ``detector_mode``: the detector absorbs that mode.

    The surviving mode keeps the partial trace over the non-vacuum photon
    numbers of the detected mode; the detected mode is left in vacuum.
    Returns the unnormalized state and the click probability.
    """
    cut = state.cutoff
    det = cut.mode_counts(detector_mode)
    other = cut.mode_counts(detector_mode.other)
    rho = np.zeros_like(state.matrix)
    survivors = np.array([cut.index(*((k, 0) if detector_mode is Mode.RIGHT else (0, k)))
                          for k in range(cut.n_max + 1)])
    for d in range(1, cut.n_max + 1):
        sel = np.flatnonzero(det == d)
        tgt = survivors[other[sel]]
        rho[np.ix_(tgt, tgt)] += state.matrix[np.ix_(sel, sel)]
    out = state.with_matrix(rho)
    return out, out.trace()
