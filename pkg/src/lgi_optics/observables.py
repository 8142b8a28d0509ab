"""Observable assignment, click statistics and exact LG correlators.

Two evolution routes are provided:

* ``dense``: the full truncated density matrix is pushed through beam
  splitter, dephasing and beam splitter again. Works for every input,
  including coherent states with their Fock-basis coherences.
* ``fock``: inputs that are diagonal in photon number are a mixture of
  Fock states, each of which lives in a single total-number block. Every
  block is evolved on its own and the results are mixed with the input
  weights. This reaches cutoffs of several hundred photons.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from functools import lru_cache
from math import comb

import numpy as np

from .channels import (HALF_PI, BeamSplitter, DephasingChannel, apply_beam_splitter,
                       apply_dephasing, beam_splitter_blocks, click_update,
                       negative_measurement_update, output_probabilities)
from .fock import (DEFAULT_CUTOFF, DEFAULT_TAIL_TOL, Fock, FockCutoff, InputSpec, Mode,
                   TwoModeState, build_input_state, photon_weights, required_cutoff,
                   tail_mass)

MAX_DENSE_CUTOFF = 120


class Setup(enum.Enum):
    DETECTOR_R = "R"
    NO_DETECTOR = "N"
    DETECTOR_L = "L"

    @property
    def detector_mode(self) -> Mode | None:
        return {"R": Mode.RIGHT, "L": Mode.LEFT}.get(self.value)

    @property
    def mirror(self) -> "Setup":
        return {Setup.DETECTOR_R: Setup.DETECTOR_L,
                Setup.DETECTOR_L: Setup.DETECTOR_R}.get(self, self)

    @property
    def n_patterns(self) -> int:
        return 4 if self is Setup.NO_DETECTOR else 8


@dataclass(frozen=True)
class ExperimentConfig:
    """Mach-Zehnder setup: intermediate dephasing, beam splitter angle, truncation."""

    gamma: float = 1.0
    theta: float = HALF_PI
    n_max: int = DEFAULT_CUTOFF
    epsilon: float = 0.0
    setup: Setup = Setup.NO_DETECTOR
    dephase_mode: Mode | None = Mode.RIGHT
    tail_tol: float = DEFAULT_TAIL_TOL
    auto_cutoff: bool = True

    def __post_init__(self):
        if not 0.0 <= self.gamma <= 1.0:
            raise ValueError(f"gamma must lie in [0, 1], got {self.gamma!r}")
        if not 0.0 <= self.epsilon < 1.0:
            raise ValueError(f"epsilon must lie in [0, 1), got {self.epsilon!r}")
        if int(self.n_max) != self.n_max or self.n_max < 1:
            raise ValueError(f"n_max must be an integer >= 1, got {self.n_max!r}")

    def cutoff_for(self, spec: InputSpec) -> int:
        if not self.auto_cutoff:
            return self.n_max
        return required_cutoff(spec.dist, self.tail_tol, minimum=self.n_max)

    @property
    def dephasing(self) -> DephasingChannel:
        return DephasingChannel(self.gamma, self.dephase_mode)


# --------------------------------------------------------------------------
# Value assignment
# --------------------------------------------------------------------------


def q2_operator(cutoff: FockCutoff) -> np.ndarray:
    """Diagonal of Q2: +1 when all photons (at least one) sit in a single mode."""
    left, right = cutoff.left_counts, cutoff.right_counts
    return ((left == 0) ^ (right == 0)).astype(float)


def q3_operator(cutoff: FockCutoff, mirrored: bool = False) -> np.ndarray:
    """Diagonal of Q3: +1 on |n>=1, 0>, -1 on |0, n> (vacuum included), 0 otherwise.

    ``mirrored`` swaps the roles of the output modes, for inputs entering
    from the right.
    """
    left, right = cutoff.left_counts, cutoff.right_counts
    if mirrored:
        left, right = right, left
    q3 = np.zeros(cutoff.size)
    q3[(left >= 1) & (right == 0)] = 1.0
    q3[left == 0] = -1.0
    return q3


@dataclass(frozen=True)
class ClickPattern:
    """Detector readings; ``t2_click`` is None without an intermediate detector."""

    t2_click: bool | None
    t3_left_click: bool
    t3_right_click: bool

    @property
    def index(self) -> int:
        i = 2 * self.t3_left_click + self.t3_right_click
        return i if self.t2_click is None else 4 * self.t2_click + i

    @classmethod
    def from_index(cls, index: int, setup: Setup) -> "ClickPattern":
        t2 = None if setup is Setup.NO_DETECTOR else bool(index >> 2)
        return cls(t2, bool(index >> 1 & 1), bool(index & 1))


@dataclass(frozen=True)
class QAssignment:
    q1: int
    q2: int | None
    q3: int
    case: str | None
    discarded: bool


def q3_from_clicks(left: bool, right: bool, mirrored: bool = False) -> int:
    if mirrored:
        left, right = right, left
    if not left:
        return -1
    return 0 if right else 1


def assign_q(pattern: ClickPattern, mirrored: bool = False) -> QAssignment:
    """Map a reported click pattern to (Q1, Q2, Q3) and its case label."""
    q3 = q3_from_clicks(pattern.t3_left_click, pattern.t3_right_click, mirrored)
    if pattern.t2_click is None:
        return QAssignment(1, None, q3, None, False)
    any_t3 = pattern.t3_left_click or pattern.t3_right_click
    if not pattern.t2_click:
        return QAssignment(1, 1 if any_t3 else 0, q3, "1b" if any_t3 else "1a", False)
    if any_t3:
        return QAssignment(1, 0, q3, "2b", False)
    return QAssignment(1, 1, q3, "2a", True)


# --------------------------------------------------------------------------
# Evolution
# --------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class Evolution:
    """Everything the correlators and the click statistics need.

    ``sector_r`` is <Q2 Q3> restricted to the left-only intermediate sector,
    the one the right-hand detector measures negatively; ``sector_l`` is
    the mirror image.
    """

    c12: float
    c13: float
    sector_r: float
    sector_l: float
    patterns: dict
    n_max: int
    tail: float
    method: str

    @property
    def c23(self) -> float:
        # setup R completed with the sector setup L measures is sector_r + sector_l,
        # and so is its mirror; their average is the same sum
        return self.sector_r + self.sector_l


def _out4(p: np.ndarray, left: np.ndarray, right: np.ndarray) -> np.ndarray:
    """Output click probabilities ordered like ClickPattern.index: none, right, left, both."""
    lv, rv = left == 0, right == 0
    return np.array([p[lv & rv].sum(), p[lv & ~rv].sum(), p[~lv & rv].sum(), p[~lv & ~rv].sum()])


def _one_sided(state: TwoModeState, occupied: Mode) -> TwoModeState:
    """Keep only |n>=1 photons in ``occupied``, vacuum in the other mode>."""
    cut = state.cutoff
    keep = (cut.mode_counts(occupied) >= 1) & (cut.mode_counts(occupied.other) == 0)
    return state.with_matrix(np.where(keep[:, None] & keep[None, :], state.matrix, 0.0))


def intermediate_state(spec, config: ExperimentConfig = ExperimentConfig()) -> TwoModeState:
    """rho2: input after the first beam splitter and the dephasing channel."""
    spec = InputSpec.coerce(spec)
    n_max = config.cutoff_for(spec)
    if n_max > MAX_DENSE_CUTOFF:
        raise ValueError(f"dense evolution needs n_max={n_max} > {MAX_DENSE_CUTOFF}; "
                         "use a number-diagonal input with the fock route")
    cut = FockCutoff(n_max)
    rho1 = build_input_state(spec.dist, cut, spec.mode, config.tail_tol,
                             allow_truncation=not config.auto_cutoff)
    return apply_dephasing(apply_beam_splitter(rho1, BeamSplitter(cut, config.theta)),
                           config.dephasing)


def _evolve_dense(spec: InputSpec, config: ExperimentConfig) -> Evolution:
    rho2 = intermediate_state(spec, config)
    cut = rho2.cutoff
    bs = BeamSplitter(cut, config.theta)
    mirrored = spec.input_mode is Mode.RIGHT
    q3 = q3_operator(cut, mirrored)
    left, right = cut.left_counts, cut.right_counts

    def out(state):
        return _out4(output_probabilities(state, bs), left, right)

    p3 = output_probabilities(rho2, bs)
    patterns = {Setup.NO_DETECTOR: _out4(p3, left, right)}
    for setup in (Setup.DETECTOR_R, Setup.DETECTOR_L):
        kept, _ = negative_measurement_update(rho2, setup.detector_mode)
        clicked, _ = click_update(rho2, setup.detector_mode)
        patterns[setup] = np.concatenate([out(kept), out(clicked)])

    sector_r = output_probabilities(_one_sided(rho2, Mode.LEFT), bs) @ q3
    sector_l = output_probabilities(_one_sided(rho2, Mode.RIGHT), bs) @ q3
    return Evolution(c12=rho2.expectation(q2_operator(cut)), c13=float(p3 @ q3),
                     sector_r=sector_r, sector_l=sector_l, patterns=patterns,
                     n_max=cut.n_max, tail=rho2.trace_deficit, method="dense")


@dataclass(frozen=True, eq=False)
class FockTable:
    """Per-photon-number responses of the interferometer to |n,0> (or |0,n>)."""

    c12: np.ndarray
    c13: np.ndarray
    sector_r: np.ndarray
    sector_l: np.ndarray
    patterns: dict = field(default_factory=dict)


@lru_cache(maxsize=32)
def fock_table(n_max: int, gamma: float = 1.0, theta: float = HALF_PI,
               input_mode: Mode = Mode.LEFT, dephase_mode: Mode | None = Mode.RIGHT) -> FockTable:
    """Block-by-block evolution of every Fock input up to ``n_max``.

    Inside the block of total number n, |k, n-k> and |k', n-k'> differ in
    the left count exactly when they differ in the right count, so the
    dephasing factor on a block off-diagonal is gamma for one dephased
    mode and gamma**2 for both.
    """
    blocks = beam_splitter_blocks(theta, n_max)
    g = gamma ** (1 if dephase_mode is not None else 2)
    mirrored = input_mode is Mode.RIGHT
    size = n_max + 1
    c12, c13 = np.zeros(size), np.zeros(size)
    sec_r, sec_l = np.zeros(size), np.zeros(size)
    pat_n = np.zeros((size, 4))
    pat_r = np.zeros((size, 8))
    pat_l = np.zeros((size, 8))
    # output click statistics of |m,0> and |0,m> sent alone into the second splitter
    from_left = np.zeros((size, 4))
    from_right = np.zeros((size, 4))

    for n in range(size):
        U = blocks[n]
        k = np.arange(n + 1)
        left, right = k, n - k
        from_left[n] = _out4(U[:, n] ** 2, left, right)
        from_right[n] = _out4(U[:, 0] ** 2, left, right)

        u = U[:, 0 if mirrored else n]
        p2 = u ** 2
        # diag(U rho2 U^T) with rho2 = g u u^T + (1 - g) diag(u^2)
        p3 = g * (U @ u) ** 2 + (1.0 - g) * (U ** 2) @ p2

        near, far = (right, left) if mirrored else (left, right)
        q3 = np.where(near == 0, -1.0, np.where(far == 0, 1.0, 0.0))

        if n >= 1:
            c12[n] = p2[0] + p2[n]
            sec_r[n] = p2[n] * np.dot(q3, U[:, n] ** 2)
            sec_l[n] = p2[0] * np.dot(q3, U[:, 0] ** 2)
        c13[n] = np.dot(q3, p3)
        pat_n[n] = _out4(p3, left, right)

        # right-hand detector: silent leaves |n,0>, a click leaves |k,0> with k < n
        pat_r[n, :4] = p2[n] * from_left[n]
        pat_r[n, 4:] = p2[:n] @ from_left[:n]
        # left-hand detector: silent leaves |0,n>, a click leaves |0,n-k> with k >= 1
        pat_l[n, :4] = p2[0] * from_right[n]
        pat_l[n, 4:] = p2[1:] @ from_right[n - 1::-1][:n] if n else 0.0

    return FockTable(c12, c13, sec_r, sec_l,
                     {Setup.NO_DETECTOR: pat_n, Setup.DETECTOR_R: pat_r, Setup.DETECTOR_L: pat_l})


def _evolve_fock(spec: InputSpec, config: ExperimentConfig) -> Evolution:
    if not spec.dist.number_diagonal:
        raise ValueError("the fock route only handles inputs diagonal in photon number")
    n_max = config.cutoff_for(spec)
    if isinstance(spec.dist, Fock) and spec.dist.n > n_max:
        raise ValueError(f"Fock({spec.dist.n}) does not fit in n_max={n_max}")
    tail = tail_mass(spec.dist, n_max)
    w = photon_weights(spec.dist, n_max)
    t = fock_table(n_max, config.gamma, config.theta, spec.input_mode, config.dephase_mode)
    return Evolution(c12=float(w @ t.c12), c13=float(w @ t.c13),
                     sector_r=float(w @ t.sector_r), sector_l=float(w @ t.sector_l),
                     patterns={s: w @ p for s, p in t.patterns.items()},
                     n_max=n_max, tail=tail, method="fock")


@lru_cache(maxsize=256)
def _evolve_cached(spec: InputSpec, config: ExperimentConfig, method: str) -> Evolution:
    if method == "auto":
        method = "fock" if spec.dist.number_diagonal else "dense"
    if method == "dense":
        return _evolve_dense(spec, config)
    if method == "fock":
        return _evolve_fock(spec, config)
    raise ValueError(f"unknown method {method!r}")


def evolve(spec, config: ExperimentConfig = ExperimentConfig(), method: str = "auto") -> Evolution:
    return _evolve_cached(InputSpec.coerce(spec), config, method)


# --------------------------------------------------------------------------
# Correlators
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class CorrelatorReport:
    c12: float
    c23: float
    c13: float
    k: float
    violated: bool
    stderr_c12: float | None = None
    stderr_c23: float | None = None
    stderr_c13: float | None = None
    stderr_k: float | None = None
    n_trials: int | None = None
    n_discarded: dict | None = None
    tail: float = 0.0

    def as_dict(self) -> dict:
        d = {f: getattr(self, f) for f in self.__dataclass_fields__}
        if self.n_discarded is not None:
            d["n_discarded"] = {getattr(s, "value", s): v for s, v in self.n_discarded.items()}
        return d


def correlator_c12(spec, config: ExperimentConfig = ExperimentConfig(), method: str = "auto") -> float:
    return evolve(spec, config, method).c12


def correlator_c13(spec, config: ExperimentConfig = ExperimentConfig(), method: str = "auto") -> float:
    return evolve(spec, config, method).c13


def correlator_c23(spec, config: ExperimentConfig = ExperimentConfig(), method: str = "auto") -> float:
    """<Q2 Q3> from the one-sided intermediate sectors.

    Setup R sees the left-only sector negatively and discards the
    right-only one, which setup L sees negatively (and vice versa); each
    setup is completed with its mirror's sector and the two are averaged.
    """
    return evolve(spec, config, method).c23


def k_exact(spec, config: ExperimentConfig = ExperimentConfig(), method: str = "auto") -> CorrelatorReport:
    ev = evolve(spec, config, method)
    c23 = ev.c23
    k = ev.c12 + c23 - ev.c13
    return CorrelatorReport(ev.c12, c23, ev.c13, k, bool(k > 1.0), tail=ev.tail)


def click_distribution(spec, config: ExperimentConfig = ExperimentConfig(),
                       setup: Setup | None = None, method: str = "auto") -> np.ndarray:
    """Probabilities of the click patterns of ``setup``, indexed by ClickPattern.index."""
    setup = config.setup if setup is None else setup
    return evolve(spec, config, method).patterns[setup].copy()


def projected_rho3(n: int, gamma: float = 1.0, cutoff: FockCutoff | int | None = None,
                   theta: float = HALF_PI) -> TwoModeState:
    """Output of |n,0> restricted to the diagonal entries Q3 can see.

    Entries on states with photons in both outputs (Q3 = 0) and all
    off-diagonal entries are projected out.
    """
    if cutoff is None:
        cutoff = max(n, 1)
    cut = cutoff if isinstance(cutoff, FockCutoff) else FockCutoff(cutoff)
    rho1 = build_input_state(Fock(n), cut)
    bs = BeamSplitter(cut, theta)
    rho3 = apply_beam_splitter(apply_dephasing(apply_beam_splitter(rho1, bs),
                                               DephasingChannel(gamma)), bs)
    visible = (cut.left_counts == 0) | (cut.right_counts == 0)
    p = np.where(visible, rho3.probabilities(), 0.0)
    return rho3.with_matrix(np.diag(p))


def projected_rho3_closed_form(n: int, gamma: float, cutoff: FockCutoff) -> np.ndarray:
    """(g-1) d_n0 |00><00| + g |0n><0n| + C(2n,n)/4^n (1-g)(|n0><n0| + |0n><0n|)."""
    m = np.zeros((cutoff.size, cutoff.size))
    vac, right_n, left_n = cutoff.index(0, 0), cutoff.index(0, n), cutoff.index(n, 0)
    if n == 0:
        m[vac, vac] += gamma - 1.0
    m[right_n, right_n] += gamma
    central = comb(2 * n, n) / 4 ** n * (1.0 - gamma)
    m[left_n, left_n] += central
    m[right_n, right_n] += central
    return m


def rho2_closed_form(n: int, gamma: float, cutoff: FockCutoff) -> np.ndarray:
    """2^-n sum_{k,l} sqrt(C(n,k) C(n,l)) (-1)^(k+l) (g + (1-g) d_kl) |k,n-k><l,n-l|."""
    m = np.zeros((cutoff.size, cutoff.size))
    for k in range(n + 1):
        for l in range(n + 1):
            v = np.sqrt(comb(n, k) * comb(n, l)) * (-1) ** (k + l) / 2 ** n
            m[cutoff.index(k, n - k), cutoff.index(l, n - l)] = v * (gamma if k != l else 1.0)
    return m


def intermediate_q2(n: int, gamma: float, cutoff: int | None = None) -> float:
    """Tr(Q2 rho2(n, gamma)) by dense evolution of |n,0>; equals 2^(1-n) for n >= 1."""
    config = ExperimentConfig(gamma=gamma, n_max=cutoff or max(n, 1), auto_cutoff=False)
    rho2 = intermediate_state(InputSpec(Fock(n)), config)
    return rho2.expectation(q2_operator(rho2.cutoff))
