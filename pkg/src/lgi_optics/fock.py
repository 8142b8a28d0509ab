"""Two-mode Fock space truncated by total photon number, and input photon statistics.

Basis states |k, l> (k photons in the left mode, l in the right) are ordered
block by block in the total number S = k + l, and by k inside a block, so
that every number-conserving operator is block diagonal in this ordering.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from functools import cached_property
from typing import Union

import numpy as np
from scipy.special import gammainc, gammaln

DEFAULT_CUTOFF = 40
DEFAULT_TAIL_TOL = 1e-12


class TruncationError(ValueError):
    """Raised when a distribution does not fit inside the requested cutoff."""


class CutoffMismatch(ValueError):
    pass


class Mode(enum.Enum):
    LEFT = "L"
    RIGHT = "R"

    @property
    def other(self) -> "Mode":
        return Mode.RIGHT if self is Mode.LEFT else Mode.LEFT


@dataclass(frozen=True)
class FockCutoff:
    """All |k, l> with k + l <= n_max."""

    n_max: int = DEFAULT_CUTOFF

    def __post_init__(self):
        if int(self.n_max) != self.n_max or self.n_max < 1:
            raise ValueError(f"n_max must be an integer >= 1, got {self.n_max!r}")

    @property
    def size(self) -> int:
        return (self.n_max + 1) * (self.n_max + 2) // 2

    def index(self, k: int, l: int) -> int:
        s = k + l
        if k < 0 or l < 0 or s > self.n_max:
            raise IndexError(f"|{k},{l}> is outside the cutoff n_max={self.n_max}")
        return s * (s + 1) // 2 + k

    def state(self, index: int) -> tuple[int, int]:
        if not 0 <= index < self.size:
            raise IndexError(index)
        s = int((math.isqrt(8 * index + 1) - 1) // 2)
        k = index - s * (s + 1) // 2
        return k, s - k

    def block(self, s: int) -> slice:
        """Slice of the basis holding total photon number ``s``."""
        start = s * (s + 1) // 2
        return slice(start, start + s + 1)

    def blocks(self):
        for s in range(self.n_max + 1):
            yield s, self.block(s)

    @cached_property
    def left_counts(self) -> np.ndarray:
        return np.concatenate([np.arange(s + 1) for s in range(self.n_max + 1)])

    @cached_property
    def right_counts(self) -> np.ndarray:
        return np.concatenate([s - np.arange(s + 1) for s in range(self.n_max + 1)])

    def mode_counts(self, mode: Mode) -> np.ndarray:
        return self.left_counts if mode is Mode.LEFT else self.right_counts


@dataclass(frozen=True, eq=False)
class TwoModeState:
    """Density operator on a truncated two-mode Fock space.

    ``trace_deficit`` is the probability mass that fell outside the cutoff
    when the state was prepared; channels leave it untouched.
    """

    cutoff: FockCutoff
    matrix: np.ndarray
    trace_deficit: float = 0.0

    def __post_init__(self):
        m = np.array(self.matrix, dtype=complex)
        d = self.cutoff.size
        if m.shape != (d, d):
            raise ValueError(f"matrix shape {m.shape} does not match basis size {d}")
        if self.trace_deficit < 0:
            raise ValueError("trace_deficit must be non-negative")
        m.flags.writeable = False
        object.__setattr__(self, "matrix", m)

    def trace(self) -> float:
        return float(np.trace(self.matrix).real)

    def probabilities(self) -> np.ndarray:
        """Diagonal of the density matrix (photon-number probabilities)."""
        return self.matrix.diagonal().real.copy()

    def element(self, bra: tuple[int, int], ket: tuple[int, int]) -> complex:
        """<bra| rho |ket>."""
        return complex(self.matrix[self.cutoff.index(*bra), self.cutoff.index(*ket)])

    def expectation(self, diagonal_operator: np.ndarray) -> float:
        return float(np.dot(self.matrix.diagonal().real, diagonal_operator))

    def with_matrix(self, matrix: np.ndarray) -> "TwoModeState":
        return TwoModeState(self.cutoff, matrix, self.trace_deficit)

    def is_hermitian(self, atol: float = 1e-12) -> bool:
        return bool(np.allclose(self.matrix, self.matrix.conj().T, atol=atol, rtol=0))


# --------------------------------------------------------------------------
# Photon-number distributions
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class Coherent:
    alpha: complex

    default_mode = Mode.LEFT
    number_diagonal = False

    @property
    def mean_photons(self) -> float:
        return abs(self.alpha) ** 2


@dataclass(frozen=True)
class DephasedCoherent:
    """Coherent state with its phase reference averaged away."""

    alpha: complex

    default_mode = Mode.LEFT
    number_diagonal = True

    @property
    def mean_photons(self) -> float:
        return abs(self.alpha) ** 2


@dataclass(frozen=True)
class Thermal:
    """Geometric distribution with ``lam`` = hbar*omega / kT."""

    lam: float

    default_mode = Mode.RIGHT
    number_diagonal = True

    def __post_init__(self):
        if not self.lam > 0:
            raise ValueError(f"thermal parameter must be positive, got {self.lam!r}")

    @property
    def mean_photons(self) -> float:
        return 1.0 / math.expm1(self.lam)


@dataclass(frozen=True)
class Fock:
    n: int

    default_mode = Mode.LEFT
    number_diagonal = True

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 0:
            raise ValueError(f"Fock photon number must be a non-negative integer, got {self.n!r}")

    @property
    def mean_photons(self) -> float:
        return float(self.n)


PhotonDistribution = Union[Coherent, DephasedCoherent, Thermal, Fock]


@dataclass(frozen=True)
class InputSpec:
    """An input field and the mode it is injected into (None: family default)."""

    dist: PhotonDistribution
    mode: Mode | None = None

    @property
    def input_mode(self) -> Mode:
        return self.mode if self.mode is not None else self.dist.default_mode

    @classmethod
    def coerce(cls, value) -> "InputSpec":
        return value if isinstance(value, InputSpec) else cls(value)


def poisson_weight(alpha: complex, n: int) -> float:
    x = abs(alpha) ** 2
    if x == 0.0:
        return 1.0 if n == 0 else 0.0
    return math.exp(-x + n * math.log(x) - math.lgamma(n + 1))


def thermal_weight(lam: float, n: int) -> float:
    if not lam > 0:
        raise ValueError(f"thermal parameter must be positive, got {lam!r}")
    return math.exp(-n * lam) * -math.expm1(-lam)


def photon_weights(dist: PhotonDistribution, n_max: int) -> np.ndarray:
    """Weights of photon numbers 0..n_max."""
    n = np.arange(n_max + 1)
    if isinstance(dist, (Coherent, DephasedCoherent)):
        x = abs(dist.alpha) ** 2
        if x == 0.0:
            return (n == 0).astype(float)
        return np.exp(-x + n * math.log(x) - gammaln(n + 1))
    if isinstance(dist, Thermal):
        return np.exp(-n * dist.lam) * -math.expm1(-dist.lam)
    if isinstance(dist, Fock):
        return (n == dist.n).astype(float)
    raise TypeError(f"unknown distribution {dist!r}")


def tail_mass(dist: PhotonDistribution, n_max: int) -> float:
    """Probability of more than ``n_max`` photons, in closed form."""
    if isinstance(dist, (Coherent, DephasedCoherent)):
        x = abs(dist.alpha) ** 2
        if x == 0.0:
            return 0.0
        # P(N > n_max) for N ~ Poisson(x) is the regularized lower incomplete gamma
        return float(gammainc(n_max + 1, x))
    if isinstance(dist, Thermal):
        return math.exp(-(n_max + 1) * dist.lam)
    if isinstance(dist, Fock):
        return 1.0 if dist.n > n_max else 0.0
    raise TypeError(f"unknown distribution {dist!r}")


def required_cutoff(dist: PhotonDistribution, tol: float = DEFAULT_TAIL_TOL,
                    minimum: int = 1) -> int:
    """Smallest cutoff >= ``minimum`` whose tail mass is <= ``tol``."""
    n = max(int(minimum), 1)
    if tail_mass(dist, n) <= tol:
        return n
    if isinstance(dist, Fock):
        return max(n, dist.n)
    if isinstance(dist, Thermal):
        n = max(n, math.ceil(-math.log(tol) / dist.lam) - 1)
        while tail_mass(dist, n) > tol:
            n += 1
        return n
    while tail_mass(dist, n) > tol:
        n += max(1, n // 8)
    while n > minimum and tail_mass(dist, n - 1) <= tol:
        n -= 1
    return n


def build_input_state(dist: PhotonDistribution, cutoff: FockCutoff | int = DEFAULT_CUTOFF,
                      mode: Mode | None = None, tail_tol: float = DEFAULT_TAIL_TOL,
                      allow_truncation: bool = False) -> TwoModeState:
    """Density matrix of ``dist`` injected into ``mode``, other mode in vacuum."""
    if not isinstance(cutoff, FockCutoff):
        cutoff = FockCutoff(cutoff)
    spec = InputSpec(dist, mode)
    if isinstance(dist, Fock) and dist.n > cutoff.n_max:
        raise TruncationError(f"Fock({dist.n}) does not fit in n_max={cutoff.n_max}")
    tail = tail_mass(dist, cutoff.n_max)
    if tail > tail_tol and not allow_truncation:
        raise TruncationError(
            f"tail mass {tail:.3g} beyond n_max={cutoff.n_max} exceeds tolerance {tail_tol:.3g}")

    n = np.arange(cutoff.n_max + 1)
    if spec.input_mode is Mode.LEFT:
        idx = n * (n + 1) // 2 + n
    else:
        idx = n * (n + 1) // 2
    rho = np.zeros((cutoff.size, cutoff.size), dtype=complex)

    if isinstance(dist, Coherent):
        x = abs(dist.alpha) ** 2
        if x == 0.0:
            amp = (n == 0).astype(complex)
        else:
            amp = np.exp(0.5 * (-x + n * math.log(x) - gammaln(n + 1))) \
                * np.exp(1j * n * np.angle(dist.alpha))
        rho[np.ix_(idx, idx)] = np.outer(amp, amp.conj())
    else:
        rho[idx, idx] = photon_weights(dist, cutoff.n_max)
    return TwoModeState(cutoff, rho, trace_deficit=tail)
