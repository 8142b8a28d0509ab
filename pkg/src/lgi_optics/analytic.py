"""Closed-form correlators, K curves and their maxima.

Every coherent-light curve is parameterized by the mean photon number
x = |alpha|^2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

GOLDEN_BRACKET = (1e-6, 10.0)
GOLDEN_TOL = 1e-10


def _check_mean(x: float) -> None:
    if not x >= 0:
        raise ValueError(f"mean photon number must be >= 0, got {x!r}")


def _check_gamma(gamma: float) -> None:
    if not 0.0 <= gamma <= 1.0:
        raise ValueError(f"gamma must lie in [0, 1], got {gamma!r}")


def c12_coherent(x: float) -> float:
    """P(Q2 = +1) = 4 exp(-3x/4) sinh(x/4)."""
    _check_mean(x)
    return 4.0 * math.exp(-0.75 * x) * math.sinh(0.25 * x)


def c13_coherent(x: float, gamma: float = 1.0) -> float:
    _check_mean(x)
    _check_gamma(gamma)
    vac = math.exp(-x)
    return -vac - gamma * (1.0 - vac)


def k_coherent(x: float) -> float:
    return 1.0 + c12_coherent(x)


# a phase-averaged coherent input gives the very same curve
k_dephased_input = k_coherent


def k_dephasing(x: float, gamma: float) -> float:
    """K with the right intermediate mode dephased by ``gamma``."""
    _check_gamma(gamma)
    return c12_coherent(x) + (1.0 - gamma) * math.exp(-x) + gamma


def c12_thermal(lam: float) -> float:
    if not lam > 0:
        raise ValueError(f"thermal parameter must be positive, got {lam!r}")
    return 2.0 * -math.expm1(-lam) / (2.0 * math.exp(lam) - 1.0)


def k_thermal(lam: float) -> float:
    return 1.0 + c12_thermal(lam)


def coherent_correlators(x: float, gamma: float = 1.0) -> tuple[float, float, float]:
    """(C12, C23, C13) for a coherent or phase-averaged coherent input."""
    return c12_coherent(x), 0.0, c13_coherent(x, gamma)


def thermal_correlators(lam: float, gamma: float = 1.0) -> tuple[float, float, float]:
    _check_gamma(gamma)
    vac = -math.expm1(-lam)
    return c12_thermal(lam), 0.0, -vac - gamma * (1.0 - vac)


def fock_correlators(n: int, gamma: float = 1.0) -> tuple[float, float, float]:
    _check_gamma(gamma)
    if n == 0:
        return 0.0, 0.0, -1.0
    return 2.0 ** (1 - n), 0.0, -gamma


def number_mixture_correlators(weights: Sequence[float], gamma: float = 1.0
                               ) -> tuple[float, float, float]:
    """Correlators of sum_n w_n |n,0><n,0|, by linearity over Fock inputs."""
    w = np.asarray(weights, dtype=float)
    n = np.arange(len(w))
    c12 = float(np.sum(w[1:] * 2.0 ** (1 - n[1:])))
    return c12, 0.0, float(-w[0] - gamma * w[1:].sum())


def single_photon_k() -> float:
    return 2.0


def detector_error_threshold(epsilon: float) -> tuple[float, float]:
    """(eta, 1 + 2 eta) with eta = 1 - (1 - epsilon)^3 for three detectors.

    Evaluated in exact rational arithmetic on the decimal value of
    ``epsilon`` and rounded once at the end.
    """
    if not 0.0 <= epsilon < 1.0:
        raise ValueError(f"epsilon must lie in [0, 1), got {epsilon!r}")
    e = Fraction(repr(float(epsilon)))
    eta = 1 - (1 - e) ** 3
    return float(eta), float(1 + 2 * eta)


# --------------------------------------------------------------------------
# Curves and maxima
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class AnalyticCurve:
    family: str  # "coherent", "dephased", "thermal" or "dephasing"
    gamma: float = 1.0

    def __post_init__(self):
        if self.family not in ("coherent", "dephased", "thermal", "dephasing"):
            raise ValueError(f"unknown curve family {self.family!r}")
        _check_gamma(self.gamma)

    @property
    def parameter(self) -> str:
        return "lambda" if self.family == "thermal" else "mean_photons"

    def __call__(self, p: float) -> float:
        if self.family == "thermal":
            return k_thermal(p)
        if self.family == "dephasing":
            return k_dephasing(p, self.gamma)
        return k_coherent(p)


def golden_section_max(f: Callable[[float], float], lo: float, hi: float,
                       tol: float = GOLDEN_TOL) -> tuple[float, float]:
    """Maximize a unimodal ``f`` on [lo, hi]."""
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c, d = b - invphi * (b - a), a + invphi * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = f(d)
    x = 0.5 * (a + b)
    best = max((f(x), x), (f(lo), lo), (f(hi), hi))
    return best[1], best[0]


def argmax_k(curve: AnalyticCurve) -> tuple[float, float]:
    """Closed-form maximizer and maximum of a K curve.

    With u = exp(-x/2) the dephasing curve reads gamma + 2u - (1 + gamma) u^2,
    maximal at u = 1/(1 + gamma), i.e. x = 2 ln(1 + gamma), where it equals
    gamma + 1/(1 + gamma).
    """
    if curve.family in ("coherent", "dephased"):
        return 2.0 * math.log(2.0), 1.5
    if curve.family == "thermal":
        return math.log(1.0 + 1.0 / math.sqrt(2.0)), 1.0 + 2.0 / (1.0 + math.sqrt(2.0)) ** 2
    g = curve.gamma
    return 2.0 * math.log1p(g), g + 1.0 / (1.0 + g)


def verify_argmax(curve: AnalyticCurve, bracket=GOLDEN_BRACKET, tol: float = GOLDEN_TOL) -> dict:
    """Closed-form maximum against a golden-section search of the curve."""
    x_cf, k_cf = argmax_k(curve)
    x_gs, k_gs = golden_section_max(curve, *bracket, tol=tol)
    return {"closed_form": (x_cf, k_cf), "golden": (x_gs, k_gs),
            "value_error": abs(k_gs - k_cf), "location_error": abs(x_gs - x_cf)}
