"""Acceptance suite: one function per criterion, each returning a CriterionResult."""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, replace
from typing import Callable

import numpy as np

from .analytic import (detector_error_threshold, golden_section_max, k_coherent, k_dephasing,
                       k_thermal)
from .fock import Coherent, DephasedCoherent, Fock, InputSpec, Thermal, tail_mass
from .montecarlo import RunConfig, estimate_correlators
from .observables import (ExperimentConfig, evolve, intermediate_q2, k_exact, projected_rho3,
                          projected_rho3_closed_form)

LN2 = math.log(2.0)
LAMBDA_M = math.log(1.0 + 1.0 / math.sqrt(2.0))
K_THERMAL_MAX = 1.0 + 2.0 / (1.0 + math.sqrt(2.0)) ** 2
COHERENT_GRID = np.linspace(0.0, 6.0, 101)
THERMAL_GRID = np.linspace(0.05, 5.0, 100)
DEPHASING_GRID = np.linspace(0.0, 6.0, 41)
GAMMAS = (0.0, 0.05, 0.1, 0.3, 0.5, 1.0)
# a comparison-based search cannot place a quadratic peak closer than ~sqrt(eps)
LOCATION_TOL = 1e-6


@dataclass(frozen=True)
class CriterionResult:
    number: int
    name: str
    passed: bool
    detail: str
    seconds: float = 0.0

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"[{status}] {self.number:2d} {self.name}: {self.detail} ({self.seconds:.2f}s)"


def _coherent(x: float) -> Coherent:
    return Coherent(math.sqrt(x))


def _exact_k(spec, gamma: float = 1.0, n_max: int = 40) -> float:
    return k_exact(spec, ExperimentConfig(gamma=gamma, n_max=n_max)).k


def _timed(number: int, name: str, limit: float | None = None):
    def wrap(fn: Callable[[], tuple[bool, str]]):
        def run() -> CriterionResult:
            t0 = time.perf_counter()
            ok, detail = fn()
            dt = time.perf_counter() - t0
            if limit is not None and dt >= limit:
                ok, detail = False, f"{detail}; runtime {dt:.1f}s >= {limit:.0f}s"
            return CriterionResult(number, name, bool(ok), detail, dt)
        run.number = number
        return run
    return wrap


@_timed(1, "single photon", limit=1.0)
def criterion_1() -> tuple[bool, str]:
    r = k_exact(Fock(1))
    err = max(abs(r.c12 - 1.0), abs(r.c23), abs(r.c13 + 1.0), abs(r.k - 2.0))
    return err <= 1e-12, f"C12={r.c12:.15g} C23={r.c23:.3g} C13={r.c13:.15g} K={r.k:.15g}"


@_timed(2, "coherent K curve", limit=30.0)
def criterion_2() -> tuple[bool, str]:
    worst = 0.0
    for x in COHERENT_GRID:
        tol = 1e-10 + tail_mass(_coherent(x), 40)
        worst = max(worst, abs(_exact_k(_coherent(x)) - k_coherent(x)) - tol)
    x_gs, k_gs = golden_section_max(lambda x: _exact_k(_coherent(x)), 1e-6, 6.0)
    dk, dx = abs(k_gs - 1.5), abs(x_gs - 2.0 * LN2)
    ok = worst <= 0.0 and dk <= 1e-9 and dx <= LOCATION_TOL
    return ok, f"max excess over tol {worst:.2e}; max K={k_gs:.15g} (err {dk:.1e}) at {x_gs:.10f} (err {dx:.1e})"


@_timed(3, "dephased-input equivalence")
def criterion_3() -> tuple[bool, str]:
    err = max(abs(_exact_k(DephasedCoherent(math.sqrt(x))) - _exact_k(_coherent(x)))
              for x in COHERENT_GRID)
    return err <= 1e-10, f"max |K_dephased - K_coherent| = {err:.2e}"


@_timed(4, "thermal K curve")
def criterion_4() -> tuple[bool, str]:
    err = max(abs(_exact_k(Thermal(lam)) - k_thermal(lam)) for lam in THERMAL_GRID)
    lam_gs, k_gs = golden_section_max(lambda lam: _exact_k(Thermal(lam)), 0.05, 5.0)
    dk, dl = abs(k_gs - K_THERMAL_MAX), abs(lam_gs - LAMBDA_M)
    ok = err <= 1e-10 and dk <= 1e-9 and dl <= LOCATION_TOL
    return ok, f"max curve error {err:.2e}; max K={k_gs:.13g} (err {dk:.1e}) at {lam_gs:.10f} (err {dl:.1e})"


@_timed(5, "intermediate dephasing")
def criterion_5() -> tuple[bool, str]:
    curve_err, failures = 0.0, []
    for g in GAMMAS:
        for x in DEPHASING_GRID:
            curve_err = max(curve_err, abs(_exact_k(_coherent(x), g) - k_dephasing(x, g)))
        x_gs, k_gs = golden_section_max(lambda x: _exact_k(_coherent(x), g), 0.0, 6.0)
        stated = 1.0 + g / (1.0 + g)
        if abs(k_gs - stated) > 1e-9 or abs(x_gs - 2.0 * math.log1p(g)) > LOCATION_TOL:
            failures.append(f"gamma={g}: max {k_gs:.12g} at {x_gs:.8f}, expected {stated:.12g} "
                            f"at {2 * math.log1p(g):.8f}")
    flat = max(_exact_k(_coherent(x), 0.0) for x in COHERENT_GRID)
    ok = curve_err <= 1e-10 and not failures and flat <= 1.0 + 1e-12
    detail = f"curve error {curve_err:.2e}; gamma=0 max {flat:.15g}"
    if failures:
        detail += "; maxima mismatch: " + "; ".join(failures)
    return ok, detail


@_timed(6, "intermediate Q2 fixture")
def criterion_6() -> tuple[bool, str]:
    err = 0.0
    for g in (0.0, 0.3, 0.7, 1.0):
        err = max(err, abs(intermediate_q2(0, g)))
        for n in range(1, 13):
            err = max(err, abs(intermediate_q2(n, g) - 2.0 ** (1 - n)))
    return err <= 1e-12, f"max error {err:.2e}"


@_timed(7, "projected output fixture")
def criterion_7() -> tuple[bool, str]:
    err_pure = 0.0
    for n in range(13):
        rho = projected_rho3(n, 1.0)
        target = np.zeros(rho.matrix.shape)
        i = rho.cutoff.index(0, n)
        target[i, i] = 1.0
        err_pure = max(err_pure, float(np.abs(rho.matrix - target).max()))
    err_cf = 0.0
    for n in range(11):
        for g in (0.0, 0.5):
            rho = projected_rho3(n, g)
            err_cf = max(err_cf, float(np.abs(
                rho.matrix - projected_rho3_closed_form(n, g, rho.cutoff)).max()))
    return max(err_pure, err_cf) <= 1e-12, f"gamma=1 error {err_pure:.2e}; closed-form error {err_cf:.2e}"


@_timed(8, "C23 nullity and C12 gamma-independence")
def criterion_8() -> tuple[bool, str]:
    families = ([_coherent(x) for x in COHERENT_GRID[::5]]
                + [DephasedCoherent(math.sqrt(x)) for x in COHERENT_GRID[::5]]
                + [Thermal(lam) for lam in THERMAL_GRID[::5]])
    c23_max, spread = 0.0, 0.0
    for dist in families:
        c12 = []
        for g in GAMMAS:
            ev = evolve(InputSpec(dist), ExperimentConfig(gamma=g))
            c23_max = max(c23_max, abs(ev.c23))
            c12.append(ev.c12)
        spread = max(spread, max(c12) - min(c12))
    return c23_max < 1e-12 and spread < 1e-12, f"max |C23| {c23_max:.2e}; max C12 spread {spread:.2e}"


@_timed(9, "Monte-Carlo consistency", limit=120.0)
def criterion_9() -> tuple[bool, str]:
    cases = [(Fock(1), 1.0), (_coherent(2 * LN2), 0.0), (_coherent(2 * LN2), 1.0),
             (Thermal(LAMBDA_M), 1.0)]
    parts, ok = [], True
    for i, (dist, g) in enumerate(cases):
        cfg = RunConfig(dist, gamma=g, n_trials=1_000_000, seed=20240 + i)
        rep = estimate_correlators(cfg)
        z = (rep.k - k_exact(dist, cfg.experiment).k) / rep.stderr_k
        ok &= abs(z) < 4.0
        parts.append(f"{type(dist).__name__}(g={g}) z={z:+.2f}")
        if isinstance(dist, Fock):
            for setup, n_disc in rep.n_discarded.items():
                zd = (n_disc / cfg.n_trials - 0.5) / math.sqrt(0.25 / cfg.n_trials)
                ok &= abs(zd) < 3.0
                parts.append(f"discard {setup.value} z={zd:+.2f}")
    cfg = RunConfig(_coherent(2 * LN2), n_trials=1_000_000, seed=99)
    same = estimate_correlators(cfg) == estimate_correlators(replace(cfg, shards=5, workers=4))
    ok &= same
    parts.append(f"shard-invariant={same}")
    return ok, "; ".join(parts)


@_timed(10, "detector error thresholds")
def criterion_10() -> tuple[bool, str]:
    eta, thr = detector_error_threshold(0.05)
    ok = (eta, thr) == (0.142625, 1.28525) and 1.5 > thr and 1.343146 > thr
    return ok, f"eta={eta!r} threshold={thr!r}"


CRITERIA = (criterion_1, criterion_2, criterion_3, criterion_4, criterion_5,
            criterion_6, criterion_7, criterion_8, criterion_9, criterion_10)


def run_all(only: list[int] | None = None, echo: Callable[[str], None] | None = None
            ) -> list[CriterionResult]:
    results = []
    for crit in CRITERIA:
        if only and crit.number not in only:
            continue
        res = crit()
        if echo is not None:
            echo(res.line())
        results.append(res)
    return results
