"""Command-line interface: sweeps, Monte-Carlo runs, maxima and the acceptance suite."""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from dataclasses import dataclass

import numpy as np

from . import acceptance
from .analytic import (AnalyticCurve, argmax_k, coherent_correlators, detector_error_threshold,
                       fock_correlators, golden_section_max, thermal_correlators)
from .fock import (DEFAULT_CUTOFF, Coherent, DephasedCoherent, Fock, InputSpec, Mode, Thermal)
from .montecarlo import RunConfig, estimate_correlators, expected_report, noisy_k_study
from .observables import ExperimentConfig, k_exact

EXIT_OK, EXIT_INVALID, EXIT_FAILED = 0, 1, 2
CSV_HEADER = ("param", "gamma", "c12", "c23", "c13", "k", "violated", "engine", "stderr_k")
FAMILIES = ("coherent", "dephased", "thermal", "fock")
ENGINES = ("analytic", "exact", "montecarlo")
SEED_ENV = "LGI_OPTICS_SEED"
STRICT_TOL = 1e-8


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INVALID, f"{self.prog}: error: {message}\n")


def make_input(family: str, param: float, mode: Mode | None = None) -> InputSpec:
    """Build an input from the CLI parameterization (mean photons, lambda or n)."""
    if family in ("coherent", "dephased"):
        if param < 0:
            raise UsageError(f"mean photon number must be >= 0, got {param}")
        cls = Coherent if family == "coherent" else DephasedCoherent
        return InputSpec(cls(math.sqrt(param)), mode)
    if family == "thermal":
        if param <= 0:
            raise UsageError(f"thermal lambda must be > 0, got {param}")
        return InputSpec(Thermal(param), mode)
    if family == "fock":
        if param != int(param) or param < 0:
            raise UsageError(f"Fock photon number must be a non-negative integer, got {param}")
        return InputSpec(Fock(int(param)), mode)
    raise UsageError(f"unknown input family {family!r}; choose from {', '.join(FAMILIES)}")


def parse_input(text: str) -> tuple[str, float, InputSpec]:
    """``family:param[:L|R]``, e.g. ``coherent:1.386`` or ``thermal:0.5:L``."""
    parts = text.split(":")
    if len(parts) not in (2, 3):
        raise UsageError(f"input must look like family:param[:L|R], got {text!r}")
    try:
        param = float(parts[1])
    except ValueError:
        raise UsageError(f"bad input parameter in {text!r}") from None
    mode = None
    if len(parts) == 3:
        try:
            mode = Mode(parts[2].upper())
        except ValueError:
            raise UsageError(f"input mode must be L or R, got {parts[2]!r}") from None
    return parts[0], param, make_input(parts[0], param, mode)


def _trials(text: str) -> int:
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid trial count {text!r}") from None
    if value != int(value) or value < 1:
        raise argparse.ArgumentTypeError(f"trial count must be a positive integer, got {text!r}")
    return int(value)


def _seed(args) -> int:
    if args.seed is not None:
        return args.seed
    env = os.environ.get(SEED_ENV)
    if env is None:
        return 0
    try:
        return int(env)
    except ValueError:
        raise UsageError(f"{SEED_ENV} must be an integer, got {env!r}") from None


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return str(bool(value)).lower()
    if isinstance(value, str):
        return value
    return f"{float(value):.12g}"


# --------------------------------------------------------------------------
# sweep
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class SweepSpec:
    family: str
    pmin: float
    pmax: float
    steps: int
    gammas: tuple[float, ...] = (1.0,)
    engine: str = "exact"
    output: str | None = None
    fmt: str = "csv"
    cutoff: int = DEFAULT_CUTOFF
    trials: int = 100_000
    seed: int = 0

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise UsageError(f"unknown family {self.family!r}")
        if self.steps < 2:
            raise UsageError("steps must be >= 2")
        if not self.pmin < self.pmax:
            raise UsageError("min must be smaller than max")
        if any(not 0.0 <= g <= 1.0 for g in self.gammas):
            raise UsageError("gamma values must lie in [0, 1]")
        if self.engine not in ENGINES + ("all",):
            raise UsageError(f"unknown engine {self.engine!r}")
        if self.fmt not in ("csv", "json"):
            raise UsageError(f"unknown format {self.fmt!r}")

    @property
    def engines(self) -> tuple[str, ...]:
        return ENGINES if self.engine == "all" else (self.engine,)

    def params(self) -> np.ndarray:
        p = np.linspace(self.pmin, self.pmax, self.steps)
        return np.unique(np.round(p)) if self.family == "fock" else p


def analytic_row(family: str, param: float, gamma: float) -> tuple[float, float, float, float]:
    if family in ("coherent", "dephased"):
        c12, c23, c13 = coherent_correlators(param, gamma)
    elif family == "thermal":
        c12, c23, c13 = thermal_correlators(param, gamma)
    else:
        c12, c23, c13 = fock_correlators(int(param), gamma)
    return c12, c23, c13, c12 + c23 - c13


def sweep_rows(spec: SweepSpec) -> list[dict]:
    rows = []
    for gamma in spec.gammas:
        for param in spec.params():
            inp = make_input(spec.family, float(param))
            for engine in spec.engines:
                stderr = None
                if engine == "analytic":
                    c12, c23, c13, k = analytic_row(spec.family, float(param), gamma)
                    violated = k > 1.0
                elif engine == "exact":
                    r = k_exact(inp, ExperimentConfig(gamma=gamma, n_max=spec.cutoff))
                    c12, c23, c13, k, violated = r.c12, r.c23, r.c13, r.k, r.violated
                else:
                    r = estimate_correlators(RunConfig(inp, gamma=gamma, n_trials=spec.trials,
                                                       seed=spec.seed, n_max=spec.cutoff))
                    c12, c23, c13, k, violated = r.c12, r.c23, r.c13, r.k, r.violated
                    stderr = r.stderr_k
                rows.append({"param": float(param), "gamma": gamma, "c12": c12, "c23": c23,
                             "c13": c13, "k": k, "violated": bool(violated), "engine": engine,
                             "stderr_k": stderr})
    rows.sort(key=lambda r: (r["gamma"], r["param"], ENGINES.index(r["engine"])))
    return rows


def strict_disagreements(rows: list[dict], tol: float = STRICT_TOL) -> list[str]:
    by_key: dict = {}
    for r in rows:
        by_key.setdefault((r["gamma"], r["param"]), {})[r["engine"]] = r
    bad = []
    for (g, p), engines in by_key.items():
        if "analytic" in engines and "exact" in engines:
            d = max(abs(engines["analytic"][c] - engines["exact"][c])
                    for c in ("c12", "c23", "c13", "k"))
            if d > tol:
                bad.append(f"param={p:.6g} gamma={g}: analytic/exact differ by {d:.2e}")
    return bad


def render_rows(rows: list[dict], fmt: str) -> str:
    if fmt == "json":
        return json.dumps(rows, indent=2) + "\n"
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for r in rows:
        writer.writerow([_fmt(r[c]) for c in CSV_HEADER])
    return buf.getvalue()


def cmd_sweep(args) -> int:
    spec = SweepSpec(args.family, args.min, args.max, args.steps, tuple(args.gamma),
                     args.engine, args.output, args.format, args.cutoff, args.trials,
                     _seed(args))
    rows = sweep_rows(spec)
    text = render_rows(rows, spec.fmt)
    if spec.output:
        with open(spec.output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    if args.strict:
        bad = strict_disagreements(rows)
        for line in bad:
            print(line, file=sys.stderr)
        if bad:
            return EXIT_FAILED
    return EXIT_OK


# --------------------------------------------------------------------------
# mc, noise, maxima, check
# --------------------------------------------------------------------------


def _run_config(args, inp: InputSpec) -> RunConfig:
    try:
        return RunConfig(inp, gamma=args.gamma, epsilon=args.epsilon, n_trials=args.trials,
                         seed=_seed(args), n_max=args.cutoff, shards=args.shards,
                         workers=args.workers)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def cmd_mc(args) -> int:
    _, _, inp = parse_input(args.input)
    cfg = _run_config(args, inp)
    report = estimate_correlators(cfg).as_dict()
    eta, threshold = detector_error_threshold(cfg.epsilon)
    report.update(input=args.input, gamma=cfg.gamma, epsilon=cfg.epsilon, seed=cfg.seed,
                  eta=eta, threshold=threshold,
                  exact_k=k_exact(inp, cfg.experiment).k, expected_k=expected_report(cfg).k)
    print(json.dumps(_jsonable(report), indent=2))
    return EXIT_OK


def cmd_noise(args) -> int:
    _, _, inp = parse_input(args.input)
    cfg = _run_config(args, inp)
    rows = [{"epsilon": r.epsilon, "eta": r.eta, "threshold": r.threshold,
             "measured_k": r.measured_k, "stderr_k": r.stderr_k, "expected_k": r.expected_k,
             "exceeds_bound": r.exceeds_bound}
            for r in noisy_k_study(cfg, args.epsilons)]
    if args.format == "json":
        print(json.dumps(rows, indent=2))
    else:
        writer = csv.writer(sys.stdout, lineterminator="\n")
        writer.writerow(rows[0].keys())
        for r in rows:
            writer.writerow([_fmt(v) for v in r.values()])
    return EXIT_OK


def cmd_maxima(args) -> int:
    curves = [AnalyticCurve("coherent"), AnalyticCurve("thermal")]
    curves += [AnalyticCurve("dephasing", g) for g in args.gamma]
    out = []
    for curve in curves:
        x_cf, k_cf = argmax_k(curve)
        if curve.family == "thermal":
            f, bracket = (lambda p: k_exact(Thermal(p)).k), (0.05, 5.0)
        else:
            g = curve.gamma
            f = (lambda p, g=g: k_exact(Coherent(math.sqrt(p)), ExperimentConfig(gamma=g)).k)
            bracket = (0.0, 6.0)
        x_ex, k_ex = golden_section_max(f, *bracket)
        out.append({"family": curve.family, "gamma": curve.gamma, "parameter": curve.parameter,
                    "argmax": x_cf, "k_max": k_cf, "exact_argmax": x_ex, "exact_k_max": k_ex})
    print(json.dumps(out, indent=2))
    return EXIT_OK


def cmd_check(args) -> int:
    results = acceptance.run_all(args.only, echo=print)
    passed = sum(r.passed for r in results)
    print(f"{passed}/{len(results)} criteria passed")
    return EXIT_OK if passed == len(results) else EXIT_FAILED


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (np.floating, np.integer, np.bool_)):
        return obj.item()
    return obj


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="lgi-optics", description="Leggett-Garg correlators of light in a "
                "Mach-Zehnder interferometer.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("sweep", help="K curve over a parameter range")
    s.add_argument("--family", choices=FAMILIES, default="coherent")
    s.add_argument("--min", type=float, default=0.0)
    s.add_argument("--max", type=float, default=5.0)
    s.add_argument("--steps", type=int, default=101)
    s.add_argument("--gamma", type=float, nargs="+", default=[1.0])
    s.add_argument("--engine", choices=ENGINES + ("all",), default="exact")
    s.add_argument("--format", choices=("csv", "json"), default="csv")
    s.add_argument("--output", "-o")
    s.add_argument("--cutoff", type=int, default=DEFAULT_CUTOFF)
    s.add_argument("--trials", type=_trials, default=100_000)
    s.add_argument("--seed", type=int)
    s.add_argument("--strict", action="store_true",
                   help=f"exit {EXIT_FAILED} if analytic and exact rows differ by > {STRICT_TOL}")
    s.set_defaults(func=cmd_sweep)

    def run_flags(q):
        q.add_argument("--input", required=True, help="family:param[:L|R]")
        q.add_argument("--gamma", type=float, default=1.0)
        q.add_argument("--trials", type=_trials, default=100_000)
        q.add_argument("--seed", type=int)
        q.add_argument("--cutoff", type=int, default=DEFAULT_CUTOFF)
        q.add_argument("--shards", type=int, default=1)
        q.add_argument("--workers", type=int, default=1)

    m = sub.add_parser("mc", help="Monte-Carlo estimate of the correlators")
    run_flags(m)
    m.add_argument("--epsilon", type=float, default=0.0)
    m.set_defaults(func=cmd_mc)

    n = sub.add_parser("noise", help="noisy K against the error-adjusted bound")
    run_flags(n)
    n.add_argument("--epsilons", type=float, nargs="+", default=[0.0, 0.01, 0.05, 0.1, 0.3])
    n.add_argument("--format", choices=("csv", "json"), default="csv")
    n.set_defaults(func=cmd_noise, epsilon=0.0)

    x = sub.add_parser("maxima", help="closed-form and numerical maxima of K")
    x.add_argument("--gamma", type=float, nargs="+", default=[0.0, 0.05, 0.1, 0.3, 0.5, 1.0])
    x.set_defaults(func=cmd_maxima)

    c = sub.add_parser("check", help="run the acceptance suite")
    c.add_argument("--only", type=int, nargs="+", help="criterion numbers to run")
    c.set_defaults(func=cmd_check)
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
