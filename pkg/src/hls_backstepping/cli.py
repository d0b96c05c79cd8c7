"""Command-line front end for kernel solves, decay-rate tables, simulations and root landmarks.

Exit codes: 0 success, 1 usage error, 2 numerical failure, 3 non-positive
decay rate with ``--strict-rates``.
"""

from __future__ import annotations

import argparse
import math
import sys
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import io as hio
from .control import evaluate_controllers, run_control
from .diagnostics import fit_decay_rate
from .errors import NonConvergence, ParameterError, RateWarning, RegimeError, SingularSystem
from .fd import Grid1D, TimeGrid, frame_stride
from .kernel import (
    DEFAULT_MAX_ITER,
    DEFAULT_TOL,
    TABLE_NODES,
    KernelParams,
    decay_rates,
    solve_kernel,
    trace_vectors,
    tune_r,
)
from .observer import ObserverGains, run_coupled
from .spectral import (
    critical_table,
    eigenvalue_on_axis,
    hkl,
    is_critical,
    regime,
    root_landmarks,
    stationary_state,
)

COMMANDS = (
    "kernel",
    "gains",
    "decay-table",
    "tune",
    "simulate-control",
    "simulate-observer",
    "critical-lengths",
    "roots",
)
TABLE_R = (0.001, 0.01, 0.02, 0.03, 0.04, 0.05, 0.1, 0.11, 0.5, 1.0)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_NUMERIC = 2
EXIT_RATES = 3


class UsageError(ValueError):
    """Invalid command line; the message names the offending flag."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


@dataclass
class RunConfig:
    command: str
    params: KernelParams
    M: int = 1001
    N: int = 5001
    T: float = 10.0
    tol: float = DEFAULT_TOL
    eps: float | None = None
    out: Path = Path("out")
    stride: int | None = None
    u0: str = "stationary"
    uhat0: str = "zero"
    strict_rates: bool = False
    frames: bool = False
    gnuplot: bool = False
    convention: str = "l2"
    r_grid: tuple = TABLE_R
    k_max: int = 5
    l_max: int = 5
    extra: dict = field(default_factory=dict)


def _float_list(text):
    try:
        return tuple(float(v) for v in text.split(",") if v.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated list of numbers: {text!r}")


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="hls-backstepping", description=__doc__.splitlines()[0])
    ap.add_argument("command", choices=COMMANDS)
    ap.add_argument("--beta", type=float, required=True, help="third-order dispersion coefficient (> 0)")
    ap.add_argument("--alpha", type=float, default=2.0)
    ap.add_argument("--delta", type=float, default=8.0)
    ap.add_argument("--r", type=float, default=0.05, help="target damping")
    ap.add_argument("--L", type=float, default=math.pi, help="interval length")
    ap.add_argument("--M", type=int, default=1001, help="spatial nodes (>= 4)")
    ap.add_argument("--N", type=int, default=5001, help="time levels (>= 2)")
    ap.add_argument("--T", type=float, default=10.0, help="final time")
    ap.add_argument("--tol", type=float, default=DEFAULT_TOL, help="kernel iteration tolerance")
    ap.add_argument("--eps", type=float, default=None, help="epsilon in the observer rate (default: searched)")
    ap.add_argument("--out", type=Path, default=Path("out"))
    ap.add_argument("--stride", type=int, default=None, help="frame storage stride")
    ap.add_argument("--u0", default="stationary", help="stationary | file:PATH")
    ap.add_argument("--uhat0", default="zero", help="zero | file:PATH")
    ap.add_argument("--strict-rates", action="store_true", help="exit 3 if a decay rate is not positive")
    ap.add_argument("--frames", action="store_true", help="also write long-format frames.csv")
    ap.add_argument("--gnuplot", action="store_true", help="also write a gnuplot script for norms")
    ap.add_argument("--convention", choices=("l2", "table"), default=None, help="rate norm convention")
    ap.add_argument("--r-grid", type=_float_list, default=TABLE_R, help="comma-separated r values")
    ap.add_argument("--kmax", type=int, default=5)
    ap.add_argument("--lmax", type=int, default=5)
    return ap


def parse_args(argv=None) -> RunConfig:
    ns = build_parser().parse_args(argv)
    checks = (
        ("--M", ns.M >= 4, "--M must be at least 4"),
        ("--N", ns.N >= 2, "--N must be at least 2"),
        ("--T", ns.T > 0, "--T must be positive"),
        ("--tol", ns.tol > 0, "--tol must be positive"),
        ("--beta", ns.beta > 0, "--beta must be positive"),
        ("--L", ns.L > 0, "--L must be positive"),
        ("--r", ns.r >= 0, "--r must be non-negative"),
        ("--eps", ns.eps is None or ns.eps > 0, "--eps must be positive"),
        ("--stride", ns.stride is None or ns.stride >= 1, "--stride must be at least 1"),
        ("--kmax", ns.kmax >= 1, "--kmax must be at least 1"),
        ("--lmax", ns.lmax >= 1, "--lmax must be at least 1"),
    )
    for _, ok, msg in checks:
        if not ok:
            raise UsageError(msg)
    for flag, value, choices in (("--u0", ns.u0, ("stationary",)), ("--uhat0", ns.uhat0, ("zero",))):
        if value not in choices and not value.startswith("file:"):
            raise UsageError(f"{flag} must be {choices[0]} or file:PATH")
    try:
        params = KernelParams(ns.beta, ns.alpha, ns.delta, ns.r, ns.L)
    except ParameterError as exc:
        raise UsageError(str(exc)) from exc
    convention = ns.convention or ("table" if ns.command in ("decay-table", "tune") else "l2")
    return RunConfig(
        command=ns.command,
        params=params,
        M=ns.M,
        N=ns.N,
        T=ns.T,
        tol=ns.tol,
        eps=ns.eps,
        out=ns.out,
        stride=ns.stride,
        u0=ns.u0,
        uhat0=ns.uhat0,
        strict_rates=ns.strict_rates,
        frames=ns.frames,
        gnuplot=ns.gnuplot,
        convention=convention,
        r_grid=ns.r_grid,
        k_max=ns.kmax,
        l_max=ns.lmax,
    )


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------

def _field(source, flag, grid, params):
    if source == "stationary":
        return stationary_state(grid.x, params)
    if source == "zero":
        return np.zeros(grid.M, dtype=complex)
    path = source[len("file:"):]
    try:
        return hio.read_field_csv(path, grid.x)
    except (OSError, ValueError) as exc:
        raise UsageError(f"{flag}: {exc}") from exc


def _rates_report(rates, prefix=""):
    return {
        f"{prefix}lambda": rates.lambda_,
        f"{prefix}mu": rates.mu,
        f"{prefix}nu": rates.nu,
        f"{prefix}epsilon": rates.epsilon,
        f"{prefix}convention": rates.convention,
    }


def _cmd_kernel(cfg: RunConfig):
    p = cfg.params
    sol = solve_kernel(p, cfg.tol, DEFAULT_MAX_ITER)
    grid = Grid1D(cfg.M, p.L)
    x = grid.x
    stride = cfg.stride or max(1, (cfg.M - 1) // 100)
    xs = x[::stride]
    if xs[-1] != x[-1]:
        xs = np.append(xs, x[-1])
    rows = []
    for xi in xs:
        ys = xs[xs <= xi]
        kv = sol.k(np.full_like(ys, xi), ys)
        rows.extend((xi, yi, v.real, v.imag) for yi, v in zip(ys, kv))
    hio.write_csv(cfg.out / "kernel.csv", ("x", "y", "re_k", "im_k"), rows)
    _write_traces(cfg.out / "traces.csv", trace_vectors(sol, x), x)
    rates = decay_rates(sol, cfg.eps, TABLE_NODES, cfg.convention)
    hio.write_report(
        cfg.out / "report.txt",
        {"iterations": sol.iterations, "residual": sol.residual, "degree": sol.G.degree, **_rates_report(rates)},
    )
    return rates


def _write_traces(path, traces: dict, x):
    rows = []
    for name, vals in traces.items():
        rows.extend((name, xi, v.real, v.imag) for xi, v in zip(x, vals))
    hio.write_csv(path, ("trace", "x", "re", "im"), rows)


def _cmd_gains(cfg: RunConfig):
    p = cfg.params
    sol = solve_kernel(p, cfg.tol, DEFAULT_MAX_ITER)
    grid = Grid1D(cfg.M, p.L)
    gains = ObserverGains.from_kernel(sol, grid)
    traces = trace_vectors(sol, grid.x)
    traces.update(p1=gains.p1, p2=gains.p2)
    _write_traces(cfg.out / "traces.csv", traces, grid.x)
    rates = decay_rates(sol, cfg.eps, TABLE_NODES, cfg.convention)
    hio.write_report(cfg.out / "report.txt", {"iterations": sol.iterations, **_rates_report(rates)})
    return rates


def _cmd_decay_table(cfg: RunConfig):
    rows = []
    worst = None
    for r in cfg.r_grid:
        sol = solve_kernel(cfg.params.with_r(r), cfg.tol, DEFAULT_MAX_ITER)
        rates = decay_rates(sol, cfg.eps, TABLE_NODES, cfg.convention)
        rows.append((r, rates.lambda_, rates.mu, rates.nu, rates.epsilon))
        if not rates.all_positive and worst is None:
            worst = rates
    hio.write_csv(cfg.out / "decay_table.csv", ("r", "lambda", "mu", "nu", "epsilon"), rows)
    return worst


def _cmd_tune(cfg: RunConfig):
    res = tune_r(cfg.params, cfg.r_grid, TABLE_NODES, cfg.convention, cfg.tol, DEFAULT_MAX_ITER)
    hio.write_csv(cfg.out / "tune.csv", ("r", "lambda"), res.table)
    hio.write_report(
        cfg.out / "report.txt",
        {"r_best": res.r_best, "lambda_best": res.lambda_best, "convention": cfg.convention, "warning": res.warning},
    )
    if res.warning:
        warnings.warn("no grid value of r gives a positive decay rate", RateWarning, stacklevel=2)
    return None


def _grids(cfg):
    return Grid1D(cfg.M, cfg.params.L), TimeGrid(cfg.N, cfg.T)


def _write_gnuplot(path, columns):
    plots = ", ".join(f"'norms.csv' using 1:{i + 2} with lines title '{c}'" for i, c in enumerate(columns))
    path.write_text(
        "set datafile separator ','\nset key autotitle columnhead\nset logscale y\n"
        "set xlabel 't'\nset ylabel 'L2 norm'\n"
        f"plot {plots}\n"
    )


def _cmd_simulate_control(cfg: RunConfig):
    p = cfg.params
    grid, tgrid = _grids(cfg)
    u0 = _field(cfg.u0, "--u0", grid, p)
    sol = solve_kernel(p, cfg.tol, DEFAULT_MAX_ITER)
    rates = decay_rates(sol, cfg.eps, TABLE_NODES, cfg.convention)
    if not rates.all_positive:
        warnings.warn(f"non-positive decay rate(s): {', '.join(rates.nonpositive)}", RateWarning, stacklevel=2)
    run = run_control(p, sol, grid, tgrid, u0, stride=frame_stride(cfg.N, cfg.stride))
    plant = run.plant
    hio.write_columns(cfg.out / "norms.csv", ("t", "norm_u"), (plant.t, plant.norms))
    if cfg.frames:
        hio.write_csv(cfg.out / "frames.csv", ("t", "x", "re_u", "im_u", "abs_u"), hio.frames_rows(plant.frame_t, grid.x, plant.frames))
    if cfg.gnuplot:
        _write_gnuplot(cfg.out / "norms.gp", ("norm_u",))
    h0, h1 = evaluate_controllers(run.gains, plant.final, grid)
    report = {"iterations": sol.iterations, **_rates_report(rates)}
    report.update(_fit(plant.t, plant.norms, (1.0, cfg.T), "fitted_rate_u"))
    report.update(h0_final=complex(h0), h1_final=complex(h1))
    hio.write_report(cfg.out / "report.txt", report)
    return None


def _fit(t, y, window, key):
    try:
        return {key: fit_decay_rate(t, y, window)}
    except ValueError:
        return {}


def _cmd_simulate_observer(cfg: RunConfig):
    p = cfg.params
    grid, tgrid = _grids(cfg)
    u0 = _field(cfg.u0, "--u0", grid, p)
    uhat0 = _field(cfg.uhat0, "--uhat0", grid, p)
    sol = solve_kernel(p, cfg.tol, DEFAULT_MAX_ITER)
    rates = decay_rates(sol, cfg.eps, TABLE_NODES, cfg.convention)
    run = run_coupled(p, sol, grid, tgrid, u0, uhat0, stride=frame_stride(cfg.N, cfg.stride), rates=rates)
    err_at_frames = run.error.norms[:: run.error.meta["stride"]]
    hio.write_columns(
        cfg.out / "norms.csv",
        ("t", "norm_u", "norm_uhat", "norm_err"),
        (run.plant.t, run.plant.norms, run.observer.norms, err_at_frames),
    )
    if cfg.frames:
        hio.write_csv(
            cfg.out / "frames.csv", ("t", "x", "re_u", "im_u", "abs_u"), hio.frames_rows(run.plant.frame_t, grid.x, run.plant.frames)
        )
    if cfg.gnuplot:
        _write_gnuplot(cfg.out / "norms.gp", ("norm_u", "norm_uhat", "norm_err"))
    report = {"iterations": sol.iterations, **_rates_report(rates)}
    report.update(_fit(run.error.t, run.error.norms, (1.0, cfg.T), "fitted_rate_err"))
    report.update(_fit(run.observer.t, run.observer.norms, (1.0, cfg.T), "fitted_rate_uhat"))
    report.update(_fit(run.plant.t, run.plant.norms, (1.0, cfg.T), "fitted_rate_u"))
    hio.write_report(cfg.out / "report.txt", report)
    return None


def _cmd_critical_lengths(cfg: RunConfig):
    p = cfg.params
    rows = critical_table(p, cfg.k_max, cfg.l_max)
    hio.write_csv(cfg.out / "critical_lengths.csv", ("k", "l", "L_crit"), rows)
    hit = is_critical(p, p.L, 1e-9, cfg.k_max, cfg.l_max)
    report = {"L": p.L, "critical": hit is not None}
    if hit is not None:
        report.update(k=hit[0], l=hit[1], H=hkl(*hit))
    hio.write_report(cfg.out / "report.txt", report)
    return None


def _cmd_roots(cfg: RunConfig):
    p = cfg.params
    lm = root_landmarks(p)
    report = lm.report()
    report["discriminant"] = p.alpha**2 + 3.0 * p.beta * p.delta
    if regime(p) > 0:
        hit = is_critical(p, p.L, 1e-9, cfg.k_max, cfg.l_max)
        report["critical"] = hit is not None
        if hit is not None:
            report.update(k=hit[0], l=hit[1], eigenvalue_on_axis=eigenvalue_on_axis(p, *hit))
    hio.write_report(cfg.out / "report.txt", report)
    return None


HANDLERS = {
    "kernel": _cmd_kernel,
    "gains": _cmd_gains,
    "decay-table": _cmd_decay_table,
    "tune": _cmd_tune,
    "simulate-control": _cmd_simulate_control,
    "simulate-observer": _cmd_simulate_observer,
    "critical-lengths": _cmd_critical_lengths,
    "roots": _cmd_roots,
}


def run(cfg: RunConfig) -> int:
    """Execute a parsed configuration and return the process exit code."""
    cfg.out.mkdir(parents=True, exist_ok=True)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", RateWarning)
        try:
            result = HANDLERS[cfg.command](cfg)
        except (NonConvergence, SingularSystem) as exc:
            print(f"numerical failure: {exc}", file=sys.stderr)
            return EXIT_NUMERIC
        except RegimeError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_USAGE
    rate_problem = any(issubclass(w.category, RateWarning) for w in caught)
    if cfg.command in ("kernel", "gains", "decay-table") and result is not None:
        rate_problem = rate_problem or not getattr(result, "all_positive", True)
    for w in caught:
        print(f"warning: {w.message}", file=sys.stderr)
    if rate_problem and cfg.strict_rates:
        return EXIT_RATES
    return EXIT_OK


def main(argv=None) -> int:
    try:
        cfg = parse_args(argv)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        return run(cfg)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
