"""Acceptance suite: one check per criterion, each printing a PASS/FAIL line.

Run under pytest (lines appear in the terminal summary) or directly with
``python3 tests/test_acceptance.py``.
"""

import functools
import math
import time
import warnings
from fractions import Fraction

import numpy as np
import pytest

from hls_backstepping.control import apply_transform, invert_transform, run_control, simulate_plant_uncontrolled
from hls_backstepping.diagnostics import bound_ratio, fit_decay_rate, max_growth_per_time, scalar_cn_factor
from hls_backstepping.errors import CompatibilityWarning
from hls_backstepping.fd import CNStepper, Grid1D, TimeGrid, build_upsilon, trapezoid_weights
from hls_backstepping.kernel import (
    REFERENCE_PARAMS,
    KernelParams,
    apply_P,
    decay_rates,
    increment_bound,
    kernel_p_from_k,
    solve_kernel,
)
from hls_backstepping.observer import run_coupled
from hls_backstepping.poly import BivariatePoly
from hls_backstepping.spectral import critical_length, hkl, repeated_root_certificate, stationary_state

try:
    from conftest import ACCEPTANCE_LINES
except ImportError:  # pragma: no cover
    ACCEPTANCE_LINES = {}

TABLE = {
    0.001: 0.001981,
    0.01: 0.018054,
    0.02: 0.032221,
    0.03: 0.042507,
    0.04: 0.048918,
    0.05: 0.051463,
    0.1: 0.006407,
    0.11: -0.014113,
    0.5: -3.729586,
    1.0: -16.379897,
}


@functools.lru_cache(maxsize=None)
def reference_kernel():
    return solve_kernel(REFERENCE_PARAMS)


@functools.lru_cache(maxsize=None)
def stationary_run(M, N):
    g = Grid1D(M, REFERENCE_PARAMS.L)
    t0 = time.perf_counter()
    res = simulate_plant_uncontrolled(REFERENCE_PARAMS, g, TimeGrid(N, 1.0), stationary_state(g.x))
    return res, time.perf_counter() - t0


@functools.lru_cache(maxsize=None)
def reference_control_run():
    g = Grid1D(201, REFERENCE_PARAMS.L)
    return run_control(REFERENCE_PARAMS, reference_kernel(), g, TimeGrid(2001, 10.0), stationary_state(g.x), stride=1)


@functools.lru_cache(maxsize=None)
def reference_observer_run():
    g = Grid1D(201, REFERENCE_PARAMS.L)
    return run_coupled(REFERENCE_PARAMS, reference_kernel(), g, TimeGrid(2001, 10.0), stationary_state(g.x))


# ---------------------------------------------------------------------------
# Criteria: each returns (ok, detail)
# ---------------------------------------------------------------------------

def criterion_1():
    t0 = time.perf_counter()
    worst = 0.0
    for r, want in TABLE.items():
        got = decay_rates(solve_kernel(REFERENCE_PARAMS.with_r(r)), convention="table").lambda_
        tol = 2e-2 if r == 1.0 else 1e-3
        worst = max(worst, abs(got - want) / tol)
    elapsed = time.perf_counter() - t0
    return worst <= 1 and elapsed < 60, f"max |err|/tol = {worst:.3g}, {elapsed:.1f} s"


def criterion_2():
    sol = reference_kernel()
    p = sol.params
    scale = 3 * p.beta / p.r
    bounded = all(scale * inc <= increment_bound(n, p) for n, inc in enumerate(sol.increments[1:], start=1))
    ok = sol.increments[-1] <= 1e-14 and sol.iterations <= 35 and bounded
    return ok, f"{sol.iterations} iterations, last increment {sol.increments[-1]:.2e}, bound respected: {bounded}"


def criterion_3():
    sol = reference_kernel()
    p = sol.params
    pk = kernel_p_from_k(sol)
    x = np.linspace(0, p.L, 200)
    L = np.full_like(x, p.L)
    res = max(
        np.max(np.abs(sol.k(x, x))),
        np.max(np.abs(sol.k(x, 0 * x))),
        np.max(np.abs(sol.k_x(x, x) - p.r * x / (3 * p.beta))),
        np.max(np.abs(pk.p(x, x))),
        np.max(np.abs(pk.p(L, x))),
        np.max(np.abs(pk.p_x(x, x) - p.r / (3 * p.beta) * (p.L - x))),
    )
    limit = 1e-10 * (1 + np.max(np.abs(sol.k_matrix(x))))
    return res <= limit, f"max residual {res:.2e} (limit {limit:.2e})"


def _norm_band(M, N, lo, hi):
    res, secs = stationary_run(M, N)
    q = res.norms / res.norms[0]
    return lo <= q.min() and q.max() <= hi, f"M={M}: ratio in [{q.min():.6f}, {q.max():.6f}], {secs:.1f} s"


def criterion_4():
    ok_full, full = _norm_band(1001, 5001, 0.98, 1.001)
    ok_ci, ci = _norm_band(201, 1001, 0.95, 1.005)
    return ok_full and ok_ci, f"{full}; {ci}"


def criterion_5():
    run = reference_control_run()
    sol = reference_kernel()
    lam = decay_rates(sol).lambda_
    lam_table = decay_rates(sol, convention="table").lambda_
    t = run.target.t
    ratio = np.max(bound_ratio(t, run.target.norms, lam))
    ratio_table = np.max(bound_ratio(t, run.target.norms, lam_table))
    slope = fit_decay_rate(run.plant.t, run.plant.norms, (1.0, 10.0))
    ok = ratio <= 1.05 and slope >= 0.5 * lam
    return ok, (
        f"bound ratio {ratio:.4f} (table-convention lambda: {ratio_table:.4f}), "
        f"plant slope {slope:.5f} vs 0.5*lambda {0.5 * lam:.5f}"
    )


def criterion_6():
    run = reference_observer_run()
    rates = decay_rates(reference_kernel())
    recomposed = np.max(np.abs(run.plant.frames - (run.observer.frames + run.error.frames)))
    err = fit_decay_rate(run.error.t, run.error.norms, (1.0, 10.0))
    obs = fit_decay_rate(run.observer.t, run.observer.norms, (1.0, 10.0))
    ok = recomposed == 0 and err >= 0.5 * rates.mu and err > obs
    return ok, f"recomposition {recomposed:.1e}, error rate {err:.4f} >= {0.5 * rates.mu:.4f}, observer rate {obs:.4f}"


def criterion_7():
    g = Grid1D(201, REFERENCE_PARAMS.L)
    U = build_upsilon(reference_kernel().k_matrix(g.x), g)
    rng = np.random.default_rng(7)
    dense = np.eye(g.M) - U
    trip = oracle = 0.0
    for _ in range(20):
        u = rng.standard_normal(g.M) + 1j * rng.standard_normal(g.M)
        w = apply_transform(U, u)
        v = invert_transform(U, w)
        trip = max(trip, np.max(np.abs(v - u)))
        oracle = max(oracle, np.max(np.abs(v - np.linalg.solve(dense, w))))
    return max(trip, oracle) <= 1e-10, f"round trip {trip:.2e}, dense oracle {oracle:.2e}"


def criterion_8():
    sol = reference_kernel()
    pk = kernel_p_from_k(sol)
    L = sol.params.L
    x = np.linspace(0, L, 1001)
    w = trapezoid_weights(x)
    px = np.sqrt(w @ np.abs(pk.p_x(np.full_like(x, L), x)) ** 2)
    ky = np.sqrt(w @ np.abs(sol.ky_at0(x)) ** 2)
    ok_bc, _ = criterion_3()
    diff = abs(px - ky)
    return diff <= 1e-12 and ok_bc, f"|norm difference| {diff:.1e}, norms {px:.10f}; boundary checks pass: {ok_bc}"


NEG_D = KernelParams(1.0, 0.0, -1.0, 0.0, 1.0)
ZERO_D = KernelParams(1.0, 3.0, -3.0, 0.0, 1.0)


def criterion_9():
    lc = critical_length(REFERENCE_PARAMS, 1, 2)
    h = np.array([hkl(k, l) for k in range(1, 51) for l in range(1, 51)])
    cert = max(repeated_root_certificate(p) for p in (REFERENCE_PARAMS, ZERO_D, NEG_D))
    ok = abs(lc - math.pi) <= 1e-12 and np.all(np.abs(h) < 1) and cert <= 1e-10
    return ok, f"|L(1,2) - pi| {abs(lc - math.pi):.1e}, max|H| {np.max(np.abs(h)):.6f}, certificate {cert:.1e}"


def exact_P_monomial(m, k, p):
    """P on s^m t^k in rational arithmetic; each output coefficient is purely real or purely imaginary."""
    b, a, d, r = (Fraction(v) for v in (p.beta, p.alpha, p.delta, p.r))
    raw = [
        (3 * b * m * k * (k - 1), False, m - 1, k - 2),
        (-b * k * (k - 1) * (k - 2), False, m, k - 3),
        (-a * k * (k - 1), True, m, k - 2),
        (2 * a * m * k, True, m - 1, k - 1),
        (-d * k, False, m, k - 1),
        (-r, False, m, k),
    ]
    out = {}
    for c, imag, i, j in raw:
        if c == 0 or i < 0 or j < 0:
            continue
        v = c / (3 * b) / ((i + 1) * (i + 2) * (j + 1))
        out[(i + 2, j + 1)] = complex(0, float(v)) if imag else complex(float(v), 0)
    return out


def criterion_10():
    # apply_P against exact rational arithmetic, up to the final roundings.
    worst = 0.0
    for p in (REFERENCE_PARAMS, KernelParams(1.5, -0.7, 2.5, 0.3, 2.0)):
        for m in range(8):
            for k in range(8):
                got = apply_P(BivariatePoly.monomial(m, k), p)
                want = BivariatePoly.from_terms(exact_P_monomial(m, k, p))
                n = max(got.size, want.size)
                a, b = got.padded(n), want.padded(n)
                nz = b != 0
                if np.any(a[~nz] != 0):
                    return False, f"spurious coefficient for s^{m} t^{k}"
                worst = max(worst, np.max(np.abs(a[nz] - b[nz]) / np.abs(b[nz])))
    ulps = worst / np.finfo(float).eps
    # Scalar CN amplification factor.
    cn = 0.0
    for z in (-1.0, -0.3 + 2j, 5j, -40 + 0.1j):
        got = CNStepper(np.array([[z]]), 0.01).step(np.array([1.0 + 0j]))[0]
        cn = max(cn, abs(got - scalar_cn_factor(0.01 * z)))
    # Discrete dissipation on the criterion-4 grid.
    res, _ = stationary_run(1001, 5001)
    growth = max_growth_per_time(res.t, res.norms)
    g = Grid1D(1001, REFERENCE_PARAMS.L)
    x = g.x
    c = np.random.default_rng(10).standard_normal(4) * (1 + 1j)
    u0 = sum(ci * np.sin((i + 1) * x / 2) ** 2 * np.sin(x) for i, ci in enumerate(c)) * (x - g.L)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", CompatibilityWarning)
        rand = simulate_plant_uncontrolled(REFERENCE_PARAMS, g, TimeGrid(5001, 1.0), u0)
    growth = max(growth, max_growth_per_time(rand.t, rand.norms))
    ok = ulps <= 4 and cn <= 4 * np.finfo(float).eps and growth <= 1e-3
    return ok, f"apply_P within {ulps:.1f} ulp of exact, CN factor error {cn:.1e}, max growth {growth:.1e}/unit time"


CRITERIA = {
    1: ("decay-rate table", criterion_1),
    2: ("kernel convergence", criterion_2),
    3: ("kernel boundary residuals", criterion_3),
    4: ("stationary counterexample", criterion_4),
    5: ("controlled decay", criterion_5),
    6: ("observer experiment", criterion_6),
    7: ("transform round trip", criterion_7),
    8: ("kernel relation identity", criterion_8),
    9: ("analysis formulas", criterion_9),
    10: ("property suite", criterion_10),
}


def evaluate(n):
    name, fn = CRITERIA[n]
    ok, detail = fn()
    line = f"[{'PASS' if ok else 'FAIL'}] {n:2d}. {name}: {detail}"
    ACCEPTANCE_LINES[f"{n:02d}"] = line
    print(line)
    return ok, line


@pytest.mark.parametrize("n", sorted(CRITERIA), ids=[CRITERIA[n][0].replace(" ", "_") for n in sorted(CRITERIA)])
def test_criterion(n):
    ok, line = evaluate(n)
    assert ok, line


if __name__ == "__main__":
    results = [evaluate(n)[0] for n in sorted(CRITERIA)]
    print(f"{sum(results)}/{len(results)} criteria pass")
