"""Observer experiment: error system, target observer with trace forcing, recomposition."""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .control import (
    SimulationResult,
    apply_transform,
    check_compatible,
    invert_transform,
    target_operator,
    time_march,
)
from .errors import CompatibilityWarning, RateWarning
from .fd import (
    BoundaryRows,
    CNStepper,
    Grid1D,
    TimeGrid,
    build_A,
    build_upsilon,
    l2_norm,
    trace1_at0,
    trace1_row,
    trace2_at0,
    trace2_row,
    trapezoid_weights,
)
from .kernel import (
    TABLE_NODES,
    DecayRates,
    KernelParams,
    KernelSolution,
    ObserverKernel,
    decay_rates,
    observer_gains,
    projected_gains,
)


@dataclass(frozen=True)
class ObserverGains:
    """Output-injection gains ``p1 = -i b p_y(x,0) + a p(x,0)``, ``p2 = i b p(x,0)`` on a grid."""

    p1: np.ndarray
    p2: np.ndarray

    @classmethod
    def from_kernel(cls, sol: KernelSolution, grid: Grid1D) -> "ObserverGains":
        p1, p2 = observer_gains(sol, grid.x)
        return cls(p1, p2)

    @classmethod
    def zero(cls, grid: Grid1D) -> "ObserverGains":
        z = np.zeros(grid.M, dtype=complex)
        return cls(z, z.copy())


def error_operator(params: KernelParams, gains: ObserverGains, grid: Grid1D, scheme="central"):
    """``R = -A0 + i (p1 gamma1^T + p2 gamma2^T)`` for the error system (no damping)."""
    A0 = build_A(grid, params, scheme, damping=False)
    rank_two = np.outer(gains.p1, trace1_row(grid)) + np.outer(gains.p2, trace2_row(grid))
    return -A0 + 1j * rank_two


def simulate_error(
    params: KernelParams,
    gains: ObserverGains,
    grid: Grid1D,
    tgrid: TimeGrid,
    e0,
    stride=None,
    scheme="central",
) -> SimulationResult:
    """CN evolution of the error ``u - u_hat`` under output injection.

    The trace-coupled rank-two term sits in ``R`` and so enters the implicit
    and explicit matrices with weight 1/2 each.  Both traces are recorded.
    """
    e0 = np.asarray(e0, dtype=complex)
    check_compatible(e0, grid, "error initial datum")
    R = error_operator(params, gains, grid, scheme)
    stepper = CNStepper(R, tgrid.h, grid, BoundaryRows())
    return time_march(stepper, e0, grid, tgrid, stride, meta={"system": "error", "r": params.r})


def simulate_error_target(
    params: KernelParams,
    sol: KernelSolution,
    grid: Grid1D,
    tgrid: TimeGrid,
    e0,
    stride=None,
    scheme="central",
) -> SimulationResult:
    """Error computed through the damped target with feedback Neumann condition.

    Solves ``w_t = -A w`` with ``w(0) = w(L) = 0`` and
    ``w_x(L) = int p_x(L, y) w dy`` (imposed implicitly), starting from
    ``(I - Upsilon_p)^{-1} e0``, and maps every stored frame back through
    ``(I - Upsilon_p)``.  Independent cross-check of :func:`simulate_error`.
    """
    pk = ObserverKernel(sol)
    Up = build_upsilon(pk.p_matrix(grid.x), grid)
    w0 = invert_transform(Up, np.asarray(e0, dtype=complex))
    bc = BoundaryRows(neumann_extra=pk.px_at_L(grid.x) * trapezoid_weights(grid))
    stepper = CNStepper(-build_A(grid, params, scheme), tgrid.h, grid, bc)
    target = time_march(stepper, w0, grid, tgrid, stride, meta={"system": "error-target", "r": params.r})
    frames = apply_transform(Up, target.frames)
    return SimulationResult(
        t=target.frame_t.copy(),
        norms=l2_norm(frames, grid),
        frame_t=target.frame_t.copy(),
        frames=frames,
        traces=trace1_at0(frames, grid),
        traces2=trace2_at0(frames, grid),
        meta=dict(target.meta, system="error-via-target"),
    )


def simulate_target_observer(
    params: KernelParams,
    sol: KernelSolution,
    projected: tuple,
    traces: tuple,
    grid: Grid1D,
    tgrid: TimeGrid,
    w0,
    stride=None,
    scheme="central",
) -> SimulationResult:
    """Target observer driven by the error traces.

    ``projected`` is ``(Pi1, Pi2)`` with ``Pi_j = (I - Upsilon_k) p_j`` and
    ``traces`` the per-step ``(u~_x(0, t_n), u~_xx(0, t_n))`` series.  The
    source ``-i (Pi1 tr1 + Pi2 tr2)`` is averaged over each step.
    """
    pi1, pi2 = (np.asarray(v, dtype=complex) for v in projected)
    tr1, tr2 = (np.asarray(v, dtype=complex) for v in traces)
    if tr1.shape != (tgrid.N,) or tr2.shape != (tgrid.N,):
        raise ValueError("trace series must have one entry per time level")
    w0 = np.asarray(w0, dtype=complex)
    check_compatible(w0, grid, "observer target initial datum")
    R = target_operator(params, sol, grid, scheme)
    stepper = CNStepper(R, tgrid.h, grid, BoundaryRows())
    half = 0.5 * tgrid.h

    def forcing(n):
        a1 = tr1[n] + tr1[n + 1]
        a2 = tr2[n] + tr2[n + 1]
        return -1j * half * (pi1 * a1 + pi2 * a2)

    return time_march(stepper, w0, grid, tgrid, stride, forcing=forcing, meta={"system": "observer-target", "r": params.r})


@dataclass
class CoupledRun:
    error: SimulationResult
    observer: SimulationResult
    plant: SimulationResult
    rates: DecayRates
    observer_target: SimulationResult | None = None


def run_coupled(
    params: KernelParams,
    sol: KernelSolution,
    grid: Grid1D,
    tgrid: TimeGrid,
    u0,
    uhat0=None,
    stride=None,
    scheme="central",
    rates: DecayRates | None = None,
) -> CoupledRun:
    """Error run, observer-target run, inversion of the observer, and ``u = u_hat + u~``.

    Emits :class:`RateWarning` when one of lambda, mu, nu is not positive.
    """
    u0 = np.asarray(u0, dtype=complex)
    uhat0 = np.zeros_like(u0) if uhat0 is None else np.asarray(uhat0, dtype=complex)
    if rates is None:
        rates = decay_rates(sol, n_nodes=TABLE_NODES)
    if not rates.all_positive:
        warnings.warn(
            f"non-positive decay rate(s): {', '.join(rates.nonpositive)}", RateWarning, stacklevel=2
        )

    gains = ObserverGains.from_kernel(sol, grid)
    error = simulate_error(params, gains, grid, tgrid, u0 - uhat0, stride, scheme)

    Uk = build_upsilon(sol.k_matrix(grid.x), grid)
    what0 = apply_transform(Uk, uhat0)
    with warnings.catch_warnings():
        # (I - Upsilon_k) u_hat0 need not vanish at x = L.
        warnings.simplefilter("ignore", CompatibilityWarning)
        obs_target = simulate_target_observer(
            params, sol, projected_gains(sol, grid.x), (error.traces, error.traces2), grid, tgrid, what0, stride, scheme
        )
    uhat = invert_transform(Uk, obs_target.frames)
    observer = SimulationResult(
        t=obs_target.frame_t.copy(),
        norms=l2_norm(uhat, grid),
        frame_t=obs_target.frame_t.copy(),
        frames=uhat,
        traces=trace1_at0(uhat, grid),
        traces2=trace2_at0(uhat, grid),
        meta=dict(obs_target.meta, system="observer"),
    )
    frames = uhat + error.frames
    plant = SimulationResult(
        t=observer.frame_t.copy(),
        norms=l2_norm(frames, grid),
        frame_t=observer.frame_t.copy(),
        frames=frames,
        traces=trace1_at0(frames, grid),
        traces2=trace2_at0(frames, grid),
        meta=dict(obs_target.meta, system="plant"),
    )
    return CoupledRun(error, observer, plant, rates, obs_target)


def h3_surrogate(frames, grid: Grid1D) -> np.ndarray:
    """Discrete ``H^3`` norm: L^2 norms of the field and its first three differences.

    Differences are central in the interior with second-order one-sided
    closures at the ends.
    """
    u = np.asarray(frames, dtype=complex)
    total = l2_norm(u, grid) ** 2
    d = u
    for _ in range(3):
        d = np.gradient(d, grid.h, axis=-1, edge_order=2)
        total = total + l2_norm(d, grid) ** 2
    return np.sqrt(total)


@dataclass(frozen=True)
class H3Monitor:
    t: np.ndarray
    h3: np.ndarray
    trace1: np.ndarray
    trace2: np.ndarray


def observer_h3_monitor(error: SimulationResult, grid: Grid1D) -> H3Monitor:
    """Per stored frame: H^3 surrogate and the moduli of both traces at x = 0."""
    frames = error.frames
    return H3Monitor(
        t=error.frame_t.copy(),
        h3=np.atleast_1d(h3_surrogate(frames, grid)),
        trace1=np.abs(trace1_at0(frames, grid)),
        trace2=np.abs(trace2_at0(frames, grid)),
    )
