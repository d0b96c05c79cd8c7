"""Controller experiment: target simulation, transform inversion and plant reconstruction."""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import CompatibilityWarning, NonConvergence
from .fd import (
    BoundaryRows,
    CNStepper,
    Grid1D,
    TimeGrid,
    build_A,
    build_trace1,
    build_upsilon,
    frame_stride,
    l2_norm,
    neumann_row,
    trace1_at0,
    trace2_at0,
    trapezoid_weights,
)
from .kernel import KernelParams, KernelSolution

SUCCESSION_RTOL = 1e-12
SUCCESSION_MAX_SWEEPS = 200
BC_TOL = 1e-10
# One-sided Neumann residual of sampled smooth data is O(h^2); only gross violations warn.
NEUMANN_TOL = 1e-4


@dataclass
class SimulationResult:
    """Time series of a simulated field.

    ``t``/``norms``/``traces`` are sampled every step for directly simulated
    systems, and at the stored frame times for reconstructed ones.
    """

    t: np.ndarray
    norms: np.ndarray
    frame_t: np.ndarray
    frames: np.ndarray
    traces: np.ndarray | None = None
    traces2: np.ndarray | None = None
    meta: dict = field(default_factory=dict)

    @property
    def final(self) -> np.ndarray:
        return self.frames[-1]


@dataclass(frozen=True)
class GainSet:
    """Controller kernels ``k(L, .)`` and ``k_x(L, .)`` sampled on the grid."""

    h0_kernel: np.ndarray
    h1_kernel: np.ndarray

    @classmethod
    def from_kernel(cls, sol: KernelSolution, grid: Grid1D) -> "GainSet":
        x = grid.x
        return cls(sol.k_at_L(x), sol.kx_at_L(x))


def _boundary_violation(w, grid):
    scale = max(1.0, float(np.max(np.abs(w))))
    dirichlet = max(abs(w[0]), abs(w[-1])) / scale
    neumann = grid.h * float(abs(neumann_row(grid) @ w)) / scale
    return dirichlet, neumann


def check_compatible(w0, grid, name="initial datum"):
    """Warn when ``w0`` violates the homogeneous discrete boundary conditions.

    Returns True if compatible.  The first implicit step projects the state
    onto the constraint set, so incompatible data are still usable.
    """
    dirichlet, neumann = _boundary_violation(np.asarray(w0), grid)
    if dirichlet > BC_TOL or neumann > NEUMANN_TOL:
        warnings.warn(
            f"{name} violates the discrete boundary conditions "
            f"(dirichlet {dirichlet:.2e}, neumann {neumann:.2e}); "
            "the first implicit step projects it",
            CompatibilityWarning,
            stacklevel=3,
        )
        return False
    return True


def time_march(stepper, w0, grid, tgrid, stride=None, forcing=None, boundary=None, meta=None):
    """Run a CN stepper, recording norms and ``u_x(0)`` every step and frames every ``stride`` steps.

    ``forcing(n)`` returns the averaged source ``h/2 (f^n + f^{n+1})`` for
    step ``n -> n+1``; ``boundary(n, w)`` returns ``(g_left, g_right, g_neumann)``.
    Both one-sided traces ``u_x(0)`` and ``u_xx(0)`` are recorded.
    """
    N = tgrid.N
    stride = frame_stride(N, stride)
    w = np.array(w0, dtype=complex)
    weights = trapezoid_weights(grid)
    norms = np.empty(N)
    traces = np.empty(N, dtype=complex)
    traces2 = np.empty(N, dtype=complex)
    frames = [w.copy()]
    norms[0] = np.sqrt(np.abs(w) ** 2 @ weights)
    traces[0] = trace1_at0(w, grid)
    traces2[0] = trace2_at0(w, grid)
    for n in range(N - 1):
        f = forcing(n) if forcing is not None else None
        g = boundary(n, w) if boundary is not None else (0.0, 0.0, 0.0)
        w = stepper.step(w, f, *g)
        norms[n + 1] = np.sqrt(np.abs(w) ** 2 @ weights)
        traces[n + 1] = trace1_at0(w, grid)
        traces2[n + 1] = trace2_at0(w, grid)
        if (n + 1) % stride == 0:
            frames.append(w.copy())
    t = tgrid.t
    return SimulationResult(
        t=t,
        norms=norms,
        frame_t=t[::stride],
        frames=np.array(frames),
        traces=traces,
        traces2=traces2,
        meta=dict(meta or {}, stride=stride, M=grid.M, N=N, T=tgrid.T),
    )


def target_operator(params: KernelParams, sol: KernelSolution, grid: Grid1D, scheme="central"):
    """``R = -A + beta K_y Gamma``: right-hand side of the modified target system."""
    A = build_A(grid, params, scheme)
    ky = sol.ky_at0(grid.x)
    KG = ky[:, None] * build_trace1(grid)
    return -A + params.beta * KG


def simulate_target(
    params: KernelParams,
    sol: KernelSolution,
    grid: Grid1D,
    tgrid: TimeGrid,
    w0,
    stride=None,
    scheme="central",
) -> SimulationResult:
    """CN evolution of the target system with the trace source ``beta k_y(x,0) w_x(0,t)``."""
    w0 = np.asarray(w0, dtype=complex)
    check_compatible(w0, grid, "target initial datum")
    R = target_operator(params, sol, grid, scheme)
    stepper = CNStepper(R, tgrid.h, grid, BoundaryRows())
    return time_march(stepper, w0, grid, tgrid, stride, meta={"system": "target", "r": params.r})


def apply_transform(U: np.ndarray, u) -> np.ndarray:
    """``(I - Upsilon) u`` for a single frame or a stack of frames."""
    u = np.asarray(u, dtype=complex)
    return u - u @ U.T


def invert_transform(U: np.ndarray, w) -> np.ndarray:
    """Solve ``u - Upsilon u = w`` by succession ``v <- Upsilon w + Upsilon v``.

    Works on a single frame or a stack of frames (last axis = space).
    """
    w = np.asarray(w, dtype=complex)
    Uw = w @ U.T
    v = np.zeros_like(w)
    scale = 1.0 + np.max(np.abs(w)) if w.size else 1.0
    for sweep in range(1, SUCCESSION_MAX_SWEEPS + 1):
        v_new = Uw + v @ U.T
        diff = np.max(np.abs(v_new - v)) if w.size else 0.0
        v = v_new
        if diff <= SUCCESSION_RTOL * scale:
            return w + v
    raise NonConvergence(
        f"succession did not converge in {SUCCESSION_MAX_SWEEPS} sweeps", SUCCESSION_MAX_SWEEPS, diff
    )


def reconstruct_plant(target: SimulationResult, sol: KernelSolution, grid: Grid1D) -> SimulationResult:
    """Map stored target frames back to plant coordinates."""
    U = build_upsilon(sol.k_matrix(grid.x), grid)
    frames = invert_transform(U, target.frames)
    return SimulationResult(
        t=target.frame_t.copy(),
        norms=l2_norm(frames, grid),
        frame_t=target.frame_t.copy(),
        frames=frames,
        traces=trace1_at0(frames, grid),
        meta=dict(target.meta, system="plant"),
    )


def evaluate_controllers(gains: GainSet, u, grid: Grid1D):
    """Dirichlet and Neumann feedback ``(int k(L,y) u dy, int k_x(L,y) u dy)``."""
    w = trapezoid_weights(grid)
    u = np.asarray(u, dtype=complex)
    return (gains.h0_kernel * w) @ u.T, (gains.h1_kernel * w) @ u.T


def simulate_plant_uncontrolled(params: KernelParams, grid: Grid1D, tgrid: TimeGrid, u0, stride=None, scheme="central"):
    """Plant with ``h0 = h1 = 0`` (the damping parameter r is ignored)."""
    u0 = np.asarray(u0, dtype=complex)
    check_compatible(u0, grid, "plant initial datum")
    R = -build_A(grid, params, scheme, damping=False)
    stepper = CNStepper(R, tgrid.h, grid, BoundaryRows())
    return time_march(stepper, u0, grid, tgrid, stride, meta={"system": "plant-uncontrolled"})


def simulate_plant_closed_loop(
    params: KernelParams, sol: KernelSolution, grid: Grid1D, tgrid: TimeGrid, u0, stride=None, scheme="central"
):
    """Direct plant simulation with the feedback laws written into the boundary rows.

    Both controllers act implicitly: ``u_{M-1} = h0(u)`` and
    ``u_x(L) = h1(u)`` are imposed at the new time level.  This is a
    cross-check of the transform route, not the primary algorithm.
    """
    gains = GainSet.from_kernel(sol, grid)
    w = trapezoid_weights(grid)
    bc = BoundaryRows(right_row=gains.h0_kernel * w, neumann_extra=gains.h1_kernel * w)
    R = -build_A(grid, params, scheme, damping=False)
    stepper = CNStepper(R, tgrid.h, grid, bc)
    return time_march(stepper, np.asarray(u0, dtype=complex), grid, tgrid, stride, meta={"system": "plant-closed-loop"})


@dataclass
class ControlRun:
    target: SimulationResult
    plant: SimulationResult
    gains: GainSet
    upsilon: np.ndarray
    w0: np.ndarray


def run_control(params: KernelParams, sol: KernelSolution, grid: Grid1D, tgrid: TimeGrid, u0, stride=None, scheme="central"):
    """Full controller experiment: ``w0 = (I - Upsilon) u0``, target run, inversion."""
    u0 = np.asarray(u0, dtype=complex)
    U = build_upsilon(sol.k_matrix(grid.x), grid)
    w0 = apply_transform(U, u0)
    with warnings.catch_warnings():
        # w0(L) = u0(L) - h0(0) generally differs from zero.
        warnings.simplefilter("ignore", CompatibilityWarning)
        target = simulate_target(params, sol, grid, tgrid, w0, stride, scheme)
    frames = invert_transform(U, target.frames)
    plant = SimulationResult(
        t=target.frame_t.copy(),
        norms=l2_norm(frames, grid),
        frame_t=target.frame_t.copy(),
        frames=frames,
        traces=trace1_at0(frames, grid),
        meta=dict(target.meta, system="plant"),
    )
    return ControlRun(target, plant, GainSet.from_kernel(sol, grid), U, w0)
