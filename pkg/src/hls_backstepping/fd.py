"""Finite-difference operators, discrete traces, trapezoid Volterra matrices and CN stepping.

Grid nodes are ``x_m = m h`` for ``m = 0..M-1`` (zero-based).  Rows that
cannot hold an interior stencil are left zero in the difference matrices;
the time steppers overwrite them with boundary conditions:

* row 0      : Dirichlet ``w_0 = g_left``
* row M-2    : one-sided Neumann ``(w_{M-3} - 4 w_{M-2} + 3 w_{M-1}) / 2h = g_neumann``
* row M-1    : Dirichlet ``w_{M-1} = g_right``
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import ParameterError, SingularSystem

PIVOT_RTOL = 1e-13


@dataclass(frozen=True)
class Grid1D:
    M: int
    L: float

    def __post_init__(self):
        if int(self.M) != self.M or self.M < 4:
            raise ParameterError(f"M must be an integer >= 4, got {self.M}")
        if not self.L > 0:
            raise ParameterError(f"L must be positive, got {self.L}")
        object.__setattr__(self, "M", int(self.M))
        object.__setattr__(self, "L", float(self.L))

    @property
    def h(self) -> float:
        return self.L / (self.M - 1)

    @property
    def x(self) -> np.ndarray:
        return np.linspace(0.0, self.L, self.M)


@dataclass(frozen=True)
class TimeGrid:
    N: int
    T: float

    def __post_init__(self):
        if int(self.N) != self.N or self.N < 2:
            raise ParameterError(f"N must be an integer >= 2, got {self.N}")
        if not self.T > 0:
            raise ParameterError(f"T must be positive, got {self.T}")
        object.__setattr__(self, "N", int(self.N))
        object.__setattr__(self, "T", float(self.T))

    @property
    def h(self) -> float:
        return self.T / (self.N - 1)

    @property
    def t(self) -> np.ndarray:
        return np.linspace(0.0, self.T, self.N)


def _grid(grid):
    if isinstance(grid, Grid1D):
        return grid
    raise ParameterError("expected a Grid1D")


# ---------------------------------------------------------------------------
# Difference operators
# ---------------------------------------------------------------------------

def build_delta(grid: Grid1D) -> np.ndarray:
    """Central first difference ``(u_{m+1} - u_{m-1}) / 2h`` on rows 1..M-2."""
    grid = _grid(grid)
    M, h = grid.M, grid.h
    D = np.zeros((M, M))
    m = np.arange(1, M - 1)
    D[m, m - 1] = -0.5 / h
    D[m, m + 1] = 0.5 / h
    return D


def build_delta2(grid: Grid1D) -> np.ndarray:
    """Second difference ``(u_{m+1} - 2 u_m + u_{m-1}) / h^2`` on rows 1..M-2."""
    grid = _grid(grid)
    M, h = grid.M, grid.h
    D = np.zeros((M, M))
    m = np.arange(1, M - 1)
    D[m, m - 1] = 1.0 / h**2
    D[m, m] = -2.0 / h**2
    D[m, m + 1] = 1.0 / h**2
    return D


def build_delta3(grid: Grid1D, scheme: str = "central") -> np.ndarray:
    """Third difference on rows 1..M-3.

    ``scheme="central"``: ``(u_{m+2} - 2u_{m+1} + 2u_{m-1} - u_{m-2}) / 2h^3``,
    second order, with the forward-biased composed stencil on row 1 where
    the central one does not fit.

    ``scheme="composed"``: forward-backward composition
    ``(u_{m+2} - 3u_{m+1} + 3u_m - u_{m-1}) / h^3`` on every row.  It is only
    first order accurate and adds numerical damping ``~ h k^4 / 2`` to a
    Fourier mode of wavenumber k.
    """
    grid = _grid(grid)
    M, h = grid.M, grid.h
    D = np.zeros((M, M))
    composed = np.array([-1.0, 3.0, -3.0, 1.0]) / h**3
    if scheme == "composed":
        for m in range(1, M - 2):
            D[m, m - 1 : m + 3] = composed
    elif scheme == "central":
        D[1, 0:4] = composed
        central = np.array([-1.0, 2.0, 0.0, -2.0, 1.0]) / (2.0 * h**3)
        for m in range(2, M - 2):
            D[m, m - 2 : m + 3] = central
    else:
        raise ParameterError(f"unknown third-difference scheme {scheme!r}")
    return D


def build_A(grid: Grid1D, params, scheme: str = "central", damping: bool = True) -> np.ndarray:
    """``beta D3 - i alpha D2 + delta D1 + r I`` (``r`` omitted when ``damping=False``)."""
    A = (
        params.beta * build_delta3(grid, scheme)
        - 1j * params.alpha * build_delta2(grid)
        + params.delta * build_delta(grid)
    )
    if damping:
        A = A + params.r * np.eye(grid.M)
    return A


# ---------------------------------------------------------------------------
# Boundary traces at x = 0
# ---------------------------------------------------------------------------

def trace1_row(grid: Grid1D) -> np.ndarray:
    """Weights of the one-sided second order ``u_x(0)`` approximation."""
    row = np.zeros(grid.M)
    row[:3] = np.array([-3.0, 4.0, -1.0]) / (2.0 * grid.h)
    return row


def trace2_row(grid: Grid1D) -> np.ndarray:
    """Weights of the one-sided ``u_xx(0)`` approximation."""
    row = np.zeros(grid.M)
    row[:4] = np.array([2.0, -5.0, 4.0, -1.0]) / grid.h**2
    return row


def build_trace1(grid: Grid1D) -> np.ndarray:
    """``Gamma``: the first-trace row replicated in every row."""
    return np.tile(trace1_row(grid), (grid.M, 1))


def trace1_at0(u, grid: Grid1D):
    u = np.asarray(u)
    return (-3.0 * u[..., 0] + 4.0 * u[..., 1] - u[..., 2]) / (2.0 * grid.h)


def trace2_at0(u, grid: Grid1D):
    u = np.asarray(u)
    return (2.0 * u[..., 0] - 5.0 * u[..., 1] + 4.0 * u[..., 2] - u[..., 3]) / grid.h**2


def neumann_row(grid: Grid1D) -> np.ndarray:
    """Weights of the one-sided ``u_x(L)`` approximation."""
    row = np.zeros(grid.M)
    row[-3:] = np.array([1.0, -4.0, 3.0]) / (2.0 * grid.h)
    return row


# ---------------------------------------------------------------------------
# Quadrature
# ---------------------------------------------------------------------------

def trapezoid_weights(grid_or_x) -> np.ndarray:
    x = grid_or_x.x if isinstance(grid_or_x, Grid1D) else np.asarray(grid_or_x, dtype=float)
    w = np.full(x.size, x[1] - x[0])
    w[0] *= 0.5
    w[-1] *= 0.5
    return w


def build_upsilon(kernel, grid_or_x) -> np.ndarray:
    """Trapezoid discretisation of ``u -> int_0^x k(x, y) u(y) dy``.

    ``kernel`` is either a callable ``k(x, y)`` (vectorised) or a precomputed
    lower-triangular matrix ``K[m, j] = k(x_m, x_j)``.  Row ``m`` carries
    weights ``h * (1/2, 1, ..., 1, 1/2)`` over nodes ``0..m``; row 0 is zero.
    """
    x = grid_or_x.x if isinstance(grid_or_x, Grid1D) else np.asarray(grid_or_x, dtype=float)
    M = x.size
    h = x[1] - x[0]
    if callable(kernel):
        m, j = np.meshgrid(np.arange(M), np.arange(M), indexing="ij")
        low = j <= m
        K = np.zeros((M, M), dtype=complex)
        K[low] = kernel(x[m[low]], x[j[low]])
    else:
        K = np.asarray(kernel, dtype=complex)
        if K.shape != (M, M):
            raise ParameterError("kernel matrix shape does not match grid")
    W = np.tril(np.full((M, M), h))
    idx = np.arange(M)
    W[idx, idx] = 0.5 * h
    W[:, 0] *= 0.5
    W[0, 0] = 0.0
    return np.tril(K) * W


def l2_norm(u, grid_or_x) -> np.ndarray | float:
    """Trapezoid L^2 norm along the last axis."""
    w = trapezoid_weights(grid_or_x)
    out = np.sqrt(np.abs(np.asarray(u)) ** 2 @ w)
    return float(out) if np.ndim(out) == 0 else out


# ---------------------------------------------------------------------------
# Linear solves and Crank-Nicolson stepping
# ---------------------------------------------------------------------------

class LUSolver:
    """Dense LU with partial pivoting, factorised once and reused."""

    def __init__(self, B: np.ndarray):
        B = np.asarray(B, dtype=complex)
        norm = np.max(np.sum(np.abs(B), axis=1))
        with warnings.catch_warnings():
            # Exactly singular input is reported below as SingularSystem.
            warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
            self.lu, self.piv = scipy.linalg.lu_factor(B, check_finite=True)
        pivots = np.abs(np.diag(self.lu))
        if norm == 0 or np.min(pivots) < PIVOT_RTOL * norm:
            raise SingularSystem(
                f"smallest pivot {np.min(pivots):.3e} below {PIVOT_RTOL:g} * ||B||_inf = {PIVOT_RTOL * norm:.3e}"
            )

    def solve(self, b):
        return scipy.linalg.lu_solve((self.lu, self.piv), b, check_finite=False)


@dataclass
class BoundaryRows:
    """Boundary rows written into the implicit matrix (explicit rows are zeroed).

    ``right_row`` / ``neumann_extra`` allow feedback boundary conditions:
    the row at ``M-1`` becomes ``e_{M-1} - right_row`` and the Neumann row
    becomes ``neumann_row - neumann_extra``.
    """

    right_row: np.ndarray | None = None
    neumann_extra: np.ndarray | None = None

    def apply(self, implicit, explicit, grid):
        M = grid.M
        for B in (implicit, explicit):
            B[[0, M - 2, M - 1], :] = 0.0
        implicit[0, 0] = 1.0
        implicit[M - 1, M - 1] = 1.0
        if self.right_row is not None:
            implicit[M - 1] -= self.right_row
        implicit[M - 2] = neumann_row(grid)
        if self.neumann_extra is not None:
            implicit[M - 2] -= self.neumann_extra

    @property
    def homogeneous(self):
        return self.right_row is None and self.neumann_extra is None


class CNStepper:
    """Crank-Nicolson stepping for ``w_t = R w + f(t)`` with boundary rows.

    Solves ``(I - h/2 R) w^{n+1} = (I + h/2 R) w^n + h/2 (f^n + f^{n+1}) + g``
    where boundary rows are replaced by constraints with right-hand side
    ``g`` (``g_left`` at row 0, ``g_neumann`` at row M-2, ``g_right`` at
    row M-1).
    """

    def __init__(self, R: np.ndarray, dt: float, grid: Grid1D | None = None, bc: BoundaryRows | None = None):
        R = np.asarray(R, dtype=complex)
        M = R.shape[0]
        I = np.eye(M, dtype=complex)
        self.implicit = I - 0.5 * dt * R
        self.explicit = I + 0.5 * dt * R
        self.grid = grid
        self.bc = bc
        self.dt = dt
        if bc is not None:
            if grid is None:
                raise ParameterError("boundary rows need a grid")
            bc.apply(self.implicit, self.explicit, grid)
        self.solver = LUSolver(self.implicit)

    @classmethod
    def from_matrices(cls, implicit, explicit):
        self = cls.__new__(cls)
        self.implicit = np.asarray(implicit, dtype=complex)
        self.explicit = np.asarray(explicit, dtype=complex)
        self.grid = None
        self.bc = None
        self.dt = None
        self.solver = LUSolver(self.implicit)
        return self

    def step(self, w, forcing=None, g_left=0.0, g_right=0.0, g_neumann=0.0):
        rhs = self.explicit @ w
        if forcing is not None:
            rhs = rhs + forcing
        if self.bc is not None:
            M = self.grid.M
            rhs[0] = g_left
            rhs[M - 2] = g_neumann
            rhs[M - 1] = g_right
        w_new = self.solver.solve(rhs)
        if self.bc is not None:
            self._reimpose(w_new, g_left, g_right, g_neumann)
        return w_new

    def _reimpose(self, w, g_left, g_right, g_neumann):
        w[0] = g_left
        if self.bc.right_row is None:
            w[-1] = g_right
        if self.bc.homogeneous:
            # (w_{M-3} - 4 w_{M-2} + 3 w_{M-1}) / 2h = g
            w[-2] = (w[-3] + 3.0 * w[-1] - 2.0 * self.grid.h * g_neumann) / 4.0


def cn_step(implicit, explicit, w):
    """One solve of ``implicit @ w_new = explicit @ w``."""
    return CNStepper.from_matrices(implicit, explicit).step(np.asarray(w, dtype=complex))


def frame_stride(N: int, stride: int | None = None) -> int:
    """Largest divisor of ``N-1`` not exceeding the requested stride (default ``(N-1)/500``)."""
    n = N - 1
    if stride is None:
        stride = max(1, n // 500)
    stride = max(1, min(int(stride), n))
    while n % stride:
        stride -= 1
    return stride
