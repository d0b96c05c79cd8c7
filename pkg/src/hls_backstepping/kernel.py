"""Backstepping kernel for the right-endpoint controlled higher-order Schrödinger equation.

The kernel ``k(x, y)`` lives on the triangle ``0 <= y <= x <= L``.  Under
``s = x - y, t = y`` it becomes ``G(s, t)``, the fixed point of

    G = (r / 3 beta) s t + P G,

where ``P`` integrates the differential expression ``D`` once in t and twice
in s.  Starting from a polynomial, every iterate is a polynomial, so the
iteration is carried out exactly in coefficient space.

The observer kernel ``p(x, y)`` is the reflection ``k(L - y, L - x)`` of the
same kernel (same damping parameter r).
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, NonConvergence, ParameterError
from .poly import BivariatePoly, triangle_grid

DEFAULT_TOL = 1e-14
DEFAULT_MAX_ITER = 60
COLLOCATION_NODES = 101


@dataclass(frozen=True)
class KernelParams:
    """Plant coefficients ``beta, alpha, delta``, damping ``r`` and length ``L``."""

    beta: float
    alpha: float
    delta: float
    r: float
    L: float

    def __post_init__(self):
        for name in ("beta", "alpha", "delta", "r", "L"):
            v = getattr(self, name)
            if not np.isfinite(v):
                raise ParameterError(f"{name} must be finite, got {v!r}")
            object.__setattr__(self, name, float(v))
        if self.beta <= 0:
            raise ParameterError(f"beta must be positive, got {self.beta}")
        if self.L <= 0:
            raise ParameterError(f"L must be positive, got {self.L}")
        if self.r < 0:
            raise ParameterError(f"r must be nonnegative, got {self.r}")

    def with_r(self, r: float) -> "KernelParams":
        return KernelParams(self.beta, self.alpha, self.delta, r, self.L)


REFERENCE_PARAMS = KernelParams(beta=1.0, alpha=2.0, delta=8.0, r=0.05, L=math.pi)


# ---------------------------------------------------------------------------
# Differential / integral operators on polynomials
# ---------------------------------------------------------------------------

def apply_D(G: BivariatePoly, p: KernelParams) -> BivariatePoly:
    """``(1/3b)[b(3 G_tts - G_ttt) - i a (G_tt - 2 G_ts) - d G_t - r G]``."""
    Gt = G.diff_t()
    Gtt = Gt.diff_t()
    Gts = Gt.diff_s()
    Gtts = Gtt.diff_s()
    Gttt = Gtt.diff_t()
    out = (
        p.beta * (3.0 * Gtts - Gttt)
        - 1j * p.alpha * (Gtt - 2.0 * Gts)
        - p.delta * Gt
        - p.r * G
    )
    return (1.0 / (3.0 * p.beta)) * out


def apply_P(G: BivariatePoly, p: KernelParams) -> BivariatePoly:
    """Integrate ``D G`` twice in s (from 0) and once in t (from 0)."""
    return apply_D(G, p).int_s().int_s().int_t().trimmed()


def increment_bound(n: int, p: KernelParams) -> float:
    """Sup-norm bound ``6^n M^n L^(3n+2) / (n+1)!`` on the n-th normalised increment."""
    M = max(1.0, abs(p.alpha) / p.beta, abs(p.delta) / p.beta, p.r / p.beta)
    log_b = n * math.log(6.0 * M) + (3 * n + 2) * math.log(p.L) - math.lgamma(n + 2)
    return math.exp(min(log_b, 700.0))


# ---------------------------------------------------------------------------
# Kernel solution
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class KernelSolution:
    """Converged kernel ``G(s, t)`` with iteration diagnostics.

    ``increments[n]`` is the collocation sup-norm of ``G^{n+1} - G^n``
    (``increments[0]`` belongs to the seed ``(r/3b) s t``).
    """

    G: BivariatePoly
    iterations: int
    residual: float
    params: KernelParams
    tol: float
    increments: tuple = field(default=())

    # -- derived polynomials (cached) ---------------------------------
    @functools.cached_property
    def Gs(self) -> BivariatePoly:
        return self.G.diff_s()

    @functools.cached_property
    def Gt(self) -> BivariatePoly:
        return self.G.diff_t()

    # -- k and its first derivatives -----------------------------------
    def _check(self, x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        eps = 1e-12 * self.params.L
        if np.any(y < -eps) or np.any(y > x + eps) or np.any(x > self.params.L + eps):
            raise DomainError("kernel evaluated outside 0 <= y <= x <= L")
        s = np.clip(x - y, 0.0, None)
        t = np.clip(y, 0.0, None)
        return s, t

    def k(self, x, y):
        s, t = self._check(x, y)
        return self.G(s, t)

    def k_x(self, x, y):
        s, t = self._check(x, y)
        return self.Gs(s, t)

    def k_y(self, x, y):
        s, t = self._check(x, y)
        return self.Gt(s, t) - self.Gs(s, t)

    def __call__(self, x, y):
        return self.k(x, y)

    def k_matrix(self, x: np.ndarray) -> np.ndarray:
        """``K[m, j] = k(x_m, x_j)`` for ``j <= m`` on a uniform grid, zero above the diagonal."""
        x = np.asarray(x, dtype=float)
        n = x.size
        h = x[1] - x[0]
        lattice = self.G.on_lattice(h, n)  # lattice[i, j] = G(i h, j h)
        m, j = np.meshgrid(np.arange(n), np.arange(n), indexing="ij")
        out = np.zeros((n, n), dtype=complex)
        low = j <= m
        out[low] = lattice[(m - j)[low], j[low]]
        return out

    # -- boundary traces used by controllers and rates ----------------
    def ky_at0(self, x):
        """``k_y(x, 0)``; equals ``G_t(x, 0)`` because ``G_s(s, 0) = 0``."""
        x = np.asarray(x, dtype=float)
        return self.k_y(x, np.zeros_like(x))

    def k_at_L(self, y):
        """``k(L, y)``, the Dirichlet controller kernel."""
        y = np.asarray(y, dtype=float)
        return self.k(np.full_like(y, self.params.L), y)

    def kx_at_L(self, y):
        """``k_x(L, y)``, the Neumann controller kernel."""
        y = np.asarray(y, dtype=float)
        return self.k_x(np.full_like(y, self.params.L), y)


class ObserverKernel:
    """``p(x, y) = k(L - y, L - x)`` built from a solved controller kernel."""

    def __init__(self, sol: KernelSolution):
        self.sol = sol
        self.params = sol.params

    def _reflect(self, x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        L = self.params.L
        eps = 1e-12 * L
        if np.any(y < -eps) or np.any(y > x + eps) or np.any(x > L + eps):
            raise DomainError("kernel evaluated outside 0 <= y <= x <= L")
        return L - y, L - x

    def p(self, x, y):
        X, Y = self._reflect(x, y)
        return self.sol.k(X, Y)

    def p_x(self, x, y):
        X, Y = self._reflect(x, y)
        return -self.sol.k_y(X, Y)

    def p_y(self, x, y):
        X, Y = self._reflect(x, y)
        return -self.sol.k_x(X, Y)

    def __call__(self, x, y):
        return self.p(x, y)

    def p_matrix(self, x: np.ndarray) -> np.ndarray:
        """``P[m, j] = p(x_m, x_j)`` on a uniform grid, zero above the diagonal."""
        K = self.sol.k_matrix(x)
        # p(x_m, x_j) = k(x_{n-1-j}, x_{n-1-m})
        return K[::-1, ::-1].T.copy()

    def p_at0(self, x):
        x = np.asarray(x, dtype=float)
        return self.p(x, np.zeros_like(x))

    def py_at0(self, x):
        x = np.asarray(x, dtype=float)
        return self.p_y(x, np.zeros_like(x))

    def px_at_L(self, y):
        y = np.asarray(y, dtype=float)
        return self.p_x(np.full_like(y, self.params.L), y)


def kernel_p_from_k(sol: KernelSolution) -> ObserverKernel:
    """Observer kernel from the controller kernel solved with the same r."""
    return ObserverKernel(sol)


def _validate_params(p):
    if not isinstance(p, KernelParams):
        raise ParameterError("expected KernelParams")
    return p


@functools.lru_cache(maxsize=64)
def solve_kernel(p: KernelParams, tol: float = DEFAULT_TOL, max_iter: int = DEFAULT_MAX_ITER) -> KernelSolution:
    """Successive approximation ``G^{n+1} = G^1 + P G^n`` from ``G^1 = (r/3b) s t``.

    Stops at the first iterate whose increment, measured in sup-norm on a
    101 x 101 collocation lattice of the triangle, is at most ``tol``.
    """
    _validate_params(p)
    if not tol > 0:
        raise ParameterError("tol must be positive")
    if max_iter < 1:
        raise ParameterError("max_iter must be >= 1")

    s, t = triangle_grid(p.L, COLLOCATION_NODES)
    seed = BivariatePoly.monomial(1, 1, p.r / (3.0 * p.beta))
    G = seed
    increments = [seed.sup_norm(s, t)]
    residual = np.inf
    for it in range(1, max_iter + 1):
        G_next = seed + apply_P(G, p)
        residual = (G_next - G).sup_norm(s, t)
        increments.append(residual)
        G = G_next
        if residual <= tol:
            return KernelSolution(G, it, residual, p, tol, tuple(increments))
    raise NonConvergence(
        f"kernel iteration did not reach tol={tol:g} in {max_iter} iterations (residual {residual:.3e})",
        iterations=max_iter,
        residual=residual,
    )


def fixed_point_residual(sol: KernelSolution, n: int = COLLOCATION_NODES) -> float:
    """Sup over the collocation lattice of ``|G - ((r/3b) s t + P G)|``."""
    p = sol.params
    s, t = triangle_grid(p.L, n)
    rhs = BivariatePoly.monomial(1, 1, p.r / (3.0 * p.beta)) + apply_P(sol.G, p)
    return (sol.G - rhs).sup_norm(s, t)


def trace_vectors(sol: KernelSolution, x) -> dict:
    """Sample the six boundary traces that feed controllers, gains and rates."""
    x = np.asarray(x, dtype=float)
    pk = ObserverKernel(sol)
    return {
        "ky_0": sol.ky_at0(x),
        "k_L": sol.k_at_L(x),
        "kx_L": sol.kx_at_L(x),
        "p_0": pk.p_at0(x),
        "py_0": pk.py_at0(x),
        "px_L": pk.px_at_L(x),
    }


# ---------------------------------------------------------------------------
# Decay rates
# ---------------------------------------------------------------------------

EPS_GRID = (1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6)
TABLE_NODES = 1001


@dataclass(frozen=True)
class DecayRates:
    """Closed-form exponential rates of the target, error and observer systems.

    ``convention`` is ``"l2"`` for the L^2 (trapezoid) norms of the rate
    formulas, or ``"table"`` for the node-sum convention that reproduces the
    reference decay-rate table (twice the rate, unweighted sum over nodes).
    """

    lambda_: float
    mu: float
    nu: float
    epsilon: float
    convention: str = "l2"

    @property
    def all_positive(self) -> bool:
        return self.lambda_ > 0 and self.mu > 0 and self.nu > 0

    @property
    def nonpositive(self) -> tuple:
        return tuple(n for n, v in (("lambda", self.lambda_), ("mu", self.mu), ("nu", self.nu)) if v <= 0)


def _squared_norm(f: np.ndarray, x: np.ndarray, convention: str) -> float:
    a = np.abs(f) ** 2
    if convention == "l2":
        return float(np.trapezoid(a, x))
    if convention == "table":
        return float(np.sum(a))
    raise ParameterError(f"unknown rate convention {convention!r}")


def _rate(p: KernelParams, sq: float, convention: str) -> float:
    factor = 2.0 if convention == "table" else 1.0
    return factor * p.beta * (p.r / p.beta - sq / 2.0)


def observer_gains(sol: KernelSolution, x) -> tuple:
    """Output-injection gains ``p1 = -i b p_y(x,0) + a p(x,0)`` and ``p2 = i b p(x,0)``."""
    pk = ObserverKernel(sol)
    b, a = sol.params.beta, sol.params.alpha
    p0 = pk.p_at0(x)
    p1 = -1j * b * pk.py_at0(x) + a * p0
    p2 = 1j * b * p0
    return p1, p2


def projected_gains(sol: KernelSolution, x) -> tuple:
    """``Pi_j = (I - Upsilon_k) p_j`` with trapezoid Upsilon on the grid ``x``."""
    from .fd import build_upsilon

    x = np.asarray(x, dtype=float)
    U = build_upsilon(sol.k_matrix(x), x)
    p1, p2 = observer_gains(sol, x)
    return p1 - U @ p1, p2 - U @ p2


def lambda_rate(sol: KernelSolution, n_nodes: int = TABLE_NODES, convention: str = "l2") -> float:
    """Target decay rate ``b (r/b - ||k_y(., 0)||^2 / 2)``."""
    p = sol.params
    x = np.linspace(0.0, p.L, n_nodes)
    return _rate(p, _squared_norm(sol.ky_at0(x), x, convention), convention)


def decay_rates(
    sol: KernelSolution,
    epsilon: float | None = None,
    n_nodes: int = TABLE_NODES,
    convention: str = "l2",
) -> DecayRates:
    """Evaluate lambda, mu and nu on an ``n_nodes`` uniform grid.

    With ``epsilon=None`` the largest value in ``EPS_GRID`` that keeps nu
    positive is used (the smallest one if none does).
    """
    p = sol.params
    x = np.linspace(0.0, p.L, n_nodes)
    pk = ObserverKernel(sol)
    lam = _rate(p, _squared_norm(sol.ky_at0(x), x, convention), convention)
    mu = _rate(p, _squared_norm(pk.px_at_L(x), x, convention), convention)
    pi1, pi2 = projected_gains(sol, x)
    pi_sq = _squared_norm(pi1, x, convention) + _squared_norm(pi2, x, convention)
    factor = 2.0 if convention == "table" else 1.0

    def nu_of(eps):
        return lam - factor * p.beta * eps * pi_sq

    if epsilon is None:
        epsilon = EPS_GRID[-1]
        for eps in EPS_GRID:
            if nu_of(eps) > 0:
                epsilon = eps
                break
    elif not epsilon > 0:
        raise ParameterError("epsilon must be positive")
    return DecayRates(lam, mu, nu_of(epsilon), float(epsilon), convention)


@dataclass(frozen=True)
class TuneResult:
    r_best: float
    lambda_best: float
    table: tuple  # ((r, lambda), ...)
    warning: bool


def tune_r(
    base: KernelParams,
    r_grid,
    n_nodes: int = TABLE_NODES,
    convention: str = "table",
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
) -> TuneResult:
    """Pick the damping parameter maximising lambda over a finite grid.

    ``warning`` is set when no grid value gives a positive rate; the
    least-negative entry is returned in that case.
    """
    r_grid = [float(r) for r in r_grid]
    if not r_grid or any(r <= 0 or not np.isfinite(r) for r in r_grid):
        raise ParameterError("r_grid must be a nonempty list of positive numbers")
    table = []
    for r in r_grid:
        sol = solve_kernel(base.with_r(r), tol, max_iter)
        table.append((r, lambda_rate(sol, n_nodes, convention)))
    r_best, lam_best = max(table, key=lambda e: e[1])
    return TuneResult(r_best, lam_best, tuple(table), lam_best <= 0)
