"""Dense bivariate polynomials in (s, t) stored as coefficient matrices.

Entry ``coeffs[i, j]`` is the coefficient of ``s**i * t**j``.  Only the
anti-triangle ``i + j <= degree`` is populated, so a polynomial of total
degree ``n`` fits in an ``(n+1, n+1)`` matrix.  Differentiation and
integration are row/column shift-and-scale operations on that matrix.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# Coefficients below this modulus are treated as exact zeros.
UNDERFLOW = 1e-300


def _support_degree(coeffs: np.ndarray) -> int:
    nz = np.nonzero(coeffs)
    if len(nz[0]) == 0:
        return 0
    return int(np.max(nz[0] + nz[1]))


@dataclass(frozen=True, eq=False)
class BivariatePoly:
    """Polynomial ``sum_{i+j<=degree} coeffs[i, j] s^i t^j`` with complex coefficients."""

    coeffs: np.ndarray

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=complex, copy=True)
        if c.ndim != 2:
            raise ValueError("coefficient matrix must be two-dimensional")
        n = max(c.shape)
        if c.shape != (n, n):
            c = _pad(c, n)
        c[np.abs(c) < UNDERFLOW] = 0.0
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    # -- construction -------------------------------------------------
    @classmethod
    def zero(cls) -> "BivariatePoly":
        return cls(np.zeros((1, 1), dtype=complex))

    @classmethod
    def monomial(cls, i: int, j: int, value: complex = 1.0) -> "BivariatePoly":
        c = np.zeros((i + j + 1, i + j + 1), dtype=complex)
        c[i, j] = value
        return cls(c)

    @classmethod
    def from_terms(cls, terms: dict) -> "BivariatePoly":
        """Build from a ``{(i, j): coefficient}`` mapping."""
        if not terms:
            return cls.zero()
        n = max(i + j for i, j in terms) + 1
        c = np.zeros((n, n), dtype=complex)
        for (i, j), v in terms.items():
            c[i, j] += v
        return cls(c)

    # -- structure ----------------------------------------------------
    @property
    def size(self) -> int:
        return self.coeffs.shape[0]

    @property
    def degree(self) -> int:
        """Total degree of the nonzero support (0 for the zero polynomial)."""
        return _support_degree(self.coeffs)

    def is_zero(self) -> bool:
        return not np.any(self.coeffs)

    def terms(self) -> dict:
        """Nonzero coefficients as a ``{(i, j): value}`` dict."""
        return {(int(i), int(j)): complex(self.coeffs[i, j]) for i, j in zip(*np.nonzero(self.coeffs))}

    def trimmed(self) -> "BivariatePoly":
        n = self.degree + 1
        return BivariatePoly(self.coeffs[:n, :n])

    def padded(self, n: int) -> np.ndarray:
        return _pad(self.coeffs, n)

    # -- arithmetic ---------------------------------------------------
    def __add__(self, other: "BivariatePoly") -> "BivariatePoly":
        n = max(self.size, other.size)
        return BivariatePoly(self.padded(n) + other.padded(n))

    def __sub__(self, other: "BivariatePoly") -> "BivariatePoly":
        n = max(self.size, other.size)
        return BivariatePoly(self.padded(n) - other.padded(n))

    def __neg__(self) -> "BivariatePoly":
        return BivariatePoly(-self.coeffs)

    def __mul__(self, scalar) -> "BivariatePoly":
        return BivariatePoly(self.coeffs * scalar)

    __rmul__ = __mul__

    def __eq__(self, other) -> bool:
        if not isinstance(other, BivariatePoly):
            return NotImplemented
        n = max(self.size, other.size)
        return bool(np.array_equal(self.padded(n), other.padded(n)))

    def allclose(self, other: "BivariatePoly", rtol=1e-12, atol=0.0) -> bool:
        n = max(self.size, other.size)
        return bool(np.allclose(self.padded(n), other.padded(n), rtol=rtol, atol=atol))

    # -- calculus -----------------------------------------------------
    def diff_s(self) -> "BivariatePoly":
        c = self.coeffs
        out = np.zeros_like(c)
        out[:-1, :] = c[1:, :] * np.arange(1, c.shape[0])[:, None]
        return BivariatePoly(out)

    def diff_t(self) -> "BivariatePoly":
        c = self.coeffs
        out = np.zeros_like(c)
        out[:, :-1] = c[:, 1:] * np.arange(1, c.shape[1])[None, :]
        return BivariatePoly(out)

    def int_s(self) -> "BivariatePoly":
        """Antiderivative in s vanishing at s = 0."""
        c = self.coeffs
        n = c.shape[0] + 1
        out = np.zeros((n, n), dtype=complex)
        out[1:, :-1] = c / np.arange(1, n)[:, None]
        return BivariatePoly(out)

    def int_t(self) -> "BivariatePoly":
        """Antiderivative in t vanishing at t = 0."""
        c = self.coeffs
        n = c.shape[1] + 1
        out = np.zeros((n, n), dtype=complex)
        out[:-1, 1:] = c / np.arange(1, n)[None, :]
        return BivariatePoly(out)

    # -- evaluation ---------------------------------------------------
    def __call__(self, s, t):
        """Evaluate at broadcastable arrays ``s`` and ``t``."""
        s, t = np.broadcast_arrays(np.asarray(s, dtype=float), np.asarray(t, dtype=float))
        shape = s.shape
        s = s.ravel()
        t = t.ravel()
        n = self.size
        # Horner in s over the rows, each row evaluated by Horner in t.
        rows = np.empty((n, t.size), dtype=complex)
        for i in range(n):
            rows[i] = np.polynomial.polynomial.polyval(t, self.coeffs[i])
        val = np.zeros(t.size, dtype=complex)
        for i in range(n - 1, -1, -1):
            val = val * s + rows[i]
        return val.reshape(shape)

    def on_lattice(self, h: float, n_nodes: int) -> np.ndarray:
        """Values ``P(i*h, j*h)`` for ``0 <= i, j < n_nodes`` as a square array."""
        nodes = h * np.arange(n_nodes)
        powers = np.vander(nodes, self.size, increasing=True)
        return powers @ self.coeffs @ powers.T

    def sup_norm(self, s, t) -> float:
        return float(np.max(np.abs(self(s, t)))) if np.size(s) else 0.0


def _pad(c: np.ndarray, n: int) -> np.ndarray:
    out = np.zeros((n, n), dtype=complex)
    out[: c.shape[0], : c.shape[1]] = c
    return out


def triangle_grid(L: float, n: int = 101):
    """Uniform ``n x n`` collocation lattice restricted to ``s, t >= 0, s + t <= L``."""
    g = np.linspace(0.0, L, n)
    i, j = np.meshgrid(np.arange(n), np.arange(n), indexing="ij")
    mask = i + j <= n - 1
    return g[i[mask]], g[j[mask]]
