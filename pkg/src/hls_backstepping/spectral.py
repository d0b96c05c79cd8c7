"""Critical lengths, the stationary counterexample and repeated-root landmarks of the characteristic cubic.

The cubic is ``s + b l^3 - i a l^2 + d l = 0`` in ``l`` for the Laplace
variable ``s``; it has a repeated root only at finitely many ``s`` whose
location is governed by the sign of ``a^2 + 3 b d``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import ParameterError, RegimeError

STATIONARY_PARAMS = (1.0, 2.0, 8.0, math.pi)  # (beta, alpha, delta, L)


def _coeffs(params):
    return float(params.beta), float(params.alpha), float(params.delta)


def discriminant(params) -> float:
    """``alpha^2 + 3 beta delta``."""
    b, a, d = _coeffs(params)
    return a * a + 3.0 * b * d


def regime(params) -> int:
    """Sign of the discriminant: +1, 0 or -1."""
    D = discriminant(params)
    return int(np.sign(D))


def _positive_int(name, v):
    if int(v) != v or v < 1:
        raise ParameterError(f"{name} must be a positive integer")
    return int(v)


def critical_length(params, k: int, l: int) -> float:
    """``2 pi beta sqrt((k^2 + k l + l^2) / (alpha^2 + 3 beta delta))``."""
    k = _positive_int("k", k)
    l = _positive_int("l", l)
    D = discriminant(params)
    if D <= 0:
        raise RegimeError("critical lengths exist only when alpha^2 + 3 beta delta > 0")
    return 2.0 * math.pi * params.beta * math.sqrt((k * k + k * l + l * l) / D)


def is_critical(params, L: float, tolerance: float = 1e-9, k_max: int = 20, l_max: int = 20):
    """First ``(k, l)`` in lexicographic order with ``|L_crit(k, l) - L| <= tolerance``, else None."""
    k_max = _positive_int("k_max", k_max)
    l_max = _positive_int("l_max", l_max)
    for k in range(1, k_max + 1):
        for l in range(1, l_max + 1):
            if abs(critical_length(params, k, l) - L) <= tolerance:
                return (k, l)
    return None


def critical_table(params, k_max: int = 5, l_max: int = 5):
    """Rows ``(k, l, L_crit)`` for ``1 <= k <= k_max``, ``1 <= l <= l_max``."""
    return [(k, l, critical_length(params, k, l)) for k in range(1, k_max + 1) for l in range(1, l_max + 1)]


def stationary_state(x, params=None):
    """``3 - e^{4ix} - 2 e^{-2ix}``: time-independent uncontrolled solution on ``[0, pi]``.

    Only a solution for ``beta=1, alpha=2, delta=8, L=pi``; other parameters
    trigger a warning.
    """
    if params is not None:
        got = (params.beta, params.alpha, params.delta, params.L)
        if not np.allclose(got, STATIONARY_PARAMS, rtol=1e-12, atol=1e-12):
            warnings.warn("stationary state is only stationary for beta=1, alpha=2, delta=8, L=pi", stacklevel=2)
    x = x.x if hasattr(x, "x") else np.asarray(x, dtype=float)
    return 3.0 - np.exp(4j * x) - 2.0 * np.exp(-2j * x)


def stationary_residual(params, n_modes=((0, 3.0), (4, -1.0), (-2, -2.0))) -> float:
    """Largest per-mode residual of ``beta u''' - i alpha u'' + delta u'`` for ``sum c e^{i m x}``.

    For ``e^{imx}`` the operator multiplies by ``-i beta m^3 + i alpha m^2 + i delta m``.
    """
    b, a, d = _coeffs(params)
    return max(abs(c * (-1j * b * m**3 + 1j * a * m**2 + 1j * d * m)) for m, c in n_modes)


def hkl(k: int, l: int) -> float:
    """``(-2k-l)(k-l)(k+2l) / (2 (k^2+kl+l^2)^{3/2})``, strictly inside (-1, 1)."""
    k = _positive_int("k", k)
    l = _positive_int("l", l)
    return (-2 * k - l) * (k - l) * (k + 2 * l) / (2.0 * (k * k + k * l + l * l) ** 1.5)


def eigenvalue_on_axis(params, k: int, l: int) -> complex:
    """Imaginary-axis eigenvalue of the uncontrolled operator on the critical length ``L(k, l)``.

    The caller is responsible for ``params.L`` matching :func:`critical_length`.
    """
    D = discriminant(params)
    if D <= 0:
        raise RegimeError("no imaginary-axis eigenvalues unless alpha^2 + 3 beta delta > 0")
    b, a, _ = _coeffs(params)
    return 1j / (27.0 * b * b) * (a**3 - 3.0 * a * D + 2.0 * D**1.5 * hkl(k, l))


@dataclass(frozen=True)
class RootLandmarks:
    """Values of ``s`` at which the characteristic cubic has a repeated root.

    ``points`` holds ``(s1+, s2+)``, ``(s0,)`` or ``(s1-, s2-)``; ``double_roots``
    the matching repeated root and ``simple_roots`` the remaining one.
    """

    regime: int
    points: tuple
    double_roots: tuple
    simple_roots: tuple

    def report(self) -> dict:
        out = {"regime": {1: "+", 0: "0", -1: "-"}[self.regime]}
        names = {1: ("s1_plus", "s2_plus"), 0: ("s0",), -1: ("s1_minus", "s2_minus")}[self.regime]
        for name, s in zip(names, self.points):
            out[name] = s
        return out


def root_landmarks(params) -> RootLandmarks:
    b, a, _ = _coeffs(params)
    if not b > 0:
        raise ParameterError("beta must be positive")
    D = discriminant(params)
    c27 = 27.0 * b * b
    if D > 0:
        q = math.sqrt(D)
        pts, dbl, sim = [], [], []
        for sign in (1.0, -1.0):
            pts.append(1j / c27 * (a**3 - 3.0 * a * D + sign * 2.0 * D**1.5))
            dbl.append(1j * (a - sign * q) / (3.0 * b))
            sim.append(1j * (a + sign * 2.0 * q) / (3.0 * b))
        return RootLandmarks(1, tuple(pts), tuple(dbl), tuple(sim))
    if D == 0:
        lam = 1j * a / (3.0 * b)
        return RootLandmarks(0, (1j * a**3 / c27,), (lam,), (lam,))
    q = math.sqrt(-D)
    im = -a * (2.0 * a * a + 9.0 * b * (params.delta)) / c27
    pts, dbl, sim = [], [], []
    for sign in (1.0, -1.0):
        pts.append(complex(sign * 2.0 * (-D) ** 1.5 / c27, im))
        c = sign * q / (3.0 * b)
        dbl.append(complex(c, a / (3.0 * b)))
        sim.append(complex(-2.0 * c, a / (3.0 * b)))
    return RootLandmarks(-1, tuple(pts), tuple(dbl), tuple(sim))


def characteristic(params, s, lam):
    """Value and ``lam``-derivative of ``s + beta lam^3 - i alpha lam^2 + delta lam``."""
    b, a, d = _coeffs(params)
    f = s + b * lam**3 - 1j * a * lam**2 + d * lam
    df = 3.0 * b * lam**2 - 2j * a * lam + d
    return f, df


def repeated_root_certificate(params) -> float:
    """Largest normalised ``|f|`` and ``|f'|`` at each landmark's double root (should be ~ roundoff)."""
    b, a, d = _coeffs(params)
    lm = root_landmarks(params)
    worst = 0.0
    for s, lam in zip(lm.points, lm.double_roots):
        f, df = characteristic(params, s, lam)
        m = abs(lam)
        scale_f = abs(s) + b * m**3 + abs(a) * m**2 + abs(d) * m
        scale_df = 3.0 * b * m**2 + 2.0 * abs(a) * m + abs(d)
        worst = max(worst, abs(f) / max(scale_f, 1.0), abs(df) / max(scale_df, 1.0))
    return worst
