"""Decay-rate fitting and small numerical checks on simulation output."""

from __future__ import annotations

import numpy as np


def fit_decay_rate(t, norms, window=(1.0, np.inf)) -> float:
    """Least-squares slope of ``-log ||u||`` against ``t`` inside ``window``.

    A positive value is an exponential decay rate.  Raises ValueError when
    fewer than two positive samples fall in the window.
    """
    t = np.asarray(t, dtype=float)
    y = np.asarray(norms, dtype=float)
    lo, hi = window
    mask = (t >= lo) & (t <= hi) & (y > 0)
    if np.count_nonzero(mask) < 2:
        raise ValueError("need at least two positive samples inside the fitting window")
    slope = np.polyfit(t[mask], np.log(y[mask]), 1)[0]
    return float(-slope)


def bound_ratio(t, norms, rate: float) -> np.ndarray:
    """``||w(t)|| / (||w(0)|| e^{-rate t})``; values <= 1 certify the exponential bound."""
    t = np.asarray(t, dtype=float)
    norms = np.asarray(norms, dtype=float)
    if norms[0] == 0:
        return np.zeros_like(norms)
    return norms / (norms[0] * np.exp(-rate * t))


def max_growth_per_time(t, norms) -> float:
    """Largest relative norm increase over any step, per unit time (0 if never increasing)."""
    t = np.asarray(t, dtype=float)
    norms = np.asarray(norms, dtype=float)
    dt = np.diff(t)
    growth = np.diff(norms) / np.maximum(norms[:-1], np.finfo(float).tiny) / dt
    return float(max(0.0, np.max(growth))) if growth.size else 0.0


def scalar_cn_factor(z: complex) -> complex:
    """Amplification ``(1 + z/2) / (1 - z/2)`` of Crank-Nicolson for ``y' = a y`` with ``z = a dt``."""
    return (1.0 + 0.5 * z) / (1.0 - 0.5 * z)
