"""CSV reading and writing with round-trippable float formatting."""

from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

FLOAT_FMT = "%.17g"


def _fmt(v):
    if isinstance(v, (int, np.integer)) and not isinstance(v, bool):
        return str(int(v))
    if isinstance(v, str):
        return v
    return FLOAT_FMT % float(v)


def write_csv(path, header, rows):
    """Write ``rows`` under ``header``; floats get 17 significant digits."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])
    return path


def write_columns(path, header, columns):
    """Write equal-length column arrays."""
    cols = [np.asarray(c) for c in columns]
    return write_csv(path, header, zip(*cols))


def write_report(path, items: dict):
    """``key=value`` lines; complex values are written as ``re+imj`` with full precision."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = []
    for k, v in items.items():
        if isinstance(v, complex):
            v = complex(v.real + 0.0, v.imag + 0.0)  # drop signed zeros
            v = f"{FLOAT_FMT % v.real}{'+' if v.imag >= 0 else '-'}{FLOAT_FMT % abs(v.imag)}j"
        elif isinstance(v, float):
            v = FLOAT_FMT % v
        lines.append(f"{k}={v}")
    path.write_text("\n".join(lines) + "\n")
    return path


def read_field_csv(path, x_expected, atol=1e-9):
    """Read an ``x,re,im`` file (optional header) and check it is on the expected grid.

    Raises ValueError on a row-count or node mismatch.
    """
    data = np.loadtxt(path, delimiter=",", comments="#", ndmin=2, skiprows=_header_rows(path))
    x_expected = np.asarray(x_expected, dtype=float)
    if data.shape != (x_expected.size, 3):
        raise ValueError(f"expected {x_expected.size} rows of x,re,im, got shape {data.shape}")
    if not np.allclose(data[:, 0], x_expected, rtol=0, atol=atol * max(1.0, abs(x_expected[-1]))):
        raise ValueError("x column does not match the simulation grid")
    return data[:, 1] + 1j * data[:, 2]


def _header_rows(path):
    with open(path) as fh:
        first = fh.readline()
    try:
        [float(v) for v in first.strip().split(",")]
        return 0
    except ValueError:
        return 1


def frames_rows(frame_t, x, frames):
    """Long-format rows ``t, x, re, im, abs`` for a stack of frames."""
    for t, u in zip(frame_t, frames):
        for xi, ui in zip(x, u):
            yield (t, xi, ui.real, ui.imag, abs(ui))
