"""Power-law fits, oscillation envelopes and finite-size extrapolation."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class FitError(ValueError):
    """Not enough usable data for the requested fit."""


@dataclass(frozen=True)
class PowerLawFit:
    amplitude: float
    exponent: float
    rms_residual: float
    window: tuple
    n_points: int

    def __call__(self, T):
        return self.amplitude * np.asarray(T, dtype=float) ** self.exponent


@dataclass(frozen=True)
class FiniteSizeFit:
    """``f_N = g + h/N + i/N^2``; ``g`` estimates the N -> infinity limit."""

    g: float
    h: float
    i: float


def _columns(rows):
    arr = np.asarray(rows, dtype=float)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise FitError("rows must be (x, y) pairs")
    return arr[:, 0], arr[:, 1]


def powerlaw_fit(rows, window=None) -> PowerLawFit:
    """Least squares of ``ln f`` against ``ln T`` inside ``window = (T_min, T_max)``."""
    if len(rows) == 0:
        raise FitError("no data")
    T, f = _columns(rows)
    if window is None:
        window = (float(T.min()), float(T.max()))
    sel = (T >= window[0]) & (T <= window[1])
    T, f = T[sel], f[sel]
    if len(T) < 4:
        raise FitError(f"need at least 4 points in window {window}, got {len(T)}")
    if np.any(f <= 0):
        raise FitError("power-law fit needs positive values")
    x, y = np.log(T), np.log(f)
    A = np.column_stack([np.ones_like(x), x])
    (c0, c1), *_ = np.linalg.lstsq(A, y, rcond=None)
    resid = y - (c0 + c1 * x)
    return PowerLawFit(
        amplitude=float(np.exp(c0)),
        exponent=float(c1),
        rms_residual=float(np.sqrt(np.mean(resid**2))),
        window=(float(window[0]), float(window[1])),
        n_points=int(len(T)),
    )


def envelope_extract(rows) -> list:
    """Strict interior local maxima ``(T, f)`` of a series ordered by ``T``."""
    if len(rows) == 0:
        return []
    T, f = _columns(rows)
    if np.any(np.diff(T) <= 0):
        raise FitError("T must be strictly increasing")
    if len(T) < 3:
        return []
    peak = (f[1:-1] > f[:-2]) & (f[1:-1] > f[2:])
    idx = np.nonzero(peak)[0] + 1
    return [(float(T[i]), float(f[i])) for i in idx]


def extrapolate_quadratic(points) -> FiniteSizeFit:
    """Fit ``g + h/N + i/N^2`` to ``(N, f_N)`` pairs."""
    N, f = _columns(points)
    if len(np.unique(N)) < 3:
        raise FitError("need at least three distinct N")
    x = 1.0 / N
    A = np.column_stack([np.ones_like(x), x, x * x])
    coef, _, rank, _ = np.linalg.lstsq(A, f, rcond=None)
    if rank < 3:
        raise FitError("design matrix is rank deficient")
    return FiniteSizeFit(*map(float, coef))
