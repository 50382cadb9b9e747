"""Coefficient equations in the instantaneous eigenbasis.

For a Hamiltonian ``H(s)`` with instantaneous eigenpairs ``E_n(s), |n(s)>`` the
state is expanded as ``sum_n c_n |n> exp(-i T int E_n ds)`` and the amplitudes
obey

    dc_l/ds = -sum_{n != l} c_n <l|d_s n> exp(-i phi_nl),
    dphi_nl/ds = T (E_n - E_l).

The diagonal (Berry) term is dropped, so model modules must supply real,
smoothly varying eigenvectors.  The phases are integrated alongside the
amplitudes by the same stepper.  Many independent systems of identical
structure are integrated together as a batch sharing one step sequence.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.integrate import DOP853

__all__ = [
    "ModeSystem",
    "CoefficientState",
    "IntegrationError",
    "integrate",
    "norm",
    "DEFAULT_RTOL",
    "DEFAULT_ATOL",
]

DEFAULT_RTOL = 1e-10
DEFAULT_ATOL = 1e-12
DEFAULT_MAX_EVALS = 10**8

# Dormand-Prince 8(5,3) tableau
_A = DOP853.A
_B = DOP853.B
_C = DOP853.C
_E3 = DOP853.E3
_E5 = DOP853.E5
_NSTAGES = DOP853.n_stages
_ERR_EXP = -1.0 / (DOP853.error_estimator_order + 1)
_SAFETY = 0.9
_MIN_FACTOR = 0.2
_MAX_FACTOR = 10.0


class IntegrationError(RuntimeError):
    """Step-size underflow or evaluation budget exhausted."""

    def __init__(self, message: str, s: float):
        super().__init__(f"{message} (reached s={s:.6g})")
        self.s = s


@dataclass(frozen=True)
class ModeSystem:
    """Batch of identically structured multi-level systems.

    Parameters
    ----------
    level_count : int
        Number of instantaneous levels per system.
    pairs : array of shape (P, 2)
        Coupled level pairs ``(l, n)`` with ``l < n``.
    gap : callable
        ``gap(s) -> (batch, P)`` array of ``E_n(s) - E_l(s)`` for each pair.
    coupling : callable
        ``coupling(s) -> (batch, P)`` array of ``<l(s)|d_s n(s)>``, which equals
        ``<l|dH/ds|n> / (E_n - E_l)``.  The reverse element is
        ``-conj(coupling)``.
    batch : int
        Number of independent systems.
    """

    level_count: int
    pairs: np.ndarray
    gap: Callable[[float], np.ndarray]
    coupling: Callable[[float], np.ndarray]
    batch: int = 1

    def __post_init__(self):
        pairs = np.asarray(self.pairs, dtype=int).reshape(-1, 2)
        if self.level_count < 2:
            raise ValueError("need at least two levels")
        if np.any(pairs[:, 0] >= pairs[:, 1]) or pairs.min() < 0 or pairs.max() >= self.level_count:
            raise ValueError("pairs must satisfy 0 <= l < n < level_count")
        object.__setattr__(self, "pairs", pairs)


@dataclass
class CoefficientState:
    """Amplitudes ``c_n`` and pair phases ``phi`` at progress ``s``."""

    amplitudes: np.ndarray
    phases: np.ndarray
    s: float
    n_steps: int = 0
    n_evals: int = 0
    max_norm_drift: float = 0.0

    def populations(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    def infidelity(self, level: int = 0) -> np.ndarray:
        """``1 - |c_level|^2`` from the normalized state, via the other levels."""
        p = self.populations()
        total = p.sum(axis=1)
        others = np.delete(p, level, axis=1).sum(axis=1)
        return others / total


def norm(state: CoefficientState) -> np.ndarray:
    """``sum_n |c_n|^2`` per batch member."""
    return np.sum(np.abs(state.amplitudes) ** 2, axis=-1)


def _as_slice(idx):
    # contiguous ascending index arrays become slices (views instead of gathers)
    if len(idx) and np.all(np.diff(idx) == 1):
        return slice(int(idx[0]), int(idx[-1]) + 1)
    return idx


def _make_rhs(system: ModeSystem, T: float):
    L = system.level_count
    lo, hi = system.pairs[:, 0], system.pairs[:, 1]
    unique = len(set(lo)) == len(lo) and len(set(hi)) == len(hi)
    if unique:
        lo, hi = _as_slice(lo), _as_slice(hi)

    def rhs(s, y):
        c = y[:, :L]
        me = system.coupling(s) * np.exp(-1j * y[:, L:].real)
        dy = np.empty_like(y)
        dy[:, :L] = 0.0
        if unique:
            dy[:, lo] -= c[:, hi] * me
            dy[:, hi] += c[:, lo] * me.conj()
        else:
            np.add.at(dy, (slice(None), lo), -c[:, hi] * me)
            np.add.at(dy, (slice(None), hi), c[:, lo] * me.conj())
        dy[:, L:] = T * system.gap(s)
        return dy

    return rhs


def _error_norm(K, h, scale):
    # per-system RMS of the DOP853 combined error estimate
    Kf = K.reshape(len(K), -1)
    err5 = (_E5 @ Kf).reshape(scale.shape) / scale
    err3 = (_E3 @ Kf).reshape(scale.shape) / scale
    e5 = np.sum(np.abs(err5) ** 2, axis=1)
    e3 = np.sum(np.abs(err3) ** 2, axis=1)
    denom = e5 + 0.01 * e3
    with np.errstate(invalid="ignore", divide="ignore"):
        out = np.where(denom > 0, h * e5 / np.sqrt(denom * scale.shape[1]), 0.0)
    return float(out.max())


def integrate(
    system: ModeSystem,
    initial_level: int,
    T: float,
    rtol: float = DEFAULT_RTOL,
    atol: float = DEFAULT_ATOL,
    max_evals: int = DEFAULT_MAX_EVALS,
) -> CoefficientState:
    """Integrate the coefficient equations from ``s=0`` to ``s=1``.

    Starts from ``c_n = delta(n, initial_level)`` for every batch member.  The
    step size is shared by the batch and accepted only when every member meets
    the tolerance.  ``max_evals`` bounds right-hand-side evaluations per member.
    """
    if not T >= 0:
        raise ValueError(f"ramp time must be non-negative, got {T}")
    if rtol <= 0 or atol <= 0:
        raise ValueError("tolerances must be positive")
    L = system.level_count
    P = len(system.pairs)
    B = system.batch

    y = np.zeros((B, L + P), dtype=complex)
    y[:, initial_level] = 1.0
    rhs = _make_rhs(system, float(T))

    s = 0.0
    f = rhs(s, y)
    n_evals = 1
    # initial step from the fastest phase rotation and coupling scale
    rate = np.max(np.abs(f)) + 1e-300
    h = min(1.0, 0.01 / rate, 0.1)
    rejected = False
    max_drift = 0.0
    n_steps = 0
    K = np.empty((_NSTAGES + 1,) + y.shape, dtype=complex)
    Kf = K.reshape(_NSTAGES + 1, -1)

    while s < 1.0:
        if n_evals > max_evals:
            raise IntegrationError(f"evaluation budget {max_evals} exhausted", s)
        min_step = 10 * np.spacing(s) + 1e-15
        if h < min_step:
            raise IntegrationError("step size underflow", s)
        h = min(h, 1.0 - s)

        K[0] = f
        for i in range(1, _NSTAGES):
            dy = (_A[i, :i] @ Kf[:i]).reshape(y.shape)
            K[i] = rhs(s + _C[i] * h, y + h * dy)
        y_new = y + h * (_B @ Kf[:_NSTAGES]).reshape(y.shape)
        s_new = 1.0 if s + h >= 1.0 - 1e-15 else s + h
        f_new = rhs(s_new, y_new)
        K[_NSTAGES] = f_new
        n_evals += _NSTAGES

        scale = atol + np.maximum(np.abs(y), np.abs(y_new)) * rtol
        err = _error_norm(K, h, scale)

        if err < 1.0:
            factor = _MAX_FACTOR if err == 0 else min(_MAX_FACTOR, _SAFETY * err**_ERR_EXP)
            if rejected:
                factor = min(1.0, factor)
            s, y, f = s_new, y_new, f_new
            n_steps += 1
            drift = float(np.max(np.abs(np.sum(np.abs(y[:, :L]) ** 2, axis=1) - 1.0)))
            max_drift = max(max_drift, drift)
            h *= factor
            rejected = False
        else:
            h *= max(_MIN_FACTOR, _SAFETY * err**_ERR_EXP)
            rejected = True

    return CoefficientState(
        amplitudes=y[:, :L].copy(),
        phases=y[:, L:].real.copy(),
        s=s,
        n_steps=n_steps,
        n_evals=n_evals,
        max_norm_drift=max_drift,
    )
