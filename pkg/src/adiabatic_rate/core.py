"""Ramp schedules, momentum grids and the fidelity <-> rate-function algebra."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np


class DomainError(ValueError):
    """Raised when an argument lies outside the domain of an operation."""


@dataclass(frozen=True)
class RampProtocol:
    """Linear schedule ``lambda(t) = lambda_i + (t/T)(lambda_f - lambda_i)``."""

    lambda_i: float
    lambda_f: float
    T: float = 0.0

    def __post_init__(self):
        if not self.T >= 0:
            raise DomainError(f"ramp time must be non-negative, got {self.T}")

    @property
    def delta(self) -> float:
        return self.lambda_f - self.lambda_i

    def at(self, s):
        """Parameter at rescaled time ``s = t/T`` (scalar or array)."""
        return self.lambda_i + s * (self.lambda_f - self.lambda_i)

    def value(self, t: float) -> float:
        return ramp_value(self, t)

    def with_time(self, T: float) -> "RampProtocol":
        return RampProtocol(self.lambda_i, self.lambda_f, T)


def ramp_value(p: RampProtocol, t: float) -> float:
    if t < 0 or t > p.T:
        raise DomainError(f"t={t} outside [0, {p.T}]")
    if p.T == 0:
        return p.lambda_f
    return p.lambda_i + (t / p.T) * (p.lambda_f - p.lambda_i)


@dataclass(frozen=True)
class MomentumGrid:
    """Positive antiperiodic momenta ``(2n-1)pi/N`` for ``n = 1..N/2``."""

    N: int
    modes: np.ndarray = field(repr=False)

    def __len__(self):
        return len(self.modes)


def momentum_grid(N: int) -> MomentumGrid:
    if not isinstance(N, (int, np.integer)) or N < 2 or N % 2:
        raise DomainError(f"N must be an even integer >= 2, got {N!r}")
    n = np.arange(1, N // 2 + 1)
    modes = (2 * n - 1) * np.pi / N
    modes.setflags(write=False)
    return MomentumGrid(int(N), modes)


def rate_from_fidelity(F: float, N: int) -> float:
    """``-ln(F)/N``.

    F <= 0 means the overlap has vanished numerically; accumulate per-mode
    logarithms instead of multiplying fidelities.
    """
    if N < 1:
        raise DomainError(f"N must be >= 1, got {N}")
    if not F > 0:
        raise DomainError(f"fidelity must be positive, got {F}")
    if F > 1:
        raise DomainError(f"fidelity cannot exceed 1, got {F}")
    return -math.log(F) / N


def fidelity_from_rate(f: float, N: int) -> float:
    if N < 1:
        raise DomainError(f"N must be >= 1, got {N}")
    return math.exp(-N * f)


def rate_from_infidelities(infidelity, N: int, weight: float = 1.0) -> float:
    """Rate function from per-subsystem infidelities ``1 - F_k``.

    Uses ``log1p`` so tiny infidelities keep full relative precision, and sums
    in the given (ascending-momentum) order.
    """
    g = np.asarray(infidelity, dtype=float)
    if np.any(g >= 1):
        bad = int(np.argmax(g >= 1))
        raise DomainError(f"subsystem {bad} has vanishing fidelity (1-F={g[bad]})")
    terms = -np.log1p(-g)
    return float(weight * math.fsum(terms) / N)


@dataclass
class FidelityCurve:
    """Tabulated ``(N, T, f_N)`` rows for a single ramp."""

    model: str
    lambda_i: float
    lambda_f: float
    rows: list = field(default_factory=list)

    def add(self, N: int, T: float, f: float) -> None:
        if f < 0:
            raise DomainError(f"rate function must be non-negative, got {f}")
        if any(r[0] == N and r[1] == T for r in self.rows):
            raise DomainError(f"duplicate row (N={N}, T={T})")
        self.rows.append((int(N), float(T), float(f)))

    def sorted_rows(self) -> list:
        return sorted(self.rows, key=lambda r: (r[0], r[1]))

    def series(self, N: int) -> tuple[np.ndarray, np.ndarray]:
        sel = sorted((r for r in self.rows if r[0] == N), key=lambda r: r[1])
        return np.array([r[1] for r in sel]), np.array([r[2] for r in sel])
