"""Luttinger-liquid boson modes with a ramped pairing interaction.

After splitting ``b_q, b_-q`` into the two flavors ``alpha_q, beta_q`` every
``q > 0`` contributes two identical single-boson problems

    H_q = q ((omega + Delta) a^dag a + Delta/2 (a^2 + a^dag^2)).

They are diagonalized by ``b = u a + v a^dag`` (``u = cosh theta``,
``v = sinh theta``) with ``tanh 2 theta = Delta / (omega + Delta)`` and level
spacing ``q sqrt(omega (omega + 2 Delta))``.  The pairing term only connects
Fock states of equal parity, and the ground state lives on the even ladder.
"""

from __future__ import annotations

import math

import numpy as np

from .core import DomainError, RampProtocol, momentum_grid, rate_from_infidelities
from .ode import DEFAULT_ATOL, DEFAULT_RTOL, IntegrationError, ModeSystem, integrate

FLAVORS = ("alpha", "beta")
DEFAULT_NMAX = 40
TAIL_TOL = 1e-10
CHUNK = 256


class TruncationError(RuntimeError):
    """Population reached the top of the truncated ladder."""


def bogoliubov_uv(kappa: float) -> tuple[float, float]:
    """``(u, v)`` for ``kappa = omega/Delta``; ``kappa = +-inf`` means ``Delta = 0``.

    Valid for ``kappa > 0`` and ``kappa < -2``.  On the second branch ``v < 0``.
    """
    if math.isinf(kappa):
        return 1.0, 0.0
    if -2.0 <= kappa <= 0.0:
        raise DomainError(f"kappa={kappa} lies in [-2, 0]: no normalizable Bogoliubov solution")
    root = math.sqrt(kappa * (kappa + 2.0))
    # tanh(theta), the root of x + 1/x = 2(kappa + 1) with |x| < 1
    x = 1.0 / (kappa + 1.0 + math.copysign(root, kappa + 1.0))
    u = 1.0 / math.sqrt(1.0 - x * x)
    return u, x * u


def tanh_theta(omega: float, delta):
    """``v/u`` as a function of ``Delta`` (smooth through ``Delta = 0``)."""
    t = np.asarray(delta, dtype=float) / (omega + np.asarray(delta, dtype=float))
    return t / (1.0 + np.sqrt(1.0 - t * t))


def _check_stable(omega: float, delta) -> None:
    if omega <= 0:
        raise DomainError(f"omega must be positive, got {omega}")
    if np.any(omega + 2.0 * np.asarray(delta) <= 0):
        raise DomainError("unstable: omega + 2*Delta must stay positive")


def eigenenergy(n: int, omega: float, delta: float, q: float = 1.0) -> float:
    """``q (n + 1/2) sqrt(omega (omega + 2 Delta))``."""
    w2 = omega * (omega + 2.0 * delta)
    if w2 < 0:
        raise DomainError("omega (omega + 2 Delta) must be non-negative")
    return q * (n + 0.5) * math.sqrt(w2)


def pairing_alpha(u: float, v: float) -> float:
    return v / (2.0 * u)


def ground_state_norm(alpha: float) -> float:
    """Normalization ``(1 - 4 alpha^2)^(1/4)`` of ``exp(-alpha a^dag a^dag)|0>``."""
    if abs(alpha) >= 0.5:
        raise DomainError(f"|alpha|={abs(alpha)} >= 1/2: pair-coherent state not normalizable")
    return (1.0 - 4.0 * alpha * alpha) ** 0.25


def ground_state_vector(omega: float, delta: float, n_max: int = DEFAULT_NMAX) -> np.ndarray:
    """Pair-coherent ground state on the even Fock states ``0, 2, ..., n_max``."""
    _check_stable(omega, delta)
    alpha = 0.5 * float(tanh_theta(omega, delta))
    amps = np.empty(n_max // 2 + 1)
    amps[0] = ground_state_norm(alpha)
    for j in range(n_max // 2):
        amps[j + 1] = amps[j] * (-alpha) * math.sqrt((2 * j + 1) * (2 * j + 2)) / (j + 1)
    return amps


def fock_hamiltonian(omega: float, delta: float, q: float = 1.0, n_max: int = DEFAULT_NMAX) -> np.ndarray:
    """Mode Hamiltonian restricted to even Fock states up to ``n_max``."""
    n = np.arange(0, n_max + 1, 2)
    H = np.diag((omega + delta) * n.astype(float))
    off = 0.5 * delta * np.sqrt((n[:-1] + 1.0) * (n[:-1] + 2.0))
    H += np.diag(off, 1) + np.diag(off, -1)
    return q * H


def quench_overlap(omega: float, delta_i: float, delta_f: float, n_max: int = DEFAULT_NMAX) -> float:
    """``|<0_f|0_i>|^2`` from truncated pair-coherent states."""
    a = ground_state_vector(omega, delta_i, n_max)
    b = ground_state_vector(omega, delta_f, n_max)
    return float(np.dot(a, b) ** 2)


def coupling(n: int, s: float, omega: float, ramp: RampProtocol) -> float:
    """``<n+2(s)|d_s n(s)>`` on the ladder; the same for every ``q``.

    Equal to ``<n+2|dH/ds|n> / (E_n - E_{n+2})``, i.e.
    ``-dDelta sqrt((n+1)(n+2)) / (4 (omega + 2 Delta(s)))``.
    """
    if n % 2:
        raise DomainError("pairing only couples even levels")
    delta = ramp.at(s)
    return -ramp.delta * math.sqrt((n + 1) * (n + 2)) / (4.0 * (omega + 2.0 * delta))


def mode_system(qs, omega: float, ramp: RampProtocol, n_max: int = DEFAULT_NMAX) -> ModeSystem:
    if n_max % 2 or n_max < 8:
        raise DomainError(f"n_max must be even and >= 8, got {n_max}")
    qs = np.asarray(qs, dtype=float).reshape(-1)
    levels = n_max // 2 + 1
    j = np.arange(levels - 1)
    pairs = np.column_stack([j, j + 1])
    root = np.sqrt((2 * j + 1.0) * (2 * j + 2.0))[None, :]
    d_i, dd = ramp.lambda_i, ramp.delta
    qcol = qs[:, None]

    def gap(s):
        return 2.0 * qcol * math.sqrt(omega * (omega + 2.0 * (d_i + s * dd)))

    def coup(s):
        # <n|d_s (n+2)>
        return dd * root / (4.0 * (omega + 2.0 * (d_i + s * dd)))

    return ModeSystem(level_count=levels, pairs=pairs, gap=gap, coupling=coup, batch=len(qs))


def evolve_modes(qs, omega: float, ramp: RampProtocol, T: float, n_max: int = DEFAULT_NMAX,
                 rtol=DEFAULT_RTOL, atol=DEFAULT_ATOL, chunk=CHUNK):
    """Integrate the ladders for all ``qs``; returns ``(infidelity, max_norm_drift)``."""
    _check_stable(omega, [ramp.lambda_i, ramp.lambda_f])
    qs = np.asarray(qs, dtype=float).reshape(-1)
    if np.any(qs <= 0):
        raise DomainError("momenta must be positive")
    out = np.empty(len(qs))
    drift = 0.0
    for start in range(0, len(qs), chunk):
        sl = slice(start, start + chunk)
        try:
            state = integrate(mode_system(qs[sl], omega, ramp, n_max), 0, T, rtol, atol)
        except IntegrationError as exc:
            raise IntegrationError(
                f"LL modes q in [{qs[sl][0]:.6g}, {qs[sl][-1]:.6g}] at T={T}: {exc}", exc.s
            ) from exc
        tail = state.populations()[:, -3:].sum(axis=1)
        if tail.max() > TAIL_TOL:
            worst = qs[sl][int(np.argmax(tail))]
            raise TruncationError(
                f"population {tail.max():.3g} in the top ladder levels for q={worst:.6g}, T={T}; "
                f"increase n_max (now {n_max})"
            )
        out[sl] = state.infidelity(0)
        drift = max(drift, state.max_norm_drift)
    return out, drift


def mode_fidelity(q, flavor: str, ramp: RampProtocol, T: float, n_max: int = DEFAULT_NMAX,
                  omega: float = 1.0, rtol=DEFAULT_RTOL, atol=DEFAULT_ATOL):
    """``|c_0(s=1)|^2`` for the ``flavor`` boson at momentum ``q`` (scalar or array)."""
    if flavor not in FLAVORS:
        raise DomainError(f"flavor must be one of {FLAVORS}, got {flavor!r}")
    scalar = np.ndim(q) == 0
    g, _ = evolve_modes(np.atleast_1d(q), omega, ramp, T, n_max, rtol, atol)
    F = 1.0 - g
    return float(F[0]) if scalar else F


def rate_function_finite(N: int, ramp: RampProtocol, T: float, n_max: int = DEFAULT_NMAX,
                         omega: float = 1.0, rtol=DEFAULT_RTOL, atol=DEFAULT_ATOL,
                         stats: dict | None = None) -> float:
    """``f_N(T) = -(1/N) sum_flavor sum_{q>0} ln F_q``.

    Both flavors evolve identically, so one ladder is integrated per ``q`` and
    counted twice.  ``stats`` collects ``"max_norm_drift"`` when given.
    """
    grid = momentum_grid(N)
    if ramp.delta == 0:
        return 0.0
    g, drift = evolve_modes(grid.modes, omega, ramp, T, n_max, rtol, atol)
    if stats is not None:
        stats["max_norm_drift"] = max(stats.get("max_norm_drift", 0.0), drift)
    return rate_from_infidelities(g, N, weight=len(FLAVORS))
