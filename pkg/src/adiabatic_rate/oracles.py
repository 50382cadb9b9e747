"""Brute-force references used to cross-check the production paths.

These deliberately use different algorithms from the main code: fixed-basis
Schroedinger integration (scipy's DOP853) instead of the instantaneous-basis
stepper, and dense Kronecker-product matrices with ``expm`` instead of sparse
sector construction with Krylov exponentials.  They are slow by design.
"""

from __future__ import annotations

import math
from functools import reduce

import numpy as np
import scipy.linalg
from scipy.integrate import solve_ivp

from .core import RampProtocol
from .ode import ModeSystem


def fixed_basis_integrate(hamiltonian, initial, T: float, tol: float = 1e-12) -> np.ndarray:
    """Solve ``i dpsi/ds = T H(s) psi`` from ``s=0`` to ``s=1`` in a fixed basis."""
    psi0 = np.asarray(initial, dtype=complex)
    if len(psi0) > 64:
        raise ValueError("fixed-basis oracle limited to dimension 64")
    if T == 0:
        return psi0.copy()
    sol = solve_ivp(
        lambda s, y: -1j * T * (hamiltonian(s) @ y),
        (0.0, 1.0), psi0, method="DOP853", rtol=tol, atol=tol * 1e-2,
    )
    if not sol.success:
        raise RuntimeError(f"fixed-basis integration failed: {sol.message}")
    return sol.y[:, -1]


def fixed_basis_fidelity(hamiltonian, T: float, tol: float = 1e-12) -> float:
    """Ground state of ``H(0)`` evolved to ``s=1``, projected on the ground state of ``H(1)``."""
    _, v0 = np.linalg.eigh(hamiltonian(0.0))
    psi = fixed_basis_integrate(hamiltonian, v0[:, 0], T, tol)
    _, v1 = np.linalg.eigh(hamiltonian(1.0))
    return float(abs(np.vdot(v1[:, 0], psi)) ** 2 / np.vdot(psi, psi).real)


def spin_precession_probability(Delta, T):
    """Transition-probability shape ``sin^2(T Delta/2) / (T Delta)^2``."""
    x = np.asarray(Delta, dtype=float) * np.asarray(T, dtype=float)
    return np.sin(0.5 * x) ** 2 / x**2


def precession_rate(gaps, T):
    """Mean precession transition probability over a set of gaps."""
    return float(np.mean(spin_precession_probability(np.asarray(gaps), T)))


def precession_system(Delta, turn: float) -> ModeSystem:
    """Spin whose field direction turns uniformly by ``2*turn`` at fixed gap ``Delta``."""
    gaps = np.atleast_1d(np.asarray(Delta, dtype=float))[:, None]
    return ModeSystem(
        level_count=2, pairs=[(0, 1)],
        gap=lambda s: gaps,
        coupling=lambda s: np.full_like(gaps, -turn),
        batch=len(gaps),
    )


# spin-1/2 operators in the (down, up) single-site basis
_SZ = np.diag([-0.5, 0.5])
_SP = np.array([[0.0, 0.0], [1.0, 0.0]])
_SM = _SP.T
_SX = 0.5 * (_SP + _SM)
_SY = -0.5j * (_SP - _SM)


def _site_operator(op, i, N):
    # site N-1 is the leftmost Kronecker factor so that index = sum bit_i 2^i
    factors = [op if k == i else np.eye(2) for k in reversed(range(N))]
    return reduce(np.kron, factors)


def _dense_parts(N: int, Sz):
    """``(-sum SxSx + SySy, -sum SzSz, configs)`` as dense matrices."""
    if N > 10:
        raise ValueError("dense reference limited to N <= 10")
    hop = np.zeros((2**N, 2**N), dtype=complex)
    zz = np.zeros((2**N, 2**N), dtype=complex)
    for i in range(N):
        j = (i + 1) % N
        for op in (_SX, _SY):
            hop -= _site_operator(op, i, N) @ _site_operator(op, j, N)
        zz -= _site_operator(_SZ, i, N) @ _site_operator(_SZ, j, N)
    if Sz is None:
        return hop, zz, np.arange(2**N)
    idx = np.array([x for x in range(2**N) if bin(x).count("1") == N // 2 + Sz])
    return hop[np.ix_(idx, idx)], zz[np.ix_(idx, idx)], idx


def dense_xxz(N: int, J_z: float, J_xy: float = 1.0, Sz: float | None = None):
    """Dense periodic XXZ matrix; restricted to a magnetization sector if given."""
    hop, zz, idx = _dense_parts(N, Sz)
    return J_xy * hop + J_z * zz, idx


def dense_reference(N: int, J_z: float, J_xy: float = 1.0, Sz: float = 0, times=()):
    """Full eigendecomposition and exact propagators ``exp(-i H t)`` for a sector."""
    H, idx = dense_xxz(N, J_z, J_xy, Sz)
    w, v = np.linalg.eigh(H)
    props = [scipy.linalg.expm(-1j * H * t) for t in times]
    return {"configs": idx, "hamiltonian": H, "eigenvalues": w, "eigenvectors": v, "propagators": props}


def dense_rate_function(N: int, ramp: RampProtocol, T: float, dt: float, J_xy: float = 1.0, Sz: float = 0) -> float:
    """XXZ rate function with dense midpoint exponentials in the full sector."""
    hop, zz, _ = _dense_parts(N, Sz)
    psi = np.linalg.eigh(J_xy * hop + ramp.lambda_i * zz)[1][:, 0].astype(complex)
    target = np.linalg.eigh(J_xy * hop + ramp.lambda_f * zz)[1][:, 0]
    n = max(1, math.ceil(T / dt - 1e-9)) if T > 0 else 0
    for m in range(n):
        Hm = J_xy * hop + ramp.at((m + 0.5) / n) * zz
        psi = scipy.linalg.expm(-1j * Hm * (T / n)) @ psi
    F = abs(np.vdot(target, psi)) ** 2
    return -math.log(F) / N
