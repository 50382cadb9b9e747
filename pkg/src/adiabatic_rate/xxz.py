"""Exact diagonalization of the periodic XXZ chain under a ``J_z`` ramp.

    H = -J_xy sum_i (S^x_i S^x_{i+1} + S^y_i S^y_{i+1}) - J_z sum_i S^z_i S^z_{i+1}

Configurations are integers whose set bits are up spins.  A sector fixes the
magnetization and may additionally be restricted to translation-invariant
(zero-momentum) states; the two Neel states only combine symmetrically there,
which selects the positive-parity ground state deep in the antiferromagnet.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from itertools import combinations

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import eigsh

from .core import DomainError, RampProtocol

MAX_SITES = 24
DENSE_LIMIT = 400
RESIDUAL_TOL = 1e-10


class KrylovError(RuntimeError):
    """Krylov exponential failed to converge within the subspace budget."""


class ConvergenceError(RuntimeError):
    """Eigensolver did not reach the residual tolerance."""


def _rotate(x, N):
    # cyclic translation by one site
    return (x >> 1) | ((x & 1) << (N - 1))


@dataclass(frozen=True)
class SpinSectorBasis:
    """Configurations with ``N/2 + Sz`` up spins, ascending.

    With ``symmetric=True`` each entry is the smallest configuration of its
    translation orbit and ``periods`` holds the orbit lengths; the basis vector
    is the normalized uniform superposition over the orbit.
    """

    N: int
    Sz: float
    states: np.ndarray = field(repr=False)
    symmetric: bool = False
    periods: np.ndarray | None = field(default=None, repr=False)

    @property
    def dim(self) -> int:
        return len(self.states)

    def index(self, config) -> np.ndarray:
        """Positions of ``config`` (representatives if symmetric); -1 if absent."""
        config = np.asarray(config, dtype=np.int64)
        pos = np.searchsorted(self.states, config)
        pos = np.minimum(pos, self.dim - 1)
        return np.where(self.states[pos] == config, pos, -1)

    def representative(self, config) -> np.ndarray:
        config = np.asarray(config, dtype=np.int64)
        rep = config.copy()
        y = config.copy()
        for _ in range(self.N - 1):
            y = _rotate(y, self.N)
            np.minimum(rep, y, out=rep)
        return rep


def build_basis(N: int, Sz: float = 0, symmetric: bool = False) -> SpinSectorBasis:
    if N < 2 or N % 2:
        raise DomainError(f"N must be even and >= 2, got {N}")
    if N > MAX_SITES:
        raise MemoryError(f"N={N} exceeds the {MAX_SITES}-site limit for exact diagonalization")
    n_up = N / 2 + Sz
    if abs(Sz) > N / 2 or n_up != int(n_up):
        raise DomainError(f"invalid magnetization Sz={Sz} for N={N}")
    n_up = int(n_up)
    states = np.array(sorted(sum(1 << i for i in c) for c in combinations(range(N), n_up)), dtype=np.int64)
    if not symmetric:
        return SpinSectorBasis(N, Sz, states)
    base = SpinSectorBasis(N, Sz, states)
    reps = np.unique(base.representative(states))
    periods = np.zeros(len(reps), dtype=np.int64)
    y = reps.copy()
    for r in range(1, N + 1):
        y = _rotate(y, N)
        hit = (y == reps) & (periods == 0)
        periods[hit] = r
    return SpinSectorBasis(N, Sz, reps, True, periods)


@dataclass
class EdState:
    basis: SpinSectorBasis
    amplitudes: np.ndarray

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))


class XXZHamiltonian:
    """Sparse ``H = J_xy * hopping + J_z * zz`` on one sector.

    ``hopping`` holds the flip-flop elements of ``-sum (SxSx + SySy)``;
    ``zz`` is the diagonal of ``-sum SzSz``.
    """

    def __init__(self, basis: SpinSectorBasis):
        self.basis = basis
        N = basis.N
        states = basis.states
        zz = np.zeros(basis.dim)
        rows, cols, vals = [], [], []
        for i in range(N):
            j = (i + 1) % N
            bi = (states >> i) & 1
            bj = (states >> j) & 1
            zz -= 0.25 * np.where(bi == bj, 1.0, -1.0)
            flip = np.nonzero(bi != bj)[0]
            target = states[flip] ^ ((1 << i) | (1 << j))
            if basis.symmetric:
                target = basis.representative(target)
            pos = basis.index(target)
            amp = np.full(len(flip), -0.5)
            if basis.symmetric:
                amp = amp * np.sqrt(basis.periods[flip] / basis.periods[pos])
            rows.append(pos)
            cols.append(flip)
            vals.append(amp)
        d = basis.dim
        self.hopping = sp.csr_matrix(
            (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(d, d)
        )
        self.hopping.sum_duplicates()
        self.zz = zz

    def matrix(self, J_z: float, J_xy: float = 1.0) -> sp.csr_matrix:
        return (J_xy * self.hopping + sp.diags(J_z * self.zz)).tocsr()

    def apply(self, psi: np.ndarray, J_z: float, J_xy: float = 1.0) -> np.ndarray:
        return J_xy * (self.hopping @ psi) + J_z * self.zz * psi


@lru_cache(maxsize=16)
def _cached_hamiltonian(N: int, Sz: float, symmetric: bool) -> XXZHamiltonian:
    return XXZHamiltonian(build_basis(N, Sz, symmetric))


def hamiltonian(N: int, Sz: float = 0, symmetric: bool = True) -> XXZHamiltonian:
    return _cached_hamiltonian(int(N), float(Sz), bool(symmetric))


def apply_hamiltonian(state: EdState, J_xy: float, J_z: float) -> EdState:
    b = state.basis
    H = hamiltonian(b.N, b.Sz, b.symmetric)
    return EdState(b, H.apply(state.amplitudes, J_z, J_xy))


def _fix_sign(v: np.ndarray) -> np.ndarray:
    k = int(np.argmax(np.abs(v)))
    return v * (np.abs(v[k]) / v[k])


def ground_state(N: int, J_xy: float, J_z: float, Sz: float = 0, symmetric: bool = True):
    """Lowest eigenpair ``(EdState, energy)`` of the sector Hamiltonian.

    The default zero-momentum sector holds the symmetric Neel combination in
    the antiferromagnet and the unique ground state in the XY phase.
    """
    H = hamiltonian(N, Sz, symmetric)
    M = H.matrix(J_z, J_xy)
    d = H.basis.dim
    if d <= DENSE_LIMIT:
        w, v = np.linalg.eigh(M.toarray())
        E, psi = w[0], v[:, 0]
    else:
        v0 = np.ones(d) / math.sqrt(d)
        w, v = eigsh(M, k=1, which="SA", v0=v0, tol=1e-14, ncv=min(d, 40), maxiter=100 * d)
        E, psi = w[0], v[:, 0]
    psi = _fix_sign(psi.astype(complex))
    psi /= np.linalg.norm(psi)
    res = np.linalg.norm(M @ psi - E * psi)
    if res > RESIDUAL_TOL:
        raise ConvergenceError(f"ground-state residual {res:.3g} exceeds {RESIDUAL_TOL}")
    return EdState(H.basis, psi), float(E)


def expm_krylov(matvec, v: np.ndarray, tau: float, krylov_dim: int = 30, tol: float = 1e-12) -> np.ndarray:
    """``exp(-i tau H) v`` for Hermitian ``H`` by Lanczos.

    Grows the subspace until the a-posteriori error estimate
    ``beta_{m} |[exp(-i tau T_m) e_1]_m|`` drops below ``tol``.
    """
    beta0 = np.linalg.norm(v)
    if beta0 == 0:
        return v.copy()
    V = np.empty((krylov_dim + 1, len(v)), dtype=complex)
    alpha = np.zeros(krylov_dim)
    beta = np.zeros(krylov_dim)
    V[0] = v / beta0
    for j in range(krylov_dim):
        w = matvec(V[j])
        alpha[j] = np.vdot(V[j], w).real
        w = w - alpha[j] * V[j]
        if j > 0:
            w = w - beta[j - 1] * V[j - 1]
        # full reorthogonalization keeps the small subspace accurate
        w = w - V[: j + 1].T @ (V[: j + 1].conj() @ w)
        beta[j] = np.linalg.norm(w)
        m = j + 1
        Tm = np.diag(alpha[:m]) + np.diag(beta[: m - 1], 1) + np.diag(beta[: m - 1], -1)
        theta, S = np.linalg.eigh(Tm)
        coeff = S @ (np.exp(-1j * tau * theta) * S[0].conj())
        if beta[j] < 1e-14 * max(1.0, abs(alpha[j])):
            return beta0 * (coeff @ V[:m])
        if beta[j] * abs(coeff[-1]) < tol:
            return beta0 * (coeff @ V[:m])
        V[j + 1] = w / beta[j]
    raise KrylovError(
        f"Krylov exponential not converged in {krylov_dim} vectors (estimate {beta[-1] * abs(coeff[-1]):.3g})"
    )


def default_dt(T: float) -> float:
    return min(0.01, T / 100.0) if T > 0 else 0.01


def propagate(state: EdState, ramp: RampProtocol, T: float, dt: float | None = None,
              J_xy: float = 1.0, krylov_dim: int = 30, tol: float = 1e-12) -> EdState:
    """Time-ordered product of midpoint exponentials ``exp(-i H(t_mid) dt)``."""
    if T < 0:
        raise DomainError("T must be non-negative")
    if T == 0:
        return EdState(state.basis, state.amplitudes.copy())
    dt = default_dt(T) if dt is None else dt
    if dt <= 0:
        raise DomainError("dt must be positive")
    n = max(1, math.ceil(T / dt - 1e-9))
    step = T / n
    b = state.basis
    H = hamiltonian(b.N, b.Sz, b.symmetric)
    psi = state.amplitudes.astype(complex)
    for m in range(n):
        J_z = ramp.at((m + 0.5) / n)
        psi = expm_krylov(lambda x: H.apply(x, J_z, J_xy), psi, step, krylov_dim, tol)
    return EdState(b, psi)


def sector_for(phase: str, N: int) -> float:
    """Magnetization sector used for ramps in ``phase`` ("fm", "afm" or "xy")."""
    if phase == "fm":
        return N / 2
    if phase in ("afm", "xy"):
        return 0
    raise DomainError(f"unknown phase {phase!r}")


def infidelity(target: EdState, psi: EdState) -> float:
    """``1 - |<target|psi>|^2 / |psi|^2`` from the orthogonal remainder."""
    ov = np.vdot(target.amplitudes, psi.amplitudes)
    rest = psi.amplitudes - ov * target.amplitudes
    return float(np.vdot(rest, rest).real / np.vdot(psi.amplitudes, psi.amplitudes).real)


def rate_function(N: int, ramp: RampProtocol, T: float, dt: float | None = None, Sz: float = 0,
                  J_xy: float = 1.0, krylov_dim: int = 30, symmetric: bool = True,
                  stats: dict | None = None) -> float:
    """``f_N(T) = -(1/N) ln |<0(J_z,f)|U(T)|0(J_z,i)>|^2``."""
    psi0, _ = ground_state(N, J_xy, ramp.lambda_i, Sz, symmetric)
    target, _ = ground_state(N, J_xy, ramp.lambda_f, Sz, symmetric)
    psi = propagate(psi0, ramp, T, dt, J_xy, krylov_dim)
    if stats is not None:
        drift = abs(psi.norm**2 - 1.0)
        stats["max_norm_drift"] = max(stats.get("max_norm_drift", 0.0), drift)
    g = infidelity(target, psi)
    if g >= 1:
        raise DomainError(f"overlap underflow for N={N}, T={T}")
    return float(-math.log1p(-g) / N)
