"""Transverse-field Ising chain as a set of independent (k, -k) pair modes.

Each positive momentum ``k`` labels the two-level system spanned by the
Bogoliubov vacuum and the pair state ``c_k^dag c_{-k}^dag |vac>``.  In a real
gauge the pair Hamiltonian is

    H_k(h) = -2 (h - cos k) sigma_z - 2 sin k sigma_x,

with eigenvalues ``+-eps_k``, ``eps_k = 2 sqrt((cos k - h)^2 + sin^2 k)``, and
ground state ``(cos theta, sin theta)`` where ``tan 2 theta = sin k / (h - cos k)``.
"""

from __future__ import annotations

import math

import numpy as np

from .core import DomainError, RampProtocol, momentum_grid, rate_from_infidelities
from .ode import DEFAULT_ATOL, DEFAULT_RTOL, CoefficientState, IntegrationError, ModeSystem, integrate

PAIR_WEIGHT = 2.0
CHUNK = 1024


def dispersion(k, h):
    return 2.0 * np.sqrt((np.cos(k) - h) ** 2 + np.sin(k) ** 2)


def bogoliubov_angle(k, h):
    """Rotation angle of the instantaneous ground state in the pair basis.

    ``theta`` lies in ``(0, pi/2)`` for ``0 < k < pi``, tends to 0 as ``h -> +inf``
    and is continuous in ``h`` along any ramp since ``sin k > 0`` keeps the
    ``atan2`` away from its branch cut.
    """
    k = np.asarray(k, dtype=float)
    h = np.asarray(h, dtype=float)
    sk = np.sin(k)
    dh = h - np.cos(k)
    closed = (np.abs(sk) < 1e-15) & (np.abs(dh) < 1e-15)
    if np.any(closed):
        raise DomainError("gap closes at this (k, h); angle undefined")
    theta = 0.5 * np.arctan2(sk, dh)
    return theta if theta.ndim else float(theta)


def mode_hamiltonian(k: float, h: float) -> np.ndarray:
    """Real 2x2 pair Hamiltonian in the (vacuum, pair) basis."""
    a = 2.0 * (h - math.cos(k))
    b = 2.0 * math.sin(k)
    return np.array([[-a, -b], [-b, a]])


def quench_overlap(k, h_i, h_f):
    """Sudden-quench ground-state fidelity ``cos^2(theta_f - theta_i)``."""
    return np.cos(bogoliubov_angle(k, h_f) - bogoliubov_angle(k, h_i)) ** 2


def coupling(k, s, ramp: RampProtocol):
    """``<1(s)|d_s 0(s)> = d theta/ds`` for the mode ``k`` at progress ``s``.

    Equals ``<1|dH/ds|0> / (E_0 - E_1)``; its magnitude is
    ``|sin k| |dh| / (2 ((h - cos k)^2 + sin^2 k))``.
    """
    k = np.asarray(k, dtype=float)
    h = ramp.at(s)
    sk = np.sin(k)
    return -ramp.delta * sk / (2.0 * ((h - np.cos(k)) ** 2 + sk**2))


def mode_system(ks, ramp: RampProtocol) -> ModeSystem:
    ks = np.asarray(ks, dtype=float).reshape(-1)
    ck = np.cos(ks)[:, None]
    sk = np.sin(ks)[:, None]
    sk2 = sk**2
    h_i, dh = ramp.lambda_i, ramp.delta
    half_eps2 = {}

    def _q(s):
        # (eps_k/2)^2, shared by the gap and coupling calls at the same s
        q = half_eps2.get(s)
        if q is None:
            h = h_i + s * dh
            q = (h - ck) ** 2 + sk2
            half_eps2.clear()
            half_eps2[s] = q
        return q

    def gap(s):
        return 4.0 * np.sqrt(_q(s))

    def coup(s):
        # <0|d_s 1> = -d theta/ds
        return (0.5 * dh) * sk / _q(s)

    return ModeSystem(level_count=2, pairs=[(0, 1)], gap=gap, coupling=coup, batch=len(ks))


def evolve_modes(ks, ramp: RampProtocol, T: float, rtol=DEFAULT_RTOL, atol=DEFAULT_ATOL, chunk=CHUNK):
    """Integrate every mode in ``ks``; returns ``(infidelity, max_norm_drift)``.

    Modes are processed in fixed, contiguous chunks so the result does not
    depend on how the caller batches its requests.
    """
    ks = np.asarray(ks, dtype=float).reshape(-1)
    if np.any((ks <= 0) | (ks >= np.pi)):
        raise DomainError("mode momenta must lie strictly inside (0, pi)")
    out = np.empty(len(ks))
    drift = 0.0
    for start in range(0, len(ks), chunk):
        sl = slice(start, start + chunk)
        try:
            state = integrate(mode_system(ks[sl], ramp), 0, T, rtol, atol)
        except IntegrationError as exc:
            raise IntegrationError(
                f"TFIM modes k in [{ks[sl][0]:.6g}, {ks[sl][-1]:.6g}] at T={T}: {exc}", exc.s
            ) from exc
        out[sl] = state.infidelity(0)
        drift = max(drift, state.max_norm_drift)
    return out, drift


def mode_fidelity(k, ramp: RampProtocol, T: float, rtol=DEFAULT_RTOL, atol=DEFAULT_ATOL):
    """``|c_0(s=1)|^2`` for one momentum or an array of momenta."""
    scalar = np.ndim(k) == 0
    g, _ = evolve_modes(np.atleast_1d(k), ramp, T, rtol, atol)
    F = 1.0 - g
    return float(F[0]) if scalar else F


def _record(stats, drift):
    if stats is not None:
        stats["max_norm_drift"] = max(stats.get("max_norm_drift", 0.0), drift)


def rate_function_finite(N: int, ramp: RampProtocol, T: float, rtol=DEFAULT_RTOL, atol=DEFAULT_ATOL,
                         stats: dict | None = None):
    """``f_N(T) = -(2/N) sum_{k>0} ln F_k`` on the antiperiodic grid.

    If ``stats`` is a dict, the largest norm drift seen is stored under
    ``"max_norm_drift"``.
    """
    grid = momentum_grid(N)
    if ramp.delta == 0:
        return 0.0
    g, drift = evolve_modes(grid.modes, ramp, T, rtol, atol)
    _record(stats, drift)
    try:
        return rate_from_infidelities(g, N, PAIR_WEIGHT)
    except DomainError as exc:
        bad = int(np.argmax(g >= 1))
        raise DomainError(f"mode k={grid.modes[bad]:.6g} fidelity underflow at T={T}") from exc


def quench_rate_function(N: int, ramp: RampProtocol) -> float:
    grid = momentum_grid(N)
    g = 1.0 - quench_overlap(grid.modes, ramp.lambda_i, ramp.lambda_f)
    return rate_from_infidelities(g, N, PAIR_WEIGHT)


# Gauss-Kronrod 7-15 nodes on [-1, 1]
_XGK = np.array([
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.0,
])
_WGK = np.array([
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714,
])
_WG = np.array([
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327,
])
_NODES = np.concatenate([-_XGK[:-1], _XGK[::-1]])
_WK = np.concatenate([_WGK[:-1], _WGK[::-1]])
_WGAUSS = np.zeros(15)
_WGAUSS[[1, 3, 5, 7, 9, 11, 13]] = np.concatenate([_WG[:-1], _WG[::-1]])


def _gk_batch(fun, intervals):
    a = intervals[:, 0:1]
    b = intervals[:, 1:2]
    half = 0.5 * (b - a)
    x = 0.5 * (a + b) + half * _NODES
    fx = fun(x.ravel()).reshape(x.shape)
    kron = (half[:, 0]) * (fx @ _WK)
    gauss = (half[:, 0]) * (fx @ _WGAUSS)
    return kron, np.abs(kron - gauss)


def rate_function_continuum(ramp: RampProtocol, T: float, quadrature_tol: float = 1e-8,
                            rtol=DEFAULT_RTOL, atol=DEFAULT_ATOL, max_intervals: int = 2000,
                            stats: dict | None = None):
    """``(1/pi) int_0^pi -ln F_k dk``, the N -> infinity limit of the pair sum.

    Adaptive Gauss-Kronrod (7, 15); every refinement round evaluates all new
    nodes in one batched integration.
    """
    if ramp.delta == 0:
        return 0.0

    def integrand(k):
        g, drift = evolve_modes(np.sort(k), ramp, T, rtol, atol)
        _record(stats, drift)
        order = np.argsort(np.argsort(k))
        return -np.log1p(-g[order])

    intervals = np.linspace(0.0, np.pi, 9)
    intervals = np.column_stack([intervals[:-1], intervals[1:]])
    vals, errs = _gk_batch(integrand, intervals)
    while errs.sum() > quadrature_tol * max(1.0, abs(vals.sum())):
        if len(intervals) > max_intervals:
            raise IntegrationError(
                f"quadrature did not converge: error {errs.sum():.3g} > {quadrature_tol:.3g}", 1.0
            )
        worst = errs > max(errs.max() * 0.25, 0.5 * quadrature_tol / len(errs))
        split = intervals[worst]
        mid = 0.5 * (split[:, 0] + split[:, 1])
        new = np.concatenate([np.column_stack([split[:, 0], mid]), np.column_stack([mid, split[:, 1]])])
        nv, ne = _gk_batch(integrand, new)
        intervals = np.concatenate([intervals[~worst], new])
        vals = np.concatenate([vals[~worst], nv])
        errs = np.concatenate([errs[~worst], ne])
    return float(math.fsum(vals) / np.pi)


def landau_zener_estimate(k, T, alpha):
    """Excitation probability ``exp(-alpha k^2 T)`` of a slow critical mode."""
    return np.exp(-alpha * np.asarray(k) ** 2 * T)


def critical_momentum(T, alpha):
    """Momentum below which modes are more likely excited than not."""
    return np.sqrt(math.log(2.0) / (alpha * np.asarray(T)))
