"""Inner loops: secular master-equation integration and all-pass spectra.

Each kernel has a numba ``@njit`` version and a vectorized numpy version
with identical semantics. The numba path is used when numba imports and the
environment variable ``USC_NUMBA`` is not one of ``0/false/no/off``.
:func:`set_backend` switches at runtime (used by the benchmark).
"""
from __future__ import annotations

import os

import numpy as np

try:
    import numba
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None

_FALSE = {"0", "false", "no", "off"}


def _numba_requested() -> bool:
    return os.environ.get("USC_NUMBA", "1").strip().lower() not in _FALSE


USE_NUMBA = numba is not None and _numba_requested()


def backend() -> str:
    return "numba" if USE_NUMBA else "numpy"


def set_backend(name: str) -> None:
    global USE_NUMBA
    if name not in ("numba", "numpy"):
        raise ValueError(f"unknown backend {name!r}")
    if name == "numba" and numba is None:
        raise RuntimeError("numba is not installed")
    USE_NUMBA = name == "numba"


def _njit(fn):
    if numba is None:
        return fn
    return numba.njit(cache=True, fastmath=False)(fn)


# --- secular Lindblad generator -------------------------------------------
#
# Interaction picture, so only dissipation remains:
#   d rho[a,b]/dt = -(G[a]+G[b])/2 rho[a,b] + delta_ab sum_c W[a,c] rho[c,c]
# W[a,c] is the rate c -> a, G[c] = sum_a W[a,c].


def _secular_rhs_numpy(rho, half_sum, transfer):
    out = -half_sum * rho
    pops = np.diag(rho)
    idx = np.arange(rho.shape[0])
    out[idx, idx] += transfer @ pops
    return out


def secular_rk4_numpy(decay, transfer, rho0, dt, nsteps, stride):
    half_sum = 0.5 * (decay[:, None] + decay[None, :])
    nsamples = nsteps // stride + 1
    out = np.empty((nsamples,) + rho0.shape, dtype=np.complex128)
    rho = rho0.astype(np.complex128).copy()
    out[0] = rho
    k = 1
    for step in range(1, nsteps + 1):
        k1 = _secular_rhs_numpy(rho, half_sum, transfer)
        k2 = _secular_rhs_numpy(rho + 0.5 * dt * k1, half_sum, transfer)
        k3 = _secular_rhs_numpy(rho + 0.5 * dt * k2, half_sum, transfer)
        k4 = _secular_rhs_numpy(rho + dt * k3, half_sum, transfer)
        rho = rho + (dt / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        if step % stride == 0:
            out[k] = rho
            k += 1
    return out


def _secular_rhs_loop(rho, decay, transfer, out):
    n = rho.shape[0]
    for a in range(n):
        for b in range(n):
            out[a, b] = -0.5 * (decay[a] + decay[b]) * rho[a, b]
    for a in range(n):
        acc = 0.0
        for c in range(n):
            acc += transfer[a, c] * rho[c, c].real
        out[a, a] += acc


def _secular_rk4_loop(decay, transfer, rho0, dt, nsteps, stride):
    n = rho0.shape[0]
    nsamples = nsteps // stride + 1
    out = np.empty((nsamples, n, n), dtype=np.complex128)
    rho = rho0.copy()
    tmp = np.empty_like(rho)
    k1 = np.empty_like(rho)
    k2 = np.empty_like(rho)
    k3 = np.empty_like(rho)
    k4 = np.empty_like(rho)
    out[0] = rho
    k = 1
    for step in range(1, nsteps + 1):
        _secular_rhs_loop(rho, decay, transfer, k1)
        for a in range(n):
            for b in range(n):
                tmp[a, b] = rho[a, b] + 0.5 * dt * k1[a, b]
        _secular_rhs_loop(tmp, decay, transfer, k2)
        for a in range(n):
            for b in range(n):
                tmp[a, b] = rho[a, b] + 0.5 * dt * k2[a, b]
        _secular_rhs_loop(tmp, decay, transfer, k3)
        for a in range(n):
            for b in range(n):
                tmp[a, b] = rho[a, b] + dt * k3[a, b]
        _secular_rhs_loop(tmp, decay, transfer, k4)
        for a in range(n):
            for b in range(n):
                rho[a, b] += (dt / 6.0) * (k1[a, b] + 2.0 * k2[a, b] + 2.0 * k3[a, b] + k4[a, b])
        if step % stride == 0:
            out[k] = rho
            k += 1
    return out


_secular_rhs_loop = _njit(_secular_rhs_loop)
secular_rk4_numba = _njit(_secular_rk4_loop)


def secular_rk4(decay, transfer, rho0, dt, nsteps, stride=1):
    """Fixed-step RK4 of the secular dissipator; returns sampled states."""
    decay = np.ascontiguousarray(decay, dtype=np.float64)
    transfer = np.ascontiguousarray(transfer, dtype=np.float64)
    rho0 = np.ascontiguousarray(rho0, dtype=np.complex128)
    if USE_NUMBA:
        return secular_rk4_numba(decay, transfer, rho0, float(dt), int(nsteps), int(stride))
    return secular_rk4_numpy(decay, transfer, rho0, float(dt), int(nsteps), int(stride))


# --- all-pass reflection products -----------------------------------------


def allpass_numpy(omega, omega_t, kappa_t):
    delta = omega[:, None] - omega_t[None, :]
    half = 0.5 * kappa_t[None, :]
    r = np.prod((delta - 1j * half) / (delta + 1j * half), axis=1)
    delay = np.sum(kappa_t[None, :] / (delta ** 2 + half ** 2), axis=1)
    return r, delay


def _allpass_loop(omega, omega_t, kappa_t):
    m = omega.size
    r = np.ones(m, dtype=np.complex128)
    delay = np.zeros(m)
    for i in range(m):
        acc = 1.0 + 0.0j
        tau = 0.0
        for t in range(omega_t.size):
            d = omega[i] - omega_t[t]
            h = 0.5 * kappa_t[t]
            acc *= complex(d, -h) / complex(d, h)
            tau += kappa_t[t] / (d * d + h * h)
        r[i] = acc
        delay[i] = tau
    return r, delay


allpass_numba = _njit(_allpass_loop)


def allpass(omega, omega_t, kappa_t):
    """Product of single-transition reflection factors and the group delay."""
    omega = np.ascontiguousarray(omega, dtype=np.float64)
    omega_t = np.ascontiguousarray(omega_t, dtype=np.float64)
    kappa_t = np.ascontiguousarray(kappa_t, dtype=np.float64)
    if USE_NUMBA:
        return allpass_numba(omega, omega_t, kappa_t)
    return allpass_numpy(omega, omega_t, kappa_t)
