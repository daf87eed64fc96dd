"""Markovian master equations in the eigenbasis of the cavity system.

Density matrices are stored in the eigenbasis of the system Hamiltonian,
``rho[a, b] = <a|rho|b>``. Frequencies and temperatures share one unit
(``k_B T / hbar`` for the temperature), so ``n(w) = 1/(exp(w/T) - 1)``.

Three generators are provided:

* :func:`build_generator` -- the secular form with one jump operator
  ``|mu><nu|`` per transition (the production path);
* :func:`build_generator_pretrace` -- the form that keeps the cross terms
  between different transitions, for checking the secular approximation;
* :func:`build_generator_standard` -- damping through the bare photon
  operator ``a``, which does not relax to the interacting ground state.

The Hamiltonian part is always ``-i[H, rho]``.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from typing import Mapping

import numpy as np

from . import fock, kernels
from .errors import (
    DomainError,
    IntegrationError,
    InvalidRateError,
    NonUniqueSteadyStateError,
    ShapeError,
)
from .sec_rates import TransitionRates

STABILITY_GATE = 0.1
TRACE_TOL = 1e-8
DEFAULT_MAX_DIM = 30


def thermal_occupation(omega, temperature: float):
    """Bose occupation ``1/(exp(omega/T) - 1)``; zero at ``T = 0``."""
    omega = np.asarray(omega, dtype=float)
    if temperature < 0:
        raise DomainError("temperature must be non-negative")
    if np.any(omega <= 0):
        raise DomainError("occupation is defined for positive frequencies only")
    if temperature == 0:
        n = np.zeros_like(omega)
    else:
        with np.errstate(over="ignore"):
            n = 1.0 / np.expm1(omega / temperature)
    return float(n) if n.ndim == 0 else n


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """Validated density matrix (Hermitian, unit trace, positive)."""

    data: np.ndarray

    def __post_init__(self):
        rho = np.array(self.data, dtype=complex)
        if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
            raise ShapeError(f"density matrix must be square, got {rho.shape}")
        if np.max(np.abs(rho - rho.conj().T), initial=0.0) > 1e-12:
            raise ValueError("density matrix is not Hermitian")
        tr = np.trace(rho)
        if abs(tr - 1) > 1e-10:
            raise ValueError(f"density matrix trace is {tr.real:.12g}, not 1")
        if np.linalg.eigvalsh(rho).min() < -1e-10:
            raise ValueError("density matrix has negative eigenvalues")
        rho.setflags(write=False)
        object.__setattr__(self, "data", rho)

    @property
    def dim(self) -> int:
        return self.data.shape[0]

    @classmethod
    def pure(cls, vec) -> "DensityMatrix":
        vec = np.asarray(vec, dtype=complex)
        vec = vec / np.linalg.norm(vec)
        return cls(np.outer(vec, vec.conj()))

    @classmethod
    def basis(cls, dim: int, k: int) -> "DensityMatrix":
        rho = np.zeros((dim, dim), dtype=complex)
        rho[k, k] = 1.0
        return cls(rho)

    def populations(self) -> np.ndarray:
        return np.diag(self.data).real.copy()

    def expectation(self, op: np.ndarray) -> complex:
        return complex(np.trace(self.data @ op))

    def fidelity_pure(self, vec) -> float:
        """``<psi|rho|psi>`` for a normalized state vector."""
        vec = np.asarray(vec, dtype=complex)
        return float(np.vdot(vec, self.data @ vec).real)


def trace_distance(r1, r2) -> float:
    a = r1.data if isinstance(r1, DensityMatrix) else np.asarray(r1)
    b = r2.data if isinstance(r2, DensityMatrix) else np.asarray(r2)
    return 0.5 * float(np.sum(np.abs(np.linalg.eigvalsh(a - b))))


def _lindblad_super(L: np.ndarray, gamma: float) -> np.ndarray:
    """Row-major superoperator of ``gamma (L rho L† - {L†L, rho}/2)``."""
    n = L.shape[0]
    eye = np.eye(n)
    LdL = L.conj().T @ L
    return gamma * (np.kron(L, L.conj()) - 0.5 * np.kron(LdL, eye) - 0.5 * np.kron(eye, LdL.T))


def _hamiltonian_super(freqs: np.ndarray) -> np.ndarray:
    return np.diag((-1j * np.subtract.outer(freqs, freqs)).ravel())


@dataclass(frozen=True, eq=False)
class LindbladGenerator:
    """Secular generator: diagonal Hamiltonian plus ``|mu><nu|`` channels.

    Parameters
    ----------
    frequencies : ndarray
        Eigenfrequencies ``omega_mu`` of the retained levels.
    mu, nu : ndarray of int
        Lower and upper level of each channel.
    omega : ndarray
        Channel frequencies ``omega_nu - omega_mu`` (positive).
    down, up : ndarray
        ``kappa (n + 1)`` and ``kappa n``.
    """

    frequencies: np.ndarray
    mu: np.ndarray
    nu: np.ndarray
    omega: np.ndarray
    down: np.ndarray
    up: np.ndarray

    def __post_init__(self):
        for name in ("frequencies", "mu", "nu", "omega", "down", "up"):
            dtype = int if name in ("mu", "nu") else float
            arr = np.atleast_1d(np.array(getattr(self, name), dtype=dtype))
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        if np.any(self.down < 0) or np.any(self.up < 0):
            raise InvalidRateError("channel rates must be non-negative")
        if np.any(self.omega <= 0):
            raise DomainError("channel frequencies must be positive")

    @property
    def dim(self) -> int:
        return self.frequencies.size

    @property
    def channels(self):
        return list(zip(self.mu.tolist(), self.nu.tolist(), self.omega.tolist(),
                        self.down.tolist(), self.up.tolist()))

    def transfer_matrix(self) -> np.ndarray:
        """``W[a, c]``: population rate from level ``c`` into level ``a``."""
        W = np.zeros((self.dim, self.dim))
        np.add.at(W, (self.mu, self.nu), self.down)
        np.add.at(W, (self.nu, self.mu), self.up)
        return W

    def decay_rates(self) -> np.ndarray:
        """Total outflow rate of each level."""
        return self.transfer_matrix().sum(axis=0)

    def max_rate(self) -> float:
        g = self.decay_rates()
        return float(g.max()) if g.size else 0.0

    def rhs(self, rho: np.ndarray) -> np.ndarray:
        w = self.frequencies
        out = -1j * np.subtract.outer(w, w) * rho
        out -= 0.5 * np.add.outer(self.decay_rates(), self.decay_rates()) * rho
        idx = np.arange(self.dim)
        out[idx, idx] += self.transfer_matrix() @ np.diag(rho)
        return out

    def superoperator(self) -> np.ndarray:
        # same matrix as summing _lindblad_super over channels, built directly
        n = self.dim
        w, G = self.frequencies, self.decay_rates()
        diag = -1j * np.subtract.outer(w, w) - 0.5 * np.add.outer(G, G)
        S = np.diag(diag.ravel()).astype(complex)
        pops = np.arange(n) * (n + 1)
        S[np.ix_(pops, pops)] += self.transfer_matrix()
        return S


@dataclass(frozen=True, eq=False)
class SuperoperatorGenerator:
    """Dense generator acting on row-major vectorized density matrices."""

    matrix: np.ndarray
    frequencies: np.ndarray

    @property
    def dim(self) -> int:
        return self.frequencies.size

    def rhs(self, rho: np.ndarray) -> np.ndarray:
        return (self.matrix @ rho.ravel()).reshape(rho.shape)

    def superoperator(self) -> np.ndarray:
        return self.matrix

    def max_rate(self) -> float:
        """Upper bound on the generator's spectral radius (induced 1-norm)."""
        return float(np.max(np.sum(np.abs(self.matrix), axis=0)))


def _check_levels(es: fock.EigenSystem, rates: TransitionRates):
    if len(rates) and (rates.nu.max() >= len(es) or rates.mu.min() < 0):
        raise ShapeError("rates refer to levels outside the eigensystem")
    if len(rates):
        om = es.frequencies[rates.nu] - es.frequencies[rates.mu]
        if not np.allclose(om, rates.omega, rtol=1e-9, atol=1e-12):
            raise ShapeError("rates were computed for a different eigensystem")


def build_generator(es: fock.EigenSystem, rates: TransitionRates,
                    temperature: float = 0.0) -> LindbladGenerator:
    """Secular generator from a transition-rate table."""
    if np.any(np.asarray(rates.kappa) < 0):
        raise InvalidRateError("negative transition rate")
    _check_levels(es, rates)
    n = thermal_occupation(rates.omega, temperature) if len(rates) else np.zeros(0)
    kappa = np.asarray(rates.kappa, dtype=float)
    return LindbladGenerator(es.frequencies.copy(), rates.mu, rates.nu, rates.omega,
                             kappa * (n + 1), kappa * n)


def build_generator_pretrace(es: fock.EigenSystem, X: fock.FockOperator, bare_rate,
                             temperature: float = 0.0) -> SuperoperatorGenerator:
    """Generator keeping the cross terms between different transitions.

    With ``x`` the full lowering part of ``X`` and
    ``y = |mu><mu|X|nu><nu|`` each transition contributes::

        kb/2 { n     [x† rho y + y† rho x - x y† rho - rho y x†]
             + (n+1) [x rho y† + y rho x† - x† y rho - rho y† x] }

    ``bare_rate`` is a callable of frequency (e.g. ``SecFlavor.bare_rate``).
    """
    M = es.matrix(X)
    n_lev = len(es)
    x = np.triu(M, 1)
    xd = x.conj().T
    eye = np.eye(n_lev)
    S = _hamiltonian_super(es.frequencies).astype(complex)

    def left(A):
        return np.kron(A, eye)

    def right(B):
        return np.kron(eye, B.T)

    for mu in range(n_lev):
        for nu in range(mu + 1, n_lev):
            if x[mu, nu] == 0:
                continue
            om = es.gap(nu, mu)
            if om <= 0:
                continue
            kb = float(bare_rate(om))
            if kb < 0:
                raise InvalidRateError(f"negative bare rate at omega={om:g}")
            nth = thermal_occupation(om, temperature)
            y = np.zeros_like(x)
            y[mu, nu] = x[mu, nu]
            yd = y.conj().T
            up = (left(xd) @ right(y) + left(yd) @ right(x)
                  - left(x @ yd) - right(y @ xd))
            down = (left(x) @ right(yd) + left(y) @ right(xd)
                    - left(xd @ y) - right(yd @ x))
            S += 0.5 * kb * (nth * up + (nth + 1) * down)
    return SuperoperatorGenerator(S, es.frequencies.copy())


def build_generator_standard(es: fock.EigenSystem, kappa0: float, omega_ref: float,
                             temperature: float = 0.0) -> SuperoperatorGenerator:
    """Damping through the bare photon operator: ``kappa0 D[a]`` (+ thermal ``D[a†]``).

    The thermal occupation is taken at the bare resonator frequency ``omega_ref``.
    """
    if kappa0 < 0:
        raise InvalidRateError("kappa0 must be non-negative")
    a, _ = fock.two_mode_ops(es.dims)
    A = es.matrix(a)
    nth = thermal_occupation(omega_ref, temperature)
    S = _hamiltonian_super(es.frequencies).astype(complex)
    S += _lindblad_super(A, kappa0 * (nth + 1))
    if nth:
        S += _lindblad_super(A.conj().T, kappa0 * nth)
    return SuperoperatorGenerator(S, es.frequencies.copy())


def bare_cavity_generator(omega_z: float, kappa0: float, n_levels: int = 10,
                          temperature: float = 0.0) -> LindbladGenerator:
    """Single damped mode truncated at ``n_levels`` photons (``|n> -> |n-1>`` at ``kappa0 n``)."""
    n = np.arange(1, n_levels)
    rates = TransitionRates(n - 1, n, np.full(n.size, float(omega_z)), kappa0 * n)
    nth = thermal_occupation(omega_z, temperature)
    return LindbladGenerator(omega_z * np.arange(n_levels), rates.mu, rates.nu, rates.omega,
                             rates.kappa * (nth + 1), rates.kappa * nth)


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Sampled density matrices (eigenbasis) at ``times``."""

    times: np.ndarray
    states: np.ndarray

    def populations(self) -> np.ndarray:
        return np.einsum("tii->ti", self.states).real

    def expectation(self, op: np.ndarray) -> np.ndarray:
        return np.einsum("tij,ji->t", self.states, op)

    def final(self) -> DensityMatrix:
        rho = self.states[-1]
        return DensityMatrix(0.5 * (rho + rho.conj().T))

    def to_csv(self, observables: Mapping[str, np.ndarray] | None = None, digits: int = 12) -> str:
        """CSV text with ``t``, populations ``p0..`` and real parts of observables."""
        observables = dict(observables or {})
        pops = self.populations()
        cols = ["t"] + [f"p{k}" for k in range(pops.shape[1])] + list(observables)
        values = [self.expectation(op).real for op in observables.values()]
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(cols)
        for i, t in enumerate(self.times):
            row = [t, *pops[i], *(v[i] for v in values)]
            w.writerow([f"{float(x):.{digits}g}" for x in row])
        return buf.getvalue()


def _as_matrix(rho0, dim: int) -> np.ndarray:
    rho = rho0.data if isinstance(rho0, DensityMatrix) else DensityMatrix(rho0).data
    if rho.shape != (dim, dim):
        raise ShapeError(f"initial state is {rho.shape}, generator acts on dim {dim}")
    return np.array(rho, dtype=complex)


def evolve(gen, rho0, t_final: float, dt: float, stride: int = 1) -> Trajectory:
    """Fixed-step RK4 integration from ``rho0`` to ``t_final``.

    The secular generator is integrated in the interaction picture (the
    dissipator commutes with the free rotation), so only ``dt * max_rate``
    is gated; dense generators are gated on their spectral-radius bound.

    Raises
    ------
    DomainError
        If ``dt * max_rate >= 0.1``.
    IntegrationError
        If the trace drifts by more than 1e-8.
    """
    if not (dt > 0 and t_final >= 0):
        raise DomainError("need dt > 0 and t_final >= 0")
    if int(stride) < 1:
        raise DomainError("stride must be >= 1")
    stride = int(stride)
    if dt * gen.max_rate() >= STABILITY_GATE:
        raise DomainError(f"dt*max_rate = {dt * gen.max_rate():.3g} fails the stability gate "
                          f"(< {STABILITY_GATE:g})")
    nsteps = int(math.ceil(t_final / dt - 1e-9))
    if nsteps:
        dt = t_final / nsteps
    rho = _as_matrix(rho0, gen.dim)
    if isinstance(gen, LindbladGenerator):
        samples = kernels.secular_rk4(gen.decay_rates(), gen.transfer_matrix(), rho, dt,
                                      nsteps, stride)
        times = dt * stride * np.arange(samples.shape[0])
        w = gen.frequencies
        phase = np.exp(-1j * np.subtract.outer(w, w)[None, :, :] * times[:, None, None])
        samples = samples * phase
    else:
        samples, times = _rk4_dense(gen.matrix, rho, dt, nsteps, stride)
    drift = np.max(np.abs(np.einsum("tii->t", samples) - 1.0))
    if not np.isfinite(drift) or drift > TRACE_TOL:
        raise IntegrationError(f"trace drifted by {drift:.3g}")
    return Trajectory(times, samples)


def _rk4_dense(S, rho, dt, nsteps, stride):
    shape = rho.shape
    v = rho.ravel().copy()
    out = [v.reshape(shape).copy()]
    for step in range(1, nsteps + 1):
        k1 = S @ v
        k2 = S @ (v + 0.5 * dt * k1)
        k3 = S @ (v + 0.5 * dt * k2)
        k4 = S @ (v + dt * k3)
        v = v + (dt / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        if step % stride == 0:
            out.append(v.reshape(shape).copy())
    samples = np.array(out)
    return samples, dt * stride * np.arange(samples.shape[0])


def steady_state(gen, max_dim: int = DEFAULT_MAX_DIM, rtol: float = 1e-12) -> DensityMatrix:
    """Null vector of the dense superoperator, normalized to unit trace.

    Raises
    ------
    NonUniqueSteadyStateError
        If the null space has dimension > 1; ``.basis`` holds the candidates.
    """
    n = gen.dim
    if n > max_dim:
        raise DomainError(f"generator dimension {n} exceeds the cap {max_dim}")
    S = gen.superoperator()
    sv = np.linalg.svd(S, compute_uv=False)
    null_dim = int(np.sum(sv <= rtol * sv[0])) if sv[0] > 0 else S.shape[0]
    if null_dim > 1:
        _, _, vh = np.linalg.svd(S)
        basis = [v.conj().reshape(n, n) for v in vh[-null_dim:]]
        raise NonUniqueSteadyStateError(f"steady state is not unique (null space dimension "
                                        f"{null_dim})", basis=basis)
    A = S.copy()
    b = np.zeros(n * n, dtype=complex)
    A[0, :] = np.eye(n).ravel()
    b[0] = 1.0
    rho = np.linalg.solve(A, b).reshape(n, n)
    rho = 0.5 * (rho + rho.conj().T)
    rho = rho / np.trace(rho).real
    # clip round-off negativity below the validation threshold
    w, V = np.linalg.eigh(rho)
    if w.min() < 0:
        w = np.clip(w, 0, None)
        rho = (V * w) @ V.conj().T
        rho = rho / np.trace(rho).real
    return DensityMatrix(rho)


def balance_populations(gen: LindbladGenerator) -> np.ndarray:
    """Stationary populations of the secular rate equations ``W p = diag(G) p``."""
    W = gen.transfer_matrix()
    A = W - np.diag(W.sum(axis=0))
    A[0, :] = 1.0
    b = np.zeros(gen.dim)
    b[0] = 1.0
    return np.linalg.solve(A, b)
