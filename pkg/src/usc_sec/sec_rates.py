"""System-environment coupling flavors and transition-resolved loss rates.

A coupling flavor is a cavity-side operator ``X`` plus a bare-rate profile
``kappa_bar(omega)``. After the rotating-wave approximation in the true
eigenbasis, each transition ``nu -> mu`` (``nu > mu``) decays with rate::

    kappa[nu, mu] = kappa_bar(omega[nu] - omega[mu]) * |<mu|X|nu>|²

For the quadratic circuit models the same rates follow in closed form from
the Bogoliubov coefficients (``rates_circuit_a`` etc.).
"""
from __future__ import annotations

import enum
import itertools
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import fock
from .bogoliubov import BogoliubovModes, quadrature_weights
from .errors import (
    DephasingWarning,
    DomainError,
    IndependentTransitionWarning,
    OrderingError,
    VariantError,
)
from .models import ModelParams, Variant

SEPARATION_FACTOR = 5.0
EXACT_DEGENERACY = 1e-8


class CouplingKind(enum.Enum):
    XPLUS = "xplus"
    XMINUS = "xminus"
    GENERAL_FLUX = "general"
    CIRCUIT_A = "circuit_a"
    CIRCUIT_B = "circuit_b"
    FABRY_PEROT = "fabry_perot"
    TLR = "tlr"


class Quadrature(enum.Enum):
    PLUS = "+"    # a + a†
    MINUS = "-"   # i(a - a†)


@dataclass(frozen=True)
class SecFlavor:
    """Coupling operator and bare-rate profile of one SEC Hamiltonian.

    The bare rate is
    ``kappa_ref * (omega/omega_ref)**exponent / |1 - i*zeta_scale*omega|²``.
    The coupling operator is
    ``photon_weight * X(a) + matter_weight * X(b)`` with ``X`` the chosen
    quadrature.
    """

    kind: CouplingKind
    kappa_ref: float
    omega_ref: float
    exponent: float
    quadrature: Quadrature
    photon_weight: float = 1.0
    matter_weight: float = 0.0
    zeta_scale: float = 0.0
    good_cavity_violation: bool = False

    def __post_init__(self):
        if self.kappa_ref < 0:
            raise ValueError("kappa_ref must be non-negative")
        if not self.omega_ref > 0:
            raise ValueError("omega_ref must be positive")

    def bare_rate(self, omega):
        omega = np.asarray(omega, dtype=float)
        if np.any(omega <= 0):
            raise DomainError("bare rate is defined for positive frequencies only")
        rate = self.kappa_ref * (omega / self.omega_ref) ** self.exponent
        rate = rate / np.abs(1 - 1j * self.zeta_scale * omega) ** 2
        return float(rate) if rate.ndim == 0 else rate

    def coupling_operator(self, dims) -> fock.FockOperator:
        a, b = fock.two_mode_ops(dims)
        if self.quadrature is Quadrature.PLUS:
            xa, xb = a + a.dag, b + b.dag
        else:
            xa, xb = 1j * (a - a.dag), 1j * (b - b.dag)
        X = self.photon_weight * xa
        if self.matter_weight:
            X = X + self.matter_weight * xb
        return X


def make_flavor(kind: CouplingKind, p: ModelParams, zeta_scale: float = 0.0,
                transformed: bool = False) -> SecFlavor:
    """Flavor of ``kind`` for model ``p``.

    ``kappa_ref`` is the bare resonator rate at the model's ``omega_z``. With
    ``transformed=True`` the general flavor is expressed for the circuit-A
    Hamiltonian describing circuit B (extra matter weight ``2g``).
    """
    kappa, wz = p.kappa_lc0, p.omega_z
    q = Quadrature
    if kind is CouplingKind.XPLUS or kind is CouplingKind.GENERAL_FLUX:
        mw = 2 * p.g if transformed else 0.0
        return SecFlavor(kind, kappa, wz, 3, q.PLUS, matter_weight=mw)
    if kind is CouplingKind.XMINUS:
        return SecFlavor(kind, kappa, wz, 1, q.MINUS)
    if kind is CouplingKind.CIRCUIT_A:
        return SecFlavor(kind, kappa, wz, 1, q.MINUS, zeta_scale=zeta_scale)
    if kind is CouplingKind.CIRCUIT_B:
        ratio = p.omega_x / wz
        if transformed:
            return SecFlavor(kind, kappa, wz, 1, q.MINUS, 1.0, 2 * p.g * ratio, zeta_scale)
        return SecFlavor(kind, kappa, wz, 1, q.MINUS, 1 + 4 * p.g ** 2 * ratio, 2 * p.g * ratio,
                         zeta_scale)
    if kind is CouplingKind.FABRY_PEROT:
        # kappa_FP0(w) (w_m/w) with kappa_FP0 ∝ 1/w²
        return SecFlavor(kind, kappa, wz, -3, q.PLUS)
    if kind is CouplingKind.TLR:
        return SecFlavor(kind, kappa, wz, 3, q.PLUS)
    raise ValueError(f"unknown coupling kind {kind}")


@dataclass(frozen=True, eq=False)
class TransitionRates:
    """Downward transitions ``nu -> mu`` with frequencies and rates."""

    mu: np.ndarray
    nu: np.ndarray
    omega: np.ndarray
    kappa: np.ndarray
    labels: tuple = field(default=())

    def __post_init__(self):
        for name in ("mu", "nu", "omega", "kappa"):
            arr = np.atleast_1d(np.asarray(getattr(self, name)))
            object.__setattr__(self, name, arr)
        if np.any(self.kappa < 0):
            raise ValueError("rates must be non-negative")
        if np.any(self.nu <= self.mu):
            raise OrderingError("transitions must satisfy nu > mu")

    def __len__(self):
        return self.kappa.size

    def __iter__(self):
        return iter(zip(self.mu.tolist(), self.nu.tolist(), self.omega.tolist(), self.kappa.tolist()))

    def rate(self, mu: int, nu: int) -> float:
        hit = np.flatnonzero((self.mu == mu) & (self.nu == nu))
        return float(self.kappa[hit[0]]) if hit.size else 0.0


def lowering_part(X: fock.FockOperator, es: fock.EigenSystem, dephasing_tol: float = 1e-8,
                  basis: str = "fock"):
    """Lowering part ``sum_{mu, nu>mu} |mu><mu|X|nu><nu|``.

    Returned on the Fock basis by default, or as the eigenbasis matrix with
    ``basis="eigen"`` (non-zero only above the diagonal).
    """
    M = es.matrix(X)
    diag = np.abs(np.diag(M))
    if diag.size and diag.max() > dephasing_tol:
        warnings.warn(f"coupling operator has diagonal elements up to {diag.max():.3g}; "
                      "dropped (pure dephasing not modelled)", DephasingWarning, stacklevel=2)
    low = np.triu(M, 1)
    if basis == "eigen":
        return low
    return es.to_fock(low)


def transition_rate(f: SecFlavor, es: fock.EigenSystem, mu: int, nu: int) -> float:
    if nu <= mu:
        raise OrderingError(f"need nu > mu, got mu={mu}, nu={nu}")
    X = f.coupling_operator(es.dims)
    elem = fock.matrix_element(es.state(mu), X, es.state(nu))
    return f.bare_rate(es.gap(nu, mu)) * abs(elem) ** 2


def eigensystem_rates(f: SecFlavor, es: fock.EigenSystem, from_ground_only: bool = False,
                      min_rate: float = 0.0) -> TransitionRates:
    """Rates for every downward transition among the levels of ``es``."""
    X = f.coupling_operator(es.dims)
    M = es.matrix(X)
    n = len(es)
    nus = range(1, n)
    pairs = [(0, nu) for nu in nus] if from_ground_only else [
        (mu, nu) for mu, nu in itertools.combinations(range(n), 2)]
    mu = np.array([p[0] for p in pairs], dtype=int)
    nu = np.array([p[1] for p in pairs], dtype=int)
    omega = es.frequencies[nu] - es.frequencies[mu]
    keep = omega > EXACT_DEGENERACY
    mu, nu, omega = mu[keep], nu[keep], omega[keep]
    kappa = f.bare_rate(omega) * np.abs(M[mu, nu]) ** 2 if omega.size else np.zeros(0)
    kappa = np.atleast_1d(kappa)
    keep = kappa > min_rate
    return TransitionRates(mu[keep], nu[keep], omega[keep], kappa[keep])


def standard_sec_rate(es: fock.EigenSystem, mu: int, nu: int, kappa_bare) -> float:
    """Rate through the number-conserving coupling ``alpha† a + h.c.``.

    ``kappa_bare`` is a number or a callable of the transition frequency.
    """
    if nu <= mu:
        raise OrderingError(f"need nu > mu, got mu={mu}, nu={nu}")
    a, _ = fock.two_mode_ops(es.dims)
    omega = es.gap(nu, mu)
    kb = kappa_bare(omega) if callable(kappa_bare) else float(kappa_bare)
    return kb * abs(fock.matrix_element(es.state(mu), a, es.state(nu))) ** 2


def bare_rate_profile(f: SecFlavor, omega):
    return f.bare_rate(omega)


def _mode_rates(m: BogoliubovModes, kappa, labels=("L", "U")) -> TransitionRates:
    if m.near_degenerate:
        warnings.warn("lower and upper polaritons are degenerate; independent-transition "
                      "limit violated", IndependentTransitionWarning, stacklevel=3)
    return TransitionRates(np.zeros(2, dtype=int), np.array([1, 2]), m.omegas.copy(),
                           np.asarray(kappa, dtype=float), labels)


def _kappa0(m: BogoliubovModes, kappa0):
    return m.params.kappa_lc0 if kappa0 is None else float(kappa0)


def rates_circuit_a(m: BogoliubovModes, kappa0: float | None = None) -> TransitionRates:
    """``kappa_j = kappa0 (omega_j/omega_z) |w_j + y_j|²`` (circuit A coefficients).

    ``kappa0`` defaults to the bare rate at the model's ``omega_z``.
    """
    if m.variant is not Variant.CIRCUIT_A:
        raise VariantError("rates_circuit_a needs circuit-A coefficients")
    q = quadrature_weights(m)
    k = _kappa0(m, kappa0) * (m.omegas / m.params.omega_z) * np.abs(q[:, 0]) ** 2
    return _mode_rates(m, k)


def rates_circuit_b(m: BogoliubovModes, kappa0: float | None = None,
                    use_transformed: bool = False) -> TransitionRates:
    """Circuit-B rates.

    From circuit-B coefficients::

        kappa_j = kappa0 (w_j/wz) |(1 + 4g² wx/wz)(w+y) + 2g (wx/wz)(x+z)|²

    With ``use_transformed`` the circuit-A coefficients describing the same
    spectrum are used and the ``4g²`` term is absent.
    """
    p = m.params
    need = Variant.CIRCUIT_A if use_transformed else Variant.CIRCUIT_B
    if m.variant is not need:
        raise VariantError(f"rates_circuit_b(use_transformed={use_transformed}) "
                           f"needs {need.name} coefficients, got {m.variant.name}")
    q = quadrature_weights(m)
    ratio = p.omega_x / p.omega_z
    photon = 1.0 if use_transformed else 1 + 4 * p.g ** 2 * ratio
    amp = photon * q[:, 0] + 2 * p.g * ratio * q[:, 2]
    k = _kappa0(m, kappa0) * (m.omegas / p.omega_z) * np.abs(amp) ** 2
    return _mode_rates(m, k)


def rates_general(m: BogoliubovModes, kappa0: float | None = None,
                  variant: Variant | None = None) -> TransitionRates:
    """General-recipe rates ``kappa0 (omega_j/omega_z)³ |w_j - y_j|²``.

    ``variant`` names the physical circuit. Asking for circuit B while
    passing circuit-A coefficients selects the transformed form
    ``|(w-y) + 2g(x-z)|²``.
    """
    p = m.params
    variant = m.variant if variant is None else Variant(variant)
    q = quadrature_weights(m)
    if variant is m.variant:
        amp = q[:, 1]
    elif variant is Variant.CIRCUIT_B and m.variant is Variant.CIRCUIT_A:
        amp = q[:, 1] + 2 * p.g * q[:, 3]
    else:
        raise VariantError(f"cannot express circuit {variant.name} with {m.variant.name} coefficients")
    k = _kappa0(m, kappa0) * (m.omegas / p.omega_z) ** 3 * np.abs(amp) ** 2
    return _mode_rates(m, k)


def rates_standard(m: BogoliubovModes, kappa0: float | None = None) -> TransitionRates:
    """Number-conserving SEC: ``kappa0 |<G|a|1_j>|² = kappa0 |w_j|²``."""
    k = _kappa0(m, kappa0) * np.abs(m.w) ** 2
    return _mode_rates(m, k)


def check_independent_transitions(rates: TransitionRates, factor: float = SEPARATION_FACTOR,
                                  warn: bool = True) -> bool:
    """True when every pair of distinct transition frequencies is separated
    by more than ``factor`` times the larger of the two rates.

    Exactly coincident frequencies (ladder transitions of a harmonic
    spectrum) are treated as one Bohr frequency and not flagged.
    """
    om, ka = rates.omega, rates.kappa
    if om.size < 2:
        return True
    order = np.argsort(om)
    om, ka = om[order], ka[order]
    scale = max(float(np.max(np.abs(om))), 1.0)
    reach = factor * float(ka.max())
    ok = True
    for i in range(om.size):
        for j in range(i + 1, om.size):
            sep = om[j] - om[i]
            if sep >= reach:
                break
            if sep > EXACT_DEGENERACY * scale and sep < factor * max(ka[i], ka[j]):
                ok = False
    if not ok and warn:
        warnings.warn("transition frequencies closer than "
                      f"{factor:g}x their rates; post-trace RWA results are unreliable",
                      IndependentTransitionWarning, stacklevel=2)
    return ok
