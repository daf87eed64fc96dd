"""Cavity-system Hamiltonians for the two resonator/CPB circuits.

Frequencies are dimensionless, in units of the matter transition frequency
``omega_x`` (which is therefore 1 unless set otherwise). ``g`` is the
dimensionless coupling, ``Omega_A = g*omega_z`` and ``Omega_B = g*omega_x``.

Circuit A (inductive resonator/CPB coupling)::

    H_A = wz a†a + wx b†b + Om_A (a+a†)(b+b†) + (Om_A²/wz) (b+b†)²

Circuit B (capacitive coupling)::

    H_B = wz a†a + wx b†b - Om_B (a-a†)(b-b†) + (Om_B²/wx) [i(a-a†)]²

Both are related by ``H_A = U† H_B U`` with ``U = exp[-g (a-a†)(b+b†)]``.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np
import scipy.constants as const
import scipy.linalg as sla
import scipy.sparse as sp

from . import fock
from .errors import InvalidDimensionError, NumericError, VariantError

GOOD_CAVITY_FACTOR = 0.05


class Variant(enum.Enum):
    CIRCUIT_A = "A"
    CIRCUIT_B = "B"
    GENERIC_RABI = "rabi"


@dataclass(frozen=True)
class ModelParams:
    """Dimensionless parameters of a resonator + matter model.

    ``kappa0_ref`` is the bare resonator loss rate at ``omega_z == omega_x``.
    With the resonator impedance and ``g`` held fixed the bare rate scales as
    ``(omega_z/omega_x)**3`` along a resonator-frequency sweep (see
    :attr:`kappa_lc0`).
    """

    omega_z: float
    g: float
    variant: Variant = Variant.CIRCUIT_A
    omega_x: float = 1.0
    kappa0_ref: float = 1e-3
    z_r: float | None = None
    diamagnetic: bool = True
    allow_bad_cavity: bool = False

    def __post_init__(self):
        if not (self.omega_z > 0 and self.omega_x > 0):
            raise ValueError("omega_z and omega_x must be positive")
        if self.g < 0:
            raise ValueError("g must be non-negative")
        if not self.kappa0_ref > 0:
            raise ValueError("kappa0_ref must be positive")
        if self.z_r is not None and not self.z_r > 0:
            raise ValueError("z_r must be positive")
        if not isinstance(self.variant, Variant):
            object.__setattr__(self, "variant", Variant(self.variant))
        limit = GOOD_CAVITY_FACTOR * min(self.omega_z, self.omega_x)
        if self.kappa0_ref >= limit and not self.allow_bad_cavity:
            raise ValueError(
                f"kappa0_ref={self.kappa0_ref:g} violates the good-cavity gate "
                f"(< {limit:g}); pass allow_bad_cavity=True to override")

    @property
    def rabi(self) -> float:
        """Light-matter coupling frequency of the selected circuit."""
        if self.variant is Variant.CIRCUIT_B:
            return self.g * self.omega_x
        return self.g * self.omega_z

    @property
    def kappa_lc0(self) -> float:
        """Bare resonator loss rate at the current ``omega_z``."""
        return self.kappa0_ref * (self.omega_z / self.omega_x) ** 3

    def with_(self, **changes) -> "ModelParams":
        fields = {k: getattr(self, k) for k in self.__dataclass_fields__}
        fields.update(changes)
        return ModelParams(**fields)


@dataclass(frozen=True)
class CpbParams:
    """Cooper-pair box: junction capacitance (F) and Josephson energy (J)."""

    c_j: float
    e_j: float

    def __post_init__(self):
        if not (self.c_j > 0 and self.e_j > 0):
            raise ValueError("C_J and E_J must be positive")

    @property
    def e_cp(self) -> float:
        """Charging energy (2e)²/(2 C_J) in joule."""
        return (2 * const.e) ** 2 / (2 * self.c_j)

    @property
    def transmon(self) -> bool:
        return self.e_j / self.e_cp > 10


def cpb_params(c: CpbParams, z_r: float):
    """Map CPB parameters and resonator impedance to ``(omega_x [rad/s], g)``."""
    if not z_r > 0:
        raise ValueError("z_r must be positive")
    omega_x = math.sqrt(2 * c.e_cp * c.e_j) / const.hbar
    g = (c.e_cp / (2 * c.e_j)) ** 0.25 * math.sqrt(const.hbar / (2 * z_r)) / (2 * const.e)
    return omega_x, g


def _require(p: ModelParams, variant: Variant):
    if p.variant is not variant:
        raise VariantError(f"expected {variant.name} parameters, got {p.variant.name}")


def build_circuit_a(p: ModelParams, dims=fock.DEFAULT_DIMS) -> fock.FockOperator:
    _require(p, Variant.CIRCUIT_A)
    a, b = fock.two_mode_ops(dims)
    xa = a + a.dag
    xb = b + b.dag
    om = p.g * p.omega_z
    H = p.omega_z * (a.dag @ a) + p.omega_x * (b.dag @ b) + om * (xa @ xb)
    if p.diamagnetic:
        H = H + (om ** 2 / p.omega_z) * (xb @ xb)
    return H


def build_circuit_b(p: ModelParams, dims=fock.DEFAULT_DIMS) -> fock.FockOperator:
    _require(p, Variant.CIRCUIT_B)
    a, b = fock.two_mode_ops(dims)
    pa = a - a.dag
    pb = b - b.dag
    om = p.g * p.omega_x
    H = p.omega_z * (a.dag @ a) + p.omega_x * (b.dag @ b) - om * (pa @ pb)
    if p.diamagnetic:
        ya = 1j * pa
        H = H + (om ** 2 / p.omega_x) * (ya @ ya)
    return H


def build_hamiltonian(p: ModelParams, dims=fock.DEFAULT_DIMS) -> fock.FockOperator:
    if p.variant is Variant.CIRCUIT_A:
        return build_circuit_a(p, dims)
    if p.variant is Variant.CIRCUIT_B:
        return build_circuit_b(p, dims)
    raise VariantError("generic Rabi models are built with build_generic_rabi")


def build_generic_rabi(omega_z: float, omega_x: float, rabi: float, matter_levels: int = 2,
                       photon_dim: int = fock.DEFAULT_DIMS[0]) -> fock.FockOperator:
    """``wz a†a + Omega (a+a†) S_x + H_mat``.

    Two matter levels give the quantum Rabi model (``S_x = sigma_x``,
    ``H_mat = wx |e><e|``); more levels give a truncated oscillator.
    """
    if int(matter_levels) != matter_levels or matter_levels < 2:
        raise InvalidDimensionError(f"matter_levels must be >= 2, got {matter_levels}")
    matter_levels = int(matter_levels)
    a = fock.tensor(fock.destroy(photon_dim), fock.identity(matter_levels))
    if matter_levels == 2:
        sx = fock.FockOperator((2,), sp.csr_matrix(np.array([[0.0, 1.0], [1.0, 0.0]])))
        hm = fock.FockOperator((2,), sp.csr_matrix(np.diag([0.0, omega_x])))
    else:
        bm = fock.destroy(matter_levels)
        sx = bm + bm.dag
        hm = omega_x * (bm.dag @ bm)
    eye_a = fock.identity(photon_dim)
    return (omega_z * (a.dag @ a) + rabi * ((a + a.dag) @ fock.tensor(eye_a, sx))
            + fock.tensor(eye_a, hm))


def polaron_unitary(g: float, dims) -> np.ndarray:
    """Dense ``U = exp[-g (a-a†)(b+b†)]`` on the truncated space."""
    a, b = fock.two_mode_ops(dims)
    gen = -g * ((a - a.dag) @ (b + b.dag)).dense()
    U = sla.expm(gen)
    err = np.linalg.norm(U.conj().T @ U - np.eye(U.shape[0])) / math.sqrt(U.shape[0])
    if not np.isfinite(err) or err > 1e-8:
        raise NumericError(f"matrix exponential lost unitarity (error {err:.3g})")
    return U


def polaron_transform(H: fock.FockOperator, g: float) -> fock.FockOperator:
    """``U† H U``; maps the circuit-B Hamiltonian onto the circuit-A one."""
    if len(H.dims) != 2:
        raise VariantError("polaron_transform needs a two-mode operator")
    if g == 0:
        return H
    U = polaron_unitary(g, H.dims)
    return fock.FockOperator(H.dims, sp.csr_matrix(U.conj().T @ H.dense() @ U))
