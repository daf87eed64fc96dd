"""Hopfield-Bogoliubov diagonalization of the quadratic two-mode models.

A polariton ``p_j = w_j a + x_j b + y_j a† + z_j b†`` solves
``[p_j, H] = omega_j p_j`` with ``[p_j, p_k†] = delta_jk``. Writing
``[alpha_i, H] = sum_k D_ik alpha_k`` for ``alpha = (a, b, a†, b†)`` turns
this into the eigenproblem ``D.T v = omega v``; the symplectic norm
``|w|²+|x|²-|y|²-|z|²`` selects the physical branch.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InstabilityError, NegativeNormError, VariantError
from .models import ModelParams, Variant

ETA = np.array([1.0, 1.0, -1.0, -1.0])
DEGENERACY_TOL = 1e-8


def dynamical_matrix(p: ModelParams) -> np.ndarray:
    """Real 4x4 matrix ``D`` with ``[alpha_i, H] = sum_k D_ik alpha_k``."""
    wz, wx = p.omega_z, p.omega_x
    if p.variant is Variant.CIRCUIT_A:
        om = p.g * wz
        d = om ** 2 / wz if p.diamagnetic else 0.0
        return np.array([
            [wz, om, 0.0, om],
            [om, wx + 2 * d, om, 2 * d],
            [0.0, -om, -wz, -om],
            [-om, -2 * d, -om, -wx - 2 * d],
        ])
    if p.variant is Variant.CIRCUIT_B:
        om = p.g * wx
        e = om ** 2 / wx if p.diamagnetic else 0.0
        return np.array([
            [wz + 2 * e, om, -2 * e, -om],
            [om, wx, -om, 0.0],
            [2 * e, om, -wz - 2 * e, -om],
            [om, 0.0, -om, -wx],
        ])
    raise VariantError("Hopfield diagonalization needs circuit A or B parameters")


def symplectic_product(u: np.ndarray, v: np.ndarray) -> complex:
    """``[p_u, p_v†]`` for coefficient vectors ``u`` and ``v``."""
    return complex(np.sum(ETA * u * np.conj(v)))


@dataclass(frozen=True, eq=False)
class BogoliubovModes:
    """Lower (index 0) and upper (index 1) polaritons of a quadratic model.

    ``coefficients[j] = (w_j, x_j, y_j, z_j)``.
    """

    params: ModelParams
    omegas: np.ndarray
    coefficients: np.ndarray
    near_degenerate: bool = False

    @property
    def variant(self) -> Variant:
        return self.params.variant

    @property
    def w(self):
        return self.coefficients[:, 0]

    @property
    def x(self):
        return self.coefficients[:, 1]

    @property
    def y(self):
        return self.coefficients[:, 2]

    @property
    def z(self):
        return self.coefficients[:, 3]

    def norms(self) -> np.ndarray:
        return np.array([symplectic_product(c, c).real for c in self.coefficients])

    def cross_norm(self) -> complex:
        return symplectic_product(self.coefficients[0], self.coefficients[1])


def _gauge(v: np.ndarray) -> np.ndarray:
    for k in (0, 1, 2, 3):
        if abs(v[k]) > 1e-12:
            return v * (abs(v[k]) / v[k])
    return v


def hopfield_diagonalize(p: ModelParams) -> BogoliubovModes:
    """Polariton frequencies and symplectically normalized coefficients.

    Raises
    ------
    InstabilityError
        If the normal-mode frequencies are complex.
    NegativeNormError
        If a positive-frequency branch has non-positive symplectic norm.
    """
    D = dynamical_matrix(p)
    lam, vecs = np.linalg.eig(D.T)
    scale = max(np.max(np.abs(lam)), 1.0)
    if not np.all(np.isfinite(lam)) or np.any(np.abs(lam.imag) > 1e-9 * scale):
        raise InstabilityError(f"complex normal-mode frequencies {lam} for {p}")
    lam = lam.real
    order = np.argsort(lam)[::-1]
    positive = [i for i in order[:2] if lam[i] > 0]
    if len(positive) != 2:
        raise InstabilityError(f"expected two positive frequencies, got {np.sort(lam)}")
    positive.sort(key=lambda i: lam[i])
    omegas = lam[positive]
    modes = []
    for i in positive:
        v = vecs[:, i].astype(complex)
        for u in modes:
            v = v - symplectic_product(v, u) * u
        n = symplectic_product(v, v).real
        if n <= 0:
            raise NegativeNormError(f"branch at omega={lam[i]:.6g} has symplectic norm {n:.3g}")
        modes.append(v / np.sqrt(n))
    coeffs = np.array([_gauge(v) for v in modes])
    near = bool(omegas[1] - omegas[0] < DEGENERACY_TOL)
    return BogoliubovModes(p, omegas, coeffs, near)


def quadrature_weights(m: BogoliubovModes) -> np.ndarray:
    """Per-mode ``(w+y, w-y, x+z, x-z)``, shape (2, 4)."""
    w, x, y, z = m.w, m.x, m.y, m.z
    return np.stack([w + y, w - y, x + z, x - z], axis=1)
