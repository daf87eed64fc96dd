"""Truncated Fock-space operators and Hermitian eigensystems.

Operators live on a product of truncated bosonic (or few-level) spaces. The
first mode is always the cavity/resonator photon, the second the matter mode.
Matrices are kept sparse (CSR); :func:`eig_hermitian` densifies.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import (
    ConvergenceWarning,
    HermiticityError,
    InvalidDimensionError,
    ShapeError,
)

DEFAULT_DIMS = (20, 20)


@dataclass(frozen=True, eq=False)
class FockOperator:
    """Complex matrix on a truncated multi-mode Fock space.

    Parameters
    ----------
    dims : tuple of int
        Truncation dimension of each mode.
    data : scipy.sparse matrix
        Square matrix of side ``prod(dims)``.
    """

    dims: tuple
    data: sp.csr_matrix

    def __post_init__(self):
        dims = tuple(int(d) for d in self.dims)
        object.__setattr__(self, "dims", dims)
        data = sp.csr_matrix(self.data, dtype=complex)
        object.__setattr__(self, "data", data)
        side = math.prod(dims)
        if data.shape != (side, side):
            raise ShapeError(f"matrix shape {data.shape} does not match dims {dims}")

    @property
    def shape(self):
        return self.data.shape

    @property
    def dag(self) -> "FockOperator":
        return FockOperator(self.dims, self.data.conj().T.tocsr())

    def dense(self) -> np.ndarray:
        return self.data.toarray()

    def norm(self) -> float:
        """Frobenius norm."""
        return float(spla.norm(self.data))

    def is_hermitian(self, rtol: float = 1e-10) -> bool:
        scale = max(self.norm(), 1.0)
        return float(spla.norm(self.data - self.data.conj().T)) <= rtol * scale

    def _check(self, other: "FockOperator"):
        if self.dims != other.dims:
            raise ShapeError(f"dims mismatch: {self.dims} vs {other.dims}")

    def __add__(self, other):
        if isinstance(other, FockOperator):
            self._check(other)
            return FockOperator(self.dims, self.data + other.data)
        return NotImplemented

    def __sub__(self, other):
        if isinstance(other, FockOperator):
            self._check(other)
            return FockOperator(self.dims, self.data - other.data)
        return NotImplemented

    def __neg__(self):
        return FockOperator(self.dims, -self.data)

    def __mul__(self, scalar):
        if np.isscalar(scalar):
            return FockOperator(self.dims, self.data * scalar)
        return NotImplemented

    __rmul__ = __mul__

    def __matmul__(self, other):
        if isinstance(other, FockOperator):
            self._check(other)
            return FockOperator(self.dims, self.data @ other.data)
        return NotImplemented


def _check_dim(dim):
    if int(dim) != dim or dim < 2:
        raise InvalidDimensionError(f"truncation dimension must be an integer >= 2, got {dim}")
    return int(dim)


def destroy(dim: int) -> FockOperator:
    """Single-mode annihilation operator with ``<n-1|a|n> = sqrt(n)``."""
    dim = _check_dim(dim)
    diag = np.sqrt(np.arange(1, dim, dtype=float))
    return FockOperator((dim,), sp.diags(diag, 1, shape=(dim, dim), format="csr"))


def identity(dim: int) -> FockOperator:
    dim = _check_dim(dim)
    return FockOperator((dim,), sp.identity(dim, format="csr"))


def number(dim: int) -> FockOperator:
    dim = _check_dim(dim)
    return FockOperator((dim,), sp.diags(np.arange(dim, dtype=float), 0, format="csr"))


def tensor(A: FockOperator, B: FockOperator) -> FockOperator:
    """Kronecker product; the dims of ``A`` come first."""
    return FockOperator(A.dims + B.dims, sp.kron(A.data, B.data, format="csr"))


def two_mode_ops(dims=DEFAULT_DIMS):
    """Return ``(a, b)``: photon and matter lowering operators on ``dims``."""
    da, db = (_check_dim(d) for d in dims)
    a = tensor(destroy(da), identity(db))
    b = tensor(identity(da), destroy(db))
    return a, b


def two_mode_identity(dims=DEFAULT_DIMS) -> FockOperator:
    return tensor(identity(dims[0]), identity(dims[1]))


def parity(dims=DEFAULT_DIMS) -> FockOperator:
    """Joint parity ``(-1)^(a†a + b†b)``."""
    n = np.add.outer(np.arange(dims[0]), np.arange(dims[1])).ravel()
    return FockOperator(tuple(dims), sp.diags((-1.0) ** n, 0, format="csr"))


def truncation_projector(dims) -> np.ndarray:
    """Boolean mask of basis states not on the top Fock level of any mode."""
    grids = np.meshgrid(*[np.arange(d) for d in dims], indexing="ij")
    mask = np.ones(grids[0].shape, dtype=bool)
    for g, d in zip(grids, dims):
        mask &= g < d - 1
    return mask.ravel()


def basis_state(dims, occupations) -> np.ndarray:
    """Fock basis vector ``|n_1, n_2, ...>``."""
    if len(occupations) != len(dims):
        raise ShapeError("one occupation per mode required")
    for n, d in zip(occupations, dims):
        if not 0 <= n < d:
            raise InvalidDimensionError(f"occupation {n} outside truncation {d}")
    vec = np.zeros(math.prod(dims), dtype=complex)
    vec[np.ravel_multi_index(tuple(occupations), tuple(dims))] = 1.0
    return vec


@dataclass(frozen=True, eq=False)
class EigenSystem:
    """Sorted eigenfrequencies and orthonormal eigenvectors (columns of ``states``)."""

    dims: tuple
    frequencies: np.ndarray
    states: np.ndarray

    def __post_init__(self):
        freqs = np.asarray(self.frequencies, dtype=float)
        states = np.asarray(self.states, dtype=complex)
        if states.ndim != 2 or states.shape[1] != freqs.size:
            raise ShapeError("states must be a (dim, n_levels) array matching frequencies")
        freqs.setflags(write=False)
        states.setflags(write=False)
        object.__setattr__(self, "frequencies", freqs)
        object.__setattr__(self, "states", states)
        object.__setattr__(self, "dims", tuple(self.dims))

    def __len__(self):
        return self.frequencies.size

    def state(self, mu: int) -> np.ndarray:
        return self.states[:, mu]

    def gap(self, nu: int, mu: int) -> float:
        """Transition frequency ``omega_nu - omega_mu``."""
        return float(self.frequencies[nu] - self.frequencies[mu])

    @property
    def excitation_frequencies(self) -> np.ndarray:
        return self.frequencies - self.frequencies[0]

    def truncate(self, n_levels: int) -> "EigenSystem":
        """Keep only the ``n_levels`` lowest states."""
        if n_levels < 1 or n_levels > len(self):
            raise InvalidDimensionError(f"cannot keep {n_levels} of {len(self)} levels")
        return EigenSystem(self.dims, self.frequencies[:n_levels], self.states[:, :n_levels])

    def matrix(self, X: FockOperator) -> np.ndarray:
        """All matrix elements ``<mu|X|nu>`` as an array indexed ``[mu, nu]``."""
        if X.dims != self.dims:
            raise ShapeError(f"operator dims {X.dims} do not match eigensystem dims {self.dims}")
        V = self.states
        return V.conj().T @ (X.data @ V)

    def to_fock(self, M: np.ndarray) -> FockOperator:
        """Map an eigenbasis matrix back onto the Fock basis."""
        V = self.states
        return FockOperator(self.dims, sp.csr_matrix(V @ M @ V.conj().T))


def _fix_phases(vecs: np.ndarray) -> np.ndarray:
    idx = np.argmax(np.abs(vecs), axis=0)
    pivots = vecs[idx, np.arange(vecs.shape[1])]
    return vecs * (np.abs(pivots) / pivots)[None, :]


def _order_degenerate(freqs, vecs, rel_tol=1e-10):
    scale = max(np.max(np.abs(freqs)), 1e-300)
    order = np.arange(freqs.size)
    start = 0
    while start < freqs.size:
        stop = start + 1
        while stop < freqs.size and freqs[stop] - freqs[stop - 1] < rel_tol * scale:
            stop += 1
        if stop - start > 1:
            block = list(range(start, stop))
            keys = {i: tuple(np.round(np.concatenate([vecs[:, i].real, vecs[:, i].imag]), 10)) for i in block}
            order[start:stop] = sorted(block, key=lambda i: keys[i], reverse=True)
        start = stop
    return freqs[order], vecs[:, order]


def eig_hermitian(H: FockOperator, n_levels: int | None = None) -> EigenSystem:
    """Diagonalize a Hermitian operator.

    The phase of each eigenvector is fixed so that its largest-magnitude
    component is real and positive. Degenerate blocks are ordered by a
    lexicographic comparison of the (phase-fixed) eigenvectors.
    """
    M = H.dense()
    scale = max(np.linalg.norm(M), 1e-300)
    if np.linalg.norm(M - M.conj().T) > 1e-10 * scale:
        raise HermiticityError("operator is not Hermitian")
    M = 0.5 * (M + M.conj().T)
    freqs, vecs = np.linalg.eigh(M)
    vecs = _fix_phases(vecs)
    freqs, vecs = _order_degenerate(freqs, vecs)
    es = EigenSystem(H.dims, freqs, vecs)
    return es.truncate(n_levels) if n_levels else es


def lowest_frequencies(H: FockOperator, k: int = 6) -> np.ndarray:
    """Lowest ``k`` eigenvalues via sparse Lanczos (no eigenvectors)."""
    side = H.shape[0]
    if k >= side - 1:
        return np.linalg.eigvalsh(H.dense())[:k]
    vals = spla.eigsh(H.data, k=k, which="SA", return_eigenvectors=False, tol=0)
    return np.sort(vals.real)


def parity_block_frequencies(H: FockOperator, k: int = 4):
    """Lowest ``k`` eigenvalues in the even and odd joint-parity sectors.

    ``H`` must commute with the joint parity of the two modes.
    """
    P = parity(H.dims).data.diagonal().real
    out = []
    for sign in (1.0, -1.0):
        idx = np.flatnonzero(P == sign)
        block = FockOperator((idx.size,), H.data[idx][:, idx])
        out.append(lowest_frequencies(block, k))
    return out[0], out[1]


def matrix_element(mu: np.ndarray, X: FockOperator, nu: np.ndarray) -> complex:
    """``<mu|X|nu>`` for state vectors ``mu`` and ``nu``."""
    mu = np.asarray(mu)
    nu = np.asarray(nu)
    if mu.shape != (X.shape[0],) or nu.shape != (X.shape[0],):
        raise ShapeError(f"state shapes {mu.shape}, {nu.shape} do not fit operator {X.shape}")
    return complex(np.vdot(mu, X.data @ nu))


def doubled(dims):
    return tuple(2 * d for d in dims)


def check_convergence(compute: Callable[[Sequence[int]], np.ndarray], dims=DEFAULT_DIMS,
                      rtol: float = 1e-6, label: str = "result"):
    """Evaluate ``compute(dims)`` and ``compute(2*dims)``; warn on relative drift.

    Returns the value at ``dims`` and the relative drift.
    """
    base = np.asarray(compute(tuple(dims)))
    fine = np.asarray(compute(doubled(dims)))
    denom = np.maximum(np.abs(fine), np.finfo(float).tiny)
    drift = float(np.max(np.abs(base - fine) / denom)) if base.size else 0.0
    if drift > rtol:
        warnings.warn(f"{label}: relative drift {drift:.3g} at dims {tuple(dims)} exceeds {rtol:g}",
                      ConvergenceWarning, stacklevel=2)
    return base, drift
