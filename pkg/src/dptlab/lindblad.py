"""Lindblad generators: action on matrices and explicit superoperator matrices.

Vectorization stacks columns, ``vec(rho) = rho.flatten(order="F")``, so that
``vec(A X B) = kron(B.T, A) @ vec(X)``.
"""
from __future__ import annotations

import dataclasses
import os
from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.sparse as sp

from .errors import DimensionError, MemoryBoundError
from .fock import as_operator

__all__ = [
    "LindbladModel",
    "SYMMETRY_TAGS",
    "add_dissipator",
    "dissipator_apply",
    "dissipator_superoperator",
    "liouvillian_apply",
    "mem_bound_bytes",
    "sparse_superoperator",
    "superoperator_elements",
    "unvec",
    "vec",
    "vectorize",
]

SYMMETRY_TAGS = ("U1", "Z2", "none")
DEFAULT_MEM_MB = 1024


def mem_bound_bytes() -> int:
    """Cap on single dense allocations, from ``DPTLAB_MEM_MB`` (default 1024 MB)."""
    return int(float(os.environ.get("DPTLAB_MEM_MB", DEFAULT_MEM_MB)) * 2**20)


def vec(rho) -> np.ndarray:
    return np.asarray(rho).flatten(order="F")


def unvec(v, C) -> np.ndarray:
    return np.asarray(v).reshape((C, C), order="F")


@dataclass(frozen=True, eq=False)
class LindbladModel:
    """Hamiltonian plus jump operators with their rates already folded in.

    ``symmetry`` tags the weak symmetry the model is built to respect; the
    tag is trusted at construction and enforced when sector blocks are built.
    """

    hamiltonian: np.ndarray
    jumps: tuple = ()
    symmetry: str = "none"
    label: str = ""

    def __post_init__(self):
        H = as_operator(self.hamiltonian)
        C = H.shape[0]
        dev = np.max(np.abs(H - H.conj().T)) if C else 0.0
        if dev > 1e-12 * max(1.0, np.max(np.abs(H))):
            raise ValueError(f"Hamiltonian is not Hermitian (deviation {dev:.2e})")
        jumps = tuple(as_operator(L, C) for L in self.jumps)
        if self.symmetry not in SYMMETRY_TAGS:
            raise ValueError(f"symmetry must be one of {SYMMETRY_TAGS}, got {self.symmetry!r}")
        for arr in (H, *jumps):
            arr.setflags(write=False)
        object.__setattr__(self, "hamiltonian", H)
        object.__setattr__(self, "jumps", jumps)

    @property
    def cutoff(self) -> int:
        return self.hamiltonian.shape[0]

    @cached_property
    def decay_operator(self) -> np.ndarray:
        """``sum_j L_j^dag L_j``."""
        K = np.zeros_like(self.hamiltonian)
        for L in self.jumps:
            K += L.conj().T @ L
        return K

    @cached_property
    def effective_hamiltonian(self) -> np.ndarray:
        return self.hamiltonian - 0.5j * self.decay_operator

    @cached_property
    def sparse_generator(self) -> sp.csc_matrix:
        """Vectorized generator in CSC form, built once per model."""
        return sparse_superoperator(self).tocsc()


def _match(L, rho):
    if L.shape[-1] != rho.shape[-1]:
        raise DimensionError(f"cutoff mismatch: {L.shape[-1]} vs {rho.shape[-1]}")


def dissipator_apply(L, rho) -> np.ndarray:
    """``L rho L^dag - (L^dag L rho + rho L^dag L) / 2``."""
    L = np.asarray(L, dtype=complex)
    rho = np.asarray(rho, dtype=complex)
    _match(L, rho)
    Ld = L.conj().T
    LdL = Ld @ L
    return L @ rho @ Ld - 0.5 * (LdL @ rho + rho @ LdL)


def liouvillian_apply(model: LindbladModel, rho) -> np.ndarray:
    """Apply the generator to ``rho``; stacked inputs ``(..., C, C)`` are allowed."""
    rho = np.asarray(rho, dtype=complex)
    _match(model.hamiltonian, rho)
    heff = model.effective_hamiltonian
    out = -1j * (heff @ rho - rho @ heff.conj().T)
    for L in model.jumps:
        out += L @ rho @ L.conj().T
    return out


def dissipator_superoperator(L) -> np.ndarray:
    L = np.asarray(L, dtype=complex)
    C = L.shape[0]
    eye = np.eye(C)
    LdL = L.conj().T @ L
    return np.kron(L.conj(), L) - 0.5 * np.kron(eye, LdL) - 0.5 * np.kron(LdL.T, eye)


def vectorize(model: LindbladModel, max_cutoff=60) -> np.ndarray:
    """Dense ``C^2 x C^2`` matrix ``M`` with ``M @ vec(rho) == vec(L rho)``.

    Refuses cutoffs above ``max_cutoff`` or beyond ``DPTLAB_MEM_MB``; use the
    sector blocks of :mod:`dptlab.symmetry` for larger spaces.
    """
    C = model.cutoff
    nbytes = 16 * C**4
    if C > max_cutoff or nbytes > mem_bound_bytes():
        raise MemoryBoundError(
            f"full superoperator at C={C} needs {nbytes / 2**20:.0f} MB; "
            "build symmetry-sector blocks instead (dptlab.symmetry.sector_liouvillian)"
        )
    H = model.hamiltonian
    eye = np.eye(C)
    M = -1j * (np.kron(eye, H) - np.kron(H.T, eye))
    for L in model.jumps:
        M += dissipator_superoperator(L)
    return M


def sparse_superoperator(model: LindbladModel) -> sp.csr_matrix:
    """Same matrix as :func:`vectorize`, assembled from sparse Kronecker products.

    Banded model operators keep this at ``O(C^2)`` stored entries, so it is
    usable far beyond the dense cutoff bound.
    """
    C = model.cutoff
    eye = sp.identity(C, dtype=complex, format="csr")
    H = sp.csr_matrix(model.hamiltonian)
    M = -1j * (sp.kron(eye, H) - sp.kron(H.T, eye))
    # one complete dissipator per jump, so a jump that leaves some dyads
    # invariant contributes exact zeros there rather than rounding residue
    for L in model.jumps:
        Ls = sp.csr_matrix(L)
        LdL = (Ls.conj().T @ Ls).tocsr()
        M = M + (sp.kron(Ls.conj(), Ls) - 0.5 * sp.kron(eye, LdL) - 0.5 * sp.kron(LdL.T, eye))
    M = M.tocsr()
    M.eliminate_zeros()
    return M


def superoperator_elements(model: LindbladModel, rows, cols) -> np.ndarray:
    """Selected entries of the vectorized generator without building it.

    ``rows`` and ``cols`` are integer arrays of shape ``(n, 2)`` holding Fock
    pairs ``(p, q)`` and ``(m, n)``; entry ``[i, j]`` is the coefficient of
    the dyad ``|p_i><q_i|`` in the image of ``|m_j><n_j|``.
    """
    rows = np.asarray(rows, dtype=int).reshape(-1, 2)
    cols = np.asarray(cols, dtype=int).reshape(-1, 2)
    P, Q = rows[:, 0, None], rows[:, 1, None]
    M, N = cols[None, :, 0], cols[None, :, 1]
    heff = model.effective_hamiltonian
    out = -1j * heff[P, M] * (Q == N)
    out += 1j * (P == M) * heff[Q, N].conj()
    for L in model.jumps:
        out += L[P, M] * L[Q, N].conj()
    return out


def add_dissipator(model: LindbladModel, L, label=None) -> LindbladModel:
    """New model with ``L`` appended to the jump operators."""
    L = as_operator(L, model.cutoff)
    return dataclasses.replace(
        model, jumps=model.jumps + (L,), label=model.label if label is None else label
    )
