"""Single-mode bosonic operators on the truncated Fock space {|0>, ..., |C-1>}.

Operators are plain complex ``numpy`` arrays of shape ``(C, C)``; row and
column index equal the occupation number.  :class:`DensityMatrix` wraps such
an array and checks the physical invariants once, at construction.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import DimensionError, InsufficientCutoffError, InvalidCutoffError, InvalidStateError

__all__ = [
    "DensityMatrix",
    "annihilation",
    "as_operator",
    "coherent_state",
    "coherent_vector",
    "creation",
    "displacement",
    "expectation",
    "fock_dm",
    "identity",
    "number",
    "parity",
    "phase_rotation",
    "raised_number",
]


def _check_cutoff(C):
    if int(C) != C or C < 2:
        raise InvalidCutoffError(f"cutoff must be an integer >= 2, got {C!r}")
    return int(C)


def as_operator(op, C=None) -> np.ndarray:
    """Return ``op`` as a finite complex square array, optionally of size ``C``."""
    arr = np.asarray(op, dtype=complex)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise DimensionError(f"operator must be square, got shape {arr.shape}")
    if C is not None and arr.shape[0] != C:
        raise DimensionError(f"operator has cutoff {arr.shape[0]}, expected {C}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("operator has non-finite entries")
    return arr


def identity(C) -> np.ndarray:
    return np.eye(_check_cutoff(C), dtype=complex)


def annihilation(C) -> np.ndarray:
    """Lowering operator: ``a[m, m+1] = sqrt(m+1)``."""
    C = _check_cutoff(C)
    return np.diag(np.sqrt(np.arange(1, C)), k=1).astype(complex)


def creation(C) -> np.ndarray:
    return annihilation(C).conj().T


def number(C) -> np.ndarray:
    """``a^dag a`` = diag(0, 1, ..., C-1); exact on the truncated space."""
    C = _check_cutoff(C)
    return np.diag(np.arange(C)).astype(complex)


def raised_number(C) -> np.ndarray:
    """``a a^dag`` = diag(1, 2, ..., C) of the untruncated oscillator.

    The product ``annihilation(C) @ creation(C)`` zeroes the last diagonal
    entry; models use this form instead so that diagonal-band identities hold
    up to the top Fock level.
    """
    C = _check_cutoff(C)
    return np.diag(np.arange(1, C + 1)).astype(complex)


def phase_rotation(phi, C) -> np.ndarray:
    """``exp(i phi a^dag a)``."""
    C = _check_cutoff(C)
    return np.diag(np.exp(1j * phi * np.arange(C)))


def parity(C) -> np.ndarray:
    """``exp(i pi a^dag a)`` with exactly +-1 entries."""
    C = _check_cutoff(C)
    return np.diag(np.where(np.arange(C) % 2 == 0, 1.0, -1.0)).astype(complex)


def displacement(alpha, C) -> np.ndarray:
    """Displacement operator ``exp(alpha a^dag - conj(alpha) a)`` on the truncated space.

    Computed with scaling-and-squaring (``scipy.linalg.expm``).  Only the
    low-occupation block is a faithful representation; a warning is issued
    when ``|alpha|^2 > C/4``.
    """
    C = _check_cutoff(C)
    alpha = complex(alpha)
    if abs(alpha) ** 2 > C / 4:
        warnings.warn(
            f"|alpha|^2 = {abs(alpha) ** 2:.3g} exceeds C/4 = {C / 4:.3g}; "
            "displacement is poorly represented at this cutoff",
            stacklevel=2,
        )
    if alpha == 0:
        return identity(C)
    a = annihilation(C)
    return scipy.linalg.expm(alpha * a.conj().T - alpha.conjugate() * a)


def coherent_vector(alpha, C) -> np.ndarray:
    """Analytic coherent-state amplitudes ``exp(-|alpha|^2/2) alpha^n / sqrt(n!)``.

    Not renormalized; the norm deficit measures the truncation loss.
    """
    C = _check_cutoff(C)
    alpha = complex(alpha)
    vec = np.empty(C, dtype=complex)
    vec[0] = np.exp(-abs(alpha) ** 2 / 2)
    for n in range(1, C):
        vec[n] = vec[n - 1] * alpha / np.sqrt(n)
    return vec


def coherent_state(alpha, C) -> "DensityMatrix":
    """Projector onto the (renormalized) truncated coherent state ``|alpha>``."""
    C = _check_cutoff(C)
    if abs(alpha) ** 2 > C / 4:
        warnings.warn(f"|alpha|^2 exceeds C/4 for cutoff {C}", stacklevel=2)
    vec = coherent_vector(alpha, C)
    norm = np.linalg.norm(vec)
    if norm**2 < 0.999:
        raise InsufficientCutoffError(
            f"cutoff {C} keeps only {norm**2:.4f} of the coherent state |{alpha}>"
        )
    vec = vec / norm
    return DensityMatrix(np.outer(vec, vec.conj()))


def fock_dm(n, C) -> "DensityMatrix":
    C = _check_cutoff(C)
    if not 0 <= n < C:
        raise InvalidCutoffError(f"Fock level {n} not inside cutoff {C}")
    rho = np.zeros((C, C), dtype=complex)
    rho[n, n] = 1.0
    return DensityMatrix(rho)


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """Hermitian, unit-trace, positive semidefinite operator.

    ``psd_floor=None`` skips the eigenvalue check, which is used for states
    whose far off-diagonal bands were deliberately discarded.
    """

    data: np.ndarray
    tol: float = 1e-9
    psd_floor: float | None = 1e-9

    def __post_init__(self):
        data = as_operator(self.data)
        data.setflags(write=False)
        object.__setattr__(self, "data", data)
        herm = np.max(np.abs(data - data.conj().T))
        if herm > self.tol:
            raise InvalidStateError(f"not Hermitian: deviation {herm:.3e}")
        tr = np.trace(data)
        if abs(tr - 1) > self.tol:
            raise InvalidStateError(f"trace {tr:.12g} differs from 1")
        if self.psd_floor is not None:
            low = self.min_eigenvalue()
            if low < -self.psd_floor:
                raise InvalidStateError(f"minimum eigenvalue {low:.3e} below -{self.psd_floor:g}")

    def __array__(self, dtype=None, copy=None):
        return self.data if dtype is None else self.data.astype(dtype)

    @property
    def cutoff(self) -> int:
        return self.data.shape[0]

    def min_eigenvalue(self) -> float:
        herm = (self.data + self.data.conj().T) / 2
        return float(np.linalg.eigvalsh(herm)[0])

    def purity(self) -> float:
        return float(np.real(np.sum(self.data * self.data.T)))


def expectation(rho, op) -> complex:
    """``Tr[rho op]``."""
    rho = np.asarray(rho)
    op = np.asarray(op)
    if rho.shape != op.shape:
        raise DimensionError(f"cutoff mismatch: state {rho.shape} vs operator {op.shape}")
    return complex(np.sum(rho * op.T))
