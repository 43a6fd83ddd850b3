"""Weak-symmetry sectors of the operator space and the generator blocks on them.

A weak symmetry ``J`` acts on operators as ``rho -> J rho J^dag``.  For the
phase rotation ``J = exp(i phi a^dag a)`` the dyad ``|m><n|`` picks up
``exp(i phi (m - n))``, so each diagonal band ``m - n = k`` is a sector.  For
parity only ``(m - n) mod 2`` matters and there are two sectors.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .errors import DimensionError, NotBlockDiagonalError
from .fock import as_operator
from .lindblad import LindbladModel

__all__ = [
    "LEAKAGE_TOL",
    "SSBRemovalReport",
    "SectorMatrix",
    "SymmetryReport",
    "SymmetrySector",
    "sector_liouvillian",
    "sector_project",
    "sectors_for",
    "ssb_removal_check",
    "u1_sectors",
    "verify_weak_symmetry",
    "z2_sectors",
]

LEAKAGE_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class SymmetrySector:
    """Sector label ``k`` of group ``"U1"`` or ``"Z2"`` and its dyad basis.

    ``basis[i] = (m, n)`` lists the Fock pairs of the sector in ascending
    ``m`` (then ``n``).
    """

    group: str
    k: int
    cutoff: int
    basis: np.ndarray = field(repr=False)

    def __post_init__(self):
        basis = np.asarray(self.basis, dtype=int).reshape(-1, 2)
        basis.setflags(write=False)
        object.__setattr__(self, "basis", basis)

    @property
    def dim(self) -> int:
        return len(self.basis)

    @property
    def label(self) -> str:
        return f"{self.group}:{self.k}"

    def u(self, phi=None) -> complex:
        """Eigenvalue of ``rho -> J rho J^dag`` on this sector.

        For U1, ``J = phase_rotation(phi)`` and the eigenvalue is
        ``exp(i phi k)``; for Z2, ``J`` is parity and it is ``(-1)^k``.
        """
        if self.group == "Z2":
            return complex((-1) ** self.k)
        if phi is None:
            raise ValueError("U1 sector eigenvalue needs the rotation angle phi")
        return complex(np.exp(1j * phi * self.k))

    def mask(self) -> np.ndarray:
        m = np.zeros((self.cutoff, self.cutoff), dtype=bool)
        m[self.basis[:, 0], self.basis[:, 1]] = True
        return m

    def gather(self, rho) -> np.ndarray:
        """Coordinates of ``rho`` on the sector basis."""
        rho = np.asarray(rho)
        return rho[self.basis[:, 0], self.basis[:, 1]]

    def scatter(self, v) -> np.ndarray:
        """Inverse of :meth:`gather`: a ``C x C`` matrix supported on the sector."""
        out = np.zeros((self.cutoff, self.cutoff), dtype=complex)
        out[self.basis[:, 0], self.basis[:, 1]] = v
        return out

    def diagonal_positions(self) -> np.ndarray:
        return np.flatnonzero(self.basis[:, 0] == self.basis[:, 1])

    def complement(self) -> np.ndarray:
        m, n = np.nonzero(~self.mask())
        return np.column_stack([m, n])


def u1_sectors(C, kmax=2) -> list[SymmetrySector]:
    """Diagonal bands ``k = -kmax, ..., kmax``; band ``k`` holds ``(m, m - k)``."""
    if not 0 <= kmax <= C - 1:
        raise ValueError(f"kmax must lie in [0, {C - 1}], got {kmax}")
    out = []
    for k in range(-kmax, kmax + 1):
        m = np.arange(max(0, k), C + min(0, k))
        out.append(SymmetrySector("U1", k, C, np.column_stack([m, m - k])))
    return out


def z2_sectors(C) -> list[SymmetrySector]:
    """Even (``k=0``) and odd (``k=1``) offset dyads."""
    if C < 2:
        raise ValueError("cutoff must be >= 2")
    m, n = np.divmod(np.arange(C * C), C)
    pairs = np.column_stack([m, n])
    odd = (m - n) % 2
    return [SymmetrySector("Z2", k, C, pairs[odd == k]) for k in (0, 1)]


def sectors_for(model: LindbladModel, kmax=2) -> list[SymmetrySector]:
    if model.symmetry == "U1":
        return u1_sectors(model.cutoff, kmax)
    if model.symmetry == "Z2":
        return z2_sectors(model.cutoff)
    C = model.cutoff
    m, n = np.divmod(np.arange(C * C), C)
    return [SymmetrySector("none", 0, C, np.column_stack([m, n]))]


def sector_project(rho, sector: SymmetrySector) -> np.ndarray:
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (sector.cutoff, sector.cutoff):
        raise DimensionError(f"state shape {rho.shape} does not match cutoff {sector.cutoff}")
    return np.where(sector.mask(), rho, 0)


@dataclass(frozen=True, eq=False)
class SectorMatrix:
    """Generator restricted to one sector, in the coordinates of ``sector.basis``."""

    sector: SymmetrySector
    matrix: np.ndarray = field(repr=False)
    leakage: float = 0.0

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def to_operator(self, v) -> np.ndarray:
        return self.sector.scatter(v)

    def from_operator(self, rho) -> np.ndarray:
        return self.sector.gather(rho)


def sector_liouvillian(model: LindbladModel, sector: SymmetrySector, tol=LEAKAGE_TOL) -> SectorMatrix:
    """Block ``B`` with ``B[i, j]`` the coefficient of dyad ``i`` in the image of dyad ``j``.

    Raises :class:`NotBlockDiagonalError` when the images of sector dyads
    reach outside the sector by more than ``tol`` (times the largest block
    entry when that exceeds one).
    """
    C = model.cutoff
    if sector.cutoff != C:
        raise DimensionError(f"sector cutoff {sector.cutoff} != model cutoff {C}")
    # column-stacked position of |m><n| is n*C + m
    idx = sector.basis[:, 1] * C + sector.basis[:, 0]
    cols = model.sparse_generator[:, idx].tocoo()
    inside = np.zeros(C * C, dtype=bool)
    inside[idx] = True
    keep = inside[cols.row]
    outside = cols.data[~keep]
    leak = float(np.max(np.abs(outside))) if outside.size else 0.0
    pos = np.empty(C * C, dtype=int)
    pos[idx] = np.arange(sector.dim)
    B = np.zeros((sector.dim, sector.dim), dtype=complex)
    np.add.at(B, (pos[cols.row[keep]], cols.col[keep]), cols.data[keep])
    scale = max(1.0, float(np.max(np.abs(B))) if B.size else 0.0)
    if leak > tol * scale:
        raise NotBlockDiagonalError(
            f"generator leaks out of sector {sector.label}: max {leak:.3e} > {tol:g} x {scale:.3g}"
        )
    return SectorMatrix(sector, B, leak)


@dataclass(frozen=True)
class SymmetryReport:
    passed: bool
    leakage: float
    scale: float
    tol: float

    def __str__(self):
        verdict = "PASS" if self.passed else "FAIL"
        return f"{verdict} leakage={self.leakage:.3e} (tol {self.tol:g} x scale {self.scale:.3g})"


def verify_weak_symmetry(model: LindbladModel, J, tol=LEAKAGE_TOL) -> SymmetryReport:
    """Measure ``max |L(J X J^dag) - J L(X) J^dag|`` over a spanning set of dyads ``X``.

    ``J`` is brought to diagonal form first (it is unitary, hence normal), and
    the dyads of its eigenbasis are used; for diagonal ``J`` these are the
    Fock dyads themselves.
    """
    C = model.cutoff
    J = as_operator(J, C)
    if np.max(np.abs(J.conj().T @ J - np.eye(C))) > 1e-10:
        raise ValueError("symmetry operator must be unitary")
    if np.count_nonzero(J - np.diag(np.diag(J))):
        T, V = scipy.linalg.schur(J, output="complex")
        u = np.diag(T)
        Vh = V.conj().T
        model = LindbladModel(
            Vh @ model.hamiltonian @ V,
            tuple(Vh @ L @ V for L in model.jumps),
            model.symmetry,
        )
    else:
        u = np.diag(J)

    # U rho = J rho J^dag is diagonal on dyads: |m><n| -> u_m conj(u_n) |m><n|
    upair = (u[:, None] * u[None, :].conj()).flatten(order="F")
    M = model.sparse_generator.tocoo()
    leak = float(np.max(np.abs(M.data * (upair[M.col] - upair[M.row])), initial=0.0))
    scale = float(np.max(np.abs(M.data), initial=0.0))
    return SymmetryReport(leak < tol * max(1.0, scale), leak, scale, tol)


@dataclass(frozen=True)
class SectorAction:
    sector: str
    k: int
    max_action: float
    shift_min: complex
    shift_max: complex
    off_diagonal: float

    @property
    def uniform_shift(self) -> complex | None:
        """The common eigen-shift when the dissipator is a multiple of the identity here."""
        if self.off_diagonal < 1e-12 and abs(self.shift_max - self.shift_min) < 1e-12:
            return self.shift_min
        return None


@dataclass(frozen=True)
class SSBRemovalReport:
    passed: bool
    sectors: tuple
    cross_leakage: float
    tol: float

    def __str__(self):
        lines = [f"{'PASS' if self.passed else 'FAIL'} (tol {self.tol:g}, cross-sector leakage {self.cross_leakage:.3e})"]
        for s in self.sectors:
            shift = s.uniform_shift
            shift_txt = f"shift={shift.real:+.6g}{shift.imag:+.3g}j" if shift is not None else "non-uniform"
            lines.append(f"  {s.sector}: max action {s.max_action:.3e}, {shift_txt}")
        return "\n".join(lines)


def ssb_removal_check(model: LindbladModel, L_add, sectors, tol=1e-12) -> SSBRemovalReport:
    """Check that ``D[L_add]`` leaves sector 0 untouched but acts on every other sector.

    For each sector the maximum entry of ``D[L_add]`` applied to each basis
    dyad is reported, together with the diagonal coefficients (the shift each
    dyad receives) and the largest off-diagonal coefficient.
    """
    C = model.cutoff
    L_add = as_operator(L_add, C)
    probe = LindbladModel(np.zeros((C, C)), (L_add,))
    D = probe.sparse_generator

    actions = []
    cross = 0.0
    for sec in sectors:
        idx = sec.basis[:, 1] * C + sec.basis[:, 0]
        cols = D[:, idx].tocoo()
        inside = np.zeros(C * C, dtype=bool)
        inside[idx] = True
        pos = np.full(C * C, -1)
        pos[idx] = np.arange(sec.dim)
        keep = inside[cols.row]
        on_diag = keep & (pos[cols.row] == cols.col)
        diag = np.zeros(sec.dim, dtype=complex)
        diag[cols.col[on_diag]] = cols.data[on_diag]
        mags = np.abs(cols.data)
        cross = max(cross, float(np.max(mags[~keep], initial=0.0)))
        actions.append(
            SectorAction(
                sec.label,
                sec.k,
                float(np.max(mags, initial=0.0)),
                complex(diag[np.argmin(diag.real)]),
                complex(diag[np.argmax(diag.real)]),
                float(np.max(mags[keep & ~on_diag], initial=0.0)),
            )
        )
    zero_ok = all(a.max_action < tol for a in actions if a.k == 0)
    rest_ok = all(a.max_action >= tol for a in actions if a.k != 0)
    return SSBRemovalReport(zero_ok and rest_ok, tuple(actions), cross, tol)
