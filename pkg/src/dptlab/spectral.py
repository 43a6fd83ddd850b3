"""Steady states, sector spectra, gap traces and the criticality witness."""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .errors import DegenerateSteadyStateError, NormalizationError, NumericalError
from .fock import DensityMatrix, as_operator, expectation
from .lindblad import LindbladModel
from .symmetry import SectorMatrix, SymmetrySector, sector_liouvillian, sectors_for

__all__ = [
    "GAP_FLOOR",
    "BrokenState",
    "GapTrace",
    "SpectrumResult",
    "WitnessResult",
    "broken_steady_states",
    "criticality_witness",
    "gap_trace",
    "model_spectrum",
    "model_steady_state",
    "parallel_map",
    "sector_block",
    "sector_spectrum",
    "spectral_order",
    "steady_state",
]

GAP_FLOOR = 1e-10


def parallel_map(fn, items, workers=1):
    """``list(map(fn, items))`` on a thread pool; order follows ``items``."""
    items = list(items)
    if workers is None or workers <= 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def spectral_order(eigenvalues) -> np.ndarray:
    """Indices sorting by ascending ``|Re|``, then descending ``Re``, then ascending ``Im``."""
    lam = np.asarray(eigenvalues)
    return np.lexsort((lam.imag, -lam.real, np.abs(lam.real)))


def sector_block(model: LindbladModel, k=0, kmax=None) -> SectorMatrix:
    """Generator block of sector ``k`` for the symmetry the model is tagged with."""
    kmax = abs(k) if kmax is None else kmax
    for sec in sectors_for(model, kmax):
        if sec.k == k:
            return sector_liouvillian(model, sec)
    raise ValueError(f"model with symmetry {model.symmetry} has no sector {k}")


def steady_state(block: SectorMatrix, gap_floor=GAP_FLOOR) -> DensityMatrix:
    """Unit-trace null vector of a sector-0 block.

    The null-space dimension is estimated from singular values below
    ``gap_floor`` times the largest one.  The returned state itself comes from
    a bordered solve in which one population row of the block is replaced by
    the trace functional.
    """
    sec = block.sector
    if sec.k != 0:
        raise ValueError(f"steady states live in sector 0, got {sec.label}")
    B = block.matrix
    diag = sec.diagonal_positions()

    _, s, vh = np.linalg.svd(B)
    null_dim = int(np.count_nonzero(s < gap_floor * s[0]))
    if null_dim > 1:
        raise DegenerateSteadyStateError(null_dim)
    raw = vh[-1].conj()
    if abs(raw[diag].sum()) < 1e-8 * np.linalg.norm(raw):
        raise NormalizationError("null vector of the block is traceless")

    bordered = B.copy()
    bordered[diag[0]] = 0
    bordered[diag[0], diag] = 1
    rhs = np.zeros(len(B), dtype=complex)
    rhs[diag[0]] = 1
    try:
        x = scipy.linalg.solve(bordered, rhs)
    except scipy.linalg.LinAlgError as exc:
        raise NormalizationError(f"bordered steady-state system is singular: {exc}") from exc

    scale = max(1.0, float(np.max(np.abs(B))))
    residual = float(np.max(np.abs(B @ x)))
    if residual > 1e-10 * scale:
        raise NumericalError(f"steady-state residual {residual:.2e} too large")
    rho = block.to_operator(x)
    rho = (rho + rho.conj().T) / 2
    return DensityMatrix(rho / np.trace(rho).real)


def model_steady_state(model: LindbladModel, gap_floor=GAP_FLOOR) -> DensityMatrix:
    return steady_state(sector_block(model, 0), gap_floor)


@dataclass(frozen=True, eq=False)
class SpectrumResult:
    """Slowest eigenpairs of one sector block, in spectral order."""

    sector: SymmetrySector
    eigenvalues: np.ndarray
    vectors: np.ndarray = field(repr=False)

    def __len__(self):
        return len(self.eigenvalues)

    @property
    def label(self) -> str:
        return self.sector.label

    def eigenmatrix(self, j) -> np.ndarray:
        return self.sector.scatter(self.vectors[:, j])

    @property
    def pairs(self):
        return [(lam, self.eigenmatrix(j)) for j, lam in enumerate(self.eigenvalues)]


def _symmetric_tridiagonal_eig(B):
    """Eigenpairs of ``B`` when it is similar to a real symmetric tridiagonal matrix.

    Birth-death blocks (the U(1) bands of the laser) are tridiagonal with a
    constant imaginary diagonal part and positive products of opposite
    off-diagonal entries.  A diagonal similarity ``D^-1 B D`` then makes them
    symmetric, where the tridiagonal solver is backward stable; a general
    non-symmetric solver on the raw block loses many digits on the fast modes.
    Returns ``None`` when the structure is absent.
    """
    d = B.shape[0]
    if d < 2:
        return None
    diag = np.diag(B)
    lower = np.diag(B, -1)
    upper = np.diag(B, 1)
    if np.count_nonzero(B) > np.count_nonzero(diag) + np.count_nonzero(lower) + np.count_nonzero(upper):
        return None
    shift = diag.imag.mean()
    if np.any(np.abs(diag.imag - shift) > 1e-14 * max(1.0, abs(shift))):
        return None
    if np.any(lower.imag != 0) or np.any(upper.imag != 0):
        return None
    prod = lower.real * upper.real
    if np.any(prod <= 0):
        return None
    lam, w = scipy.linalg.eigh_tridiagonal(diag.real, np.sqrt(prod))
    # D[i+1] / D[i] = sqrt(lower[i] / upper[i]); kept in logs against overflow
    logd = np.concatenate([[0.0], np.cumsum(0.5 * np.log(lower.real / upper.real))])
    vecs = w * np.exp(logd - logd.max())[:, None]
    return lam + 1j * shift, vecs.astype(complex)


def sector_spectrum(block: SectorMatrix, count=None) -> SpectrumResult:
    """Dense eigendecomposition of a sector block, keeping the ``count`` slowest pairs.

    Eigenvectors have unit norm and their largest-magnitude entry made real
    and positive.
    """
    B = block.matrix
    d = B.shape[0]
    count = d if count is None else int(count)
    if not 0 < count <= d:
        raise ValueError(f"count must be in 1..{d}, got {count}")
    try:
        sym = _symmetric_tridiagonal_eig(B)
        lam, vecs = sym if sym is not None else scipy.linalg.eig(B)
    except scipy.linalg.LinAlgError as exc:
        cond = np.linalg.cond(B)
        raise NumericalError(f"eigensolver failed on {block.sector.label} (cond {cond:.2e}): {exc}") from exc
    order = spectral_order(lam)[:count]
    lam = lam[order]
    vecs = vecs[:, order]
    vecs /= np.linalg.norm(vecs, axis=0)
    top = vecs[np.argmax(np.abs(vecs), axis=0), np.arange(count)]
    vecs *= (np.abs(top) / top)[None, :]

    residual = np.linalg.norm(B @ vecs - vecs * lam[None, :], axis=0)
    bound = 1e-8 * max(1.0, float(np.max(np.abs(B)))) * d
    if np.any(residual > bound):
        raise NumericalError(
            f"eigenpair residual {residual.max():.2e} exceeds {bound:.2e} on {block.sector.label}"
        )
    return SpectrumResult(block.sector, lam, vecs)


def model_spectrum(model: LindbladModel, k, count=None, kmax=None) -> SpectrumResult:
    return sector_spectrum(sector_block(model, k, kmax), count)


@dataclass
class GapTrace:
    """Slowest eigenvalues per sector along a parameter grid.

    ``eigenvalues[k][i]`` holds the two slowest eigenvalues of sector ``k`` at
    ``grid[i]``.  :meth:`gap` returns the slowest decaying rate that is not the
    steady state: ``lambda_1`` for sector 0 and ``lambda_0`` otherwise.
    """

    parameter: str
    grid: np.ndarray
    eigenvalues: dict
    N: float | None = None

    def lambda0(self, k) -> np.ndarray:
        return self.eigenvalues[k][:, 0]

    def gap(self, k) -> np.ndarray:
        col = 1 if k == 0 else 0
        return self.eigenvalues[k][:, col]


def gap_trace(model_family, grid, sectors=(0, 1), parameter="A", N=None, workers=1) -> GapTrace:
    """Evaluate the slowest sector eigenvalues of ``model_family(x)`` for ``x`` in ``grid``."""
    grid = np.asarray(grid, dtype=float)
    if grid.size == 0:
        raise ValueError("grid must be nonempty")
    if np.any(np.diff(grid) <= 0):
        raise ValueError("grid must be strictly increasing")
    sectors = tuple(sectors)
    kmax = max(abs(k) for k in sectors)

    def point(x):
        model = model_family(x)
        out = {}
        for k in sectors:
            block = sector_block(model, k, kmax)
            res = sector_spectrum(block, min(2, block.dim))
            lam = np.full(2, np.nan, dtype=complex)
            lam[: len(res)] = res.eigenvalues
            out[k] = lam
        return out

    rows = parallel_map(point, grid, workers)
    eig = {k: np.array([r[k] for r in rows]) for k in sectors}
    return GapTrace(parameter, grid, eig, N)


@dataclass(frozen=True)
class BrokenState:
    state: DensityMatrix
    c: float
    clipped: bool


def broken_steady_states(rho0, eigk, c, tol=1e-9, iterations=60) -> BrokenState:
    """``rho0 + c (E + E^dag)`` renormalized, backing off ``c`` until the state is positive.

    When the requested ``c`` gives a negative eigenvalue below ``-tol``, the
    largest positive ``|c|`` along the same ray is found by bisection and
    ``clipped`` is set.
    """
    rho0 = rho0 if isinstance(rho0, DensityMatrix) else DensityMatrix(rho0)
    base = np.asarray(rho0)
    E = as_operator(eigk, rho0.cutoff)
    X = E + E.conj().T

    def build(cc):
        rho = base + cc * X
        return rho / np.trace(rho).real

    def lowest(cc):
        rho = build(cc)
        return np.linalg.eigvalsh((rho + rho.conj().T) / 2)[0]

    if lowest(c) >= -tol:
        return BrokenState(DensityMatrix(build(c), psd_floor=tol), float(c), False)
    lo, hi = 0.0, 1.0
    for _ in range(iterations):
        mid = (lo + hi) / 2
        if lowest(mid * c) >= -tol:
            lo = mid
        else:
            hi = mid
    return BrokenState(DensityMatrix(build(lo * c), psd_floor=tol), float(lo * c), True)


@dataclass(frozen=True)
class WitnessResult:
    grid: np.ndarray
    values: np.ndarray
    second_derivative: np.ndarray
    spacing: float
    location: float
    magnitude: float


def criticality_witness(model_family, grid, observable, scale=1.0, workers=1) -> WitnessResult:
    """Central-difference second derivative of a steady-state expectation along ``grid``.

    ``observable`` is either an operator or a callable ``C -> operator`` for
    families whose cutoff changes along the grid.  ``second_derivative[i]``
    belongs to the interior point ``grid[i + 1]``.
    """
    grid = np.asarray(grid, dtype=float)
    if grid.size < 5:
        raise ValueError("need at least 5 grid points")
    steps = np.diff(grid)
    h = float(steps.mean())
    if np.any(np.abs(steps - h) > 1e-9 * max(1.0, abs(h))) or h <= 0:
        raise ValueError("grid must be uniform and increasing")

    def point(x):
        model = model_family(x)
        rho = model_steady_state(model)
        op = observable(model.cutoff) if callable(observable) else observable
        return expectation(rho, op).real * scale

    values = np.array(parallel_map(point, grid, workers))
    d2 = (values[2:] - 2 * values[1:-1] + values[:-2]) / h**2
    i = int(np.argmax(np.abs(d2)))
    return WitnessResult(grid, values, d2, h, float(grid[i + 1]), float(np.abs(d2[i])))
