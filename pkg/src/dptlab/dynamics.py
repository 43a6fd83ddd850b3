"""Time evolution under a Lindblad generator and Wigner quasiprobabilities."""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
import scipy.sparse as sp

from .errors import CutoffTooSmallError, DimensionError, NumericalError
from .fock import DensityMatrix, annihilation, as_operator, expectation, number, parity
from .integrate import IntegrationStats, dopri5
from .lindblad import LindbladModel
from .symmetry import sector_liouvillian, sectors_for

__all__ = [
    "EvolutionTrace",
    "WignerGrid",
    "default_observables",
    "evolve",
    "evolve_sectorwise",
    "fit_decay_rate",
    "sector_selection_rule_check",
    "wigner",
    "wigner_series",
]

TRUNCATION_GUARD = 1e-6


class _Rhs:
    """``rho -> L rho`` exploiting diagonal and banded operators.

    Diagonal jumps collapse into one elementwise weight; other operators are
    applied as sparse matrices when they are sparse enough.
    """

    def __init__(self, model: LindbladModel):
        C = model.cutoff
        self.heff = self._compact(model.effective_hamiltonian)
        self.weight = np.zeros((C, C), dtype=complex)
        self.others = []
        for L in model.jumps:
            if not np.count_nonzero(L - np.diag(np.diag(L))):
                d = np.diag(L)
                self.weight += np.outer(d, d.conj())
            else:
                self.others.append(self._compact(L))
        self.has_weight = bool(np.any(self.weight))

    @staticmethod
    def _compact(op):
        if not np.count_nonzero(op - np.diag(np.diag(op))):
            return np.diag(op).copy()
        if np.count_nonzero(op) < 0.25 * op.size:
            return sp.csr_matrix(op)
        return op

    @staticmethod
    def _left(op, x):
        if isinstance(op, np.ndarray) and op.ndim == 1:
            return op[:, None] * x
        return op @ x

    def __call__(self, t, rho):
        H = self.heff
        out = -1j * (self._left(H, rho) - self._left(H, rho.conj().T).conj().T)
        if self.has_weight:
            out += self.weight * rho
        for L in self.others:
            x = self._left(L, rho)
            out += self._left(L, x.conj().T).conj().T
        return out


def default_observables(C) -> dict:
    a = annihilation(C)
    return {"n": number(C), "a": a, "a2": a @ a}


@dataclass(eq=False)
class EvolutionTrace:
    """Observable timelines recorded at uniformly spaced times.

    ``trace_error``, ``hermiticity_error`` and ``min_eigenvalue`` are the
    state-integrity diagnostics at each record; ``states`` is only filled when
    requested.
    """

    times: np.ndarray
    observables: dict
    final_state: DensityMatrix
    trace_error: np.ndarray = field(repr=False)
    hermiticity_error: np.ndarray = field(repr=False)
    min_eigenvalue: np.ndarray = field(repr=False)
    top_population: np.ndarray = field(repr=False)
    states: np.ndarray | None = field(default=None, repr=False)
    stats: IntegrationStats | None = None

    def __getitem__(self, name) -> np.ndarray:
        return self.observables[name]


def _resolve_record(record, C):
    if record is None:
        return default_observables(C)
    return {name: as_operator(op, C) for name, op in record.items()}


def _diagnose(states, C):
    top = max(1, math.ceil(0.1 * C))
    tr = np.einsum("tii->t", states)
    herm = np.max(np.abs(states - np.conj(np.swapaxes(states, 1, 2))), axis=(1, 2))
    hermitian = (states + np.conj(np.swapaxes(states, 1, 2))) / 2
    low = np.array([np.linalg.eigvalsh(s)[0] for s in hermitian])
    pops = np.real(np.einsum("tii->ti", states))[:, C - top:].sum(axis=1)
    return np.abs(tr - 1), herm, low, pops


def _build_trace(times, states, record, C, keep_states, stats, psd_floor, guard):
    trace_err, herm, low, pops = _diagnose(states, C)
    if guard is not None and np.max(pops) > guard:
        i = int(np.argmax(pops))
        raise CutoffTooSmallError(
            f"population {pops[i]:.2e} in the top 10% of Fock levels at t={times[i]:.4g} "
            f"exceeds {guard:g}; increase the cutoff (C={C})"
        )
    if max(trace_err.max(), herm.max()) > 1e-8:
        raise NumericalError(
            f"state integrity lost: trace error {trace_err.max():.2e}, Hermiticity {herm.max():.2e}"
        )
    obs = {name: np.einsum("tij,ji->t", states, op) for name, op in record.items()}
    final = states[-1]
    final = DensityMatrix((final + final.conj().T) / 2, tol=1e-8, psd_floor=psd_floor)
    return EvolutionTrace(
        times, obs, final, trace_err, herm, low, pops,
        states if keep_states else None, stats,
    )


def evolve(model: LindbladModel, rho0, t_final, record=None, n_records=101, rtol=1e-8, atol=1e-10,
           keep_states=False, truncation_guard=TRUNCATION_GUARD) -> EvolutionTrace:
    """Integrate ``d rho/dt = L rho`` from ``rho0`` up to ``t_final`` (units of 1/Gamma).

    Observables in ``record`` (name -> operator; default ``n``, ``a``, ``a2``)
    are recorded at ``n_records`` uniformly spaced times including 0 and
    ``t_final``.  Raises :class:`CutoffTooSmallError` when the top 10% of Fock
    levels ever hold more than ``truncation_guard`` population.
    """
    C = model.cutoff
    rho0 = np.asarray(rho0, dtype=complex)
    if rho0.shape != (C, C):
        raise DimensionError(f"initial state shape {rho0.shape} does not match cutoff {C}")
    if t_final <= 0:
        raise ValueError("t_final must be positive")
    if n_records < 2:
        raise ValueError("need at least two record times")
    record = _resolve_record(record, C)
    times = np.linspace(0.0, float(t_final), int(n_records))
    stats = IntegrationStats()
    states = dopri5(_Rhs(model), rho0, times, rtol, atol, stats=stats)
    return _build_trace(times, states, record, C, keep_states, stats, 1e-7, truncation_guard)


def evolve_sectorwise(model: LindbladModel, rho0, t_final, kmax=2, record=None, n_records=101,
                      keep_states=False, truncation_guard=TRUNCATION_GUARD) -> EvolutionTrace:
    """Evolve each symmetry sector of ``rho0`` with its own block and reassemble.

    For U(1) models only the bands ``|k| <= kmax`` are kept; every observable
    whose selection rule places it in those bands is reproduced exactly.  Each
    band is propagated with the exact block exponential over one record
    interval.  Refuses (:class:`NotBlockDiagonalError`) models without the
    tagged symmetry.
    """
    C = model.cutoff
    rho0 = np.asarray(rho0, dtype=complex)
    if rho0.shape != (C, C):
        raise DimensionError(f"initial state shape {rho0.shape} does not match cutoff {C}")
    if model.symmetry == "none":
        raise ValueError("sectorwise evolution needs a model tagged with a symmetry")
    record = _resolve_record(record, C)
    times = np.linspace(0.0, float(t_final), int(n_records))
    dt = times[1] - times[0]
    states = np.zeros((len(times), C, C), dtype=complex)
    sectors = sectors_for(model, kmax)
    for sec in sectors:
        block = sector_liouvillian(model, sec)
        step = scipy.linalg.expm(block.matrix * dt)
        v = sec.gather(rho0)
        rows, cols = sec.basis[:, 0], sec.basis[:, 1]
        for i in range(len(times)):
            states[i, rows, cols] = v
            v = step @ v
    complete = sum(s.dim for s in sectors) == C * C
    return _build_trace(times, states, record, C, keep_states, None,
                        1e-7 if complete else None, truncation_guard)


def fit_decay_rate(times, values, t_min=0.0, t_max=None) -> float:
    """Least-squares rate ``g`` of ``|values| ~ exp(-g t)`` over ``[t_min, t_max]``."""
    times = np.asarray(times, dtype=float)
    mag = np.abs(np.asarray(values))
    sel = (times >= t_min) & (times <= (times[-1] if t_max is None else t_max)) & (mag > 0)
    if np.count_nonzero(sel) < 2:
        raise ValueError("need at least two positive samples in the fit window")
    slope, _ = np.polyfit(times[sel], np.log(mag[sel]), 1)
    return float(-slope)


def sector_selection_rule_check(rho_parts, n) -> dict:
    """``Tr[a^n rho_k]`` for each U(1) band projection ``rho_k`` (mapping ``k -> matrix``)."""
    out = {}
    an = None
    for k, part in rho_parts.items():
        part = np.asarray(part, dtype=complex)
        if an is None:
            an = np.linalg.matrix_power(annihilation(part.shape[0]), n)
        out[k] = expectation(part, an)
    return out


@dataclass(eq=False)
class WignerGrid:
    """``values[i, j] = W(re_alpha[j] + 1j * im_alpha[i])``.

    ``flagged`` marks grid points outside ``|alpha|^2 <= C/4``, where the
    truncated state cannot be trusted to represent the field.
    """

    re_alpha: np.ndarray
    im_alpha: np.ndarray
    values: np.ndarray
    flagged: np.ndarray = field(repr=False)
    imag_residue: float = 0.0

    @property
    def cell_area(self) -> float:
        dx = self.re_alpha[1] - self.re_alpha[0] if len(self.re_alpha) > 1 else 1.0
        dy = self.im_alpha[1] - self.im_alpha[0] if len(self.im_alpha) > 1 else 1.0
        return float(dx * dy)

    def normalization(self) -> float:
        return float(self.values.sum() * self.cell_area)


class _DisplacementRows:
    """Rows ``0..C-1`` of the displacement operator, built in a padded space.

    ``exp(alpha a^dag - conj(alpha) a) = R V exp(-i |alpha| mu) V^dag R^dag``
    with ``i (a^dag - a) = V diag(mu) V^dag`` and ``R = exp(i arg(alpha) a^dag a)``,
    so one Hermitian eigendecomposition serves every grid point.
    """

    def __init__(self, C, alpha_max):
        self.C = C
        # displaced Fock states |m < C> live below (sqrt(C) + |alpha|)^2 plus a few widths
        reach = np.sqrt(C) + alpha_max
        self.Cp = max(2 * C, int(np.ceil(reach**2 + 8 * reach)) + 20)
        a = annihilation(self.Cp)
        mu, V = scipy.linalg.eigh(1j * (a.conj().T - a))
        self.mu = mu
        self.V = V
        self.levels = np.arange(self.Cp)

    def __call__(self, alpha) -> np.ndarray:
        r = abs(alpha)
        rot = np.exp(1j * np.angle(alpha) * self.levels)
        left = rot[: self.C, None] * self.V[: self.C] * np.exp(-1j * r * self.mu)[None, :]
        return (left @ self.V.conj().T) * rot.conj()[None, :]


def wigner_series(rhos, re_alpha, im_alpha, workers=1) -> list[WignerGrid]:
    """Wigner functions ``W(alpha) = (2/pi) Tr[D_alpha P D_alpha^dag rho]`` for several states.

    The displacement rows at each grid point are computed once and reused for
    every state.  Grid points are spread over ``workers`` threads.
    """
    rhos = [np.asarray(r, dtype=complex) for r in rhos]
    C = rhos[0].shape[0]
    if any(r.shape != (C, C) for r in rhos):
        raise DimensionError("all states must share one cutoff")
    re_alpha = np.asarray(re_alpha, dtype=float)
    im_alpha = np.asarray(im_alpha, dtype=float)
    X, Y = np.meshgrid(re_alpha, im_alpha)
    alphas = X + 1j * Y
    flagged = np.abs(alphas) ** 2 > C / 4
    disp = _DisplacementRows(C, float(np.max(np.abs(alphas))))
    signs = np.diag(parity(disp.Cp)).real
    def point(idx):
        D = disp(alphas[idx])
        return [(2 / np.pi) * np.dot(signs, np.sum(D.conj() * (rho @ D), axis=0)) for rho in rhos]

    cells = list(np.ndindex(alphas.shape))
    raw = np.zeros((len(rhos),) + alphas.shape, dtype=complex)
    for idx, vals in zip(cells, _thread_map(point, cells, workers)):
        raw[(slice(None),) + idx] = vals
    return [
        WignerGrid(re_alpha, im_alpha, w.real.copy(), flagged, float(np.max(np.abs(w.imag))))
        for w in raw
    ]


def wigner(rho, re_alpha, im_alpha, workers=1) -> WignerGrid:
    return wigner_series([rho], re_alpha, im_alpha, workers)[0]


def _thread_map(fn, items, workers):
    if workers is None or workers <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))
