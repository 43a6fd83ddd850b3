"""The U(1) laser and the Z2 two-photon Kerr resonator, plus cutoff selection.

All rates are in units of the photon loss rate Gamma = 1.  The scaling
parameter ``N`` enters only as ``B -> B/N`` (laser) and ``U -> U/N`` (Kerr).
"""
from __future__ import annotations

import math
import warnings
from dataclasses import asdict, dataclass, replace

import numpy as np

from .errors import MemoryBoundError, NonConvergenceError
from .fock import annihilation, expectation, number, parity, raised_number
from .lindblad import LindbladModel, mem_bound_bytes
from .spectral import model_steady_state

__all__ = [
    "CutoffChoice",
    "KerrConfig",
    "LaserConfig",
    "PRESETS",
    "dephasing_jump",
    "kerr_model",
    "laser_cutoff_cap",
    "laser_model",
    "laser_population_rates",
    "parity_jump",
    "preset",
    "suggest_cutoff",
    "weak_gain_ratio",
]

GAMMA = 1.0


@dataclass(frozen=True)
class LaserConfig:
    """Weak-gain-saturation laser; ``B`` is the unscaled saturation rate."""

    A: float
    B: float = 0.1
    omega: float = 0.0
    eta: float = 0.0
    N: float = 1.0
    C: int | None = None

    def __post_init__(self):
        if not (self.A > 0 and self.B > 0 and self.N > 0):
            raise ValueError(f"A, B and N must be positive: {self}")
        if self.eta < 0:
            raise ValueError("eta must be non-negative")

    @property
    def b(self) -> float:
        """Scaled saturation rate ``B/N``."""
        return self.B / self.N

    def with_(self, **changes) -> "LaserConfig":
        return replace(self, **changes)


@dataclass(frozen=True)
class KerrConfig:
    """Two-photon driven Kerr resonator; ``U`` is the unscaled Kerr interaction."""

    G: float
    Delta: float = 10.0
    U: float = 10.0
    zeta: float = 0.0
    N: float = 1.0
    C: int | None = None

    def __post_init__(self):
        if not (self.G > 0 and self.U > 0 and self.N > 0):
            raise ValueError(f"G, U and N must be positive: {self}")
        if self.zeta < 0:
            raise ValueError("zeta must be non-negative")

    def with_(self, **changes) -> "KerrConfig":
        return replace(self, **changes)


def laser_cutoff_cap(cfg: LaserConfig) -> int:
    """Largest cutoff for which every retained gain transition has ``b (n+1) <= 2A``.

    Beyond it the weak-saturation gain ``(2A - b(n+1))^2`` grows again and the
    truncated chain acquires an unphysical runaway at the top.
    """
    return max(2, int(math.floor(2 * cfg.A / cfg.b)) + 1)


def dephasing_jump(eta, C) -> np.ndarray:
    """``sqrt(eta/4) a a^dag``, which damps band ``k`` at rate ``eta k^2 / 8``."""
    return math.sqrt(eta / 4) * raised_number(C)


def parity_jump(zeta, C) -> np.ndarray:
    """``sqrt(zeta) exp(i pi a^dag a)``, which damps the odd sector at rate ``2 zeta``."""
    return math.sqrt(zeta) * parity(C)


def laser_model(cfg: LaserConfig) -> LindbladModel:
    C = cfg.C
    if C is None:
        raise ValueError("LaserConfig.C must be set; use suggest_cutoff to choose one")
    cap = laser_cutoff_cap(cfg)
    if C > cap:
        warnings.warn(
            f"cutoff {C} exceeds the weak-gain validity cap {cap} for A={cfg.A}, B/N={cfg.b:g}",
            stacklevel=2,
        )
    a = annihilation(C)
    ad = a.conj().T
    aad = raised_number(C)
    eye = np.eye(C)
    H = cfg.omega * number(C)
    jumps = [
        ad @ (2 * cfg.A * eye - cfg.b * aad) / (2 * math.sqrt(cfg.A)),
        math.sqrt(3 * cfg.b / 4) * aad,
        math.sqrt(GAMMA) * a,
    ]
    if cfg.eta > 0:
        jumps.append(dephasing_jump(cfg.eta, C))
    return LindbladModel(H, tuple(jumps), "U1", label=f"laser A={cfg.A:g} N={cfg.N:g} eta={cfg.eta:g}")


def kerr_model(cfg: KerrConfig) -> LindbladModel:
    C = cfg.C
    if C is None:
        raise ValueError("KerrConfig.C must be set; use suggest_cutoff to choose one")
    a = annihilation(C)
    ad = a.conj().T
    U = cfg.U / cfg.N
    H = (
        -cfg.Delta * number(C)
        + 0.5j * cfg.G * (ad @ ad - a @ a)
        + 0.5 * U * (ad @ ad @ a @ a)
    )
    jumps = [math.sqrt(GAMMA) * a]
    if cfg.zeta > 0:
        jumps.append(parity_jump(cfg.zeta, C))
    return LindbladModel(H, tuple(jumps), "Z2", label=f"kerr G={cfg.G:g} N={cfg.N:g} zeta={cfg.zeta:g}")


def laser_population_rates(cfg: LaserConfig, C):
    """Up and down rates of the population chain: ``gain[n]`` for ``n -> n+1``, ``loss[n]`` for ``n -> n-1``."""
    n = np.arange(C, dtype=float)
    gain = (n + 1) * (2 * cfg.A - cfg.b * (n + 1)) ** 2 / (4 * cfg.A)
    gain[-1] = 0.0
    loss = GAMMA * n
    return gain, loss


def weak_gain_ratio(cfg: LaserConfig, n_photons) -> float:
    """``B/N (<a^dag a> + 1) / 2A``; the weak-saturation expansion wants it small."""
    ratio = cfg.b * (n_photons + 1) / (2 * cfg.A)
    if ratio > 0.1:
        warnings.warn(f"weak-gain validity ratio {ratio:.3f} exceeds 0.1", stacklevel=2)
    return ratio


@dataclass
class CutoffChoice:
    cutoff: int
    table: list
    capped: bool = False


def _default_schedule(start, growth, stop):
    C = int(start)
    while C < stop:
        yield C
        C = max(C + 1, int(round(C * growth)))
    yield int(stop)


def _block_bytes(C, symmetry):
    d = C * C / 2 if symmetry == "Z2" else C
    return 16 * 4 * d * d


def suggest_cutoff(builder, params, observable="n", tol=1e-6, start=10, growth=1.5,
                   max_cutoff=400, schedule=None) -> CutoffChoice:
    """Grow the cutoff until a steady-state expectation stops changing.

    ``builder(params, C)`` returns the model at cutoff ``C``.  The schedule
    (default ``start, start*1.5, ...`` up to ``max_cutoff``) is walked until
    ``|obs(C') - obs(C)| <= tol |obs(C')|`` for consecutive entries; ``C'`` is
    returned with the full convergence table.  When the schedule ends at
    ``max_cutoff`` without converging, the choice is returned with
    ``capped=True`` only if ``max_cutoff`` came from a physical cap, else
    :class:`NonConvergenceError` is raised.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    steps = list(schedule) if schedule is not None else list(_default_schedule(start, growth, max_cutoff))
    table = []
    prev = None
    for C in steps:
        if C < 2:
            continue
        model = builder(params, C)
        if _block_bytes(C, model.symmetry) > mem_bound_bytes():
            raise NonConvergenceError(
                f"cutoff schedule reached the memory bound at C={C} without converging: {table}"
            )
        op = number(C) if observable == "n" else observable(C)
        value = expectation(model_steady_state(model), op).real
        table.append((C, value))
        if prev is not None and abs(value - prev) <= tol * abs(value) + 1e-14:
            return CutoffChoice(C, table)
        prev = value
    raise NonConvergenceError(f"cutoff did not converge within the schedule: {table}")


def _laser_builder(cfg, C):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return laser_model(cfg.with_(C=C))


def _kerr_builder(cfg, C):
    return kerr_model(cfg.with_(C=C))


def laser_auto_cutoff(cfg: LaserConfig, tol=1e-8) -> CutoffChoice:
    """Converged cutoff for the laser, never exceeding :func:`laser_cutoff_cap`.

    The gain-loss estimate ``(A - Gamma) N / B`` only seeds the schedule.
    When the cap is reached the cap itself is returned (``capped=True``):
    the gain from the top retained level is then essentially zero.
    """
    cap = laser_cutoff_cap(cfg)
    n_est = max(0.0, (cfg.A - GAMMA) / cfg.b)
    start = min(cap, max(10, int(n_est + 6 * math.sqrt(n_est + 1) + 10)))
    try:
        return suggest_cutoff(_laser_builder, cfg, tol=tol, start=start, max_cutoff=cap)
    except NonConvergenceError:
        if cap > 400:
            raise
        model = _laser_builder(cfg, cap)
        value = expectation(model_steady_state(model), number(cap)).real
        return CutoffChoice(cap, [(cap, value)], capped=True)


def kerr_auto_cutoff(cfg: KerrConfig, tol=1e-6, start=10) -> CutoffChoice:
    return suggest_cutoff(_kerr_builder, cfg, tol=tol, start=start, max_cutoff=80)


def auto_cutoff(cfg, tol=None) -> CutoffChoice:
    if isinstance(cfg, LaserConfig):
        return laser_auto_cutoff(cfg, 1e-8 if tol is None else tol)
    return kerr_auto_cutoff(cfg, 1e-6 if tol is None else tol)


def build(cfg) -> LindbladModel:
    """Build either model, choosing the cutoff automatically when ``cfg.C`` is unset."""
    if cfg.C is None:
        cfg = cfg.with_(C=auto_cutoff(cfg).cutoff)
    return laser_model(cfg) if isinstance(cfg, LaserConfig) else kerr_model(cfg)


PRESETS = {
    "laser-fig1": {
        "model": asdict(LaserConfig(A=1.25, B=0.1, omega=0.0, eta=0.0, N=5.0)),
        "kind": "laser",
        "sweep": {"parameter": "A", "start": 0.05, "stop": 2.0, "step": 0.05, "N": [1, 2, 5, 10],
                  "removal": [0.0, 0.2]},
        "wigner": {"re": [-6.0, 6.0, 61], "im": [-6.0, 6.0, 61]},
    },
    "kerr-fig2": {
        "model": asdict(KerrConfig(G=12.5, Delta=10.0, U=10.0, zeta=0.0, N=2.0)),
        "kind": "kerr",
        "sweep": {"parameter": "G", "start": 0.5, "stop": 12.5, "step": 0.5, "N": [1, 2, 3],
                  "removal": [0.0, 0.2]},
        "wigner": {"re": [-4.5, 4.5, 61], "im": [-4.5, 4.5, 61]},
    },
}


def preset(name):
    """Config object of a shipped preset (``laser-fig1`` or ``kerr-fig2``)."""
    if name not in PRESETS:
        raise KeyError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}")
    entry = PRESETS[name]
    cls = LaserConfig if entry["kind"] == "laser" else KerrConfig
    return cls(**entry["model"])
