"""Command-line driver: ``dptlab <task> [--config file.toml] [--preset name] ...``.

Every run writes one directory holding ``summary.json``, the task CSVs and
``config.toml``, the effective configuration with all defaults resolved.
Running again from that echo reproduces the CSVs byte for byte (apart from
the optional timestamp comment line).

Exit codes: 0 success, 2 configuration error, 3 numerical failure, 4 I/O error.
"""
from __future__ import annotations

import argparse
import copy
import csv
import dataclasses
import json
import math
import sys
import time
import warnings
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

import numpy as np
import tomli
import tomli_w

from . import __version__
from .dynamics import TRUNCATION_GUARD, _Rhs, evolve, fit_decay_rate, wigner_series
from .errors import ConfigError, CutoffTooSmallError, DptlabError
from .fock import annihilation, coherent_state, expectation, fock_dm, number, parity, phase_rotation
from .integrate import dopri5
from .models import (
    PRESETS,
    KerrConfig,
    LaserConfig,
    auto_cutoff,
    dephasing_jump,
    kerr_model,
    laser_model,
    parity_jump,
)
from .spectral import model_steady_state, parallel_map, sector_block, sector_spectrum
from .symmetry import sectors_for, ssb_removal_check, verify_weak_symmetry

__all__ = ["RunConfig", "TASKS", "emit_csv", "load_config", "main", "run"]

TASKS = ("steady", "spectrum", "evolve", "wigner", "sweep", "sectors-check")
EXIT_CONFIG, EXIT_NUMERICAL, EXIT_IO = 2, 3, 4

NUMERICS_DEFAULTS = {
    "cutoff": "auto",
    "kmax": 2,
    "count": 10,
    "rtol": 1e-8,
    "atol": 1e-10,
    "t_final": 20.0,
    "n_records": 101,
    "initial": "coherent-ss",
}
WIGNER_DEFAULTS = {"re": [-6.0, 6.0, 61], "im": [-6.0, 6.0, 61], "times": []}
CHECK_DEFAULTS = {"operator": "default", "rate": 0.2, "phi": 0.7}
MODEL_CLASSES = {"laser": LaserConfig, "kerr": KerrConfig}
REMOVAL_FIELD = {"laser": "eta", "kerr": "zeta"}
SWEEP_PARAM = {"laser": "A", "kerr": "G"}


@dataclass
class RunConfig:
    """Validated run description; ``model`` is a :class:`LaserConfig` or :class:`KerrConfig`."""

    task: str
    kind: str
    model: object
    numerics: dict = field(default_factory=lambda: dict(NUMERICS_DEFAULTS))
    sweep: dict | None = None
    wigner: dict = field(default_factory=lambda: copy.deepcopy(WIGNER_DEFAULTS))
    check: dict = field(default_factory=lambda: dict(CHECK_DEFAULTS))
    out: str = "dptlab_out"
    timestamp: bool = True
    workers: int = 1

    def echo(self) -> dict:
        """Effective configuration as a TOML-ready mapping."""
        model = {k: v for k, v in dataclasses.asdict(self.model).items() if v is not None}
        doc = {
            "task": self.task,
            "model": {"kind": self.kind, **model},
            "numerics": dict(self.numerics),
            "wigner": copy.deepcopy(self.wigner),
            "check": dict(self.check),
            "output": {"dir": self.out, "timestamp": self.timestamp, "workers": self.workers},
        }
        if self.sweep is not None:
            doc["sweep"] = copy.deepcopy(self.sweep)
        return doc


def _fail(msg):
    raise ConfigError(msg)


def _number(value, where, integer=False):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        _fail(f"{where}: expected a number, got {value!r}")
    if integer and int(value) != value:
        _fail(f"{where}: expected an integer, got {value!r}")
    return int(value) if integer else float(value)


def _parse_scalar(text, where):
    try:
        return float(text)
    except ValueError:
        _fail(f"{where}: {text!r} is not a number")


def _model_from(kind, fields, where="model"):
    cls = MODEL_CLASSES[kind]
    known = {f.name for f in dataclasses.fields(cls)}
    unknown = sorted(set(fields) - known)
    if unknown:
        _fail(f"{where}: unknown field(s) {unknown} for {kind} model; allowed {sorted(known)}")
    clean = {}
    for name, value in fields.items():
        if name == "C":
            clean[name] = None if value is None else _number(value, f"{where}.C", integer=True)
        else:
            clean[name] = _number(value, f"{where}.{name}")
    try:
        return cls(**clean)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{where}: {exc}") from exc


def _grid(spec, where):
    """``{start, stop, step}`` or an explicit ``grid`` list, as a float array."""
    if "grid" in spec:
        grid = np.array([_number(v, f"{where}.grid") for v in spec["grid"]], dtype=float)
    else:
        for key in ("start", "stop", "step"):
            if key not in spec:
                _fail(f"{where}: needs either 'grid' or 'start', 'stop' and 'step' (missing {key!r})")
        start, stop, step = (_number(spec[k], f"{where}.{k}") for k in ("start", "stop", "step"))
        if step <= 0:
            _fail(f"{where}.step must be positive")
        count = int(math.floor((stop - start) / step + 1e-9)) + 1
        grid = np.round(start + step * np.arange(max(count, 0)), 12)
    if grid.size == 0:
        _fail(f"{where}: grid is empty")
    if np.any(np.diff(grid) <= 0):
        _fail(f"{where}: grid must be strictly increasing")
    return grid


def load_config(argv_ns) -> RunConfig:
    """Merge preset, TOML file and command-line overrides, in that order of precedence."""
    doc = {}
    preset_name = argv_ns.preset
    if argv_ns.config:
        path = Path(argv_ns.config)
        try:
            text = path.read_text(encoding="utf-8")
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        try:
            doc = tomli.loads(text)
        except tomli.TOMLDecodeError as exc:
            raise ConfigError(f"{path}: {exc}") from exc
        preset_name = preset_name or doc.get("preset")
    if not preset_name and "model" not in doc:
        _fail("no model given: pass --preset or a config file with a [model] table")

    kind, model_fields, sweep, preset_wigner = None, {}, None, {}
    if preset_name:
        if preset_name not in PRESETS:
            _fail(f"unknown preset {preset_name!r}; choose from {sorted(PRESETS)}")
        entry = PRESETS[preset_name]
        kind = entry["kind"]
        model_fields = {k: v for k, v in entry["model"].items() if v is not None}
        sweep = copy.deepcopy(entry["sweep"])
        preset_wigner = copy.deepcopy(entry.get("wigner", {}))
    file_model = dict(doc.get("model", {}))
    file_kind = file_model.pop("kind", None)
    if file_kind is not None:
        if file_kind not in MODEL_CLASSES:
            _fail(f"model.kind must be one of {sorted(MODEL_CLASSES)}, got {file_kind!r}")
        if kind is not None and file_kind != kind:
            _fail(f"model.kind {file_kind!r} conflicts with preset {preset_name!r} ({kind})")
        kind = file_kind
    if kind is None:
        _fail("model.kind is required when no preset is given")
    model_fields.update(file_model)

    for item in argv_ns.param or []:
        if "=" not in item:
            _fail(f"--param expects NAME=VALUE, got {item!r}")
        name, value = item.split("=", 1)
        model_fields[name.strip()] = _parse_scalar(value, f"--param {name}")
    if argv_ns.n is not None:
        model_fields["N"] = argv_ns.n
    if argv_ns.eta is not None:
        if kind != "laser":
            _fail("--eta applies to the laser model; use --zeta for the Kerr model")
        model_fields["eta"] = argv_ns.eta
    if argv_ns.zeta is not None:
        if kind != "kerr":
            _fail("--zeta applies to the Kerr model; use --eta for the laser model")
        model_fields["zeta"] = argv_ns.zeta

    numerics = dict(NUMERICS_DEFAULTS)
    for key, value in doc.get("numerics", {}).items():
        if key not in NUMERICS_DEFAULTS:
            _fail(f"numerics: unknown field {key!r}; allowed {sorted(NUMERICS_DEFAULTS)}")
        numerics[key] = value
    if argv_ns.cutoff is not None:
        numerics["cutoff"] = argv_ns.cutoff
    if argv_ns.kmax is not None:
        numerics["kmax"] = argv_ns.kmax
    cutoff = numerics["cutoff"]
    if cutoff != "auto":
        try:
            cutoff = int(cutoff)
        except (TypeError, ValueError):
            _fail(f"numerics.cutoff must be 'auto' or an integer, got {cutoff!r}")
        if cutoff < 2:
            _fail("numerics.cutoff must be at least 2")
        numerics["cutoff"] = cutoff
    numerics["kmax"] = _number(numerics["kmax"], "numerics.kmax", integer=True)
    numerics["count"] = _number(numerics["count"], "numerics.count", integer=True)
    numerics["n_records"] = _number(numerics["n_records"], "numerics.n_records", integer=True)
    for key in ("rtol", "atol", "t_final"):
        numerics[key] = _number(numerics[key], f"numerics.{key}")
    if numerics["kmax"] < 0 or numerics["count"] < 1 or numerics["n_records"] < 2 or numerics["t_final"] <= 0:
        _fail("numerics: kmax >= 0, count >= 1, n_records >= 2 and t_final > 0 are required")
    initial = str(numerics["initial"])
    if not (initial in ("coherent-ss", "vacuum") or initial.startswith(("fock:", "coherent:"))):
        _fail(f"numerics.initial must be coherent-ss, vacuum, fock:<n> or coherent:<alpha>, got {initial!r}")

    if "sweep" in doc:
        sweep = {**(sweep or {}), **doc["sweep"]}
        if "grid" in doc["sweep"]:
            for key in ("start", "stop", "step"):
                sweep.pop(key, None)
    wig = {**copy.deepcopy(WIGNER_DEFAULTS), **preset_wigner}
    for key, value in doc.get("wigner", {}).items():
        if key not in WIGNER_DEFAULTS:
            _fail(f"wigner: unknown field {key!r}; allowed {sorted(WIGNER_DEFAULTS)}")
        wig[key] = value
    check = dict(CHECK_DEFAULTS)
    for key, value in doc.get("check", {}).items():
        if key not in CHECK_DEFAULTS:
            _fail(f"check: unknown field {key!r}; allowed {sorted(CHECK_DEFAULTS)}")
        check[key] = value

    output = doc.get("output", {})
    out = argv_ns.out or output.get("dir", "dptlab_out")
    timestamp = bool(output.get("timestamp", True)) and not argv_ns.no_timestamp
    workers = argv_ns.workers if argv_ns.workers is not None else output.get("workers", 1)
    workers = _number(workers, "workers", integer=True)

    task = argv_ns.task or doc.get("task")
    if task not in TASKS:
        _fail(f"task must be one of {TASKS}, got {task!r}")

    cfg = RunConfig(task, kind, _model_from(kind, model_fields), numerics, sweep, wig, check,
                    str(out), timestamp, max(1, workers))
    _validate_task(cfg)
    return cfg


def _validate_task(cfg: RunConfig):
    if cfg.task == "sweep":
        if not cfg.sweep:
            _fail("task 'sweep' needs a [sweep] table (or a preset that provides one)")
        param = cfg.sweep.get("parameter", SWEEP_PARAM[cfg.kind])
        if param not in {f.name for f in dataclasses.fields(cfg.model)} - {"N", "C"}:
            _fail(f"sweep.parameter {param!r} is not a {cfg.kind} model field")
        cfg.sweep["parameter"] = param
        _grid(cfg.sweep, "sweep")
        Ns = cfg.sweep.get("N", [cfg.model.N])
        if not Ns:
            _fail("sweep.N must be nonempty")
        cfg.sweep["N"] = [_number(v, "sweep.N") for v in Ns]
        cfg.sweep["removal"] = [_number(v, "sweep.removal")
                                for v in cfg.sweep.get("removal", [getattr(cfg.model, REMOVAL_FIELD[cfg.kind])])]
    if cfg.task == "wigner":
        for axis in ("re", "im"):
            spec = cfg.wigner[axis]
            if len(spec) != 3 or int(spec[2]) != spec[2] or spec[2] < 2 or spec[1] <= spec[0]:
                _fail(f"wigner.{axis} must be [min, max, points] with max > min and points >= 2")
        cfg.wigner["times"] = [_number(t, "wigner.times") for t in cfg.wigner["times"]]
        if any(t < 0 for t in cfg.wigner["times"]):
            _fail("wigner.times must be non-negative")
    if cfg.task == "sectors-check" and cfg.check["operator"] not in ("default", "dephasing", "parity", "a"):
        _fail("check.operator must be one of default, dephasing, parity, a")


# ---------------------------------------------------------------- execution


def _fmt(x) -> str:
    return format(float(x), ".17g")


def emit_csv(path, header, rows, timestamp=False):
    """Write a UTF-8 CSV with CRLF line ends; floats carry 17 significant digits."""
    path = Path(path)
    with path.open("w", encoding="utf-8", newline="") as fh:
        if timestamp:
            fh.write(f"# generated {datetime.now(timezone.utc).isoformat(timespec='seconds')}\r\n")
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) if isinstance(v, (float, np.floating)) else v for v in row])
    return path


def _build_model(kind, params):
    return laser_model(params) if kind == "laser" else kerr_model(params)


def _resolve_cutoff(cfg: RunConfig, params=None):
    """Model parameters with ``C`` set, plus the convergence table behind the choice."""
    params = cfg.model if params is None else params
    if params.C is not None:
        return params, []
    if cfg.numerics["cutoff"] != "auto":
        return params.with_(C=cfg.numerics["cutoff"]), []
    choice = auto_cutoff(params)
    return params.with_(C=choice.cutoff), [[int(c), float(v)] for c, v in choice.table]


def _sector_ks(kind, kmax):
    return list(range(kmax + 1)) if kind == "laser" else [0, 1]


def _gaps(model, ks):
    """Slowest nonstationary rate ``|Re lambda|`` per sector."""
    out = {}
    for k in ks:
        block = sector_block(model, k, max(ks))
        count = min(2, block.dim)
        lam = sector_spectrum(block, count).eigenvalues
        pick = 1 if k == 0 else 0
        out[str(k)] = float(abs(lam[pick].real)) if pick < len(lam) else float("nan")
    return out


def _steady_observables(rho, params):
    C = rho.cutoff
    a = annihilation(C)
    n = expectation(rho, number(C)).real
    a1 = expectation(rho, a)
    a2 = expectation(rho, a @ a)
    return {
        "n": float(n),
        "n_rescaled": float(n / params.N),
        "re_a": float(a1.real), "im_a": float(a1.imag),
        "re_a2": float(a2.real), "im_a2": float(a2.imag),
        "purity": float(rho.purity()),
    }


def _task_steady(cfg, params, out):
    model = _build_model(cfg.kind, params)
    rho = model_steady_state(model)
    pops = np.real(np.diag(np.asarray(rho)))
    emit_csv(out / "steady.csv", ["n", "population"],
             [(i, float(p)) for i, p in enumerate(pops)], cfg.timestamp)
    return _steady_observables(rho, params), _gaps(model, _sector_ks(cfg.kind, cfg.numerics["kmax"]))


def _task_spectrum(cfg, params, out):
    model = _build_model(cfg.kind, params)
    ks = _sector_ks(cfg.kind, cfg.numerics["kmax"])
    rows = []
    gaps = {}
    for k in ks:
        block = sector_block(model, k, max(ks))
        res = sector_spectrum(block, min(cfg.numerics["count"], block.dim))
        for j, lam in enumerate(res.eigenvalues):
            rows.append((k, j, float(lam.real), float(lam.imag)))
        pick = 1 if k == 0 else 0
        gaps[str(k)] = float(abs(res.eigenvalues[pick].real)) if pick < len(res) else float("nan")
    emit_csv(out / "spectrum.csv", ["sector", "index", "re_lambda", "im_lambda"], rows, cfg.timestamp)
    return {"count_per_sector": cfg.numerics["count"]}, gaps


def _initial_state(cfg, params, model):
    C = params.C
    spec = cfg.numerics["initial"]
    if spec == "vacuum":
        return fock_dm(0, C)
    if spec.startswith("fock:"):
        return fock_dm(int(spec.split(":", 1)[1]), C)
    if spec.startswith("coherent:"):
        return coherent_state(complex(spec.split(":", 1)[1]), C)
    n_ss = expectation(model_steady_state(model), number(C)).real
    return coherent_state(math.sqrt(max(n_ss, 0.0)), C)


def _task_evolve(cfg, params, out):
    model = _build_model(cfg.kind, params)
    rho0 = _initial_state(cfg, params, model)
    num = cfg.numerics
    trace = evolve(model, rho0, num["t_final"], n_records=num["n_records"], rtol=num["rtol"], atol=num["atol"])
    rows = []
    for i, t in enumerate(trace.times):
        a1, a2 = trace["a"][i], trace["a2"][i]
        rows.append((float(t), float(trace["n"][i].real), float(a1.real), float(a1.imag), float(a2.real),
                     float(a2.imag), float(trace.trace_error[i]), float(trace.hermiticity_error[i]),
                     float(trace.min_eigenvalue[i])))
    emit_csv(out / "evolve.csv",
             ["t", "n", "re_a", "im_a", "re_a2", "im_a2", "trace_error", "hermiticity_error", "min_eigenvalue"],
             rows, cfg.timestamp)
    obs = {
        "n_final": float(trace["n"][-1].real),
        "n_final_rescaled": float(trace["n"][-1].real / params.N),
        "max_trace_error": float(trace.trace_error.max()),
        "max_hermiticity_error": float(trace.hermiticity_error.max()),
        "min_eigenvalue": float(trace.min_eigenvalue.min()),
        "accepted_steps": trace.stats.accepted,
    }
    mag = np.abs(trace["a"])
    if np.all(mag[len(mag) // 4:] > 1e-12):
        obs["coherence_decay_rate"] = fit_decay_rate(trace.times, mag, t_min=trace.times[len(mag) // 4])
    return obs, {}


def _task_wigner(cfg, params, out):
    model = _build_model(cfg.kind, params)
    re = np.linspace(*cfg.wigner["re"][:2], int(cfg.wigner["re"][2]))
    im = np.linspace(*cfg.wigner["im"][:2], int(cfg.wigner["im"][2]))
    times = cfg.wigner["times"]
    if times:
        rho0 = _initial_state(cfg, params, model)
        grid_t = np.array(sorted(set([0.0] + list(times))))
        by_time = dict(zip(grid_t, _states_at(model, rho0, grid_t, cfg)))
        rhos = [by_time[t] for t in times]
        names = [f"wigner_t{i}.csv" for i in range(len(times))]
    else:
        rhos = [np.asarray(model_steady_state(model))]
        names = ["wigner.csv"]
    grids = wigner_series(rhos, re, im, cfg.workers)
    obs = {}
    for name, g in zip(names, grids):
        rows = [(float(re[ix]), float(im[iy]), float(g.values[iy, ix]))
                for iy in range(len(im)) for ix in range(len(re))]
        emit_csv(out / name, ["re_alpha", "im_alpha", "w"], rows, cfg.timestamp)
        obs[name] = {"normalization": g.normalization(), "flagged_points": int(g.flagged.sum()),
                     "imag_residue": g.imag_residue}
    if times:
        obs["times"] = list(times)
    return obs, {}


def _states_at(model, rho0, grid_t, cfg):
    """States at arbitrary snapshot times, with the same truncation guard as :func:`evolve`."""
    if len(grid_t) == 1:
        return [np.asarray(rho0)]
    states = dopri5(_Rhs(model), np.asarray(rho0, dtype=complex), grid_t,
                    cfg.numerics["rtol"], cfg.numerics["atol"])
    top = max(1, math.ceil(0.1 * model.cutoff))
    pops = np.real(np.einsum("tii->ti", states))[:, -top:].sum(axis=1)
    if pops.max() > TRUNCATION_GUARD:
        raise CutoffTooSmallError(f"population {pops.max():.2e} in the top Fock levels; increase the cutoff")
    return [(s + s.conj().T) / 2 for s in states]


def _sweep_point(cfg, param, x, N, r):
    params = cfg.model.with_(**{param: float(x), "N": float(N), REMOVAL_FIELD[cfg.kind]: float(r), "C": None})
    params, _ = _resolve_cutoff(cfg, params)
    model = _build_model(cfg.kind, params)
    n = expectation(model_steady_state(model), number(params.C)).real
    gaps = _gaps(model, [0, 1])
    return (float(x), float(N), float(r), float(n / N), gaps["0"], gaps["1"], params.C)


def _task_sweep(cfg, params, out):
    param = cfg.sweep["parameter"]
    grid = _grid(cfg.sweep, "sweep")
    points = [(x, N, r) for N in cfg.sweep["N"] for r in cfg.sweep["removal"] for x in grid]
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        rows = parallel_map(lambda p: _sweep_point(cfg, param, *p), points, cfg.workers)
    emit_csv(out / "sweep.csv", ["param", "N", "eta_or_zeta", "n_photon_rescaled", "gap_k0", "gap_k1"],
             [row[:6] for row in rows], cfg.timestamp)
    return {"points": len(rows), "parameter": param, "cutoffs": [row[6] for row in rows]}, {}


def _task_sectors_check(cfg, params, out):
    model = _build_model(cfg.kind, params)
    C = params.C
    chk = cfg.check
    op_name = chk["operator"]
    if op_name == "default":
        op_name = "dephasing" if cfg.kind == "laser" else "parity"
    rate = float(chk["rate"])
    if op_name == "dephasing":
        L = dephasing_jump(rate, C)
    elif op_name == "parity":
        L = parity_jump(rate, C)
    else:
        L = math.sqrt(rate) * annihilation(C)
    J = phase_rotation(float(chk["phi"]), C) if cfg.kind == "laser" else parity(C)
    sym = verify_weak_symmetry(model, J)
    removal = ssb_removal_check(model, L, sectors_for(model, cfg.numerics["kmax"]))
    lines = [
        f"model: {model.label} (C={C})",
        f"weak symmetry ({'phase rotation' if cfg.kind == 'laser' else 'parity'}): {sym}",
        f"removal operator: {op_name} with rate {rate:g}",
        str(removal),
    ]
    (out / "report.txt").write_text("\n".join(lines) + "\n", encoding="utf-8")
    shifts = {}
    for s in removal.sectors:
        shift = s.uniform_shift
        shifts[s.sector] = None if shift is None else float(shift.real)
    obs = {
        "symmetry_passed": sym.passed,
        "symmetry_leakage": sym.leakage,
        "removal_passed": removal.passed,
        "removal_operator": op_name,
        "sector_shifts": shifts,
    }
    return obs, {}


RUNNERS = {
    "steady": _task_steady,
    "spectrum": _task_spectrum,
    "evolve": _task_evolve,
    "wigner": _task_wigner,
    "sweep": _task_sweep,
    "sectors-check": _task_sectors_check,
}


def run(cfg: RunConfig) -> Path:
    """Execute the task and write its outputs; returns the output directory."""
    start = time.perf_counter()
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    if cfg.task == "sweep":
        params, table = cfg.model, []
    else:
        params, table = _resolve_cutoff(cfg)
    obs, gaps = RUNNERS[cfg.task](cfg, params, out)
    with (out / "config.toml").open("wb") as fh:
        tomli_w.dump(cfg.echo(), fh)
    summary = {
        "model": cfg.kind,
        "params": {k: v for k, v in dataclasses.asdict(params).items()},
        "cutoff": params.C,
        "convergence_table": table,
        "observables": obs,
        "gaps_by_sector": gaps,
        "wall_time_s": time.perf_counter() - start,
        "versions": {"dptlab": __version__, "numpy": np.__version__},
    }
    (out / "summary.json").write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return out


def _parser():
    p = argparse.ArgumentParser(prog="dptlab", description=__doc__.split("\n")[0])
    p.add_argument("task", nargs="?", choices=TASKS, help="what to compute")
    p.add_argument("--config", help="TOML run configuration")
    p.add_argument("--preset", choices=sorted(PRESETS), help="start from a shipped preset")
    p.add_argument("--param", action="append", metavar="NAME=VALUE", help="override a model field")
    p.add_argument("--n", type=float, help="scaling parameter N")
    p.add_argument("--eta", type=float, help="laser dephasing rate")
    p.add_argument("--zeta", type=float, help="Kerr parity-jump rate")
    p.add_argument("--cutoff", help="'auto' or an integer Fock cutoff")
    p.add_argument("--kmax", type=int, help="largest U(1) sector index")
    p.add_argument("--out", help="output directory")
    p.add_argument("--workers", type=int, help="threads for sweeps")
    p.add_argument("--no-timestamp", action="store_true", help="omit the timestamp comment in CSVs")
    return p


def main(argv=None) -> int:
    parser = _parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else 0
    try:
        cfg = load_config(ns)
    except ConfigError as exc:
        print(f"dptlab: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        out = run(cfg)
    except ConfigError as exc:
        print(f"dptlab: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (DptlabError, np.linalg.LinAlgError) as exc:
        print(f"dptlab: numerical failure ({type(exc).__name__}): {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except ValueError as exc:
        print(f"dptlab: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"dptlab: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    print(f"dptlab: {cfg.task} finished; outputs in {out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
