"""Runs, sweeps and figure datasets, and their CSV/JSON serialization.

A dataset is a set of equally long named columns plus a metadata object.
CSV files carry the metadata as one ``# metadata: {...}`` comment line ahead
of the column header; JSON files hold ``{"metadata": ..., "columns": ...}``.
The metadata always contains the configuration that produced the file, so
``read_dataset`` followed by ``config_from_dict(meta["config"])`` re-runs it.
"""

from __future__ import annotations

import datetime
import json
import os
import tempfile
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .analytic import detuned_fields, efficiency_analytic, on_resonance_fields
from .config import RunConfig, SweepSpec, config_from_dict
from .errors import ConfigError, InvalidParameter
from .oracle import oracle_run
from .presets import FIG2A_Z, FIGURES, apply_sweep_value
from .spectral import EnvelopeTrace, efficiency_trace, solve_spectral

FORMAT_VERSION = 1
RETARDED_WINDOW = (-5.0, 5.0, 2001)
THREADS_ENV = "LAMBDA_FWM_THREADS"


@dataclass
class Dataset:
    columns: dict
    metadata: dict = field(default_factory=dict)

    def column_names(self) -> list:
        return list(self.columns)


def _solver_versions(solvers) -> dict:
    return {s: __version__ for s in solvers}


def _analytic(cfg: RunConfig, z: float, times):
    medium = cfg.medium
    if not cfg.pulse.is_gaussian:
        raise InvalidParameter("the analytic solver needs a Gaussian probe")
    if medium.delta2 == 0 and medium.delta3 == 0:
        trace = on_resonance_fields(medium, cfg.pulse, z, times)
    else:
        trace = detuned_fields(medium, cfg.pulse, z, times)
    # closed-form efficiency assumes a unit Gaussian; scale-invariant in the amplitude
    eff = efficiency_analytic(medium, z, times)
    return trace, eff.efficiency, {}


def _spectral(cfg: RunConfig, z: float, times):
    trace, _ = solve_spectral(cfg.medium, cfg.pulse, z, times, cfg.spectral_grid)
    return trace, efficiency_trace(trace, cfg.medium, cfg.pulse).efficiency, {}


def _oracle(cfg: RunConfig, z: float, times):
    result = oracle_run(cfg.medium, cfg.pulse, z)
    src = result.trace

    def onto(values):
        re = np.interp(times, src.times, values.real, left=0.0, right=0.0)
        im = np.interp(times, src.times, values.imag, left=0.0, right=0.0)
        return re + 1j * im

    trace = EnvelopeTrace(times, onto(src.omega20), onto(src.omega30), z)
    extra = {
        "richardson_error": result.error_estimate,
        "z_steps": result.grid.z_steps,
        "s_steps": result.grid.s_steps,
    }
    return trace, efficiency_trace(trace, cfg.medium, cfg.pulse).efficiency, extra


_SOLVER_FUNCS = {"analytic": _analytic, "spectral": _spectral, "oracle": _oracle}


def run(cfg: RunConfig, stamp: bool = False) -> Dataset:
    """Evaluate every selected solver on the configured time grid."""
    z = cfg.resolved_z
    times = cfg.times()
    columns = {"t_over_tau": times, "retarded_t_over_tau": times - z}
    peaks, extras = {}, {}
    for solver in cfg.solvers:
        trace, eff, extra = _SOLVER_FUNCS[solver](cfg, z, times)
        columns[f"{solver}_re_omega20"] = trace.omega20.real
        columns[f"{solver}_im_omega20"] = trace.omega20.imag
        columns[f"{solver}_re_omega30"] = trace.omega30.real
        columns[f"{solver}_im_omega30"] = trace.omega30.imag
        columns[f"{solver}_efficiency"] = eff
        i = int(np.argmax(eff))
        peaks[solver] = {"efficiency": float(eff[i]), "retarded_t_over_tau": float(times[i] - z)}
        if extra:
            extras[solver] = extra
    meta = {
        "kind": "run",
        "format_version": FORMAT_VERSION,
        "package": "lambda_fwm",
        "solver_versions": _solver_versions(cfg.solvers),
        "config": cfg.to_dict(),
        "z_over_c_tau": z,
        "z_cm": z * cfg.c_tau_cm,
        "medium": cfg.medium.to_dict(),
        "peaks": peaks,
    }
    if extras:
        meta["solver_diagnostics"] = extras
    if stamp:
        meta["created"] = _timestamp()
    return Dataset(columns, meta)


def _timestamp() -> str:
    return datetime.datetime.now(datetime.timezone.utc).isoformat(timespec="seconds")


# --------------------------------------------------------------------------- sweeps


def thread_count(n_tasks: int) -> int:
    raw = os.environ.get(THREADS_ENV)
    if raw is None:
        limit = os.cpu_count() or 1
    else:
        try:
            limit = int(raw)
        except ValueError as exc:
            raise ConfigError(f"must be a positive integer, got {raw!r}", THREADS_ENV) from exc
        if limit < 1:
            raise ConfigError(f"must be a positive integer, got {raw!r}", THREADS_ENV)
    return max(1, min(limit, n_tasks))


def sweep_configs(spec: SweepSpec) -> list:
    base = spec.base
    out = []
    for value in spec.values:
        try:
            medium = apply_sweep_value(base.medium, spec.parameter, value)
        except ValueError as exc:
            raise ConfigError(str(exc), "sweep.values") from exc
        data = base.to_dict()
        data["medium"] = RunConfig(medium=medium, z=1.0).to_dict()["medium"]
        out.append(config_from_dict(data))
    return out


def run_sweep(spec: SweepSpec, out_dir, fmt: str = "csv", stamp: bool = False) -> Path:
    """Run every sweep point, writing one file per point and the index last.

    Points may run concurrently (``LAMBDA_FWM_THREADS`` caps the pool); the
    files do not depend on the number of threads.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    configs = sweep_configs(spec)
    names = [f"point_{i:03d}.{fmt}" for i in range(len(configs))]

    def work(i):
        ds = run(configs[i], stamp=stamp)
        ds.metadata["sweep"] = {"parameter": spec.parameter, "value": spec.values[i], "index": i}
        write_dataset(ds, out_dir / names[i], fmt)
        return ds

    with ThreadPoolExecutor(max_workers=thread_count(len(configs))) as pool:
        results = list(pool.map(work, range(len(configs))))

    index_cols = {"index": np.arange(len(configs)), spec.parameter: np.array(spec.values, dtype=float)}
    index_cols["z_over_c_tau"] = np.array([ds.metadata["z_over_c_tau"] for ds in results])
    for solver in spec.base.solvers:
        index_cols[f"{solver}_peak_efficiency"] = np.array([ds.metadata["peaks"][solver]["efficiency"] for ds in results])
    meta = {
        "kind": "sweep_index",
        "format_version": FORMAT_VERSION,
        "package": "lambda_fwm",
        "solver_versions": _solver_versions(spec.base.solvers),
        "sweep": {"parameter": spec.parameter, "values": list(spec.values)},
        "config": spec.base.to_dict(),
        "files": names,
    }
    if stamp:
        meta["created"] = _timestamp()
    index_path = out_dir / f"index.{fmt}"
    write_dataset(Dataset(index_cols, meta), index_path, fmt)
    return index_path


# --------------------------------------------------------------------------- figures


def _fig_solvers():
    return ("analytic", "spectral")


def figure(fig_id: str, stamp: bool = False) -> tuple:
    """Dataset of efficiency vs (t - z/c)/tau for one published figure.

    Returns ``(traces, peaks)``.  For the sweep figures every curve is
    computed at its own optimal distance and, as a second variant, at the
    fixed Fig. 2a distance.
    """
    if fig_id not in FIGURES:
        raise ConfigError(f"unknown figure {fig_id!r}; choose from {sorted(FIGURES)}", "figure")
    spec = FIGURES[fig_id]
    x = np.linspace(*RETARDED_WINDOW)
    solvers = _fig_solvers()
    curves = []  # (label, medium, z, variant, value)
    if spec["parameter"] is None:
        cfg = RunConfig(medium=spec["base"], z="auto")
        curves.append(("", spec["base"], cfg.resolved_z, "optimal_z", None))
    else:
        for value in spec["values"]:
            medium = apply_sweep_value(spec["base"], spec["parameter"], value)
            z_auto = RunConfig(medium=medium, z="auto").resolved_z
            curves.append((f"{spec['parameter']}={value:g}_", medium, z_auto, "optimal_z", value))
        for value in spec["values"]:
            medium = apply_sweep_value(spec["base"], spec["parameter"], value)
            curves.append((f"{spec['parameter']}={value:g}_fixedz_", medium, FIG2A_Z, "fixed_z", value))

    columns = {"retarded_t_over_tau": x}
    peak_rows = {k: [] for k in ("value", "variant", "z_over_c_tau", "solver", "peak_efficiency", "peak_retarded_t_over_tau")}
    configs = []
    for label, medium, z, variant, value in curves:
        cfg = RunConfig(medium=medium, z=z, time_grid=(z + x[0], z + x[-1], x.size), solvers=solvers)
        configs.append({"label": label, "variant": variant, "value": value, "config": cfg.to_dict()})
        ds = run(cfg)
        for solver in solvers:
            eff = ds.columns[f"{solver}_efficiency"]
            columns[f"{label}{solver}_efficiency"] = eff
            i = int(np.argmax(eff))
            peak_rows["value"].append(np.nan if value is None else value)
            peak_rows["variant"].append(variant)
            peak_rows["z_over_c_tau"].append(z)
            peak_rows["solver"].append(solver)
            peak_rows["peak_efficiency"].append(float(eff[i]))
            peak_rows["peak_retarded_t_over_tau"].append(float(x[i]))

    meta = {
        "kind": "figure",
        "figure": fig_id,
        "format_version": FORMAT_VERSION,
        "package": "lambda_fwm",
        "solver_versions": _solver_versions(solvers),
        "sweep_parameter": spec["parameter"],
        "curves": configs,
    }
    if stamp:
        meta["created"] = _timestamp()
    peaks_meta = dict(meta, kind="figure_peaks")
    peaks_meta.pop("curves")
    return Dataset(columns, meta), Dataset(peak_rows, peaks_meta)


# --------------------------------------------------------------------------- I/O


def _fmt(value) -> str:
    if isinstance(value, str):
        return value
    return format(float(value), ".17g")


def _to_jsonable(obj):
    if isinstance(obj, dict):
        return {k: _to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_to_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating, float)):
        f = float(obj)
        return None if np.isnan(f) else f
    if isinstance(obj, np.integer):
        return int(obj)
    return obj


def serialize(ds: Dataset, fmt: str = "csv") -> str:
    meta = json.dumps(_to_jsonable(ds.metadata), sort_keys=True)
    if fmt == "json":
        body = {"metadata": json.loads(meta), "columns": _to_jsonable(ds.columns)}
        return json.dumps(body, sort_keys=False, indent=1) + "\n"
    if fmt != "csv":
        raise ConfigError(f"format must be csv or json, got {fmt!r}", "--format")
    names = list(ds.columns)
    lines = ["# lambda_fwm dataset", f"# metadata: {meta}", ",".join(names)]
    n = len(next(iter(ds.columns.values())))
    cols = [ds.columns[k] for k in names]
    for i in range(n):
        lines.append(",".join(_fmt(c[i]) for c in cols))
    return "\n".join(lines) + "\n"


def write_dataset(ds: Dataset, path, fmt: str = "csv") -> Path:
    """Atomically write ``ds`` to ``path`` (temporary file plus rename)."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    text = serialize(ds, fmt)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def _parse_cell(text: str):
    try:
        return float(text)
    except ValueError:
        return text


def read_dataset(path) -> Dataset:
    path = Path(path)
    text = path.read_text()
    if path.suffix == ".json":
        body = json.loads(text)
        cols = {k: np.array([np.nan if v is None else v for v in vals]) for k, vals in body["columns"].items()}
        return Dataset(cols, body["metadata"])
    meta = {}
    rows = []
    header = None
    for line in text.splitlines():
        if line.startswith("# metadata: "):
            meta = json.loads(line[len("# metadata: "):])
        elif line.startswith("#"):
            continue
        elif header is None:
            header = line.split(",")
        elif line:
            rows.append([_parse_cell(c) for c in line.split(",")])
    cols = {}
    for j, name in enumerate(header or []):
        values = [r[j] for r in rows]
        cols[name] = np.array(values) if all(isinstance(v, float) for v in values) else np.array(values, dtype=object)
    return Dataset(cols, meta)


def data_section(path) -> str:
    """File contents with the metadata removed, used for determinism checks."""
    path = Path(path)
    text = path.read_text()
    if path.suffix == ".json":
        return json.dumps(json.loads(text)["columns"], sort_keys=True)
    return "\n".join(line for line in text.splitlines() if not line.startswith("#"))


def extract_config(path) -> RunConfig:
    """Configuration embedded in a run dataset."""
    meta = read_dataset(path).metadata
    if "config" not in meta:
        raise ConfigError("dataset carries no configuration", "metadata.config")
    return config_from_dict(meta["config"])
