"""JSON run configurations.

Every quantity is dimensionless and the field names carry their unit
(``omega12_tau``, ``kappa02_c_tau2``, ``z_over_c_tau``).  Complex Rabi
frequencies and probe amplitudes are written either as a number or as a
``[re, im]`` pair.  Example::

    {
      "medium": {"omega12_tau": 200, "omega13_tau": 100,
                 "delta1_tau": 0, "delta2_tau": 20, "delta3_tau": 20,
                 "gamma1_tau": 0.1, "gamma2_tau": 0.1, "gamma3_tau": 0.1,
                 "kappa02_c_tau2": 40, "kappa03_c_tau2": 10},
      "pulse": {"amplitude_tau": 1.0},
      "z_over_c_tau": "auto",
      "time_grid": {"min": -2, "max": 10, "n": 2001},
      "spectral_grid": {"eta_min": -16, "eta_max": 16, "n_points": 4096},
      "solvers": ["analytic", "spectral"],
      "output": {"format": "csv"},
      "c_tau_cm": 1.0
    }

Only ``medium`` is required.  ``time_grid`` defaults to a window around the
group delays and ``z_over_c_tau`` to ``"auto"``.
"""

from __future__ import annotations

import copy
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import jsonschema
import numpy as np

from .analytic import optimal_distance
from .errors import ConfigError, DegenerateDetuning, InvalidParameter
from .model import MediumParams, ProbePulse
from .spectral import SpectralGrid, default_times

SOLVERS = ("analytic", "spectral", "oracle")
SWEEP_PARAMETERS = ("delta2", "delta3", "rabi_ratio_sq")
FORMATS = ("csv", "json")

MEDIUM_FIELDS = {
    "omega12_tau": "omega12",
    "omega13_tau": "omega13",
    "delta1_tau": "delta1",
    "delta2_tau": "delta2",
    "delta3_tau": "delta3",
    "gamma1_tau": "gamma1",
    "gamma2_tau": "gamma2",
    "gamma3_tau": "gamma3",
    "kappa02_c_tau2": "kappa02",
    "kappa03_c_tau2": "kappa03",
}
_COMPLEX_FIELDS = {"omega12_tau", "omega13_tau"}

_NUMBER = {"type": "number"}
_COMPLEX = {
    "oneOf": [
        {"type": "number"},
        {"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2},
    ]
}

SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["medium"],
    "properties": {
        "medium": {
            "type": "object",
            "additionalProperties": False,
            "required": list(MEDIUM_FIELDS),
            "properties": {k: (_COMPLEX if k in _COMPLEX_FIELDS else _NUMBER) for k in MEDIUM_FIELDS},
        },
        "pulse": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "amplitude_tau": _COMPLEX,
                "times_over_tau": {"type": "array", "items": _NUMBER, "minItems": 2},
                "samples_tau": {"type": "array", "items": _COMPLEX, "minItems": 2},
            },
        },
        "z_over_c_tau": {"oneOf": [{"type": "number", "minimum": 0}, {"const": "auto"}]},
        "time_grid": {
            "type": "object",
            "additionalProperties": False,
            "required": ["min", "max", "n"],
            "properties": {"min": _NUMBER, "max": _NUMBER, "n": {"type": "integer", "minimum": 2}},
        },
        "spectral_grid": {
            "type": "object",
            "additionalProperties": False,
            "required": ["eta_min", "eta_max", "n_points"],
            "properties": {
                "eta_min": _NUMBER,
                "eta_max": _NUMBER,
                "n_points": {"type": "integer", "minimum": 3},
            },
        },
        "solvers": {
            "type": "array",
            "items": {"enum": list(SOLVERS)},
            "minItems": 1,
            "uniqueItems": True,
        },
        "output": {
            "type": "object",
            "additionalProperties": False,
            "properties": {"path": {"type": "string"}, "format": {"enum": list(FORMATS)}},
        },
        "c_tau_cm": {"type": "number", "exclusiveMinimum": 0},
        "sweep": {
            "type": "object",
            "additionalProperties": False,
            "required": ["parameter", "values"],
            "properties": {
                "parameter": {"enum": list(SWEEP_PARAMETERS)},
                "values": {"type": "array", "items": _NUMBER, "minItems": 1},
            },
        },
    },
}


def _complex(value) -> complex:
    if isinstance(value, (list, tuple)):
        return complex(value[0], value[1])
    return complex(value)


def _encode_complex(value: complex):
    value = complex(value)
    return value.real if value.imag == 0 else [value.real, value.imag]


def _path(error: jsonschema.ValidationError) -> str:
    parts = list(error.absolute_path)
    if error.validator == "required":
        missing = error.message.split("'")[1] if "'" in error.message else ""
        parts.append(missing)
    elif error.validator == "additionalProperties" and "'" in error.message:
        parts.append(error.message.split("'")[1])
    return ".".join(str(p) for p in parts) or "<root>"


@dataclass(frozen=True)
class RunConfig:
    """Validated run description; ``z`` is a number or ``"auto"``."""

    medium: MediumParams
    pulse: ProbePulse = field(default_factory=ProbePulse)
    z: float | str = "auto"
    time_grid: tuple | None = None
    spectral_grid: SpectralGrid = field(default_factory=SpectralGrid)
    solvers: tuple = ("analytic", "spectral")
    output_path: str | None = None
    output_format: str = "csv"
    c_tau_cm: float = 1.0

    def __post_init__(self):
        if not self.solvers:
            raise ConfigError("at least one solver must be selected", "solvers")
        bad = [s for s in self.solvers if s not in SOLVERS]
        if bad:
            raise ConfigError(f"unknown solver(s) {bad}", "solvers")
        if self.output_format not in FORMATS:
            raise ConfigError(f"format must be one of {FORMATS}", "output.format")
        if self.z == "auto":
            try:
                optimal_distance(self.medium)
            except DegenerateDetuning as exc:
                raise ConfigError(f"z='auto' is undefined: {exc}", "z_over_c_tau") from exc
        elif not (isinstance(self.z, (int, float)) and math.isfinite(self.z) and self.z >= 0):
            raise ConfigError("z must be a finite number >= 0 or 'auto'", "z_over_c_tau")
        if self.time_grid is not None:
            t0, t1, n = self.time_grid
            if not (t1 > t0 and n >= 2):
                raise ConfigError("time grid needs max > min and n >= 2", "time_grid")

    @property
    def resolved_z(self) -> float:
        return optimal_distance(self.medium) if self.z == "auto" else float(self.z)

    def times(self) -> np.ndarray:
        if self.time_grid is None:
            return default_times(self.medium, self.resolved_z)
        t0, t1, n = self.time_grid
        return np.linspace(t0, t1, int(n))

    def with_solvers(self, solvers) -> "RunConfig":
        return _replace(self, solvers=tuple(solvers))

    def to_dict(self) -> dict:
        """Inverse of :func:`config_from_dict`."""
        medium = {}
        for key, attr in MEDIUM_FIELDS.items():
            value = getattr(self.medium, attr)
            medium[key] = _encode_complex(value) if key in _COMPLEX_FIELDS else value
        pulse = {"amplitude_tau": _encode_complex(self.pulse.amplitude)}
        if not self.pulse.is_gaussian:
            pulse["times_over_tau"] = [float(t) for t in self.pulse.times]
            pulse["samples_tau"] = [_encode_complex(s) for s in self.pulse.samples]
        out = {
            "medium": medium,
            "pulse": pulse,
            "z_over_c_tau": self.z,
            "spectral_grid": {
                "eta_min": self.spectral_grid.eta_min,
                "eta_max": self.spectral_grid.eta_max,
                "n_points": self.spectral_grid.n_points,
            },
            "solvers": list(self.solvers),
            "output": {"format": self.output_format},
            "c_tau_cm": self.c_tau_cm,
        }
        if self.time_grid is not None:
            t0, t1, n = self.time_grid
            out["time_grid"] = {"min": t0, "max": t1, "n": int(n)}
        if self.output_path is not None:
            out["output"]["path"] = self.output_path
        return out


def _replace(cfg: RunConfig, **changes) -> RunConfig:
    values = {name: getattr(cfg, name) for name in cfg.__dataclass_fields__}
    values.update(changes)
    return RunConfig(**values)


@dataclass(frozen=True)
class SweepSpec:
    parameter: str
    values: tuple
    base: RunConfig

    def __post_init__(self):
        if self.parameter not in SWEEP_PARAMETERS:
            raise ConfigError(f"parameter must be one of {SWEEP_PARAMETERS}", "sweep.parameter")
        if len(self.values) == 0:
            raise ConfigError("sweep needs at least one value", "sweep.values")
        if not all(math.isfinite(v) for v in self.values):
            raise ConfigError("sweep values must be finite", "sweep.values")


def config_from_dict(data: dict) -> RunConfig:
    """Validate ``data`` against the schema and build a :class:`RunConfig`.

    Raises
    ------
    ConfigError
        On any schema or physical-range violation; ``path`` names the field.
    """
    validator = jsonschema.Draft202012Validator(SCHEMA)
    errors = sorted(validator.iter_errors(data), key=lambda e: list(e.absolute_path))
    if errors:
        err = errors[0]
        raise ConfigError(err.message, _path(err))

    kwargs = {}
    for key, attr in MEDIUM_FIELDS.items():
        value = data["medium"][key]
        kwargs[attr] = _complex(value) if key in _COMPLEX_FIELDS else float(value)
    try:
        medium = MediumParams(**kwargs)
    except InvalidParameter as exc:
        attr = str(exc).split()[0]
        key = next((k for k, a in MEDIUM_FIELDS.items() if a == attr), "")
        raise ConfigError(str(exc), f"medium.{key}" if key else "medium") from exc

    pulse_data = data.get("pulse", {})
    try:
        amplitude = _complex(pulse_data.get("amplitude_tau", 1.0))
        if "times_over_tau" in pulse_data or "samples_tau" in pulse_data:
            samples = [_complex(s) for s in pulse_data.get("samples_tau", [])]
            pulse = ProbePulse(amplitude, pulse_data.get("times_over_tau"), samples or None)
        else:
            pulse = ProbePulse(amplitude)
    except InvalidParameter as exc:
        raise ConfigError(str(exc), "pulse") from exc

    grid = SpectralGrid()
    if "spectral_grid" in data:
        g = data["spectral_grid"]
        try:
            grid = SpectralGrid(float(g["eta_min"]), float(g["eta_max"]), int(g["n_points"]))
        except (InvalidParameter, ValueError) as exc:
            raise ConfigError(str(exc), "spectral_grid") from exc

    time_grid = None
    if "time_grid" in data:
        tg = data["time_grid"]
        time_grid = (float(tg["min"]), float(tg["max"]), int(tg["n"]))

    output = data.get("output", {})
    z = data.get("z_over_c_tau", "auto")
    return RunConfig(
        medium=medium,
        pulse=pulse,
        z=z if z == "auto" else float(z),
        time_grid=time_grid,
        spectral_grid=grid,
        solvers=tuple(data.get("solvers", ("analytic", "spectral"))),
        output_path=output.get("path"),
        output_format=output.get("format", "csv"),
        c_tau_cm=float(data.get("c_tau_cm", 1.0)),
    )


def sweep_from_dict(data: dict) -> SweepSpec:
    if "sweep" not in data:
        raise ConfigError("sweep configuration needs a 'sweep' object", "sweep")
    base_data = copy.deepcopy(data)
    sweep = base_data.pop("sweep")
    base = config_from_dict(base_data)
    # re-validate the sweep block itself
    config_from_dict({"medium": data["medium"], "sweep": sweep})
    return SweepSpec(sweep["parameter"], tuple(float(v) for v in sweep["values"]), base)


def load_json(path) -> dict:
    try:
        return json.loads(Path(path).read_text())
    except FileNotFoundError as exc:
        raise ConfigError(f"no such file {path}", "--config") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON: {exc}", "<root>") from exc


def load_config(path) -> RunConfig:
    return config_from_dict(load_json(path))


def config_for_medium(medium: MediumParams, **kwargs) -> RunConfig:
    return RunConfig(medium=medium, **kwargs)
