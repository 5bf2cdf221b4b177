"""Configuration files, spectrum/measurement CSV formats and synthetic data.

Configuration is a flat JSON object.  Every numeric key carries its unit as
a suffix (``rabi_397_mhz``, ``b_field_t``, ``temperature_mk``); dimensionless
counts such as ``seed`` or ``quadrature_nodes`` are listed explicitly.  Any
key can be overridden from the environment as ``DARKTHERMO_<KEY>`` with the
key upper-cased, e.g. ``DARKTHERMO_TEMPERATURE_MK=3.1``.

For the ``lambda3`` system the ``*_397_*`` keys describe drive a (|1>-|2>)
and the ``*_866_*`` keys drive b (|3>-|2>).
"""

from __future__ import annotations

import csv
import json
import math
import os
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import InvalidParameterError, ParseError
from .levels import (DEFAULT_GAMMA_PD_MHZ, DEFAULT_GAMMA_PS_MHZ, DriveConfig, ZeemanField,
                     build_ca40_system, build_lambda_system)
from .spectrum import (CA40_MASS_AMU, DEFAULT_NODES, RESONANCE_GRID_STEP_MHZ, BeamGeometry,
                       Spectrum, resonance_grid)

MEASUREMENT_HEADER = ("detuning_mhz", "counts", "exposure_us", "reps")
SPECTRUM_HEADER = ("detuning_mhz", "fluorescence")
SERIES_HEADER = ("time_us", "temperature_mk", "sigma_mk")
ENV_PREFIX = "DARKTHERMO_"

UNIT_SUFFIXES = ("_mhz", "_t", "_mk", "_nm", "_rad", "_amu", "_us", "_counts")
#: Numeric keys that are dimensionless by nature.
DIMENSIONLESS_KEYS = frozenset({
    "seed", "threads", "quadrature_nodes", "grid_points", "photons_per_point", "repetitions",
    "branching_ratio", "mcmc_chains", "mcmc_burn", "mcmc_steps", "mcmc_max_steps",
})
MANDATORY_KEYS = ("level_system", "detuning_397_mhz", "rabi_397_mhz", "rabi_866_mhz")

DEFAULTS = {
    "linewidth_397_mhz": 0.0,
    "linewidth_866_mhz": 0.0,
    "gamma_ps_mhz": DEFAULT_GAMMA_PS_MHZ,
    "gamma_pd_mhz": DEFAULT_GAMMA_PD_MHZ,
    "gamma_decay_mhz": DEFAULT_GAMMA_PS_MHZ + DEFAULT_GAMMA_PD_MHZ,
    "branching_ratio": 0.5,
    "wavelength_397_nm": 397.0,
    "wavelength_866_nm": 866.0,
    "beam_angle_rad": 0.0,
    "mass_amu": CA40_MASS_AMU,
    "temperature_mk": 0.0,
    "method": "cold",
    "quadrature_nodes": DEFAULT_NODES,
    "grid_step_mhz": RESONANCE_GRID_STEP_MHZ,
    "photons_per_point": 10000,
    "exposure_us": 20.0,
    "repetitions": 1,
    "fit_mode": "mcmc",
    "fit_model": "effective",
    "fit_free": ["temperature_mk", "amplitude_counts"],
    "offset_counts": 0.0,
    "mcmc_chains": 4,
    "mcmc_burn": 300,
    "mcmc_steps": 600,
    "mcmc_max_steps": 2400,
    "seed": 0,
    "threads": 1,
}
OPTIONAL_KEYS = frozenset({
    "b_field_t", "grid_start_mhz", "grid_stop_mhz", "grid_points", "amplitude_counts",
    "equilibration_detuning_mhz",
})
STRING_KEYS = frozenset({"level_system", "method", "fit_mode", "fit_model"})
LIST_KEYS = frozenset({"fit_free"})


# ---------------------------------------------------------------- measurements

@dataclass
class MeasuredSpectrum:
    """Photon counts on a detuning grid."""

    detuning_mhz: np.ndarray
    counts: np.ndarray
    exposure_us: np.ndarray
    reps: np.ndarray
    equilibration_detuning_mhz: float | None = None

    def __post_init__(self):
        n = np.size(self.detuning_mhz)
        self.detuning_mhz = np.asarray(self.detuning_mhz, dtype=float)
        self.counts = np.asarray(self.counts)
        self.exposure_us = np.broadcast_to(np.asarray(self.exposure_us, dtype=float), (n,)).copy()
        self.reps = np.broadcast_to(np.asarray(self.reps), (n,)).astype(np.int64)
        if self.counts.shape != (n,):
            raise InvalidParameterError("counts and detuning grid must have equal length")
        if not np.all(np.equal(np.mod(self.counts, 1), 0)):
            raise InvalidParameterError("counts must be integers")
        self.counts = self.counts.astype(np.int64)
        if np.any(self.counts < 0):
            raise InvalidParameterError("counts must be >= 0")
        if n > 1 and not np.all(np.diff(self.detuning_mhz) > 0):
            raise InvalidParameterError("detuning grid must be strictly increasing")
        if not np.all(self.exposure_us > 0):
            raise InvalidParameterError("exposure must be > 0")
        if not np.all(self.reps >= 1):
            raise InvalidParameterError("repetitions must be >= 1")

    def __eq__(self, other):
        if not isinstance(other, MeasuredSpectrum):
            return NotImplemented
        return (np.array_equal(self.detuning_mhz, other.detuning_mhz)
                and np.array_equal(self.counts, other.counts)
                and np.array_equal(self.exposure_us, other.exposure_us)
                and np.array_equal(self.reps, other.reps)
                and self.equilibration_detuning_mhz == other.equilibration_detuning_mhz)


def synthesize_measurement(model: Spectrum, photons_per_point: int, seed,
                           exposure_us: float = 20.0, reps: int = 1,
                           equilibration_detuning_mhz: float | None = None) -> MeasuredSpectrum:
    """Poisson counts whose mean at the spectrum maximum is ``photons_per_point``."""
    if int(photons_per_point) != photons_per_point or photons_per_point <= 0:
        raise InvalidParameterError(f"photons_per_point must be a positive integer, got {photons_per_point}")
    f = np.asarray(model.fluorescence, dtype=float)
    if np.any(f < 0):
        raise InvalidParameterError("model spectrum must be >= 0")
    if not f.max() > 0:
        raise InvalidParameterError("model spectrum is zero everywhere")
    rng = np.random.default_rng(seed)
    counts = rng.poisson(f / f.max() * photons_per_point)
    return MeasuredSpectrum(model.detuning_mhz.copy(), counts, exposure_us, reps,
                            equilibration_detuning_mhz)


def _float(text, line, column):
    try:
        v = float(text)
    except ValueError:
        raise ParseError(f"column {column!r}: cannot parse {text!r} as a number", line) from None
    if not math.isfinite(v):
        raise ParseError(f"column {column!r}: value {text!r} is not finite", line)
    return v


def _read_rows(path, header):
    """Yield ``(line_number, row)`` after checking the header; collects ``# key=value`` comments."""
    meta = {}
    rows = []
    path = Path(path)
    with path.open(newline="") as fh:
        seen_header = False
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line:
                continue
            if line.startswith("#"):
                body = line[1:].strip()
                if "=" in body:
                    k, v = body.split("=", 1)
                    meta[k.strip()] = (v.strip(), lineno)
                continue
            row = next(csv.reader([line]))
            if not seen_header:
                missing = [c for c in header if c not in row]
                if missing:
                    raise ParseError(f"missing columns {missing}; expected header {','.join(header)}",
                                     lineno)
                cols = [row.index(c) for c in header]
                seen_header = True
                continue
            if len(row) < len(header) or any(row[c] == "" for c in cols):
                raise ParseError(f"expected {len(header)} values, got {len(row)}", lineno)
            rows.append((lineno, [row[c] for c in cols]))
    if not seen_header:
        raise ParseError(f"{path}: no header line found")
    return rows, meta


def read_spectrum_csv(path) -> MeasuredSpectrum:
    """Read a measurement file with header ``detuning_mhz,counts,exposure_us,reps``."""
    rows, meta = _read_rows(path, MEASUREMENT_HEADER)
    if not rows:
        raise ParseError(f"{path}: no data rows")
    det, counts, exp_, reps = [], [], [], []
    prev = None
    for lineno, (d, c, e, r) in rows:
        d = _float(d, lineno, "detuning_mhz")
        if prev is not None and not d > prev:
            raise ParseError(f"detuning grid must be strictly increasing ({d!r} after {prev!r})", lineno)
        prev = d
        cv = _float(c, lineno, "counts")
        if cv != int(cv):
            raise ParseError(f"counts must be integers, got {c!r}", lineno)
        if cv < 0:
            raise ParseError(f"counts must be >= 0, got {c!r}", lineno)
        ev = _float(e, lineno, "exposure_us")
        if not ev > 0:
            raise ParseError(f"exposure must be > 0, got {e!r}", lineno)
        rv = _float(r, lineno, "reps")
        if rv != int(rv) or rv < 1:
            raise ParseError(f"reps must be a positive integer, got {r!r}", lineno)
        det.append(d)
        counts.append(int(cv))
        exp_.append(ev)
        reps.append(int(rv))
    eq = None
    if "equilibration_detuning_mhz" in meta:
        text, lineno = meta["equilibration_detuning_mhz"]
        eq = _float(text, lineno, "equilibration_detuning_mhz")
    return MeasuredSpectrum(np.array(det), np.array(counts, dtype=np.int64), np.array(exp_),
                            np.array(reps, dtype=np.int64), eq)


def write_spectrum_csv(ms: MeasuredSpectrum, path) -> Path:
    path = Path(path)
    with path.open("w", newline="") as fh:
        if ms.equilibration_detuning_mhz is not None:
            fh.write(f"# equilibration_detuning_mhz={float(ms.equilibration_detuning_mhz)!r}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(MEASUREMENT_HEADER)
        for d, c, e, r in zip(ms.detuning_mhz, ms.counts, ms.exposure_us, ms.reps):
            w.writerow([repr(float(d)), int(c), repr(float(e)), int(r)])
    return path


def write_model_csv(spec: Spectrum, path) -> Path:
    """Model spectrum as ``detuning_mhz,fluorescence`` (floats written losslessly)."""
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(SPECTRUM_HEADER)
        for d, f in zip(spec.detuning_mhz, spec.fluorescence):
            w.writerow([repr(float(d)), repr(float(f))])
    return path


def read_model_csv(path, method: str = "file") -> Spectrum:
    rows, _ = _read_rows(path, SPECTRUM_HEADER)
    if not rows:
        raise ParseError(f"{path}: no data rows")
    d = [_float(a, n, "detuning_mhz") for n, (a, _) in rows]
    f = [_float(b, n, "fluorescence") for n, (_, b) in rows]
    for k in range(1, len(d)):
        if not d[k] > d[k - 1]:
            raise ParseError("detuning grid must be strictly increasing", rows[k][0])
    return Spectrum(np.array(d), np.array(f), method)


def read_series_csv(path) -> list[tuple[float, float, float]]:
    """Temperature time series with header ``time_us,temperature_mk,sigma_mk``."""
    rows, _ = _read_rows(path, SERIES_HEADER)
    out = []
    for lineno, (t, T, s) in rows:
        sv = _float(s, lineno, "sigma_mk")
        if not sv > 0:
            raise ParseError(f"sigma must be > 0, got {s!r}", lineno)
        out.append((_float(t, lineno, "time_us"), _float(T, lineno, "temperature_mk"), sv))
    return out


def write_series_csv(series, path) -> Path:
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(SERIES_HEADER)
        for t, T, s in series:
            w.writerow([repr(float(t)), repr(float(T)), repr(float(s))])
    return path


# ---------------------------------------------------------------- configuration

def _has_unit(key: str) -> bool:
    return key.endswith(UNIT_SUFFIXES) or key in DIMENSIONLESS_KEYS


def _is_known(key: str) -> bool:
    if key in DEFAULTS or key in OPTIONAL_KEYS or key in MANDATORY_KEYS:
        return True
    return key.startswith("prior_") and key[len("prior_"):] in _fit_param_names()


def _fit_param_names():
    from .thermometry import PARAM_NAMES
    return PARAM_NAMES


def _check_value(key, value):
    if key in STRING_KEYS:
        if not isinstance(value, str):
            raise InvalidParameterError(f"{key} must be a string, got {value!r}")
        return
    if key in LIST_KEYS:
        if not (isinstance(value, list) and all(isinstance(v, str) for v in value)):
            raise InvalidParameterError(f"{key} must be a list of parameter names")
        return
    if key.startswith("prior_"):
        if not (isinstance(value, list) and len(value) == 2
                and all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in value)
                and value[0] < value[1]):
            raise InvalidParameterError(f"{key} must be [low, high] with low < high")
        return
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise InvalidParameterError(f"{key} must be a number, got {value!r}")
    if not math.isfinite(value):
        raise InvalidParameterError(f"{key} must be finite")


@dataclass
class RunConfig:
    """Resolved configuration: explicit values, defaults and provenance of each."""

    values: dict
    defaults_used: tuple = ()
    warnings: tuple = ()
    source: str | None = None

    def __getitem__(self, key):
        return self.values[key]

    def get(self, key, default=None):
        return self.values.get(key, default)

    def snapshot(self) -> dict:
        return {"values": dict(self.values), "defaults_used": list(self.defaults_used),
                "warnings": list(self.warnings), "source": self.source}

    # builders ------------------------------------------------------------
    @property
    def is_calcium(self) -> bool:
        return self.values["level_system"] == "calcium8"

    def system(self):
        v = self.values
        if self.is_calcium:
            return build_ca40_system(v["gamma_ps_mhz"], v["gamma_pd_mhz"])
        return build_lambda_system(v["gamma_decay_mhz"], v["branching_ratio"])

    def drive_a(self) -> DriveConfig:
        v = self.values
        return DriveConfig(v["detuning_397_mhz"], v["rabi_397_mhz"], v["wavelength_397_nm"],
                           v["linewidth_397_mhz"])

    def drive_b(self, detuning_mhz: float = 0.0) -> DriveConfig:
        v = self.values
        return DriveConfig(detuning_mhz, v["rabi_866_mhz"], v["wavelength_866_nm"],
                           v["linewidth_866_mhz"])

    def field(self) -> ZeemanField:
        return ZeemanField(self.values.get("b_field_t", 0.0))

    def geometry(self) -> BeamGeometry:
        v = self.values
        return BeamGeometry(v["beam_angle_rad"], v["wavelength_397_nm"], v["wavelength_866_nm"],
                            v["mass_amu"])

    def grid(self) -> np.ndarray:
        v = self.values
        if "grid_start_mhz" in v or "grid_stop_mhz" in v or "grid_points" in v:
            try:
                lo, hi, n = v["grid_start_mhz"], v["grid_stop_mhz"], v["grid_points"]
            except KeyError as exc:
                raise InvalidParameterError(
                    "grid_start_mhz, grid_stop_mhz and grid_points must be given together") from exc
            if int(n) != n or n < 2 or not hi > lo:
                raise InvalidParameterError("need grid_points >= 2 and grid_stop_mhz > grid_start_mhz")
            return np.linspace(lo, hi, int(n))
        return resonance_grid(self.drive_a(), self.drive_b(), self.field(), v["grid_step_mhz"])

    def fit_parameters(self, amplitude_counts: float | None = None):
        from .thermometry import FitParameters
        v = self.values
        amp = v.get("amplitude_counts", amplitude_counts if amplitude_counts is not None else 1.0)
        return FitParameters(
            temperature_mk=v["temperature_mk"], rabi_397_mhz=v["rabi_397_mhz"],
            rabi_866_mhz=v["rabi_866_mhz"], detuning_397_mhz=v["detuning_397_mhz"],
            b_field_t=v.get("b_field_t", 0.0), linewidth_397_mhz=v["linewidth_397_mhz"],
            linewidth_866_mhz=v["linewidth_866_mhz"], amplitude_counts=amp,
            offset_counts=v["offset_counts"], free=tuple(v["fit_free"]))

    def priors(self) -> dict:
        from .thermometry import DEFAULT_PRIORS, Prior
        out = {}
        for k, val in self.values.items():
            if k.startswith("prior_"):
                name = k[len("prior_"):]
                out[name] = Prior(float(val[0]), float(val[1]), DEFAULT_PRIORS[name].log)
        return out

    def mcmc_settings(self):
        from .thermometry import McmcSettings
        v = self.values
        return McmcSettings(n_chains=int(v["mcmc_chains"]), n_burn=int(v["mcmc_burn"]),
                            n_steps=int(v["mcmc_steps"]), max_steps=int(v["mcmc_max_steps"]),
                            seed=int(v["seed"]))


def _env_overrides(environ) -> dict:
    out = {}
    for name, text in environ.items():
        if not name.startswith(ENV_PREFIX):
            continue
        key = name[len(ENV_PREFIX):].lower()
        if not _is_known(key):
            continue  # backend switches share the prefix
        try:
            out[key] = json.loads(text)
        except json.JSONDecodeError:
            out[key] = text
    return out


def resolve_config(raw: dict, environ=None, source=None) -> RunConfig:
    """Validate a raw key/value mapping and fill in defaults.

    Raises :class:`InvalidParameterError` on missing mandatory keys, numeric
    keys without a unit suffix, or values of the wrong type.  Unknown keys
    are kept out of the resolved values and reported as warnings.
    """
    if not isinstance(raw, dict):
        raise InvalidParameterError("configuration must be a JSON object")
    merged = dict(raw)
    merged.update(_env_overrides(os.environ if environ is None else environ))

    notes = []
    values = {}
    for key, value in merged.items():
        numeric = isinstance(value, (int, float)) and not isinstance(value, bool)
        if numeric and not _has_unit(key):
            raise InvalidParameterError(
                f"numeric key {key!r} has no unit suffix (expected one of {', '.join(UNIT_SUFFIXES)})")
        if not _is_known(key):
            notes.append(f"unknown key {key!r} ignored")
            continue
        _check_value(key, value)
        values[key] = value

    missing = [k for k in MANDATORY_KEYS if k not in values]
    if values.get("level_system") == "calcium8" and "b_field_t" not in values:
        missing.append("b_field_t")
    if missing:
        raise InvalidParameterError(f"missing mandatory keys: {', '.join(missing)}")
    if values["level_system"] not in ("calcium8", "lambda3"):
        raise InvalidParameterError(
            f"level_system must be 'calcium8' or 'lambda3', got {values['level_system']!r}")

    used = []
    for key, default in DEFAULTS.items():
        if key not in values:
            values[key] = list(default) if isinstance(default, list) else default
            used.append(key)
    for w in notes:
        warnings.warn(w, stacklevel=3)
    return RunConfig(values, tuple(used), tuple(notes), source)


def read_config(path, environ=None) -> RunConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except FileNotFoundError as exc:
        raise InvalidParameterError(f"config file not found: {path}") from exc
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: invalid JSON ({exc.msg})", exc.lineno) from None
    return resolve_config(raw, environ, str(path))


def write_config(cfg: RunConfig | dict, path, resolved: bool = False) -> Path:
    """Write the explicit keys of ``cfg`` (or all resolved keys with ``resolved=True``)."""
    if isinstance(cfg, RunConfig):
        values = cfg.values if resolved else {
            k: v for k, v in cfg.values.items() if k not in cfg.defaults_used}
    else:
        values = cfg
    path = Path(path)
    path.write_text(json.dumps(values, indent=2, sort_keys=True) + "\n")
    return path


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, float) and not math.isfinite(obj):
        return str(obj)
    return obj


def write_result(result, path, config: RunConfig | None = None, extra: dict | None = None) -> Path:
    """Serialize a fit, relaxation fit or spectrum to JSON with the config snapshot.

    A :class:`Spectrum` written to a ``.csv`` path uses the tidy CSV format
    instead (no metadata).
    """
    from .thermometry import FitResult, RelaxationFit

    path = Path(path)
    if isinstance(result, Spectrum):
        if path.suffix.lower() == ".csv":
            return write_model_csv(result, path)
        body = {"kind": "spectrum", "method": result.method, "params": result.params,
                "detuning_mhz": result.detuning_mhz, "fluorescence": result.fluorescence}
    elif isinstance(result, FitResult):
        body = {"kind": "fit", **result.to_dict()}
    elif isinstance(result, RelaxationFit):
        body = {"kind": "relaxation", **result._asdict()}
    elif isinstance(result, dict):
        body = dict(result)
    else:
        raise InvalidParameterError(f"cannot serialize {type(result).__name__}")
    if extra:
        body.update(extra)
    body["config"] = config.snapshot() if config is not None else None
    path.write_text(json.dumps(_jsonable(body), indent=2) + "\n")
    return path
