"""Fluorescence spectra versus the 866 nm detuning.

Three models share one batched steady-state sweep:

``cold``
    ion at rest.
``effective``
    thermal motion folded into the 866 nm dephasing rate as the relative
    Doppler width of :func:`doppler_width`.
``quadrature``
    explicit Maxwell-Boltzmann average over velocity classes with
    Gauss-Hermite nodes along the beam directions.

Velocities only matter through their projections on the two wave vectors, so
the collinear and counter-propagating geometries need one velocity axis and
any other angle a two-axis tensor grid.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import roots_hermite

from .errors import DegenerateSteadyStateError, InvalidParameterError
from .levels import (DriveConfig, LevelSystem, ZeemanField, G_D, G_S, collapse_operators,
                     detuning_pattern, hamiltonian)
from .steadystate import assemble_liouvillian, diagonal_shift, fluorescence_rate, steady_state_batch

K_B = 1.380649e-23  # J/K
AMU = 1.66053906660e-27  # kg
CA40_MASS_AMU = 39.962591

DEFAULT_NODES = 32
RESONANCE_GRID_STEP_MHZ = 0.05


@dataclass(frozen=True)
class BeamGeometry:
    angle_rad: float = 0.0
    wavelength_a_nm: float = 397.0
    wavelength_b_nm: float = 866.0
    mass_amu: float = CA40_MASS_AMU

    def __post_init__(self):
        if not 0.0 <= self.angle_rad <= math.pi:
            raise InvalidParameterError(f"beam angle must lie in [0, pi], got {self.angle_rad}")
        if not self.mass_amu > 0:
            raise InvalidParameterError(f"mass must be > 0, got {self.mass_amu}")
        if not (self.wavelength_a_nm > 0 and self.wavelength_b_nm > 0):
            raise InvalidParameterError("wavelengths must be > 0")

    @classmethod
    def from_drives(cls, drive_a: DriveConfig, drive_b: DriveConfig, mass_amu=CA40_MASS_AMU):
        cosang = float(np.clip(np.dot(drive_a.direction, drive_b.direction), -1.0, 1.0))
        return cls(math.acos(cosang), drive_a.wavelength_nm, drive_b.wavelength_nm, mass_amu)

    @property
    def is_collinear_axis(self) -> bool:
        """True when one velocity axis suffices (angle 0 or pi)."""
        return math.isclose(self.angle_rad, 0.0, abs_tol=1e-12) or \
            math.isclose(self.angle_rad, math.pi, abs_tol=1e-12)


@dataclass(frozen=True)
class ThermalState:
    temperature_mk: float = 0.0

    def __post_init__(self):
        if not self.temperature_mk >= 0:
            raise InvalidParameterError(f"temperature must be >= 0, got {self.temperature_mk}")


@dataclass(frozen=True)
class Spectrum:
    detuning_mhz: np.ndarray
    fluorescence: np.ndarray
    method: str
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        d = np.asarray(self.detuning_mhz, dtype=float)
        f = np.asarray(self.fluorescence, dtype=float)
        if d.shape != f.shape or d.ndim != 1:
            raise InvalidParameterError("detuning grid and fluorescence must be 1-D of equal length")
        if d.size > 1 and not np.all(np.diff(d) > 0):
            raise InvalidParameterError("detuning grid must be strictly increasing")
        if not np.all(np.isfinite(f)):
            raise InvalidParameterError("spectrum contains non-finite values")
        object.__setattr__(self, "detuning_mhz", d)
        object.__setattr__(self, "fluorescence", f)


def _temperature(T) -> float:
    t = T.temperature_mk if isinstance(T, ThermalState) else float(T)
    if not t >= 0:
        raise InvalidParameterError(f"temperature must be >= 0, got {t}")
    return t


def _check_grid(grid) -> np.ndarray:
    g = np.asarray(grid, dtype=float)
    if g.ndim != 1 or g.size == 0:
        raise InvalidParameterError("detuning grid must be a non-empty 1-D sequence")
    if g.size > 1 and not np.all(np.diff(g) > 0):
        raise InvalidParameterError("detuning grid must be strictly increasing")
    return g


def thermal_velocity_ms(T_mk: float, mass_amu: float = CA40_MASS_AMU) -> float:
    """``sqrt(k_B T / m)``: 1-D velocity standard deviation in m/s."""
    return math.sqrt(K_B * T_mk * 1e-3 / (mass_amu * AMU))


def doppler_width(T, geom: BeamGeometry = BeamGeometry()) -> float:
    """Relative Doppler broadening of the two-photon resonance in MHz.

    ``|k_a - k_b| sqrt(k_B T / 2m)`` expressed as an ordinary frequency, i.e.
    with ``k = 1/lambda``.
    """
    t = _temperature(T)
    ka = 1.0 / (geom.wavelength_a_nm * 1e-9)
    kb = 1.0 / (geom.wavelength_b_nm * 1e-9)
    dk = math.sqrt(max(ka * ka + kb * kb - 2.0 * ka * kb * math.cos(geom.angle_rad), 0.0))
    return dk * math.sqrt(K_B * t * 1e-3 / (2.0 * geom.mass_amu * AMU)) * 1e-6


def _sweep(system, drive_a, drive_b, field_, grid, gamma_866_extra=0.0,
           doppler=((0.0, 0.0),), threads=1, backend=None):
    """Fluorescence for every Doppler pair (rows) and grid point (columns)."""
    grid = _check_grid(grid)
    ref_b = DriveConfig(0.0, drive_b.rabi_mhz, drive_b.wavelength_nm,
                        drive_b.linewidth_mhz, drive_b.direction)
    H = hamiltonian(system, drive_a, ref_b, field_)
    cops = collapse_operators(system, drive_a.linewidth_mhz, drive_b.linewidth_mhz + gamma_866_extra)
    L = assemble_liouvillian(H, cops)
    pa, pb = detuning_pattern(system)
    dop = np.asarray(doppler, dtype=float).reshape(-1, 2)
    diag = (dop[:, 0, None, None] * pa
            + (grid[None, :, None] + dop[:, 1, None, None]) * pb)
    shifts = diagonal_shift(diag.reshape(-1, system.dim))
    try:
        rho = steady_state_batch(L, shifts, backend=backend, threads=threads)
    except DegenerateSteadyStateError as exc:
        k = (exc.batch_index or 0) % grid.size
        raise DegenerateSteadyStateError(
            f"{exc} (detuning_866 = {grid[k]:.6g} MHz)",
            exc.condition, exc.null_dimension, exc.batch_index) from exc
    return fluorescence_rate(rho, system).reshape(dop.shape[0], grid.size)


def _snapshot(system, drive_a, drive_b, field_, **extra):
    snap = {
        "level_system": system.kind,
        "decay_rates_mhz": list(system.decay_rates),
        "detuning_397_mhz": drive_a.detuning_mhz,
        "rabi_397_mhz": drive_a.rabi_mhz,
        "linewidth_397_mhz": drive_a.linewidth_mhz,
        "rabi_866_mhz": drive_b.rabi_mhz,
        "linewidth_866_mhz": drive_b.linewidth_mhz,
        "b_field_t": field_.tesla if field_ is not None else 0.0,
    }
    snap.update(extra)
    return snap


def spectrum_cold(system: LevelSystem, drive_a: DriveConfig, drive_b: DriveConfig,
                  field_: ZeemanField | None, grid, threads: int = 1, backend=None) -> Spectrum:
    """Fluorescence of an ion at rest; ``drive_b.detuning_mhz`` is replaced by the grid."""
    grid = _check_grid(grid)
    f = _sweep(system, drive_a, drive_b, field_, grid, threads=threads, backend=backend)[0]
    return Spectrum(grid, f, "cold", _snapshot(system, drive_a, drive_b, field_))


def spectrum_thermal_effective(system, drive_a, drive_b, field_, grid, T,
                               geom: BeamGeometry = BeamGeometry(), threads=1, backend=None) -> Spectrum:
    """Cold spectrum with the 866 nm dephasing raised by ``doppler_width(T, geom)``."""
    t = _temperature(T)
    gd = doppler_width(t, geom)
    grid = _check_grid(grid)
    f = _sweep(system, drive_a, drive_b, field_, grid, gamma_866_extra=gd,
               threads=threads, backend=backend)[0]
    return Spectrum(grid, f, "effective", _snapshot(
        system, drive_a, drive_b, field_, temperature_mk=t, beam_angle_rad=geom.angle_rad,
        doppler_width_mhz=gd))


def velocity_nodes(T, geom: BeamGeometry, nodes: int = DEFAULT_NODES):
    """Doppler shift pairs (MHz) and normalized weights for the thermal average.

    Returns ``(shifts, weights)`` with ``shifts`` of shape (K, 2) holding the
    shifts of drive a and drive b.  ``K = nodes`` for angle 0 or pi and
    ``nodes**2`` otherwise.
    """
    if int(nodes) != nodes or nodes < 3:
        raise InvalidParameterError(f"need at least 3 quadrature nodes, got {nodes}")
    t = _temperature(T)
    x, w = roots_hermite(int(nodes))
    v = math.sqrt(2.0) * thermal_velocity_ms(t, geom.mass_amu) * x
    w = w / math.sqrt(math.pi)
    inv_a = 1e3 / geom.wavelength_a_nm  # MHz per (m/s)
    inv_b = 1e3 / geom.wavelength_b_nm
    c, s = math.cos(geom.angle_rad), math.sin(geom.angle_rad)
    if geom.is_collinear_axis:
        sign = 1.0 if c > 0 else -1.0
        return np.column_stack([v * inv_a, sign * v * inv_b]), w
    v1, v2 = np.meshgrid(v, v, indexing="ij")
    w2 = np.outer(w, w)
    shifts = np.column_stack([(v1 * inv_a).ravel(), ((c * v1 + s * v2) * inv_b).ravel()])
    return shifts, w2.ravel()


def spectrum_thermal_quadrature(system, drive_a, drive_b, field_, grid, T,
                                geom: BeamGeometry = BeamGeometry(), nodes: int = DEFAULT_NODES,
                                threads=1, backend=None) -> Spectrum:
    """Maxwell-Boltzmann average of the fluorescence over velocity classes."""
    t = _temperature(T)
    shifts, weights = velocity_nodes(t, geom, nodes)
    grid = _check_grid(grid)
    snap = _snapshot(system, drive_a, drive_b, field_, temperature_mk=t,
                     beam_angle_rad=geom.angle_rad, quadrature_nodes=int(nodes))
    if t == 0.0:
        f = _sweep(system, drive_a, drive_b, field_, grid, threads=threads, backend=backend)[0]
        return Spectrum(grid, f, "quadrature", snap)
    per_node = _sweep(system, drive_a, drive_b, field_, grid, doppler=shifts,
                      threads=threads, backend=backend)
    f = np.zeros(grid.size)
    for k in range(weights.size):  # fixed summation order
        f += weights[k] * per_node[k]
    return Spectrum(grid, np.maximum(f, 0.0), "quadrature", snap)


def locate_dark_resonances(system: LevelSystem, drive_a: DriveConfig = None,
                           drive_b: DriveConfig = None, field_: ZeemanField | None = None) -> list[float]:
    """Two-photon offsets ``Delta_866 - Delta_397`` (MHz) of the four dark resonances.

    Each equates the bare S and D diagonal energies of a pair sharing a P
    sublevel through sigma couplings, ``(m_d g_D - m_s g_S) b``.  Drives do not
    enter; they are accepted for call-site symmetry with the spectrum builders.
    """
    if system.kind != "calcium8":
        raise InvalidParameterError("dark resonance positions are defined for calcium8 only")
    b = field_.frequency_mhz if field_ is not None else 0.0
    # S-1/2 - P+1/2 - {D-1/2, D+3/2};  S+1/2 - P-1/2 - {D-3/2, D+1/2}
    pairs = ((-0.5, -0.5), (-0.5, 1.5), (0.5, -1.5), (0.5, 0.5))
    return sorted((md * G_D - ms * G_S) * b for ms, md in pairs)


def resonance_grid(drive_a: DriveConfig, drive_b: DriveConfig, field_: ZeemanField | None,
                   step_mhz: float = RESONANCE_GRID_STEP_MHZ) -> np.ndarray:
    """Default scan centred on ``Delta_397``: half-width ``2.2 b + 10 (Gamma_397 + Gamma_866)``.

    The linewidth term is floored at 1 MHz so that zero-linewidth scans still
    show the flanks of the outer resonances.
    """
    b = field_.frequency_mhz if field_ is not None else 0.0
    half = 2.2 * b + max(10.0 * (drive_a.linewidth_mhz + drive_b.linewidth_mhz), 1.0)
    n = int(math.ceil(half / step_mhz))
    return drive_a.detuning_mhz + step_mhz * np.arange(-n, n + 1)


def local_minima(values) -> np.ndarray:
    """Indices of strict interior local minima."""
    f = np.asarray(values, dtype=float)
    return np.flatnonzero((f[1:-1] < f[:-2]) & (f[1:-1] < f[2:])) + 1


def local_maxima(values) -> np.ndarray:
    f = np.asarray(values, dtype=float)
    return np.flatnonzero((f[1:-1] > f[:-2]) & (f[1:-1] > f[2:])) + 1


def resonance_contrast(spec: Spectrum, position_mhz: float, window_mhz: float = 1.5) -> float:
    """Depth ``(max - min) / max`` of the dip nearest ``position_mhz``.

    The reference maximum is the lower of the two flanking local maxima.
    Returns 0 when no local minimum lies within ``window_mhz``.
    """
    d, f = spec.detuning_mhz, spec.fluorescence
    mins = local_minima(f)
    mins = mins[np.abs(d[mins] - position_mhz) <= window_mhz]
    if mins.size == 0:
        return 0.0
    i = mins[np.argmin(np.abs(d[mins] - position_mhz))]
    maxs = local_maxima(f)
    left, right = maxs[maxs < i], maxs[maxs > i]
    if left.size == 0 or right.size == 0:
        return 0.0
    ref = min(f[left[-1]], f[right[0]])
    return float((ref - f[i]) / ref)
