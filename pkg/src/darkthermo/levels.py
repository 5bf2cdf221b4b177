"""Atomic level structure: Hamiltonians and collapse operators.

Two models are supported:

* ``lambda3`` -- the bare three-level Lambda scheme |1>, |2>, |3> with the
  excited state |2> in the middle.
* ``calcium8`` -- the Zeeman-resolved S1/2, P1/2, D3/2 manifolds of 40Ca+
  driven on sigma+ and sigma- transitions only.

Every frequency crossing this module's interface is an ordinary frequency in
MHz (Omega/2pi, Delta/2pi, Gamma/2pi).  Matrices returned by
:func:`hamiltonian` are ``H/h`` in MHz and collapse operators carry
``sqrt(rate in MHz)``; the conversion to angular units happens once, in
:func:`darkthermo.steadystate.assemble_liouvillian`.

Detunings enter the diagonal exactly as in the rotating-frame matrix of the
8-level model: ``m g b - Delta`` on the S and D sublevels, ``m g_P b`` on P.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidParameterError

#: Bohr magneton over Planck constant in MHz per tesla.
MU_B_OVER_H_MHZ_PER_T = 13996.245

G_S = 2.0
G_P = 2.0 / 3.0
G_D = 4.0 / 5.0

P_LIFETIME_NS = 7.0
#: Default split of the P1/2 decay (MHz, ordinary frequency); sums to ~1/(2 pi 7 ns).
DEFAULT_GAMMA_PS_MHZ = 21.0
DEFAULT_GAMMA_PD_MHZ = 1.7

LAMBDA_WAVELENGTH_NM = 397.0
REPUMP_WAVELENGTH_NM = 866.0

CA40_LABELS = (
    ("S", -0.5), ("S", +0.5),
    ("P", -0.5), ("P", +0.5),
    ("D", -1.5), ("D", -0.5), ("D", +0.5), ("D", +1.5),
)
LAMBDA3_LABELS = (("1", 0.0), ("2", 0.0), ("3", 0.0))

S_IDX = (0, 1)
P_IDX = (2, 3)
D_IDX = (4, 5, 6, 7)


def to_angular(freq_mhz):
    """Ordinary frequency in MHz to angular frequency in rad/us."""
    return 2.0 * math.pi * freq_mhz


def from_angular(omega):
    """Angular frequency in rad/us to ordinary frequency in MHz."""
    return omega / (2.0 * math.pi)


@dataclass(frozen=True)
class LevelSystem:
    """Level structure and decay channels of the driven ion.

    ``decay_rates`` holds ``(Gamma_PS, Gamma_PD)`` for ``calcium8`` and
    ``(Gamma_21, Gamma_23)`` for ``lambda3``; both in MHz.
    """

    kind: str
    labels: tuple
    decay_rates: tuple
    excited_indices: tuple
    lande_factors: dict | None = None

    @property
    def dim(self) -> int:
        return len(self.labels)

    def indices(self, manifold: str) -> tuple:
        return tuple(i for i, (name, _) in enumerate(self.labels) if name == manifold)


@dataclass(frozen=True)
class DriveConfig:
    """One laser: detuning, Rabi frequency and linewidth in MHz, wavelength in nm.

    The detuning is laser minus atomic transition frequency, so a red-detuned
    laser has ``detuning_mhz < 0``.  ``linewidth_mhz`` is the FWHM and is used
    unchanged as the dephasing rate of the corresponding lower manifold.
    """

    detuning_mhz: float = 0.0
    rabi_mhz: float = 0.0
    wavelength_nm: float = LAMBDA_WAVELENGTH_NM
    linewidth_mhz: float = 0.0
    direction: tuple = (1.0, 0.0, 0.0)

    def __post_init__(self):
        if not self.rabi_mhz >= 0:
            raise InvalidParameterError(f"rabi frequency must be >= 0, got {self.rabi_mhz}")
        if not self.linewidth_mhz >= 0:
            raise InvalidParameterError(f"laser linewidth must be >= 0, got {self.linewidth_mhz}")
        if not self.wavelength_nm > 0:
            raise InvalidParameterError(f"wavelength must be > 0, got {self.wavelength_nm}")
        direction = tuple(float(c) for c in self.direction)
        if len(direction) != 3 or abs(math.sqrt(sum(c * c for c in direction)) - 1.0) > 1e-9:
            raise InvalidParameterError(f"beam direction must be a unit 3-vector, got {self.direction}")
        object.__setattr__(self, "direction", direction)


@dataclass(frozen=True)
class ZeemanField:
    """Static magnetic field magnitude in tesla."""

    tesla: float = 0.0

    def __post_init__(self):
        if not self.tesla >= 0:
            raise InvalidParameterError(f"magnetic field must be >= 0, got {self.tesla}")

    @property
    def frequency_mhz(self) -> float:
        return zeeman_frequency(self.tesla)


@dataclass(frozen=True)
class CollapseOperator:
    matrix: np.ndarray = field(repr=False)
    label: str
    channel: str  # "decay" or "dephasing"


def zeeman_frequency(tesla: float) -> float:
    """Zeeman frequency ``mu_B |B| / h`` in MHz.

    >>> zeeman_frequency(1.0)
    13996.245
    """
    if not tesla >= 0:
        raise InvalidParameterError(f"magnetic field must be >= 0, got {tesla}")
    return MU_B_OVER_H_MHZ_PER_T * tesla


def build_lambda_system(gamma_decay_mhz: float, branching: float) -> LevelSystem:
    """Three-level Lambda system with total excited-state decay ``gamma_decay_mhz``.

    ``branching`` is the fraction of the decay that ends in |1>.
    """
    if not gamma_decay_mhz > 0:
        raise InvalidParameterError(f"decay rate must be > 0, got {gamma_decay_mhz}")
    if not 0.0 < branching < 1.0:
        raise InvalidParameterError(f"branching must lie in (0, 1), got {branching}")
    return LevelSystem(
        kind="lambda3",
        labels=LAMBDA3_LABELS,
        decay_rates=(branching * gamma_decay_mhz, (1.0 - branching) * gamma_decay_mhz),
        excited_indices=(1,),
    )


def build_ca40_system(gamma_ps_mhz: float = DEFAULT_GAMMA_PS_MHZ,
                      gamma_pd_mhz: float = DEFAULT_GAMMA_PD_MHZ) -> LevelSystem:
    """Zeeman-resolved 8-level model of 40Ca+ (S1/2, P1/2, D3/2)."""
    if not gamma_ps_mhz > 0:
        raise InvalidParameterError(f"Gamma_PS must be > 0, got {gamma_ps_mhz}")
    if not gamma_pd_mhz > 0:
        raise InvalidParameterError(f"Gamma_PD must be > 0, got {gamma_pd_mhz}")
    return LevelSystem(
        kind="calcium8",
        labels=CA40_LABELS,
        decay_rates=(float(gamma_ps_mhz), float(gamma_pd_mhz)),
        excited_indices=P_IDX,
        lande_factors={"S": G_S, "P": G_P, "D": G_D},
    )


def detuning_pattern(system: LevelSystem) -> tuple[np.ndarray, np.ndarray]:
    """Diagonal coefficients of ``Delta_a`` and ``Delta_b`` in the Hamiltonian.

    ``H(Delta_a + x, Delta_b + y) = H(Delta_a, Delta_b) + diag(pa * x + pb * y)``.
    """
    pa = np.zeros(system.dim)
    pb = np.zeros(system.dim)
    if system.kind == "calcium8":
        pa[list(S_IDX)] = -1.0
        pb[list(D_IDX)] = -1.0
    elif system.kind == "lambda3":
        pa[0] = -1.0
        pb[2] = -1.0
    else:
        raise InvalidParameterError(f"unknown level system kind {system.kind!r}")
    return pa, pb


def hamiltonian(system: LevelSystem, drive_a: DriveConfig, drive_b: DriveConfig,
                field: ZeemanField | None = None, doppler=(0.0, 0.0)) -> np.ndarray:
    """Rotating-frame Hamiltonian ``H/h`` in MHz.

    Parameters
    ----------
    system : LevelSystem
    drive_a, drive_b : DriveConfig
        The 397 nm (S-P, or 1-2) and 866 nm (P-D, or 2-3) lasers.
    field : ZeemanField, optional
        Ignored for ``lambda3``.
    doppler : pair of float
        Doppler shifts in MHz added to the two detunings.

    Returns
    -------
    ndarray, complex, shape (N, N)
    """
    da = drive_a.detuning_mhz + doppler[0]
    db = drive_b.detuning_mhz + doppler[1]
    oa, ob = drive_a.rabi_mhz, drive_b.rabi_mhz

    if system.kind == "lambda3":
        H = np.zeros((3, 3), dtype=complex)
        H[0, 0] = -da
        H[2, 2] = -db
        H[0, 1] = H[1, 0] = oa / 2.0
        H[2, 1] = H[1, 2] = ob / 2.0
        return H

    if system.kind != "calcium8":
        raise InvalidParameterError(f"unknown level system kind {system.kind!r}")

    b = field.frequency_mhz if field is not None else 0.0
    H = np.zeros((8, 8), dtype=complex)
    H[0, 0] = -0.5 * G_S * b - da
    H[1, 1] = +0.5 * G_S * b - da
    H[2, 2] = -0.5 * G_P * b
    H[3, 3] = +0.5 * G_P * b
    H[4, 4] = -1.5 * G_D * b - db
    H[5, 5] = -0.5 * G_D * b - db
    H[6, 6] = +0.5 * G_D * b - db
    H[7, 7] = +1.5 * G_D * b - db

    r3 = math.sqrt(3.0)
    upper = {
        (0, 3): -oa / r3,
        (1, 2): -oa / r3,
        (2, 4): -ob / 2.0,
        (2, 6): ob / (2.0 * r3),
        (3, 5): -ob / (2.0 * r3),
        (3, 7): ob / 2.0,
    }
    for (i, j), value in upper.items():
        H[i, j] = value
        H[j, i] = value
    return H


def _ket_bra(n, i, j):
    m = np.zeros((n, n), dtype=complex)
    m[i, j] = 1.0
    return m


def collapse_operators(system: LevelSystem, gamma_397_mhz: float = 0.0,
                       gamma_866_mhz: float = 0.0) -> list[CollapseOperator]:
    """Dipole-decay and laser-dephasing jump operators.

    Dephasing operators are returned only for strictly positive linewidths.
    """
    if gamma_397_mhz < 0 or gamma_866_mhz < 0:
        raise InvalidParameterError("laser linewidths must be >= 0")
    n = system.dim
    ops = []

    if system.kind == "lambda3":
        g21, g23 = system.decay_rates
        ops.append(CollapseOperator(math.sqrt(g21) * _ket_bra(3, 0, 1), "2->1", "decay"))
        ops.append(CollapseOperator(math.sqrt(g23) * _ket_bra(3, 2, 1), "2->3", "decay"))
        lower_a, lower_b = (0,), (2,)
    elif system.kind == "calcium8":
        gps, gpd = system.decay_rates
        kb = lambda i, j: _ket_bra(8, i, j)  # noqa: E731
        ops += [
            CollapseOperator(math.sqrt(2 * gps / 3) * kb(0, 3), "C1 P+1/2->S-1/2", "decay"),
            CollapseOperator(math.sqrt(2 * gps / 3) * kb(1, 2), "C2 P-1/2->S+1/2", "decay"),
            CollapseOperator(math.sqrt(gps / 3) * (kb(0, 2) - kb(1, 3)), "C3 P->S pi", "decay"),
            CollapseOperator(math.sqrt(gpd / 2) * kb(4, 2) + math.sqrt(gpd / 6) * kb(5, 3),
                             "C4 P->D sigma", "decay"),
            CollapseOperator(math.sqrt(gpd / 6) * kb(6, 2) + math.sqrt(gpd / 2) * kb(7, 3),
                             "C5 P->D sigma", "decay"),
            CollapseOperator(math.sqrt(gpd / 3) * (kb(5, 2) + kb(6, 3)), "C6 P->D pi", "decay"),
        ]
        lower_a, lower_b = S_IDX, D_IDX
    else:
        raise InvalidParameterError(f"unknown level system kind {system.kind!r}")

    for rate, lower, name in ((gamma_397_mhz, lower_a, "C7 397 linewidth"),
                              (gamma_866_mhz, lower_b, "C8 866 linewidth")):
        if rate > 0:
            proj = np.zeros((n, n), dtype=complex)
            proj[list(lower), list(lower)] = 1.0
            ops.append(CollapseOperator(math.sqrt(rate) * proj, name, "dephasing"))
    return ops

