"""Liouvillian assembly and the stationary solution of the master equation.

Vectorization is row-major: ``vec(rho)[i * N + j] = rho[i, j]``, so that
``vec(A rho B) = kron(A, B.T) @ vec(rho)``.  The Liouvillian is stored in
angular units (rad/us) while the inputs are ``H/h`` and rates in MHz.

The stationary state solves ``L vec(rho) = 0`` after the equation for one
population (by default the first, ``rho_00``) is replaced by ``Tr rho = 1``.
Only population rows may be replaced: the trace functional is a left null
vector of ``L``, so any row it touches is a linear combination of the others.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _backend
from .errors import DegenerateSteadyStateError, InvalidParameterError
from .levels import CollapseOperator, LevelSystem

#: Condition number above which the augmented system is declared singular.
COND_LIMIT = 1e12


@dataclass(frozen=True)
class Liouvillian:
    matrix: np.ndarray
    dim: int

    @property
    def trace_indices(self) -> np.ndarray:
        return np.arange(self.dim) * (self.dim + 1)


@dataclass(frozen=True)
class DensityMatrix:
    matrix: np.ndarray

    @property
    def trace(self) -> complex:
        return complex(np.trace(self.matrix))

    @property
    def hermiticity_error(self) -> float:
        return float(np.max(np.abs(self.matrix - self.matrix.conj().T)))

    @property
    def min_eigenvalue(self) -> float:
        herm = 0.5 * (self.matrix + self.matrix.conj().T)
        return float(np.linalg.eigvalsh(herm).min())

    def vector(self) -> np.ndarray:
        return self.matrix.reshape(-1)


def _as_matrix(op):
    return op.matrix if isinstance(op, CollapseOperator) else np.asarray(op, dtype=complex)


def assemble_liouvillian(H, collapse_ops) -> Liouvillian:
    """Build ``L`` with ``d vec(rho)/dt = L vec(rho)``.

    Parameters
    ----------
    H : (N, N) complex array
        Hamiltonian over h, in MHz.
    collapse_ops : iterable of CollapseOperator or (N, N) arrays
        Jump operators scaled by ``sqrt(rate in MHz)``.
    """
    H = np.asarray(H, dtype=complex)
    if H.ndim != 2 or H.shape[0] != H.shape[1]:
        raise InvalidParameterError(f"Hamiltonian must be square, got shape {H.shape}")
    n = H.shape[0]
    eye = np.eye(n)
    L = -1j * (np.kron(H, eye) - np.kron(eye, H.T))
    for op in collapse_ops:
        C = _as_matrix(op)
        if C.shape != (n, n):
            raise InvalidParameterError(
                f"collapse operator shape {C.shape} does not match Hamiltonian dimension {n}")
        CdC = C.conj().T @ C
        L += np.kron(C, C.conj()) - 0.5 * np.kron(CdC, eye) - 0.5 * np.kron(eye, CdC.T)
    return Liouvillian(2.0 * math.pi * L, n)


def diagonal_shift(delta_diag) -> np.ndarray:
    """Liouvillian diagonal produced by adding ``diag(delta_diag)`` (MHz) to ``H``.

    Works on a single vector of length N or a batch of shape (B, N).
    """
    d = np.asarray(delta_diag, dtype=float)
    diff = d[..., :, None] - d[..., None, :]
    return (-2j * math.pi * diff).reshape(d.shape[:-1] + (-1,))


def _null_dimension(L: Liouvillian) -> int:
    s = np.linalg.svd(L.matrix, compute_uv=False)
    return int(np.sum(s < 1e-9 * s[0]))


def population_block(L: Liouvillian) -> np.ndarray | None:
    """Indices of the connected block of ``L`` that holds all populations.

    Returns ``None`` when the populations do not share one block or the block
    is the whole space.  Diagonal shifts never change the block structure.
    """
    from scipy.sparse.csgraph import connected_components

    pattern = (L.matrix != 0) | (L.matrix.T != 0)
    _, labels = connected_components(pattern, directed=False)
    pops = labels[L.trace_indices]
    if np.any(pops != pops[0]):
        return None
    block = np.flatnonzero(labels == pops[0])
    return None if block.size == L.matrix.shape[0] else block


def _check_offblock(L, block, shifts, backend, threads):
    """Make sure every batch entry damps the coherences outside the population block."""
    rest = np.setdiff1d(np.arange(L.matrix.shape[0]), block)
    sub = L.matrix[np.ix_(rest, rest)]
    cond = _backend.get_condition(backend)(sub, shifts[:, rest], threads)
    bad = np.flatnonzero(~(cond < COND_LIMIT))
    if bad.size:
        k = int(bad[0])
        shifted = Liouvillian(sub + np.diag(shifts[k, rest]), 0)
        raise DegenerateSteadyStateError(
            f"undamped coherences outside the population block (condition {cond[k]:.3g}) "
            f"at batch index {k}", condition=float(cond[k]),
            null_dimension=max(_null_dimension(shifted), 1) + 1, batch_index=k)


def steady_state_batch(L: Liouvillian, shifts=None, replace_level: int = 0,
                       backend: str | None = None, threads: int = 1,
                       reduce: bool = True) -> np.ndarray:
    """Stationary states of ``L + diag(shift_k)`` for a batch of shifts.

    With ``reduce=True`` only the block of ``L`` coupled to the populations
    is solved; the remaining entries of ``rho`` are exactly zero.  Returns an
    array of shape (B, N, N).  Raises :class:`DegenerateSteadyStateError`
    naming the first failing batch entry.
    """
    n = L.dim
    if not 0 <= replace_level < n:
        raise InvalidParameterError(f"replace_level must be in [0, {n}), got {replace_level}")
    if shifts is None:
        shifts = np.zeros((1, n * n), dtype=complex)
    shifts = np.atleast_2d(shifts)
    solve = _backend.get_solver(backend)
    row = replace_level * (n + 1)

    block = population_block(L) if reduce else None
    if block is None:
        x, cond = solve(L.matrix, shifts, row, L.trace_indices, threads)
    else:
        _check_offblock(L, block, shifts, backend, threads)
        pos = np.searchsorted(block, L.trace_indices)
        xb, cond = solve(L.matrix[np.ix_(block, block)], shifts[:, block],
                         int(np.searchsorted(block, row)), pos, threads)
        x = np.zeros((shifts.shape[0], n * n), dtype=complex)
        x[:, block] = xb

    bad = np.flatnonzero(~(cond < COND_LIMIT) | ~np.all(np.isfinite(x), axis=1))
    if bad.size:
        k = int(bad[0])
        shifted = Liouvillian(L.matrix + np.diag(shifts[k]), n)
        nulldim = max(_null_dimension(shifted), 2)
        raise DegenerateSteadyStateError(
            f"stationary manifold is degenerate (condition {cond[k]:.3g} > {COND_LIMIT:.0e}, "
            f"null dimension {nulldim}) at batch index {k}",
            condition=float(cond[k]), null_dimension=nulldim, batch_index=k)
    return x.reshape(-1, n, n)


def steady_state(L: Liouvillian, replace_level: int = 0, backend: str | None = None,
                 reduce: bool = False) -> DensityMatrix:
    """Unique stationary density matrix of ``L`` from the full dense system."""
    return DensityMatrix(steady_state_batch(L, None, replace_level, backend, reduce=reduce)[0])


def residual(L: Liouvillian, rho, replace_level: int = 0) -> float:
    """``max |L vec(rho)|`` over all rows except the replaced one (rad/us)."""
    rho = rho.matrix if isinstance(rho, DensityMatrix) else np.asarray(rho)
    r = L.matrix @ rho.reshape(-1)
    r[replace_level * (L.dim + 1)] = 0.0
    return float(np.max(np.abs(r)))


def fluorescence_rate(rho, system: LevelSystem):
    """Total excited-state population.

    ``rho`` may be a :class:`DensityMatrix`, an (N, N) array, or a batch of
    shape (B, N, N), in which case an array of length B is returned.
    """
    m = rho.matrix if isinstance(rho, DensityMatrix) else np.asarray(rho)
    idx = list(system.excited_indices)
    f = np.real(m[..., idx, idx]).sum(axis=-1)
    return float(f) if np.ndim(f) == 0 else f


def populations(rho, system: LevelSystem) -> list[tuple[tuple, float]]:
    """Diagonal of ``rho`` paired with the basis labels."""
    m = rho.matrix if isinstance(rho, DensityMatrix) else np.asarray(rho)
    return [(label, float(np.real(m[i, i]))) for i, label in enumerate(system.labels)]
