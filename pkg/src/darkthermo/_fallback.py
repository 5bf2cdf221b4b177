"""Pure numpy implementation of the batched steady-state kernels.

Mirrors the interface of the compiled ``_kernels`` module.
"""

import numpy as np

_CHUNK = 256


def solve_shifted(L_base, shifts, replace_row, trace_idx, threads=1):
    """Solve ``(L_base + diag(shift_k)) x_k = 0`` with one row replaced by the trace.

    Parameters
    ----------
    L_base : complex ndarray, shape (n, n)
    shifts : complex ndarray, shape (B, n)
        Diagonal added to ``L_base`` for each problem in the batch.
    replace_row : int
        Row overwritten by the trace functional; the right-hand side is the
        unit vector at that row.
    trace_idx : int ndarray
        Vector positions of the diagonal density-matrix elements.

    Returns
    -------
    x : complex ndarray, shape (B, n)
    cond : float ndarray, shape (B,)
        1-norm condition number of each augmented matrix.
    """
    L_base = np.asarray(L_base, dtype=complex)
    shifts = np.atleast_2d(np.asarray(shifts, dtype=complex))
    n = L_base.shape[0]
    batch = shifts.shape[0]
    trace_row = np.zeros(n, dtype=complex)
    trace_row[trace_idx] = 1.0
    diag = np.arange(n)

    x = np.empty((batch, n), dtype=complex)
    cond = np.empty(batch)
    for start in range(0, batch, _CHUNK):
        stop = min(start + _CHUNK, batch)
        A = np.broadcast_to(L_base, (stop - start, n, n)).copy()
        A[:, diag, diag] += shifts[start:stop]
        A[:, replace_row, :] = trace_row
        with np.errstate(all="ignore"):
            try:
                Ainv = np.linalg.inv(A)
            except np.linalg.LinAlgError:
                Ainv = np.stack([_safe_inv(a) for a in A])
        x[start:stop] = Ainv[:, :, replace_row]
        cond[start:stop] = (np.abs(A).sum(axis=1).max(axis=1)
                            * np.abs(Ainv).sum(axis=1).max(axis=1))
    cond[~np.isfinite(cond)] = np.inf
    return x, cond


def condition_shifted(L_base, shifts, threads=1):
    """1-norm condition number of ``L_base + diag(shift_k)`` for each k."""
    L_base = np.asarray(L_base, dtype=complex)
    shifts = np.atleast_2d(np.asarray(shifts, dtype=complex))
    n = L_base.shape[0]
    batch = shifts.shape[0]
    diag = np.arange(n)
    cond = np.empty(batch)
    for start in range(0, batch, _CHUNK):
        stop = min(start + _CHUNK, batch)
        A = np.broadcast_to(L_base, (stop - start, n, n)).copy()
        A[:, diag, diag] += shifts[start:stop]
        with np.errstate(all="ignore"):
            try:
                Ainv = np.linalg.inv(A)
            except np.linalg.LinAlgError:
                Ainv = np.stack([_safe_inv(a) for a in A])
        cond[start:stop] = (np.abs(A).sum(axis=1).max(axis=1)
                            * np.abs(Ainv).sum(axis=1).max(axis=1))
    cond[~np.isfinite(cond)] = np.inf
    return cond


def _safe_inv(a):
    try:
        return np.linalg.inv(a)
    except np.linalg.LinAlgError:
        return np.full_like(a, np.nan)
