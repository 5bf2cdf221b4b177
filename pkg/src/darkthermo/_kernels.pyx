# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled batched steady-state kernels (LAPACK zgetrf/zgecon/zgetrs)."""

import numpy as np
cimport numpy as cnp
from cython.parallel cimport prange
from libc.stdlib cimport malloc, free
from libc.string cimport memcpy
from libc.math cimport NAN, INFINITY
from scipy.linalg.cython_lapack cimport zgetrf, zgetrs, zgecon

cnp.import_array()


cdef double _solve_one(const double complex[::1, :] L_base,
                       const double complex[:, ::1] shifts,
                       const double complex[::1] trace_row,
                       double complex[:, ::1] x,
                       Py_ssize_t k, int n, int replace_row) noexcept nogil:
    cdef int i, j, info = 0, nrhs = 1
    cdef double anorm = 0.0, colsum, rcond = 0.0
    cdef char norm = b'1'
    cdef char trans = b'N'
    cdef double complex *A = <double complex *> malloc(n * n * sizeof(double complex))
    cdef double complex *b = <double complex *> malloc(n * sizeof(double complex))
    cdef double complex *work = <double complex *> malloc(2 * n * sizeof(double complex))
    cdef double *rwork = <double *> malloc(2 * n * sizeof(double))
    cdef int *ipiv = <int *> malloc(n * sizeof(int))

    # column-major copy of L_base with the diagonal shift and trace row
    memcpy(A, &L_base[0, 0], n * n * sizeof(double complex))
    for i in range(n):
        A[i + i * n] = A[i + i * n] + shifts[k, i]
    for j in range(n):
        A[replace_row + j * n] = trace_row[j]
    for j in range(n):
        colsum = 0.0
        for i in range(n):
            colsum = colsum + abs(A[i + j * n])
        if colsum > anorm:
            anorm = colsum
    for i in range(n):
        b[i] = 0.0
    b[replace_row] = 1.0

    zgetrf(&n, &n, A, &n, ipiv, &info)
    if info == 0:
        zgecon(&norm, &n, A, &n, &anorm, &rcond, work, rwork, &info)
        zgetrs(&trans, &n, &nrhs, A, &n, ipiv, b, &n, &info)
        for i in range(n):
            x[k, i] = b[i]
    else:
        rcond = 0.0
        for i in range(n):
            x[k, i] = NAN

    free(A)
    free(b)
    free(work)
    free(rwork)
    free(ipiv)
    if rcond <= 0.0:
        return INFINITY
    return 1.0 / rcond


def solve_shifted(L_base, shifts, int replace_row, trace_idx, int threads=1):
    """Compiled twin of :func:`darkthermo._fallback.solve_shifted`.

    The condition number is LAPACK's 1-norm estimate rather than the exact
    value, which is adequate for the degeneracy threshold.
    """
    cdef double complex[::1, :] Lf = np.asfortranarray(L_base, dtype=np.complex128)
    cdef double complex[:, ::1] sh = np.ascontiguousarray(
        np.atleast_2d(shifts), dtype=np.complex128)
    cdef int n = Lf.shape[0]
    cdef Py_ssize_t batch = sh.shape[0]
    tr = np.zeros(n, dtype=np.complex128)
    tr[np.asarray(trace_idx)] = 1.0
    cdef double complex[::1] trv = tr
    x_arr = np.empty((batch, n), dtype=np.complex128)
    cond_arr = np.empty(batch, dtype=np.float64)
    cdef double complex[:, ::1] x = x_arr
    cdef double[::1] cond = cond_arr
    cdef Py_ssize_t k
    cdef int nthreads = threads if threads > 0 else 1
    if replace_row < 0 or replace_row >= n:
        raise ValueError("replace_row out of range")
    for k in prange(batch, nogil=True, num_threads=nthreads, schedule="static"):
        cond[k] = _solve_one(Lf, sh, trv, x, k, n, replace_row)
    return x_arr, cond_arr


cdef double _cond_one(const double complex[::1, :] L_base,
                      const double complex[:, ::1] shifts,
                      Py_ssize_t k, int n) noexcept nogil:
    cdef int i, j, info = 0
    cdef double anorm = 0.0, colsum, rcond = 0.0
    cdef char norm = b'1'
    cdef double complex *A = <double complex *> malloc(n * n * sizeof(double complex))
    cdef double complex *work = <double complex *> malloc(2 * n * sizeof(double complex))
    cdef double *rwork = <double *> malloc(2 * n * sizeof(double))
    cdef int *ipiv = <int *> malloc(n * sizeof(int))

    memcpy(A, &L_base[0, 0], n * n * sizeof(double complex))
    for i in range(n):
        A[i + i * n] = A[i + i * n] + shifts[k, i]
    for j in range(n):
        colsum = 0.0
        for i in range(n):
            colsum = colsum + abs(A[i + j * n])
        if colsum > anorm:
            anorm = colsum
    zgetrf(&n, &n, A, &n, ipiv, &info)
    if info == 0:
        zgecon(&norm, &n, A, &n, &anorm, &rcond, work, rwork, &info)
    free(A)
    free(work)
    free(rwork)
    free(ipiv)
    if rcond <= 0.0:
        return INFINITY
    return 1.0 / rcond


def condition_shifted(L_base, shifts, int threads=1):
    """Compiled twin of :func:`darkthermo._fallback.condition_shifted` (LAPACK estimate)."""
    cdef double complex[::1, :] Lf = np.asfortranarray(L_base, dtype=np.complex128)
    cdef double complex[:, ::1] sh = np.ascontiguousarray(
        np.atleast_2d(shifts), dtype=np.complex128)
    cdef int n = Lf.shape[0]
    cdef Py_ssize_t batch = sh.shape[0]
    cond_arr = np.empty(batch, dtype=np.float64)
    cdef double[::1] cond = cond_arr
    cdef Py_ssize_t k
    cdef int nthreads = threads if threads > 0 else 1
    for k in prange(batch, nogil=True, num_threads=nthreads, schedule="static"):
        cond[k] = _cond_one(Lf, sh, k, n)
    return cond_arr
