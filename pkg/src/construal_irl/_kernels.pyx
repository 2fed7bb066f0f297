# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled Bellman backup loops: the hot path of both value-iteration
solvers. Mirrors kernels_py exactly (same sweep scheme, same stopping rule,
same return contract)."""

import numpy as np

cimport numpy as cnp
from libc.math cimport exp, fabs, log
from scipy.linalg.cython_blas cimport dgemv

cnp.import_array()

BACKEND_NAME = "compiled"

cdef double NEG_INF = -np.inf


cdef inline void _expected_values(const double[:, :, ::1] T,
                                  const double[::1] V,
                                  double[::1] TV) noexcept nogil:
    # The C-contiguous (S, A, S) buffer of T is, read column-major, the
    # (S, S*A) Fortran matrix whose transpose is T flattened to (S*A, S)
    # rows. One transposed GEMV therefore fills TV[s*A + a] with
    # sum_sp T[s, a, sp] * V[sp] for every state-action pair at once.
    cdef char trans = b'T'
    cdef int m = <int> T.shape[2]
    cdef int n = <int> (T.shape[0] * T.shape[1])
    cdef int lda = m
    cdef int inc = 1
    cdef double one = 1.0
    cdef double zero = 0.0
    dgemv(&trans, &m, &n, &one, <double *> &T[0, 0, 0], &lda,
          <double *> &V[0], &inc, &zero, &TV[0], &inc)


def hard_value_iteration(const double[:, :, ::1] T, const double[:, ::1] R,
                         double gamma, double tol, Py_ssize_t max_iters,
                         const double[::1] v0):
    """Max-Bellman sweeps. Returns ``(V, Q, n_sweeps, residuals)``."""
    cdef Py_ssize_t S = R.shape[0]
    cdef Py_ssize_t A = R.shape[1]
    V_arr = np.array(v0, dtype=np.float64)
    Q_arr = np.empty((S, A), dtype=np.float64)
    res_arr = np.empty(max_iters, dtype=np.float64)
    TV_arr = np.empty(S * A, dtype=np.float64)
    cdef double[::1] V = V_arr
    cdef double[:, ::1] Q = Q_arr
    cdef double[::1] residuals = res_arr
    cdef double[::1] TV = TV_arr
    cdef Py_ssize_t k, s, a, done = max_iters
    cdef double q, best, res, diff

    for k in range(max_iters):
        res = 0.0
        with nogil:
            # Jacobi sweep: TV snapshots the sweep-start V, so every Q row
            # is built against the same values and V can be overwritten row
            # by row. The new V is exactly the row-max of the returned Q.
            _expected_values(T, V, TV)
            for s in range(S):
                best = NEG_INF
                for a in range(A):
                    q = R[s, a] + gamma * TV[s * A + a]
                    Q[s, a] = q
                    if q > best:
                        best = q
                diff = fabs(best - V[s])
                if diff > res:
                    res = diff
                V[s] = best
        residuals[k] = res
        if res < tol:
            done = k + 1
            break
    return V_arr, Q_arr, done, res_arr[:done].copy()


def soft_value_iteration(const double[:, :, ::1] T, const double[:, ::1] R,
                         double gamma, double beta, double tol,
                         Py_ssize_t max_iters, const double[::1] v0):
    """Entropy-regularized sweeps with a max-shifted log-sum-exp.

    Returns ``(V, Q, n_sweeps, residuals)``.
    """
    cdef Py_ssize_t S = R.shape[0]
    cdef Py_ssize_t A = R.shape[1]
    V_arr = np.array(v0, dtype=np.float64)
    Q_arr = np.empty((S, A), dtype=np.float64)
    res_arr = np.empty(max_iters, dtype=np.float64)
    TV_arr = np.empty(S * A, dtype=np.float64)
    cdef double[::1] V = V_arr
    cdef double[:, ::1] Q = Q_arr
    cdef double[::1] residuals = res_arr
    cdef double[::1] TV = TV_arr
    cdef Py_ssize_t k, s, a, done = max_iters
    cdef double q, m, lse, new_v, res, diff

    for k in range(max_iters):
        res = 0.0
        with nogil:
            # Jacobi sweep: TV snapshots the sweep-start V before any state
            # value is overwritten.
            _expected_values(T, V, TV)
            for s in range(S):
                m = NEG_INF
                for a in range(A):
                    q = R[s, a] + gamma * TV[s * A + a]
                    Q[s, a] = q
                    if q > m:
                        m = q
                lse = 0.0
                for a in range(A):
                    lse += exp((Q[s, a] - m) / beta)
                new_v = m + beta * log(lse)
                diff = fabs(new_v - V[s])
                if diff > res:
                    res = diff
                V[s] = new_v
        residuals[k] = res
        if res < tol:
            done = k + 1
            break
    return V_arr, Q_arr, done, res_arr[:done].copy()
