# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled bootstrap kernel: per-replicate Gram matrices and g-prior residual forms."""

import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt
from libc.stdlib cimport malloc, free

cnp.import_array()


cdef int _residual_form(const double[:, ::1] G, const cnp.int64_t[::1] cols,
                        const cnp.int64_t[::1] resp, double kappa, double tol,
                        double* L, double* W, double[:, ::1] out) noexcept nogil:
    """Y'(I - kappa P)Y from the Gram matrix; returns 0 when X'X is numerically singular."""
    cdef Py_ssize_t p = cols.shape[0], q = resp.shape[0]
    cdef Py_ssize_t i, j, k
    cdef double acc, d

    # Cholesky of X'X, row-major lower triangle in L (p x p)
    for i in range(p):
        for j in range(i + 1):
            acc = G[cols[i], cols[j]]
            for k in range(j):
                acc -= L[i * p + k] * L[j * p + k]
            if i == j:
                d = G[cols[i], cols[i]]
                if acc <= tol * d or d <= 0.0:
                    return 0
                L[i * p + i] = sqrt(acc)
            else:
                L[i * p + j] = acc / L[j * p + j]

    # W = L^{-1} X'Y  (p x q)
    for j in range(q):
        for i in range(p):
            acc = G[cols[i], resp[j]]
            for k in range(i):
                acc -= L[i * p + k] * W[k * q + j]
            W[i * q + j] = acc / L[i * p + i]

    for i in range(q):
        for j in range(q):
            acc = 0.0
            for k in range(p):
                acc += W[k * q + i] * W[k * q + j]
            out[i, j] = G[resp[i], resp[j]] - kappa * acc
    return 1


def replicate_residuals(double[:, ::1] Z, cnp.int64_t[:, ::1] idx,
                        cnp.int64_t[::1] cols, cnp.int64_t[::1] col_ptr,
                        cnp.int64_t[::1] resp, double[::1] kappa, double tol):
    """Residual forms ``Y_b'(I - H_k)Y_b`` for every replicate ``b`` and model ``k``.

    ``idx`` is ``B x n`` row indices into ``Z``; model ``k`` uses columns
    ``cols[col_ptr[k]:col_ptr[k+1]]`` and the response columns ``resp``.
    Returns ``(forms, ok)`` with shapes ``(B, K, q, q)`` and ``(B, K)``.
    """
    cdef Py_ssize_t B = idx.shape[0], n = idx.shape[1], m = Z.shape[1]
    cdef Py_ssize_t K = col_ptr.shape[0] - 1, q = resp.shape[0]
    cdef Py_ssize_t b, r, i, j, k, row, pmax = 0
    cdef double zi

    for k in range(K):
        if col_ptr[k + 1] - col_ptr[k] > pmax:
            pmax = col_ptr[k + 1] - col_ptr[k]

    forms_arr = np.zeros((B, K, q, q), dtype=np.float64)
    ok_arr = np.zeros((B, K), dtype=np.uint8)
    cdef double[:, :, :, ::1] forms = forms_arr
    cdef cnp.uint8_t[:, ::1] ok = ok_arr
    G_arr = np.empty((m, m), dtype=np.float64)
    cdef double[:, ::1] G = G_arr

    cdef double* L = <double*> malloc(max(pmax * pmax, 1) * sizeof(double))
    cdef double* W = <double*> malloc(max(pmax * q, 1) * sizeof(double))
    if L == NULL or W == NULL:
        free(L)
        free(W)
        raise MemoryError()

    try:
        with nogil:
            for b in range(B):
                for i in range(m):
                    for j in range(m):
                        G[i, j] = 0.0
                for r in range(n):
                    row = idx[b, r]
                    for i in range(m):
                        zi = Z[row, i]
                        for j in range(i + 1):
                            G[i, j] += zi * Z[row, j]
                for i in range(m):
                    for j in range(i + 1, m):
                        G[i, j] = G[j, i]
                for k in range(K):
                    ok[b, k] = _residual_form(G, cols[col_ptr[k]:col_ptr[k + 1]], resp,
                                              kappa[k], tol, L, W, forms[b, k])
    finally:
        free(L)
        free(W)
    return forms_arr, ok_arr.astype(bool)
