# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled recurrence kernels.

Same contract as ``_recurrence_py``: the caller supplies the input projection
``Zx`` and these loops handle the time recurrence and its gradient. The
recurrent matvecs and rank-1 updates go through BLAS; row-major ``U`` of shape
(gates, hidden) is viewed as a column-major (hidden, gates) matrix.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport exp, tanh
from scipy.linalg.cython_blas cimport dgemv, dger

cnp.import_array()


cdef inline double _sigmoid(double z) nogil:
    cdef double e
    if z >= 0:
        return 1.0 / (1.0 + exp(-z))
    e = exp(z)
    return e / (1.0 + e)


cdef inline void _matvec(double[:, ::1] U, double* x, double* y, double beta) nogil:
    # y <- U @ x + beta * y
    cdef char trans = b'T'
    cdef int m = U.shape[1], n = U.shape[0], inc = 1
    cdef double one = 1.0
    dgemv(&trans, &m, &n, &one, &U[0, 0], &m, x, &inc, &beta, y, &inc)


cdef inline void _matvec_t(double[:, ::1] U, double* x, double* y) nogil:
    # y <- U.T @ x
    cdef char trans = b'N'
    cdef int m = U.shape[1], n = U.shape[0], inc = 1
    cdef double one = 1.0, zero = 0.0
    dgemv(&trans, &m, &n, &one, &U[0, 0], &m, x, &inc, &zero, y, &inc)


cdef inline void _outer_acc(double[:, ::1] D, double* dz, double* h) nogil:
    # D += outer(dz, h)
    cdef int m = D.shape[1], n = D.shape[0], inc = 1
    cdef double one = 1.0
    dger(&m, &n, &one, h, &inc, dz, &inc, &D[0, 0], &m)


def elman_forward(double[:, ::1] Zx, double[:, ::1] U, bint reverse):
    cdef Py_ssize_t n = Zx.shape[0], hidden = Zx.shape[1], k, t, j
    out = np.zeros((n, hidden))
    cdef double[:, ::1] H = out
    cdef double[::1] z = np.empty(hidden)
    cdef Py_ssize_t prev = -1
    with nogil:
        for k in range(n):
            t = n - 1 - k if reverse else k
            for j in range(hidden):
                z[j] = Zx[t, j]
            if prev >= 0:
                _matvec(U, &H[prev, 0], &z[0], 1.0)
            for j in range(hidden):
                H[t, j] = _sigmoid(z[j])
            prev = t
    return out


def elman_backward(double[:, ::1] U, double[:, ::1] H, double[:, ::1] dH, bint reverse):
    cdef Py_ssize_t n = H.shape[0], hidden = H.shape[1], k, t, j, prev
    dZ_arr = np.zeros((n, hidden))
    dU_arr = np.zeros((U.shape[0], U.shape[1]))
    cdef double[:, ::1] dZ = dZ_arr
    cdef double[:, ::1] dU = dU_arr
    cdef double[::1] dh_next = np.zeros(hidden)
    cdef double dh
    with nogil:
        for k in range(n - 1, -1, -1):
            t = n - 1 - k if reverse else k
            for j in range(hidden):
                dh = dH[t, j] + dh_next[j]
                dZ[t, j] = dh * H[t, j] * (1.0 - H[t, j])
            if k > 0:
                prev = n - k if reverse else k - 1
                _outer_acc(dU, &dZ[t, 0], &H[prev, 0])
            _matvec_t(U, &dZ[t, 0], &dh_next[0])
    return dZ_arr, dU_arr


def lstm_forward(double[:, ::1] Zx, double[:, ::1] U, bint reverse):
    cdef Py_ssize_t n = Zx.shape[0], hidden = U.shape[1], k, t, j
    H_arr = np.zeros((n, hidden))
    C_arr = np.zeros((n, hidden))
    G_arr = np.zeros((n, 4 * hidden))
    cdef double[:, ::1] H = H_arr
    cdef double[:, ::1] C = C_arr
    cdef double[:, ::1] G = G_arr
    cdef Py_ssize_t prev = -1
    cdef double i, f, o, g, c_prev
    with nogil:
        for k in range(n):
            t = n - 1 - k if reverse else k
            for j in range(4 * hidden):
                G[t, j] = Zx[t, j]
            if prev >= 0:
                _matvec(U, &H[prev, 0], &G[t, 0], 1.0)
            for j in range(hidden):
                i = _sigmoid(G[t, j])
                f = _sigmoid(G[t, hidden + j])
                o = _sigmoid(G[t, 2 * hidden + j])
                g = tanh(G[t, 3 * hidden + j])
                G[t, j] = i
                G[t, hidden + j] = f
                G[t, 2 * hidden + j] = o
                G[t, 3 * hidden + j] = g
                c_prev = C[prev, j] if prev >= 0 else 0.0
                C[t, j] = f * c_prev + i * g
                H[t, j] = o * tanh(C[t, j])
            prev = t
    return H_arr, C_arr, G_arr


def lstm_backward(double[:, ::1] U, double[:, ::1] H, double[:, ::1] C,
                  double[:, ::1] G, double[:, ::1] dH, bint reverse):
    cdef Py_ssize_t n = H.shape[0], hidden = H.shape[1], k, t, j, prev
    dZ_arr = np.zeros((n, 4 * hidden))
    dU_arr = np.zeros((U.shape[0], U.shape[1]))
    cdef double[:, ::1] dZ = dZ_arr
    cdef double[:, ::1] dU = dU_arr
    cdef double[::1] dh_next = np.zeros(hidden)
    cdef double[::1] dc_next = np.zeros(hidden)
    cdef double i, f, o, g, tc, dh, dc, c_prev
    with nogil:
        for k in range(n - 1, -1, -1):
            t = n - 1 - k if reverse else k
            prev = (n - k if reverse else k - 1) if k > 0 else -1
            for j in range(hidden):
                i = G[t, j]
                f = G[t, hidden + j]
                o = G[t, 2 * hidden + j]
                g = G[t, 3 * hidden + j]
                tc = tanh(C[t, j])
                c_prev = C[prev, j] if prev >= 0 else 0.0
                dh = dH[t, j] + dh_next[j]
                dc = dc_next[j] + dh * o * (1.0 - tc * tc)
                dZ[t, j] = dc * g * i * (1.0 - i)
                dZ[t, hidden + j] = dc * c_prev * f * (1.0 - f)
                dZ[t, 2 * hidden + j] = dh * tc * o * (1.0 - o)
                dZ[t, 3 * hidden + j] = dc * i * (1.0 - g * g)
                dc_next[j] = dc * f
            if prev >= 0:
                _outer_acc(dU, &dZ[t, 0], &H[prev, 0])
            _matvec_t(U, &dZ[t, 0], &dh_next[0])
    return dZ_arr, dU_arr
