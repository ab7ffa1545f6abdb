# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled multiplicative-update kernels for dense blocks.

Mirrors :mod:`dynnmf._kernels_py` operation for operation. Element updates use
the same evaluation order as the numpy fallback, but matrix products are
accumulated in a different order than BLAS, so the two backends agree to
rounding rather than bit for bit. Zero entries of the data block are skipped
in the data products, which is where adjacency matrices gain most.
"""
import numpy as np
cimport numpy as cnp
from libc.math cimport fabs, isfinite

cnp.import_array()


cdef void _gram(double[:, ::1] X, double[:, ::1] G) noexcept nogil:
    cdef Py_ssize_t n = X.shape[0], K = X.shape[1], i, k, l
    cdef double x
    for k in range(K):
        for l in range(K):
            G[k, l] = 0.0
    for i in range(n):
        for k in range(K):
            x = X[i, k]
            if x != 0.0:
                for l in range(K):
                    G[k, l] += x * X[i, l]


cdef void _times(const double[:, ::1] A, double[:, ::1] X, double[:, ::1] out) noexcept nogil:
    # out = A @ X
    cdef Py_ssize_t nr = A.shape[0], nc = A.shape[1], K = X.shape[1], i, j, k
    cdef double a
    for i in range(nr):
        for k in range(K):
            out[i, k] = 0.0
        for j in range(nc):
            a = A[i, j]
            if a != 0.0:
                for k in range(K):
                    out[i, k] += a * X[j, k]


cdef void _times_t(const double[:, ::1] A, double[:, ::1] X, double[:, ::1] out) noexcept nogil:
    # out = A.T @ X
    cdef Py_ssize_t nr = A.shape[0], nc = A.shape[1], K = X.shape[1], i, j, k
    cdef double a
    for j in range(nc):
        for k in range(K):
            out[j, k] = 0.0
    for i in range(nr):
        for j in range(nc):
            a = A[i, j]
            if a != 0.0:
                for k in range(K):
                    out[j, k] += a * X[i, k]


cdef double _inner(double[:, ::1] X, double[:, ::1] Y) noexcept nogil:
    cdef Py_ssize_t i, k
    cdef double acc = 0.0
    for i in range(X.shape[0]):
        for k in range(X.shape[1]):
            acc += X[i, k] * Y[i, k]
    return acc


cdef double _sum(double[:, ::1] X) noexcept nogil:
    cdef Py_ssize_t i, k
    cdef double acc = 0.0
    for i in range(X.shape[0]):
        for k in range(X.shape[1]):
            acc += X[i, k]
    return acc


cdef double _direct_resid(const double[:, ::1] A, double[:, ::1] U,
                          double[:, ::1] V) noexcept nogil:
    # sum of (A - U V^T)^2, exact up to rounding of each entry
    cdef Py_ssize_t nr = A.shape[0], nc = A.shape[1], K = U.shape[1], i, j, k
    cdef double acc = 0.0, r
    for i in range(nr):
        for j in range(nc):
            r = A[i, j]
            for k in range(K):
                r -= U[i, k] * V[j, k]
            acc += r * r
    return acc


cdef void _scale_rows(double[:, ::1] X, double[:, ::1] num, double[:, ::1] G,
                      double[:, ::1] S, bint has_s, double c_t, double m,
                      double shift, double eps, double[::1] den_row) noexcept nogil:
    # X <- X * (num + c_t S) / (X G + c_t m X + shift + eps), row by row
    cdef Py_ssize_t n = X.shape[0], K = X.shape[1], i, k, l
    cdef double acc, top
    for i in range(n):
        for k in range(K):
            acc = 0.0
            for l in range(K):
                acc += X[i, l] * G[l, k]
            if has_s:
                den_row[k] = acc + c_t * m * X[i, k] + eps
            else:
                den_row[k] = acc + shift + eps
        for k in range(K):
            if has_s:
                top = num[i, k] + c_t * S[i, k]
            else:
                top = num[i, k]
            X[i, k] = X[i, k] * top / den_row[k]


cdef class _Work:
    cdef double[:, ::1] AV, AtU, G, H
    cdef double[::1] den_row

    def __init__(self, Py_ssize_t nr, Py_ssize_t nc, Py_ssize_t K):
        self.AV = np.zeros((nr, K))
        self.AtU = np.zeros((nc, K))
        self.G = np.empty((K, K))
        self.H = np.empty((K, K))
        self.den_row = np.empty(K)


cdef double _sweep(const double[:, ::1] A, double[:, ::1] U, double[:, ::1] V,
                   double[:, ::1] S, bint has_s, double c_t, double m, double c_s,
                   double eps, double sq_norm, _Work w, double* l1) noexcept nogil:
    _times(A, V, w.AV)
    _gram(V, w.G)
    _scale_rows(U, w.AV, w.G, S, has_s, c_t, m, 0.0, eps, w.den_row)
    _times_t(A, U, w.AtU)
    _gram(U, w.H)
    _scale_rows(V, w.AtU, w.H, S, False, 0.0, 0.0, c_s, eps, w.den_row)
    l1[0] = _sum(V)
    return _direct_resid(A, U, V)


def _check(A, U, V):
    if U.shape[0] != A.shape[0] or V.shape[0] != A.shape[1] or V.shape[1] != U.shape[1]:
        raise ValueError("factor shapes do not conform with the data block")


def mu_sweep(const double[:, ::1] A, double[:, ::1] U, double[:, ::1] V, S,
             double c_t, double m, double c_s, double eps, double sq_norm):
    """One U-then-V multiplicative sweep, in place.

    Returns ``(residual, l1)``: the squared Frobenius residual after the sweep
    and the sum of the entries of the updated ``V``.
    """
    _check(A, U, V)
    cdef bint has_s = S is not None
    cdef double[:, ::1] Sv = S if has_s else U
    if has_s and (Sv.shape[0] != U.shape[0] or Sv.shape[1] != U.shape[1]):
        raise ValueError("neighbour sum has the wrong shape")
    cdef _Work w = _Work(A.shape[0], A.shape[1], U.shape[1])
    cdef double l1 = 0.0, resid
    with nogil:
        resid = _sweep(A, U, V, Sv, has_s, c_t, m, c_s, eps, sq_norm, w, &l1)
    return resid, l1


def mu_fit(const double[:, ::1] A, double[:, ::1] U, double[:, ::1] V,
           double c_s, double eps, double tol, Py_ssize_t max_iter, double sq_norm,
           double lambda_s):
    """Sweep one uncoupled block until the relative objective change is below
    ``tol``. Returns ``(objective, iterations, converged)``."""
    _check(A, U, V)
    cdef _Work w = _Work(A.shape[0], A.shape[1], U.shape[1])
    cdef double l1 = 0.0, f = 0.0, prev = 0.0
    cdef Py_ssize_t it = 0
    cdef bint conv = False
    with nogil:
        while it < max_iter:
            it += 1
            f = _sweep(A, U, V, U, False, 0.0, 0.0, c_s, eps, sq_norm, w, &l1)
            f = f + lambda_s * l1
            if not isfinite(f):
                break
            if it > 1:
                if fabs(prev - f) / (prev if prev > 1e-30 else 1e-30) < tol:
                    conv = True
                    break
            prev = f
    return f, it, conv


def mu_solve_factor(const double[:, ::1] B, double[:, ::1] F, double[:, ::1] X,
                    double eps, double tol, Py_ssize_t max_iter, double sq_norm):
    """Minimize ``||B - X F^T||^2`` over ``X >= 0`` with ``F`` fixed, in place.

    Returns ``(residual, iterations, converged)``.
    """
    if X.shape[0] != B.shape[0] or F.shape[0] != B.shape[1] or F.shape[1] != X.shape[1]:
        raise ValueError("factor shapes do not conform with the data block")
    cdef Py_ssize_t K = X.shape[1]
    cdef double[:, ::1] BF = np.zeros((B.shape[0], K))
    cdef double[:, ::1] G = np.empty((K, K))
    cdef double[:, ::1] H = np.empty((K, K))
    cdef double[::1] den_row = np.empty(K)
    cdef double f = 0.0, prev = 0.0
    cdef Py_ssize_t it = 0
    cdef bint conv = False
    with nogil:
        _times(B, F, BF)
        _gram(F, G)
        while it < max_iter:
            it += 1
            _scale_rows(X, BF, G, X, False, 0.0, 0.0, 0.0, eps, den_row)
            _gram(X, H)
            f = sq_norm - 2.0 * _inner(BF, X) + _inner(H, G)
            if f < 0.0:
                f = 0.0
            if not isfinite(f):
                break
            if it > 1:
                if fabs(prev - f) / (prev if prev > 1e-30 else 1e-30) < tol:
                    conv = True
                    break
            prev = f
    return f, it, conv
