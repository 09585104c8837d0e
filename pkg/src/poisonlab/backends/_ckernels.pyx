# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels: pairwise-distance bandwidth, fused KDE
likelihood/gradient, and the full prototype-coefficient ascent loop.

Mirrors numpy_backend exactly (same update rules and stop condition)."""

import numpy as np

cimport numpy as cnp
from libc.math cimport exp, fabs, sqrt

cnp.import_array()


def mean_pairwise_distance(bank):
    cdef const double[:, ::1] B = np.ascontiguousarray(bank, dtype=np.float64)
    cdef Py_ssize_t n = B.shape[0], d = B.shape[1]
    cdef Py_ssize_t i, j, k
    cdef double acc = 0.0, d2, diff
    for i in range(n):
        for j in range(i + 1, n):
            d2 = 0.0
            for k in range(d):
                diff = B[i, k] - B[j, k]
                d2 += diff * diff
            acc += sqrt(d2)
    return acc / (n * (n - 1) / 2.0)


def mean_pairwise_squared_distance(bank):
    cdef const double[:, ::1] B = np.ascontiguousarray(bank, dtype=np.float64)
    cdef Py_ssize_t n = B.shape[0], d = B.shape[1]
    cdef Py_ssize_t i, j, k
    cdef double acc = 0.0, d2, diff
    for i in range(n):
        for j in range(i + 1, n):
            d2 = 0.0
            for k in range(d):
                diff = B[i, k] - B[j, k]
                d2 += diff * diff
            acc += d2
    return acc / (n * (n - 1) / 2.0)


cdef double _kde_eval(const double[:, ::1] bank, double h, const double[::1] x,
                      double[::1] grad_out, bint want_grad) noexcept:
    cdef Py_ssize_t n = bank.shape[0], d = bank.shape[1]
    cdef Py_ssize_t i, k
    cdef double p = 0.0, d2, diff, ker, scale
    if want_grad:
        for k in range(d):
            grad_out[k] = 0.0
    for i in range(n):
        d2 = 0.0
        for k in range(d):
            diff = x[k] - bank[i, k]
            d2 += diff * diff
        ker = exp(-d2 / h)
        p += ker
        if want_grad:
            for k in range(d):
                grad_out[k] += ker * (x[k] - bank[i, k])
    if want_grad:
        scale = -2.0 / (h * n)
        for k in range(d):
            grad_out[k] *= scale
    return p / n


def kde_likelihood(bank, double h, x):
    cdef const double[:, ::1] B = np.ascontiguousarray(bank, dtype=np.float64)
    cdef const double[::1] xv = np.ascontiguousarray(x, dtype=np.float64)
    cdef double[::1] dummy = None
    return _kde_eval(B, h, xv, dummy, False)


def kde_likelihood_grad(bank, double h, x):
    cdef const double[:, ::1] B = np.ascontiguousarray(bank, dtype=np.float64)
    cdef const double[::1] xv = np.ascontiguousarray(x, dtype=np.float64)
    grad = np.empty(B.shape[1], dtype=np.float64)
    cdef double[::1] gv = grad
    cdef double p = _kde_eval(B, h, xv, gv, True)
    return p, grad


def beta_ascent(protos, bank, double h, lb, ub, beta0, double alpha,
                double stop_threshold, long max_iters):
    cdef const double[:, ::1] P = np.ascontiguousarray(protos, dtype=np.float64)
    cdef const double[:, ::1] B = np.ascontiguousarray(bank, dtype=np.float64)
    cdef const double[::1] lo = np.ascontiguousarray(lb, dtype=np.float64)
    cdef const double[::1] hi = np.ascontiguousarray(ub, dtype=np.float64)
    beta_arr = np.array(beta0, dtype=np.float64)
    cdef double[::1] beta = beta_arr
    cdef Py_ssize_t k_protos = P.shape[0], d = P.shape[1]
    cdef Py_ssize_t i, j, t
    cdef double p, p_prev = 0.0, initial_p = 0.0, acc
    cdef long iterations = 0
    cdef bint hit_cap = True

    x = np.empty(d, dtype=np.float64)
    xc = np.empty(d, dtype=np.float64)
    grad = np.empty(d, dtype=np.float64)
    cdef double[::1] xv = x, xcv = xc, gv = grad

    for t in range(max_iters):
        for j in range(d):
            acc = 0.0
            for i in range(k_protos):
                acc += beta[i] * P[i, j]
            xv[j] = acc
            xcv[j] = min(max(acc, lo[j]), hi[j])
        p = _kde_eval(B, h, xcv, gv, True)
        for j in range(d):
            if xv[j] < lo[j] or xv[j] > hi[j]:
                gv[j] = 0.0
        for i in range(k_protos):
            acc = 0.0
            for j in range(d):
                acc += P[i, j] * gv[j]
            beta[i] += alpha * acc
        iterations = t + 1
        if t == 0:
            initial_p = p
        elif fabs(p - p_prev) <= stop_threshold:
            hit_cap = False
            break
        p_prev = p

    for j in range(d):
        acc = 0.0
        for i in range(k_protos):
            acc += beta[i] * P[i, j]
        xcv[j] = min(max(acc, lo[j]), hi[j])
    cdef double final_p = _kde_eval(B, h, xcv, gv, False)
    return beta_arr, int(iterations), final_p, initial_p, hit_cap
