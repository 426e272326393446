# cython: language_level=3, boundscheck=False, wraparound=False, initializedcheck=False
"""Compiled likelihood and simulation kernels.

Function-for-function twin of :mod:`petevt._kernels_py`; the numeric loops
live in ``_kernels_impl.c``.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport exp, log

cnp.import_array()


cdef extern from "_kernels_impl.h":
    double pk_gpd_loglik_sum(const double *y, Py_ssize_t n, double scale, double xi) nogil
    void pk_frechet_transform(const double *y, Py_ssize_t n, double scale, double xi,
                              double lam, double *lz, double *logj, double *logd) nogil
    double pk_markov_period_loglik(const double *lz, const double *logj,
                                   const double *logd, Py_ssize_t n_exc,
                                   const double *pair_next, const double *n_cens,
                                   const double *weight, double alpha, double lz_u,
                                   Py_ssize_t n00) nogil
    double pk_invert_conditional(double target, double lz1, double alpha, double tol) nogil


cdef double _EMPTY_D[1]


cdef inline const double *_dptr(const double[::1] a):
    return &a[0] if a.shape[0] else _EMPTY_D


def gpd_loglik_sum(const double[::1] y, double scale, double xi):
    return pk_gpd_loglik_sum(_dptr(y), y.shape[0], scale, xi)


def frechet_transform(const double[::1] y, double scale, double xi, double lam):
    cdef Py_ssize_t n = y.shape[0]
    lz = np.empty(n)
    logj = np.empty(n)
    logd = np.empty(n)
    cdef double[::1] a = lz
    cdef double[::1] b = logj
    cdef double[::1] c = logd
    if n:
        pk_frechet_transform(&y[0], n, scale, xi, lam, &a[0], &b[0], &c[0])
    return lz, logj, logd


def markov_period_loglik(const double[::1] lz, const double[::1] logj,
                         const double[::1] logdens, const double[::1] pair_next,
                         const double[::1] n_cens, const double[::1] weight,
                         double alpha, double lz_u, Py_ssize_t n00):
    return pk_markov_period_loglik(_dptr(lz), _dptr(logj), _dptr(logdens),
                                   lz.shape[0], _dptr(pair_next), _dptr(n_cens),
                                   _dptr(weight), alpha, lz_u, n00)


def sample_logistic_chain(const double[::1] u, double alpha, double tol=1e-10):
    cdef Py_ssize_t t, n = u.shape[0]
    out_a = np.empty(n)
    cdef double[::1] out = out_a
    cdef double lz
    if n == 0:
        return out_a
    out[0] = -1.0 / log(u[0])
    with nogil:
        if alpha >= 1.0:
            for t in range(1, n):
                out[t] = -1.0 / log(u[t])
        else:
            lz = log(out[0])
            for t in range(1, n):
                lz = pk_invert_conditional(u[t], lz, alpha, tol)
                out[t] = exp(lz)
    return out_a
