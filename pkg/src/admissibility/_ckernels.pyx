# cython: language_level=3
"""Compiled inner loops.

Every function here has a line-for-line twin in ``_pykernels.py``; the two
are checked against each other in ``tests/test_kernels.py``.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport log

cnp.import_array()


def eprocess_scan(const cnp.uint8_t[:, ::1] xs, double theta0, double a, double b,
                  double log_threshold, const cnp.uint8_t[::1] monitor):
    cdef Py_ssize_t n_paths = xs.shape[0]
    cdef Py_ssize_t horizon = xs.shape[1]
    cdef Py_ssize_t i, t
    cdef double logv, logsup, p, s
    cdef double log_up = -log(theta0)
    cdef double log_down = -log(1.0 - theta0)
    cdef long first

    log_final = np.empty(n_paths, dtype=np.float64)
    log_sup = np.empty(n_paths, dtype=np.float64)
    first_cross = np.empty(n_paths, dtype=np.int64)
    cdef double[::1] lf = log_final
    cdef double[::1] ls = log_sup
    cdef cnp.int64_t[::1] fc = first_cross

    for i in range(n_paths):
        logv = 0.0
        logsup = 0.0
        s = 0.0
        first = -1
        for t in range(horizon):
            p = (s + a) / (t + a + b)
            if xs[i, t]:
                logv += log(p) + log_up
                s += 1.0
            else:
                logv += log(1.0 - p) + log_down
            if monitor[t]:
                if logv > logsup:
                    logsup = logv
                if first < 0 and logv >= log_threshold:
                    first = t + 1
        lf[i] = logv
        ls[i] = logsup
        fc[i] = first
    return log_final, log_sup, first_cross


def gaussian_eprocess_scan(const double[:, ::1] xs, double mu0, double sigma,
                           double tau, double log_threshold):
    cdef Py_ssize_t n_paths = xs.shape[0]
    cdef Py_ssize_t horizon = xs.shape[1]
    cdef Py_ssize_t i, t
    cdef double logv, logsup, total, mu_hat, x, d0, d1
    cdef double s2 = sigma * sigma
    cdef double t2 = tau * tau
    cdef long first

    log_final = np.empty(n_paths, dtype=np.float64)
    log_sup = np.empty(n_paths, dtype=np.float64)
    first_cross = np.empty(n_paths, dtype=np.int64)
    cdef double[::1] lf = log_final
    cdef double[::1] ls = log_sup
    cdef cnp.int64_t[::1] fc = first_cross

    for i in range(n_paths):
        logv = 0.0
        logsup = 0.0
        total = 0.0
        first = -1
        for t in range(horizon):
            mu_hat = (t2 * total + s2 * mu0) / (t * t2 + s2)
            x = xs[i, t]
            d0 = x - mu0
            d1 = x - mu_hat
            logv += (d0 * d0 - d1 * d1) / (2.0 * s2)
            total += x
            if logv > logsup:
                logsup = logv
            if first < 0 and logv >= log_threshold:
                first = t + 1
        lf[i] = logv
        ls[i] = logsup
        fc[i] = first
    return log_final, log_sup, first_cross


def defensive_run(const cnp.int8_t[::1] source, bint adversarial):
    cdef Py_ssize_t horizon = source.shape[0]
    cdef Py_ssize_t t
    cdef double d = 0.0
    cdef double p
    cdef cnp.int8_t x

    preds = np.empty(horizon, dtype=np.float64)
    outcomes = np.empty(horizon, dtype=np.int8)
    deficits = np.empty(horizon, dtype=np.float64)
    cdef double[::1] pv = preds
    cdef cnp.int8_t[::1] xv = outcomes
    cdef double[::1] dv = deficits

    for t in range(horizon):
        if d > 0.0:
            p = 1.0
        elif d < 0.0:
            p = 0.0
        else:
            p = 0.5
        if adversarial:
            x = 0 if p >= 0.5 else 1
        else:
            x = source[t]
        d += x - p
        pv[t] = p
        xv[t] = x
        dv[t] = d
    return preds, outcomes, deficits


def set_adversary_run(Py_ssize_t horizon, double alpha, double a, double b):
    cdef Py_ssize_t t
    cdef double s = 0.0
    cdef double p
    cdef bint has0, has1
    cdef cnp.int8_t x

    misses = np.empty(horizon, dtype=np.int8)
    cdef cnp.int8_t[::1] mv = misses

    for t in range(horizon):
        p = (s + a) / (t + a + b)
        has0 = not (p > 0.5 and p >= 1.0 - alpha)
        has1 = not (p < 0.5 and p <= alpha)
        if has0 and not has1:
            x = 1
        elif has1 and not has0:
            x = 0
        else:
            x = 1 if p >= 0.5 else 0
        mv[t] = (x == 1 and not has1) or (x == 0 and not has0)
        s += x
    return misses
