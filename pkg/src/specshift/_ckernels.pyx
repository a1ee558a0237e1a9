# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernel core: Bessel K and pairwise kernel matrices.

Mirror of ``_pykernels`` (same algorithms, same branch thresholds) compiled
for speed; ``_backend`` picks whichever is importable.
"""

from libc.math cimport (M_PI, cosh, exp, fabs, floor, log, sin, sinh, sqrt,
                        tgamma)

import numpy as np

cdef double _EPS = 1.0e-16
cdef int _MAXIT = 20000

cdef double _A1 = 0.5772156649015328606065
cdef double _A3 = -0.042002635034095235529
cdef double _A5 = -0.04219773455554433675


cdef inline double _gam1(double mu, double gampl, double gammi) nogil:
    cdef double mu2
    if fabs(mu) >= 1.0e-3:
        return (gammi - gampl) / (2.0 * mu)
    mu2 = mu * mu
    return -(_A1 + mu2 * (_A3 + mu2 * _A5))


cdef double _besselk_half(double nu, double x) nogil:
    cdef int n = <int>(nu)  # nu = n + 1/2 exactly
    cdef double term = 1.0
    cdef double s = 1.0
    cdef int k
    for k in range(n):
        term *= (n + k + 1) * (n - k) / ((k + 1) * 2.0 * x)
        s += term
    return sqrt(M_PI / (2.0 * x)) * exp(-x) * s


cdef double _besselk_general(double nu, double x) except -1.0 nogil:
    cdef int nl = <int>(nu + 0.5)
    cdef double mu = nu - nl
    cdef double mu2 = mu * mu
    cdef double xi = 1.0 / x
    cdef double xi2 = 2.0 * xi
    cdef double rkmu, rk1, rktemp
    cdef double x2, pimu, fact, d, e, fact2, gam1, gam2, gampl, gammi
    cdef double ff, summ, p, q, c, sum1, delt
    cdef double b, h, delh, q1, q2, a1, a, qnew, s, dels
    cdef int i
    cdef bint done
    if x <= 2.0:
        x2 = 0.5 * x
        pimu = M_PI * mu
        fact = pimu / sin(pimu) if fabs(pimu) > 1.0e-8 else 1.0
        d = -log(x2)
        e = mu * d
        fact2 = sinh(e) / e if fabs(e) > 1.0e-8 else 1.0
        gampl = 1.0 / tgamma(1.0 + mu)
        gammi = 1.0 / tgamma(1.0 - mu)
        gam1 = _gam1(mu, gampl, gammi)
        gam2 = (gammi + gampl) / 2.0
        ff = fact * (gam1 * cosh(e) + gam2 * fact2 * d)
        summ = ff
        e = exp(e)
        p = 0.5 * e / gampl
        q = 0.5 / (e * gammi)
        c = 1.0
        d = x2 * x2
        sum1 = p
        done = False
        for i in range(1, _MAXIT + 1):
            ff = (i * ff + p + q) / (i * i - mu2)
            c *= d / i
            p /= i - mu
            q /= i + mu
            delt = c * ff
            summ += delt
            sum1 += c * (p - i * ff)
            if fabs(delt) < fabs(summ) * _EPS:
                done = True
                break
        if not done:
            with gil:
                raise ArithmeticError("Bessel K series did not converge")
        rkmu = summ
        rk1 = sum1 * xi2
    else:
        b = 2.0 * (1.0 + x)
        d = 1.0 / b
        h = d
        delh = d
        q1 = 0.0
        q2 = 1.0
        a1 = 0.25 - mu2
        q = a1
        c = a1
        a = -a1
        s = 1.0 + q * delh
        done = False
        for i in range(2, _MAXIT + 1):
            a -= 2 * (i - 1)
            c = -a * c / i
            qnew = (q1 - b * q2) / a
            q1 = q2
            q2 = qnew
            q += c * qnew
            b += 2.0
            d = 1.0 / (b + a * d)
            delh = (b * d - 1.0) * delh
            h += delh
            dels = q * delh
            s += dels
            if fabs(dels / s) < _EPS:
                done = True
                break
        if not done:
            with gil:
                raise ArithmeticError("Bessel K continued fraction did not converge")
        h = a1 * h
        rkmu = sqrt(M_PI / (2.0 * x)) * exp(-x) / s
        rk1 = rkmu * (mu + x + 0.5 - h) * xi
    for i in range(nl):
        rktemp = (mu + i + 1) * xi2 * rk1 + rkmu
        rkmu = rk1
        rk1 = rktemp
    return rkmu


cdef double _besselk(double nu, double x) except -1.0 nogil:
    cdef double two
    if nu < 0.0:
        nu = -nu
    two = 2.0 * nu
    if two == floor(two) and (<long>two) % 2 == 1:
        return _besselk_half(nu, x)
    return _besselk_general(nu, x)


def besselk(double nu, double x):
    """Modified Bessel function of the second kind K_nu(x), x > 0."""
    if x <= 0.0:
        raise ValueError("besselk requires x > 0")
    return _besselk(nu, x)


def besselk_general(double nu, double x):
    """Series/continued-fraction path, bypassing the half-integer forms."""
    return _besselk_general(nu, x)


cdef inline double _matern(double r, double nu, double h, double pref) nogil:
    cdef double t
    if r < 1.0e-14 * h:
        return 1.0
    t = sqrt(2.0 * nu) * r / h
    return pref * t**nu * _besselk(nu, t)


def matern_scalar(double r, double nu, double h):
    """Matern correlation at distance r (1 exactly within 1e-14 h of 0)."""
    return _matern(r, nu, h, 2.0 ** (1.0 - nu) / tgamma(nu))


cdef inline double _sqd(double[:, ::1] X, double[:, ::1] Y, Py_ssize_t i,
                        Py_ssize_t j, Py_ssize_t d) nogil:
    cdef double acc = 0.0
    cdef double diff
    cdef Py_ssize_t k
    for k in range(d):
        diff = X[i, k] - Y[j, k]
        acc += diff * diff
    return acc


def gaussian_cross(double[:, ::1] X, double[:, ::1] Y, double h):
    """exp(-|x_i - y_j|^2 / 2h^2) for all pairs; shape (n, m)."""
    cdef Py_ssize_t n = X.shape[0], m = Y.shape[0], d = X.shape[1]
    cdef double inv = -1.0 / (2.0 * h * h)
    out_arr = np.empty((n, m))
    cdef double[:, ::1] out = out_arr
    cdef Py_ssize_t i, j
    with nogil:
        for i in range(n):
            for j in range(m):
                out[i, j] = exp(inv * _sqd(X, Y, i, j, d))
    return out_arr


def gaussian_gram(double[:, ::1] X, double h):
    """Symmetric Gaussian Gram: upper triangle computed, mirrored, diag = 1."""
    cdef Py_ssize_t n = X.shape[0], d = X.shape[1]
    cdef double inv = -1.0 / (2.0 * h * h)
    out_arr = np.empty((n, n))
    cdef double[:, ::1] out = out_arr
    cdef double v
    cdef Py_ssize_t i, j
    with nogil:
        for i in range(n):
            out[i, i] = 1.0
            for j in range(i + 1, n):
                v = exp(inv * _sqd(X, X, i, j, d))
                out[i, j] = v
                out[j, i] = v
    return out_arr


def matern_cross(double[:, ::1] X, double[:, ::1] Y, double nu, double h):
    """Matern kernel matrix for all (row, column) pairs; shape (n, m)."""
    cdef Py_ssize_t n = X.shape[0], m = Y.shape[0], d = X.shape[1]
    cdef double pref = 2.0 ** (1.0 - nu) / tgamma(nu)
    out_arr = np.empty((n, m))
    cdef double[:, ::1] out = out_arr
    cdef Py_ssize_t i, j
    with nogil:
        for i in range(n):
            for j in range(m):
                out[i, j] = _matern(sqrt(_sqd(X, Y, i, j, d)), nu, h, pref)
    return out_arr


def matern_gram(double[:, ::1] X, double nu, double h):
    """Symmetric Matern Gram: upper triangle computed, mirrored, diag = 1."""
    cdef Py_ssize_t n = X.shape[0], d = X.shape[1]
    cdef double pref = 2.0 ** (1.0 - nu) / tgamma(nu)
    out_arr = np.empty((n, n))
    cdef double[:, ::1] out = out_arr
    cdef double v
    cdef Py_ssize_t i, j
    with nogil:
        for i in range(n):
            out[i, i] = 1.0
            for j in range(i + 1, n):
                v = _matern(sqrt(_sqd(X, X, i, j, d)), nu, h, pref)
                out[i, j] = v
                out[j, i] = v
    return out_arr


def matern_vector(r, double nu, double h):
    """Matern values on a 1-D array of distances."""
    r_arr = np.ascontiguousarray(r, dtype=np.float64)
    cdef double[::1] rv = r_arr.ravel()
    out_arr = np.empty(rv.shape[0])
    cdef double[::1] out = out_arr
    cdef double pref = 2.0 ** (1.0 - nu) / tgamma(nu)
    cdef Py_ssize_t k
    with nogil:
        for k in range(rv.shape[0]):
            out[k] = _matern(rv[k], nu, h, pref)
    return out_arr.reshape(np.shape(r))
