"""Pure NumPy/Python kernel core.

This is the fallback twin of the compiled ``_ckernels`` extension: the same
algorithms, selected at import time by ``_backend`` when the extension is
unavailable or ``SPECSHIFT_FORCE_PURE=1`` is set.

The modified Bessel function of the second kind is evaluated with the
classical scheme: exact closed forms at half-integer order, a Temme-style
series for x <= 2, Steed's continued fraction for x > 2, and stable upward
recurrence in the order.  Reciprocal-gamma factors use ``math.gamma``
directly, with a short Taylor expansion guarding the mu -> 0 cancellation.
"""

import math

import numpy as np

_EPS = 1.0e-16
_MAXIT = 20000

# Taylor coefficients of 1/Gamma(1+z) around z=0 (DLMF 5.7.1 shifted by one);
# only the odd ones enter the small-mu limit of the Temme gamma difference.
_A1 = 0.5772156649015328606065
_A3 = -0.042002635034095235529
_A5 = -0.04219773455554433675


def _temme_gammas(mu):
    """gam1 = (1/G(1-mu) - 1/G(1+mu)) / (2 mu), gam2, and the reciprocals."""
    gampl = 1.0 / math.gamma(1.0 + mu)
    gammi = 1.0 / math.gamma(1.0 - mu)
    if abs(mu) >= 1.0e-3:
        gam1 = (gammi - gampl) / (2.0 * mu)
    else:
        mu2 = mu * mu
        gam1 = -(_A1 + mu2 * (_A3 + mu2 * _A5))
    gam2 = (gammi + gampl) / 2.0
    return gam1, gam2, gampl, gammi


def _besselk_half(nu, x):
    """K_{n+1/2}(x) = sqrt(pi/2x) e^{-x} sum_k (n+k)! / (k! (n-k)! (2x)^k)."""
    n = int(round(nu - 0.5))
    term = 1.0
    s = 1.0
    for k in range(n):
        term *= (n + k + 1) * (n - k) / ((k + 1) * 2.0 * x)
        s += term
    return math.sqrt(math.pi / (2.0 * x)) * math.exp(-x) * s


def besselk_general(nu, x):
    """Series/continued-fraction path for K_nu, any nu >= 0, x > 0.

    Exposed separately so tests can drive it at half-integer orders, where
    ``besselk`` itself would dispatch to the closed form.
    """
    nl = int(nu + 0.5)
    mu = nu - nl
    mu2 = mu * mu
    xi = 1.0 / x
    xi2 = 2.0 * xi
    if x <= 2.0:
        # Temme's series for K_mu and K_{mu+1} near the origin.
        x2 = 0.5 * x
        pimu = math.pi * mu
        fact = pimu / math.sin(pimu) if abs(pimu) > 1.0e-8 else 1.0
        d = -math.log(x2)
        e = mu * d
        fact2 = math.sinh(e) / e if abs(e) > 1.0e-8 else 1.0
        gam1, gam2, gampl, gammi = _temme_gammas(mu)
        ff = fact * (gam1 * math.cosh(e) + gam2 * fact2 * d)
        summ = ff
        e = math.exp(e)
        p = 0.5 * e / gampl
        q = 0.5 / (e * gammi)
        c = 1.0
        d = x2 * x2
        sum1 = p
        for i in range(1, _MAXIT + 1):
            ff = (i * ff + p + q) / (i * i - mu2)
            c *= d / i
            p /= i - mu
            q /= i + mu
            delt = c * ff
            summ += delt
            sum1 += c * (p - i * ff)
            if abs(delt) < abs(summ) * _EPS:
                break
        else:
            raise ArithmeticError("Bessel K series did not converge")
        rkmu = summ
        rk1 = sum1 * xi2
    else:
        # Steed's continued fraction CF2 for K_mu, K_{mu+1}.
        b = 2.0 * (1.0 + x)
        d = 1.0 / b
        h = delh = d
        q1 = 0.0
        q2 = 1.0
        a1 = 0.25 - mu2
        q = c = a1
        a = -a1
        s = 1.0 + q * delh
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
            if abs(dels / s) < _EPS:
                break
        else:
            raise ArithmeticError("Bessel K continued fraction did not converge")
        h = a1 * h
        rkmu = math.sqrt(math.pi / (2.0 * x)) * math.exp(-x) / s
        rk1 = rkmu * (mu + x + 0.5 - h) * xi
    for i in range(nl):
        rktemp = (mu + i + 1) * xi2 * rk1 + rkmu
        rkmu = rk1
        rk1 = rktemp
    return rkmu


def besselk(nu, x):
    """Modified Bessel function of the second kind K_nu(x), x > 0.

    Accepts any real order via the K_nu = K_{-nu} symmetry.
    """
    if x <= 0.0:
        raise ValueError("besselk requires x > 0")
    nu = abs(nu)
    two = 2.0 * nu
    if two == math.floor(two) and int(two) % 2 == 1:
        return _besselk_half(nu, x)
    return besselk_general(nu, x)


def matern_scalar(r, nu, h):
    """Matern correlation 2^{1-nu}/Gamma(nu) (sqrt(2 nu) r/h)^nu K_nu(...)."""
    if r < 1.0e-14 * h:
        return 1.0
    t = math.sqrt(2.0 * nu) * r / h
    return 2.0 ** (1.0 - nu) / math.gamma(nu) * t**nu * besselk(nu, t)


def _sqdist(X, Y):
    """Exact pairwise squared distances via explicit differences."""
    if X.shape[1] == 1:
        d = X[:, 0][:, None] - Y[:, 0][None, :]
        return d * d
    diff = X[:, None, :] - Y[None, :, :]
    return np.einsum("ijk,ijk->ij", diff, diff)


def gaussian_cross(X, Y, h):
    """exp(-|x_i - y_j|^2 / 2h^2) for all pairs; shape (n, m)."""
    return np.exp(_sqdist(X, Y) / (-2.0 * h * h))


def gaussian_gram(X, h):
    """Symmetric Gaussian Gram: upper triangle computed, mirrored, diag = 1."""
    n = X.shape[0]
    full = np.exp(_sqdist(X, X) / (-2.0 * h * h))
    upper = np.triu(full, 1)
    return upper + upper.T + np.eye(n)


def matern_cross(X, Y, nu, h):
    """Matern kernel matrix for all (row, column) pairs; shape (n, m)."""
    r = np.sqrt(_sqdist(X, Y))
    out = np.empty_like(r)
    flat_r = r.ravel()
    flat_o = out.ravel()
    for k in range(flat_r.size):
        flat_o[k] = matern_scalar(flat_r[k], nu, h)
    return out

def matern_gram(X, nu, h):
    """Symmetric Matern Gram: upper triangle computed, mirrored, diag = 1."""
    n = X.shape[0]
    r = np.sqrt(_sqdist(X, X))
    out = np.eye(n)
    for i in range(n):
        for j in range(i + 1, n):
            v = matern_scalar(r[i, j], nu, h)
            out[i, j] = v
            out[j, i] = v
    return out


def matern_vector(r, nu, h):
    """Matern values on a 1-D array of distances."""
    r = np.asarray(r, dtype=float)
    out = np.empty(r.shape)
    flat_r = r.ravel()
    flat_o = out.ravel()
    for k in range(flat_r.size):
        flat_o[k] = matern_scalar(flat_r[k], nu, h)
    return out
