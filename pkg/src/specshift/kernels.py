"""Stationary kernels (Gaussian, Matern), Bessel K, and Gram assembly.

All kernels are correlation-normalized: k(x, x) = 1.  The Matern family
needs the modified Bessel function of the second kind, which is provided
here (hand-rolled, see ``_pykernels``/``_ckernels``) rather than imported,
so the whole evaluation path is self-contained and testable.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _backend
from .errors import InputError

GAUSSIAN = "gaussian"
MATERN = "matern"


@dataclass(frozen=True)
class KernelSpec:
    """A stationary kernel family with its parameters.

    family : "gaussian" or "matern"
    bandwidth : length scale h > 0, in the units of the input coordinates
    nu : Matern smoothness parameter (> 0); None for Gaussian
    """

    family: str
    bandwidth: float = 0.2
    nu: float | None = None

    def __post_init__(self):
        fam = self.family.lower()
        if fam not in (GAUSSIAN, MATERN):
            raise InputError(f"unknown kernel family {self.family!r}")
        object.__setattr__(self, "family", fam)
        if not self.bandwidth > 0:
            raise InputError("bandwidth must be positive")
        if fam == MATERN:
            if self.nu is None or not self.nu > 0:
                raise InputError("Matern kernel requires nu > 0")
        elif self.nu is not None:
            raise InputError("nu is a Matern-only parameter")

    @classmethod
    def gaussian(cls, bandwidth: float = 0.2) -> "KernelSpec":
        return cls(GAUSSIAN, bandwidth)

    @classmethod
    def matern(cls, nu: float, bandwidth: float = 0.2) -> "KernelSpec":
        return cls(MATERN, bandwidth, nu)


@dataclass(frozen=True, eq=False)
class GramMatrix:
    """Symmetric kernel matrix with unit diagonal."""

    values: np.ndarray
    n: int


def _as_points(x, name="points") -> np.ndarray:
    pts = np.ascontiguousarray(x, dtype=float)
    if pts.ndim == 1:
        pts = pts.reshape(-1, 1)
    if pts.ndim != 2:
        raise InputError(f"{name} must be an (n, d) array")
    return pts


def gaussian_eval(x, y, h: float) -> float:
    """exp(-|x - y|^2 / 2h^2) for two points of equal dimension."""
    if not h > 0:
        raise InputError("h must be positive")
    xv = np.atleast_1d(np.asarray(x, dtype=float))
    yv = np.atleast_1d(np.asarray(y, dtype=float))
    if xv.shape != yv.shape:
        raise InputError("x and y must have the same dimension")
    d = xv - yv
    return float(np.exp(-float(d @ d) / (2.0 * h * h)))


def bessel_k(nu: float, x: float) -> float:
    """Modified Bessel function of the second kind K_nu(x).

    Relative error <= 1e-10 on nu in [0, 10], x in [1e-6, 50]; the
    K_nu = K_{-nu} symmetry is built in.  x <= 0 raises, as K diverges
    at the origin.
    """
    if not x > 0:
        raise InputError("bessel_k requires x > 0")
    return _backend.besselk(float(nu), float(x))


def matern_eval(x, y, nu: float, h: float) -> float:
    """Matern correlation 2^{1-nu}/Gamma(nu) (sqrt(2nu) r/h)^nu K_nu(sqrt(2nu) r/h).

    Returns exactly 1 at r = 0 (the continuous limit of the 0 * inf display).
    """
    if not h > 0:
        raise InputError("h must be positive")
    if not nu > 0:
        raise InputError("nu must be positive")
    xv = np.atleast_1d(np.asarray(x, dtype=float))
    yv = np.atleast_1d(np.asarray(y, dtype=float))
    if xv.shape != yv.shape:
        raise InputError("x and y must have the same dimension")
    r = float(np.sqrt(np.sum((xv - yv) ** 2)))
    return float(_backend.matern_scalar(r, float(nu), float(h)))


def gram(points, kernel: KernelSpec) -> GramMatrix:
    """Full kernel matrix of a point set; symmetric, unit diagonal.

    The upper triangle is computed once and mirrored so the eigensolver
    sees an exactly symmetric matrix.
    """
    pts = _as_points(points)
    n = pts.shape[0]
    if n < 1:
        raise InputError("gram requires at least one point")
    if kernel.family == GAUSSIAN:
        values = _backend.gaussian_gram(pts, kernel.bandwidth)
    else:
        values = _backend.matern_gram(pts, kernel.nu, kernel.bandwidth)
    return GramMatrix(values=values, n=n)


def pairwise(points_a, points_b, kernel: KernelSpec) -> np.ndarray:
    """Cross kernel matrix k(a_i, b_j); shape (len(a), len(b))."""
    A = _as_points(points_a, "points_a")
    B = _as_points(points_b, "points_b")
    if A.shape[1] != B.shape[1]:
        raise InputError("point sets differ in dimension")
    if kernel.family == GAUSSIAN:
        return _backend.gaussian_cross(A, B, kernel.bandwidth)
    return _backend.matern_cross(A, B, kernel.nu, kernel.bandwidth)
