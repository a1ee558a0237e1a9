"""Spectral-filter regression on the eigendecomposition of the Gram matrix.

An estimator is f_hat = phi_lambda(T_n) g_n with T_n the scaled Gram G/n.
In dual coordinates that is

    alpha = (1/n) U phi_lambda(Lam) U^T y,      f_hat(x) = k(x, .)^T alpha,

where (U, Lam) diagonalizes G/n and eigenvalues are clamped to [0, inf)
before the filter is applied (tiny negatives are eigensolver round-off).
For the Tikhonov filter this reduces algebraically to the classical ridge
solve alpha = (G + n lambda I)^{-1} y, which ``krr_direct_solve`` computes
by Cholesky factorization as an independent cross-check path.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .data import Dataset
from .errors import InputError, NumericalError
from .kernels import KernelSpec, gram, pairwise

KRR = "krr"
GRADIENT_FLOW = "gf"
KPCR = "kpcr"

_KINDS = {
    "krr": KRR,
    "tikhonov": KRR,
    "gf": GRADIENT_FLOW,
    "gradientflow": GRADIENT_FLOW,
    "gradient-flow": GRADIENT_FLOW,
    "kpcr": KPCR,
    "cutoff": KPCR,
}

#: Declared qualification tau per filter kind (inf = arbitrary).
QUALIFICATION = {KRR: 1.0, GRADIENT_FLOW: math.inf, KPCR: math.inf}


def normalize_kind(kind: str) -> str:
    try:
        return _KINDS[kind.lower()]
    except (KeyError, AttributeError):
        raise InputError(f"unknown filter kind {kind!r}") from None


@dataclass(frozen=True)
class FilterSpec:
    """A regularization filter phi_lambda with qualification metadata.

    kind : "krr" (Tikhonov), "gf" (gradient flow), or "kpcr" (spectral
        cut-off); a few common aliases are accepted.
    lam : regularization parameter lambda > 0.

    Constants from the filter definition: all three kinds have E = 1;
    KRR has qualification tau = 1 with F_tau = 1, GF has arbitrary
    qualification with F_tau = (tau/e)^tau, KPCR has arbitrary
    qualification with F_tau = 1.
    """

    kind: str
    lam: float

    def __post_init__(self):
        object.__setattr__(self, "kind", normalize_kind(self.kind))
        if not self.lam > 0:
            raise InputError("lambda must be positive")

    @property
    def qualification(self) -> float:
        return QUALIFICATION[self.kind]

    @property
    def error_constant(self) -> float:
        """E in filter condition (sup of |u^beta phi(u)| lambda^{1-beta})."""
        return 1.0

    def residual_constant(self, tau: float = 1.0) -> float:
        """F_tau in the residual condition, for qualification order tau."""
        if self.kind == GRADIENT_FLOW:
            return (tau / math.e) ** tau
        return 1.0


@dataclass(frozen=True, eq=False)
class FittedModel:
    """Training inputs, dual coefficients, and the kernel: a predictor."""

    train_points: np.ndarray
    dual_coeffs: np.ndarray
    kernel: KernelSpec

    def __post_init__(self):
        if self.train_points.shape[0] != self.dual_coeffs.shape[0]:
            raise InputError("one dual coefficient per training point required")

    def __call__(self, points) -> np.ndarray:
        return predict(self, points)


def filter_apply(kind: str, lam: float, z):
    """Evaluate phi_lambda on a nonnegative scalar or array.

    KRR: 1/(z + lambda).  GF: (1 - exp(-z/lambda))/z, with the removable
    singularity filled by a two-term expansion (1/lambda)(1 - z/(2 lambda))
    for z/lambda < 1e-8.  KPCR: 1/z for z >= lambda (tie included), else 0.
    """
    kind = normalize_kind(kind)
    if not lam > 0:
        raise InputError("lambda must be positive")
    z_arr = np.asarray(z, dtype=float)
    if np.any(z_arr < 0):
        raise InputError("filter argument must be nonnegative")
    scalar = z_arr.ndim == 0
    z_arr = np.atleast_1d(z_arr)
    if kind == KRR:
        out = 1.0 / (z_arr + lam)
    elif kind == GRADIENT_FLOW:
        small = z_arr / lam < 1.0e-8
        out = np.empty_like(z_arr)
        zs = z_arr[small]
        out[small] = (1.0 - zs / (2.0 * lam)) / lam
        zb = z_arr[~small]
        out[~small] = -np.expm1(-zb / lam) / zb
    else:
        out = np.zeros_like(z_arr)
        keep = z_arr >= lam
        out[keep] = 1.0 / z_arr[keep]
    return float(out[0]) if scalar else out


def lambda_schedule(n: int, m: float, d: int, C: float) -> float:
    """exp(-C n^{2/(2m+d)}), clamped below at 1e-300.

    The exponential schedule realizes log(1/lambda) ~ n^{2/(2m+d)}; the
    clamp keeps lambda strictly positive when the exponent underflows.
    """
    if n < 1:
        raise InputError("n must be >= 1")
    if not C > 0:
        raise InputError("C must be positive")
    if not m > d / 2:
        raise InputError("smoothness m must exceed d/2")
    lam = math.exp(-C * float(n) ** (2.0 / (2.0 * m + d)))
    return max(lam, 1.0e-300)


def _clamped_eigh(G: np.ndarray, n: int):
    try:
        eig, U = np.linalg.eigh(G / n)
    except np.linalg.LinAlgError as exc:
        diag = {
            "n": n,
            "max_abs_entry": float(np.max(np.abs(G))),
            "trace": float(np.trace(G)),
        }
        raise NumericalError("eigendecomposition failed", diag) from exc
    return np.maximum(eig, 0.0), U


def spectral_fit(data: Dataset, kernel: KernelSpec, filt: FilterSpec) -> FittedModel:
    """Fit by applying the filter to the spectrum of G/n."""
    if data.n < 1:
        raise InputError("need at least one observation")
    G = gram(data.x, kernel).values
    eig, U = _clamped_eigh(G, data.n)
    phi = filter_apply(filt.kind, filt.lam, eig)
    alpha = U @ (phi * (U.T @ data.y)) / data.n
    return FittedModel(train_points=data.x, dual_coeffs=alpha, kernel=kernel)


def krr_direct_solve(data: Dataset, kernel: KernelSpec, lam: float) -> FittedModel:
    """Solve (G + n lambda I) alpha = y by Cholesky; no eigendecomposition.

    Independent of the spectral path on purpose: the two must agree for the
    KRR filter, and that agreement is one of the package's acceptance gates.
    """
    if not lam > 0:
        raise InputError("lambda must be positive")
    if data.n < 1:
        raise InputError("need at least one observation")
    G = gram(data.x, kernel).values
    A = G + data.n * lam * np.eye(data.n)
    try:
        cho = scipy.linalg.cho_factor(A, lower=True)
        alpha = scipy.linalg.cho_solve(cho, data.y)
    except scipy.linalg.LinAlgError as exc:
        diag = {"n": data.n, "lambda": lam, "shift": data.n * lam}
        raise NumericalError("ridge system solve failed", diag) from exc
    return FittedModel(train_points=data.x, dual_coeffs=alpha, kernel=kernel)


def predict(model: FittedModel, points) -> np.ndarray:
    """f_hat at each query point: K_cross @ alpha."""
    pts = np.ascontiguousarray(points, dtype=float)
    if pts.ndim == 1:
        pts = pts.reshape(-1, 1)
    if pts.shape[1] != model.train_points.shape[1]:
        raise InputError("query dimension differs from training dimension")
    K = pairwise(pts, model.train_points, model.kernel)
    return K @ model.dual_coeffs
