"""Synthetic truths (Gaussian-process paths), noise, and shift scenarios.

Sample paths of a Matern-kernel GP on an equispaced grid play the role of
regression truths of prescribed Sobolev order m (via nu = m + 0.01), with a
natural cubic spline defining evaluation between grid nodes.  A shift
scenario pairs a source truth f_P with a shift f_delta rescaled so that the
squared-norm ratio ||f_delta||^2 / ||f_P||^2 hits a requested xi exactly.

The grid Gram is Toeplitz (stationary kernel, equispaced nodes), so only
its first row is ever evaluated, and the Cholesky factor is cached per
(nu, h, n_grid) — the noise vector z is the only per-seed quantity.
"""

from __future__ import annotations

import threading
from collections import OrderedDict
from dataclasses import dataclass, replace

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.linalg import toeplitz

from . import _backend
from .data import Dataset
from .errors import ConfigError, InputError, NumericalError
from .quadrature import simpson_integral
from .transfer import OFFSET, TransformPair


@dataclass(frozen=True, eq=False)
class TruthFunction:
    """A function on [0, 1]: spline through anchor values, times a scale."""

    anchor_grid: np.ndarray
    anchor_values: np.ndarray
    spline: CubicSpline
    nominal_m: float
    scale: float = 1.0

    def __call__(self, x):
        xv = np.asarray(x, dtype=float)
        scalar = xv.ndim == 0
        pts = np.atleast_1d(xv).ravel()
        vals = self.spline(pts)
        # The final spline piece reproduces the last anchor only to round-off,
        # so snap arguments that are bitwise equal to an anchor node.
        idx = np.minimum(np.searchsorted(self.anchor_grid, pts),
                         self.anchor_grid.shape[0] - 1)
        hit = self.anchor_grid[idx] == pts
        if np.any(hit):
            vals = np.where(hit, self.anchor_values[idx], vals)
        out = self.scale * vals
        return float(out[0]) if scalar else out

    def scaled(self, factor: float) -> "TruthFunction":
        """Same path with all values multiplied by ``factor``."""
        return replace(self, scale=self.scale * factor)

    def norm_squared(self) -> float:
        """Simpson estimate of the squared L2 norm on the anchor grid."""
        v = self.scale * self.anchor_values
        return simpson_integral(v * v, float(self.anchor_grid[0]),
                                float(self.anchor_grid[-1]))


@dataclass(frozen=True, eq=False)
class ShiftScenario:
    """Source truth, scaled shift, and the sampling plan for one cell."""

    f_P: TruthFunction
    f_delta: TruthFunction
    xi_target: float
    noise_sd: float = 0.5
    n_P: int = 0
    n_Q: int = 0

    def realized_xi(self) -> float:
        return self.f_delta.norm_squared() / self.f_P.norm_squared()

    def f_Q(self, x):
        """The target regression function f_P + f_delta."""
        return self.f_P(x) + self.f_delta(x)


_chol_lock = threading.Lock()
_chol_cache: OrderedDict = OrderedDict()
_CHOL_CACHE_MAX = 4
_JITTERS = (1.0e-10, 1.0e-9, 1.0e-8, 1.0e-7, 1.0e-6)


def _grid_cholesky(nu: float, h: float, n_grid: int) -> np.ndarray:
    """Lower Cholesky factor of the Matern Gram on the equispaced grid."""
    key = (float(nu), float(h), int(n_grid))
    with _chol_lock:
        if key in _chol_cache:
            _chol_cache.move_to_end(key)
            return _chol_cache[key]
        lags = np.arange(n_grid) / (n_grid - 1)
        row = _backend.matern_vector(lags, nu, h)
        M = toeplitz(row)
        L = None
        for jitter in _JITTERS:
            try:
                L = np.linalg.cholesky(M + jitter * np.eye(n_grid))
                break
            except np.linalg.LinAlgError:
                continue
        if L is None:
            raise NumericalError(
                "grid covariance is not positive definite",
                {"nu": nu, "h": h, "n_grid": n_grid, "max_jitter": _JITTERS[-1]},
            )
        _chol_cache[key] = L
        while len(_chol_cache) > _CHOL_CACHE_MAX:
            _chol_cache.popitem(last=False)
        return L


def gp_sample_path(nu: float, h: float, n_grid: int, seed: int) -> TruthFunction:
    """One GP sample path: values L z on the grid, natural spline off-grid.

    nu is the Matern smoothness of the covariance (use nu = m + 0.01 for a
    path of Sobolev order m); z ~ N(0, I) is drawn from the seed after the
    cached Cholesky factor is looked up, so the draw stream never depends
    on the jitter escalation.
    """
    if not nu > 0:
        raise InputError("nu must be positive")
    if not h > 0:
        raise InputError("h must be positive")
    if n_grid < 16:
        raise InputError("n_grid must be >= 16")
    L = _grid_cholesky(nu, h, n_grid)
    z = np.random.default_rng(seed).standard_normal(n_grid)
    values = L @ z
    grid = np.arange(n_grid) / (n_grid - 1)
    spline = CubicSpline(grid, values, bc_type="natural")
    return TruthFunction(anchor_grid=grid, anchor_values=values,
                         spline=spline, nominal_m=nu, scale=1.0)


def make_regression_data(truth, n: int, noise_sd: float, seed: int) -> Dataset:
    """x ~ U[0,1] i.i.d., y = truth(x) + noise_sd * eps, eps ~ N(0,1).

    Draw order (for replay): the n inputs first, then the n noise values.
    """
    if n < 1:
        raise InputError("n must be >= 1")
    if noise_sd < 0:
        raise InputError("noise_sd must be >= 0")
    rng = np.random.default_rng(seed)
    x = rng.random(n)
    eps = rng.standard_normal(n)
    y = truth(x) + noise_sd * eps
    return Dataset(x=x.reshape(-1, 1), y=y)


def make_shift_scenario(m_P: float, m_delta: float, xi_target: float,
                        n_P: int, n_Q: int, seeds, *, noise_sd: float = 0.5,
                        bandwidth: float = 0.2,
                        n_grid: int = 2001) -> ShiftScenario:
    """Draw f_P and f_delta and rescale f_delta to realize xi exactly.

    ``seeds`` is a (seed_P, seed_delta) pair.  A degenerate all-zero draw
    (probability zero, but guarded) advances its seed by one and retries.
    """
    if not xi_target > 0:
        raise InputError("xi_target must be positive")
    if n_grid % 2 == 0:
        raise InputError("n_grid must be odd so Simpson norms are defined")
    seed_P, seed_delta = (int(s) for s in seeds)
    f_P = _nonzero_path(m_P + 0.01, bandwidth, n_grid, seed_P)
    f_d = _nonzero_path(m_delta + 0.01, bandwidth, n_grid, seed_delta)
    factor = np.sqrt(xi_target * f_P.norm_squared() / f_d.norm_squared())
    return ShiftScenario(f_P=f_P, f_delta=f_d.scaled(float(factor)),
                         xi_target=xi_target, noise_sd=noise_sd,
                         n_P=n_P, n_Q=n_Q)


def _nonzero_path(nu, h, n_grid, seed):
    for attempt in range(64):
        f = gp_sample_path(nu, h, n_grid, seed + attempt)
        if f.norm_squared() > 0.0:
            return f
    raise NumericalError("could not draw a nonzero sample path",
                         {"nu": nu, "seed": seed})


def make_transfer_datasets(scenario: ShiftScenario, pair: TransformPair,
                           seed: int):
    """Source and target samples for one scenario; returns (source, target).

    Target labels follow y_Q = f_P(x_Q) + f_delta(x_Q) + noise, with target
    noise drawn independently of source noise.  Draw order (for replay):
    x_P, eps_P, x_Q, eps_Q.
    """
    if pair.kind != OFFSET:
        raise ConfigError("transfer data generation is defined for the offset pair")
    if scenario.n_P < 1 or scenario.n_Q < 1:
        raise InputError("scenario sample counts must be >= 1")
    rng = np.random.default_rng(seed)
    x_P = rng.random(scenario.n_P)
    eps_P = rng.standard_normal(scenario.n_P)
    x_Q = rng.random(scenario.n_Q)
    eps_Q = rng.standard_normal(scenario.n_Q)
    y_P = scenario.f_P(x_P) + scenario.noise_sd * eps_P
    y_Q = scenario.f_P(x_Q) + scenario.f_delta(x_Q) + scenario.noise_sd * eps_Q
    source = Dataset(x=x_P.reshape(-1, 1), y=y_P)
    target = Dataset(x=x_Q.reshape(-1, 1), y=y_Q)
    return source, target


def truth_to_text(truth: TruthFunction) -> str:
    """Line-oriented record form: metadata comment, then one x,value per line."""
    lines = [f"# nominal_m={truth.nominal_m!r} scale={truth.scale!r}"]
    for xg, v in zip(truth.anchor_grid, truth.anchor_values):
        lines.append(f"{xg:.17g},{v:.17g}")
    return "\n".join(lines) + "\n"


def truth_from_text(text: str) -> TruthFunction:
    """Inverse of truth_to_text; rebuilds the spline from the records."""
    nominal_m = None
    scale = 1.0
    xs, vs = [], []
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.strip()
        if not line:
            continue
        if line.startswith("#"):
            for tok in line[1:].split():
                if tok.startswith("nominal_m="):
                    nominal_m = float(tok.partition("=")[2])
                elif tok.startswith("scale="):
                    scale = float(tok.partition("=")[2])
            continue
        try:
            xtok, _, vtok = line.partition(",")
            xs.append(float(xtok))
            vs.append(float(vtok))
        except ValueError:
            raise InputError(f"line {lineno}: bad record {line!r}") from None
    if nominal_m is None:
        raise InputError("missing nominal_m metadata line")
    if len(xs) < 16:
        raise InputError("truth serialization needs >= 16 anchor records")
    grid = np.asarray(xs)
    values = np.asarray(vs)
    if np.any(np.diff(grid) <= 0):
        raise InputError("anchor grid must be strictly increasing")
    spline = CubicSpline(grid, values, bc_type="natural")
    return TruthFunction(anchor_grid=grid, anchor_values=values,
                         spline=spline, nominal_m=nominal_m, scale=scale)
