"""Training/validation adaptive choice of the smoothness exponent.

The data are shuffled with a seeded permutation and prefix-split; one model
per candidate smoothness m is fitted on the training half with
lambda_m = exp(-C |D1|^{2/(2m+d)}), and the candidate with the smallest
mean squared prediction error on the held-out half (against the noisy
labels — the only observable quantity) wins.  Ties go to the smallest
candidate.  The candidate loop shares one eigendecomposition of the
training Gram, which is exactly what per-candidate refits would compute.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import Dataset
from .errors import InputError
from .kernels import KernelSpec, gram, pairwise
from .spectral import (FilterSpec, FittedModel, _clamped_eigh, filter_apply,
                       lambda_schedule, normalize_kind)


@dataclass(frozen=True)
class AdaptiveConfig:
    """Candidate grid and schedule parameters for adaptive_fit.

    candidates : smoothness values, sorted non-decreasing, all > d/2
        (duplicates are allowed; the first occurrence wins ties)
    C : schedule constant, shared by every candidate
    split_fraction : training share of the data (training size is
        floor(n * split_fraction) + 1)
    filter_kind : which spectral filter the per-candidate fits use
    """

    candidates: tuple[float, ...] = (1.0, 2.0, 3.0, 4.0, 5.0)
    C: float = 1.0
    split_fraction: float = 0.5
    filter_kind: str = "krr"

    def __post_init__(self):
        cand = tuple(float(c) for c in self.candidates)
        if not cand:
            raise InputError("candidate list must be nonempty")
        if any(b < a for a, b in zip(cand, cand[1:])):
            raise InputError("candidates must be sorted non-decreasing")
        object.__setattr__(self, "candidates", cand)
        if not self.C > 0:
            raise InputError("C must be positive")
        if not 0.0 < self.split_fraction < 1.0:
            raise InputError("split_fraction must lie in (0, 1)")
        object.__setattr__(self, "filter_kind", normalize_kind(self.filter_kind))


@dataclass(frozen=True, eq=False)
class AdaptiveFit:
    """Winning model plus the selected (m, lambda) and diagnostics."""

    model: FittedModel
    chosen_m: float
    chosen_lambda: float
    chosen_index: int
    validation_mse: tuple[float, ...]


def candidate_grid(n: int, d: int, m_min: float, m_max: float) -> list[float]:
    """Arithmetic candidate sequence with spacing max(1/ln n, 0.25).

    Endpoint-inclusive: m_max is always the last element even when the
    final step comes out shorter than the spacing.
    """
    if n < 3:
        raise InputError("n must be >= 3")
    if not m_min > d / 2:
        raise InputError("m_min must exceed d/2")
    if m_max < m_min:
        raise InputError("m_max must be >= m_min")
    step = max(1.0 / np.log(n), 0.25)
    out = []
    k = 0
    while True:
        m = m_min + k * step
        if m >= m_max - 1e-12:
            break
        out.append(m)
        k += 1
    out.append(m_max)
    return out


def split_indices(n: int, split_fraction: float, seed: int):
    """Seeded shuffle then prefix split; returns (train_idx, val_idx)."""
    n_train = int(np.floor(n * split_fraction)) + 1
    if n_train >= n:
        raise InputError("validation split is empty")
    perm = np.random.default_rng(seed).permutation(n)
    return perm[:n_train], perm[n_train:]


def adaptive_fit(data: Dataset, kernel: KernelSpec, config: AdaptiveConfig,
                 rng_seed: int) -> AdaptiveFit:
    """Fit every candidate on D1, keep the best validated on D2."""
    n = data.n
    if n < 4:
        raise InputError("adaptive_fit needs n >= 4")
    idx1, idx2 = split_indices(n, config.split_fraction, rng_seed)
    x1, y1 = data.x[idx1], data.y[idx1]
    x2, y2 = data.x[idx2], data.y[idx2]
    n1 = x1.shape[0]

    G1 = gram(x1, kernel).values
    eig, U = _clamped_eigh(G1, n1)
    Uty = U.T @ y1
    K_val = pairwise(x2, x1, kernel)

    best = None
    alphas = []
    errors = []
    for j, m in enumerate(config.candidates):
        lam = lambda_schedule(n1, m, data.d, config.C)
        phi = filter_apply(config.filter_kind, lam, eig)
        alpha = U @ (phi * Uty) / n1
        resid = K_val @ alpha - y2
        mse = float(resid @ resid) / resid.shape[0]
        alphas.append(alpha)
        errors.append(mse)
        if best is None or mse < errors[best]:
            best = j

    chosen_m = config.candidates[best]
    model = FittedModel(train_points=x1, dual_coeffs=alphas[best], kernel=kernel)
    return AdaptiveFit(
        model=model,
        chosen_m=chosen_m,
        chosen_lambda=lambda_schedule(n1, chosen_m, data.d, config.C),
        chosen_index=best,
        validation_mse=tuple(errors),
    )
