"""Two-phase hypothesis transfer: pre-train, transform, fit the shift, compose.

A TransformPair carries the data-side map g (labels -> intermediate labels)
and the model-side map G (shift fit + source fit -> target prediction),
with their Lipschitz constants derived from the parameters at construction.
``rahtl_fit`` wires the four steps together using the adaptive estimator in
both phases, with sub-seeds derived deterministically from one seed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .adaptive import AdaptiveConfig, adaptive_fit
from .data import Dataset
from .errors import ConfigError, InputError
from .kernels import KernelSpec
from .seeding import derive_seed
from .spectral import FittedModel, predict

OFFSET = "offset"
AFFINE = "affine"


@dataclass(frozen=True)
class TransformPair:
    """A (g, G) transformation pair with declared Lipschitz constants.

    Offset:  g(y, p) = y - p,              G(delta, p) = p + delta.
    Affine:  g(y, p) = (y - tau p)/(1-tau), G(delta, p) = (1-rho) p + rho delta.

    The round trip G(g(y, p), p) = y holds for every Offset pair and for
    Affine pairs with rho = 1 - tau.
    """

    kind: str
    tau: float = 0.0
    rho: float = 1.0
    lipschitz_G: float = field(init=False)
    lipschitz_g: float = field(init=False)

    def __post_init__(self):
        kind = self.kind.lower()
        if kind not in (OFFSET, AFFINE):
            raise ConfigError(f"unknown transform kind {self.kind!r}")
        object.__setattr__(self, "kind", kind)
        if kind == OFFSET:
            l_G = math.sqrt(2.0)
            l_g = 1.0
        else:
            if not 0.0 <= self.tau < 1.0:
                raise ConfigError("affine tau must lie in [0, 1)")
            l_G = math.sqrt(2.0) * max(abs(1.0 - self.rho), abs(self.rho))
            l_g = 1.0 / (1.0 - self.tau)
        object.__setattr__(self, "lipschitz_G", l_G)
        object.__setattr__(self, "lipschitz_g", l_g)

    @classmethod
    def offset(cls) -> "TransformPair":
        return cls(OFFSET)

    @classmethod
    def affine(cls, tau: float, rho: float) -> "TransformPair":
        return cls(AFFINE, tau, rho)


def transform_g(pair: TransformPair, y, p):
    """Data transformation: intermediate label from (label, source fit)."""
    if pair.kind == OFFSET:
        return y - p
    return (y - pair.tau * p) / (1.0 - pair.tau)


def transform_G(pair: TransformPair, delta, p):
    """Model transformation: target prediction from (shift fit, source fit)."""
    if pair.kind == OFFSET:
        return p + delta
    return (1.0 - pair.rho) * p + pair.rho * delta


@dataclass(frozen=True, eq=False)
class HtlResult:
    """Both fitted phases plus the transform that composes them."""

    source_model: FittedModel
    shift_model: FittedModel
    transform: TransformPair
    chosen_m_P: float
    chosen_m_delta: float
    chosen_lambda_P: float
    chosen_lambda_delta: float

    def __call__(self, points) -> np.ndarray:
        return htl_predict(self, points)


def rahtl_fit(source: Dataset, target: Dataset, kernel: KernelSpec,
              pair: TransformPair, cfg_P: AdaptiveConfig,
              cfg_delta: AdaptiveConfig, seed: int) -> HtlResult:
    """Pre-train on source, fit the shift on transformed target labels, compose.

    Step 1 fits f_P on the source sample; Step 2 builds intermediate labels
    g(y_Q, f_P(x_Q)) at the target inputs (no resampling); Step 3 fits the
    shift on those; Step 4 is deferred to prediction time via transform_G.
    """
    if source.n < 4 or target.n < 4:
        raise InputError("rahtl_fit needs n_P >= 4 and n_Q >= 4")
    fit_P = adaptive_fit(source, kernel, cfg_P,
                         derive_seed(seed, "pretrain-split"))
    p_at_target = predict(fit_P.model, target.x)
    y_delta = transform_g(pair, target.y, p_at_target)
    shift_data = Dataset(x=target.x, y=y_delta, domain=target.domain)
    fit_d = adaptive_fit(shift_data, kernel, cfg_delta,
                         derive_seed(seed, "finetune-split"))
    return HtlResult(
        source_model=fit_P.model,
        shift_model=fit_d.model,
        transform=pair,
        chosen_m_P=fit_P.chosen_m,
        chosen_m_delta=fit_d.chosen_m,
        chosen_lambda_P=fit_P.chosen_lambda,
        chosen_lambda_delta=fit_d.chosen_lambda,
    )


def htl_predict(result: HtlResult, points) -> np.ndarray:
    """Composed target prediction G(shift(x), source(x)) at each point."""
    p = predict(result.source_model, points)
    delta = predict(result.shift_model, points)
    return transform_G(result.transform, delta, p)
