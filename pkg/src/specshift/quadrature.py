"""Composite Simpson quadrature on equispaced samples."""

from __future__ import annotations

import numpy as np

from .errors import InputError


def simpson_integral(f_values, a: float, b: float) -> float:
    """Composite Simpson estimate of the integral of f over [a, b].

    ``f_values`` holds f at N equispaced nodes including both endpoints;
    N must be odd (an even number of intervals) and >= 3.  Exact for
    polynomials up to degree 3.
    """
    vals = np.asarray(f_values, dtype=float).ravel()
    n = vals.shape[0]
    if n < 3 or n % 2 == 0:
        raise InputError("Simpson needs an odd number of nodes, >= 3")
    if not b > a:
        raise InputError("integration interval must have b > a")
    step = (b - a) / (n - 1)
    acc = vals[0] + vals[-1] + 4.0 * np.sum(vals[1:-1:2]) + 2.0 * np.sum(vals[2:-1:2])
    return float(acc * step / 3.0)
