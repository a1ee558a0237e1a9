"""Kernel and Bessel-K tests against independent oracles.

The frozen constants below were computed from the integral representation
K_nu(x) = \\int_0^inf exp(-x cosh t) cosh(nu t) dt with adaptive quadrature,
independently of the implementation under test.
"""

import math

import numpy as np
import pytest

from specshift import (InputError, KernelSpec, bessel_k, gaussian_eval, gram,
                       matern_eval, pairwise)
from specshift._backend import besselk_general

# (nu, x) -> K_nu(x), from quadrature of the integral representation
QUADRATURE_ORACLE = {
    (0.0, 1.0): 0.42102443824070829,
    (0.0, 0.5): 0.92441907122766587,
    (0.0, 2.0): 0.11389387274953341,
    (1.0, 1.0): 0.60190723019723469,
    (0.3, 0.7): 0.68956248975697498,
    (0.25, 2.0): 0.11537827684085673,
    (2.01, 1.002496882788171): 1.6357324650207596,
    (3.3, 4.2): 0.027823542640111557,
    (7.5, 0.001): 5.3558421376259501e+27,
}


def closed_form_half_integer(n: int, x: float) -> float:
    """K_{n+1/2}(x) = sqrt(pi/2x) e^{-x} sum_k (n+k)! / (k!(n-k)!(2x)^k)."""
    acc = 0.0
    for k in range(n + 1):
        acc += (math.factorial(n + k)
                / (math.factorial(k) * math.factorial(n - k) * (2.0 * x) ** k))
    return math.sqrt(math.pi / (2.0 * x)) * math.exp(-x) * acc


class TestBesselK:
    def test_frozen_quadrature_oracles(self):
        for (nu, x), expected in QUADRATURE_ORACLE.items():
            got = bessel_k(nu, x)
            assert abs(got - expected) / abs(expected) < 1e-10, (nu, x)

    def test_half_integer_closed_forms(self):
        """200 (nu, x) pairs against the finite closed-form sum."""
        xs = np.geomspace(1e-3, 40.0, 20)
        count = 0
        for n in range(10):
            nu = n + 0.5
            for x in xs:
                expected = closed_form_half_integer(n, float(x))
                got = bessel_k(nu, float(x))
                assert abs(got - expected) / abs(expected) < 1e-10, (nu, x)
                count += 1
        assert count == 200

    def test_general_path_at_half_integers(self):
        """The series+CF path agrees with the closed form when forced."""
        for n in (0, 1, 3, 7):
            for x in (0.02, 0.5, 1.9, 2.1, 15.0):
                expected = closed_form_half_integer(n, x)
                got = besselk_general(n + 0.5, x)
                assert abs(got - expected) / abs(expected) < 1e-9, (n, x)

    def test_three_term_recurrence(self):
        """K_{nu+1}(x) = K_{nu-1}(x) + (2 nu / x) K_nu(x)."""
        for nu in (0.3, 0.5, 1.0, 1.7, 2.5, 4.2, 8.8):
            for x in np.geomspace(1e-2, 30.0, 15):
                x = float(x)
                lhs = bessel_k(nu + 1.0, x)
                rhs = bessel_k(nu - 1.0, x) + (2.0 * nu / x) * bessel_k(nu, x)
                assert abs(lhs - rhs) / abs(lhs) < 1e-8, (nu, x)

    def test_order_symmetry(self):
        for nu in (0.2, 0.5, 1.3):
            for x in (0.4, 2.0, 9.0):
                assert bessel_k(-nu, x) == bessel_k(nu, x)

    def test_closed_form_spot_values(self):
        # K_{1/2}(2) = sqrt(pi/4) e^{-2}; K_{3/2}(1) = sqrt(pi/2) e^{-1} * 2
        np.testing.assert_allclose(bessel_k(0.5, 2.0),
                                   math.sqrt(math.pi / 4.0) * math.exp(-2.0),
                                   rtol=1e-13)
        np.testing.assert_allclose(bessel_k(1.5, 1.0),
                                   math.sqrt(math.pi / 2.0) * math.exp(-1.0) * 2.0,
                                   rtol=1e-13)
        np.testing.assert_allclose(bessel_k(0.5, 2.0), 0.11993777196806145,
                                   rtol=1e-12)
        np.testing.assert_allclose(bessel_k(1.5, 1.0), 0.9221370088957891,
                                   rtol=1e-12)

    def test_domain_error(self):
        with pytest.raises(InputError):
            bessel_k(1.0, 0.0)
        with pytest.raises(InputError):
            bessel_k(0.5, -2.0)

    def test_monotone_decreasing_in_x(self):
        xs = np.linspace(0.05, 20.0, 200)
        for nu in (0.0, 0.5, 1.7, 5.0):
            vals = np.array([bessel_k(nu, float(x)) for x in xs])
            assert np.all(np.diff(vals) < 0), nu


class TestMaternEval:
    def test_exponential_family_closed_forms(self):
        """nu = 1/2, 3/2, 5/2 reduce to exponential-polynomial products."""
        xs = np.linspace(0.0, 1.0, 41)
        r = np.abs(xs[:, None] - xs[None, :])
        h = 0.2
        s3, s5 = math.sqrt(3.0), math.sqrt(5.0)
        closed = {
            0.5: np.exp(-r / h),
            1.5: (1.0 + s3 * r / h) * np.exp(-s3 * r / h),
            2.5: (1.0 + s5 * r / h + 5.0 * r**2 / (3.0 * h * h))
                 * np.exp(-s5 * r / h),
        }
        for nu, expected in closed.items():
            got = pairwise(xs, xs, KernelSpec.matern(nu, h))
            rel = np.abs(got - expected) / np.maximum(np.abs(expected), 1e-300)
            assert rel.max() < 1e-10, nu

    def test_zero_distance_is_exactly_one(self):
        for nu in (0.6, 1.5, 2.01, 4.0):
            assert matern_eval([0.3], [0.3], nu, 0.2) == 1.0

    def test_tiny_distance_snaps_to_one(self):
        assert matern_eval([0.5], [0.5 + 1e-16], 1.5, 0.2) == 1.0

    def test_frozen_value(self):
        # nu=2.01, r=0.1, h=0.2; independent quadrature + prefactor oracle
        got = matern_eval([0.0], [0.1], 2.01, 0.2)
        np.testing.assert_allclose(got, 0.81282820544066614, rtol=1e-10)

    def test_range_and_monotonicity(self):
        rs = np.linspace(0.0, 2.0, 101)
        for nu in (0.5, 1.1, 2.5):
            vals = np.array([matern_eval([0.0], [r], nu, 0.3) for r in rs])
            assert vals[0] == 1.0
            assert np.all(vals > 0.0) and np.all(vals <= 1.0)
            assert np.all(np.diff(vals) <= 0.0)

    def test_validation(self):
        with pytest.raises(InputError):
            matern_eval([0.0], [0.1], -1.0, 0.2)
        with pytest.raises(InputError):
            matern_eval([0.0], [0.1], 1.0, 0.0)


class TestGaussianEval:
    def test_examples(self):
        assert gaussian_eval([0.3], [0.3], 0.2) == 1.0
        np.testing.assert_allclose(gaussian_eval([0.0], [0.2], 0.2),
                                   math.exp(-0.5), rtol=1e-15)

    def test_dimension_mismatch(self):
        with pytest.raises(InputError):
            gaussian_eval([0.0, 0.1], [0.2], 0.2)


class TestGram:
    def test_positive_semidefinite(self):
        """Min eigenvalue >= -1e-8 * max eigenvalue over random designs."""
        rng = np.random.default_rng(1234)
        for trial in range(10):
            n = int(rng.integers(5, 201))
            d = int(rng.integers(1, 4))
            pts = rng.random((n, d))
            for kernel in (KernelSpec.gaussian(0.2),
                           KernelSpec.matern(1.5, 0.2)):
                G = gram(pts, kernel).values
                eigs = np.linalg.eigvalsh(G)
                assert eigs.min() >= -1e-8 * eigs.max(), (trial, kernel.family)

    def test_unit_diagonal_exact(self):
        rng = np.random.default_rng(7)
        pts = rng.random((40, 2))
        for kernel in (KernelSpec.gaussian(0.15), KernelSpec.matern(2.01, 0.2)):
            G = gram(pts, kernel).values
            assert np.all(np.diagonal(G) == 1.0)

    def test_exact_symmetry(self):
        rng = np.random.default_rng(8)
        pts = rng.random((60, 3))
        for kernel in (KernelSpec.gaussian(0.2), KernelSpec.matern(0.8, 0.25)):
            G = gram(pts, kernel).values
            assert np.array_equal(G, G.T)

    def test_matches_scalar_oracle(self):
        rng = np.random.default_rng(9)
        pts = rng.random((12, 2))
        for kernel in (KernelSpec.gaussian(0.3), KernelSpec.matern(1.7, 0.3)):
            G = gram(pts, kernel).values
            for i in range(12):
                for j in range(12):
                    if kernel.family == "gaussian":
                        want = gaussian_eval(pts[i], pts[j], kernel.bandwidth)
                    else:
                        want = matern_eval(pts[i], pts[j], kernel.nu,
                                           kernel.bandwidth)
                    np.testing.assert_allclose(G[i, j], want, rtol=1e-12,
                                               atol=1e-15)

    def test_pairwise_cross_oracle(self):
        rng = np.random.default_rng(10)
        a = rng.random((7, 2))
        b = rng.random((5, 2))
        for kernel in (KernelSpec.gaussian(0.2), KernelSpec.matern(2.5, 0.2)):
            K = pairwise(a, b, kernel)
            assert K.shape == (7, 5)
            for i in range(7):
                for j in range(5):
                    if kernel.family == "gaussian":
                        want = gaussian_eval(a[i], b[j], kernel.bandwidth)
                    else:
                        want = matern_eval(a[i], b[j], kernel.nu,
                                           kernel.bandwidth)
                    np.testing.assert_allclose(K[i, j], want, rtol=1e-12,
                                               atol=1e-15)

    def test_one_dimensional_points_accepted(self):
        xs = np.linspace(0.0, 1.0, 9)
        G = gram(xs, KernelSpec.gaussian(0.2)).values
        assert G.shape == (9, 9)


class TestKernelSpec:
    def test_validation(self):
        with pytest.raises(InputError):
            KernelSpec("triangular", 0.2)
        with pytest.raises(InputError):
            KernelSpec("gaussian", -0.1)
        with pytest.raises(InputError):
            KernelSpec("matern", 0.2)          # missing nu
        with pytest.raises(InputError):
            KernelSpec("gaussian", 0.2, nu=1.0)  # nu is Matern-only

    def test_constructors(self):
        k = KernelSpec.matern(1.5)
        assert (k.family, k.nu, k.bandwidth) == ("matern", 1.5, 0.2)
        g = KernelSpec.gaussian()
        assert (g.family, g.bandwidth, g.nu) == ("gaussian", 0.2, None)
