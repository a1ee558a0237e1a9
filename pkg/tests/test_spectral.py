"""Spectral filter, schedule, and fit tests.

The two filter conditions are checked as numeric suprema over the same
grids the acceptance gate uses; the KRR fit is cross-checked against an
independent Cholesky solve of the regularized normal equations.
"""

import math

import numpy as np
import pytest

from specshift import (Dataset, FilterSpec, InputError, KernelSpec,
                       filter_apply, krr_direct_solve, lambda_schedule,
                       pairwise, predict, spectral_fit)

U_GRID = np.linspace(0.0, 1.0, 1000)
BETAS = np.linspace(0.0, 1.0, 11)
LAMBDAS = np.geomspace(1e-6, 1e-1, 6)


class TestFilterApply:
    def test_krr_example(self):
        assert filter_apply("krr", 0.1, 0.1) == 5.0

    def test_gf_at_zero(self):
        # (1 - exp(-z/lam))/z -> 1/lam as z -> 0
        assert filter_apply("gf", 0.5, 0.0) == 2.0

    def test_kpcr_cutoff(self):
        assert filter_apply("kpcr", 0.2, 0.19) == 0.0
        assert filter_apply("kpcr", 0.2, 0.2) == 5.0  # tie included

    def test_vectorized_matches_scalar(self):
        zs = np.linspace(0.0, 1.0, 57)
        for kind in ("krr", "gf", "kpcr"):
            vec = filter_apply(kind, 0.03, zs)
            sca = np.array([filter_apply(kind, 0.03, float(z)) for z in zs])
            assert np.array_equal(vec, sca), kind

    def test_negative_spectrum_rejected(self):
        for kind in ("krr", "gf", "kpcr"):
            with pytest.raises(InputError):
                filter_apply(kind, 0.1, -1e-3)

    def test_kind_aliases(self):
        assert filter_apply("tikhonov", 0.1, 0.1) == filter_apply("krr", 0.1, 0.1)
        assert filter_apply("gradient-flow", 0.5, 0.0) == 2.0
        assert filter_apply("cutoff", 0.2, 0.3) == filter_apply("kpcr", 0.2, 0.3)
        with pytest.raises(InputError):
            filter_apply("landweber", 0.1, 0.1)


class TestFilterConditions:
    def test_error_condition_all_filters(self):
        """sup_u |u^beta phi_lam(u)| lam^{1-beta} <= 1 + 1e-9."""
        for kind in ("krr", "gf", "kpcr"):
            for lam in LAMBDAS:
                phi = filter_apply(kind, float(lam), U_GRID)
                for beta in BETAS:
                    sup = np.max(np.abs(U_GRID**beta * phi) * lam**(1.0 - beta))
                    assert sup <= 1.0 + 1e-9, (kind, lam, beta)

    def test_residual_condition_krr(self):
        """sup_u |1 - u phi_lam(u)| u^beta lam^{-beta} <= 1 + 1e-9."""
        for lam in LAMBDAS:
            phi = filter_apply("krr", float(lam), U_GRID)
            resid = np.abs(1.0 - U_GRID * phi)
            for beta in BETAS:
                sup = np.max(resid * U_GRID**beta * lam**(-beta))
                assert sup <= 1.0 + 1e-9, (lam, beta)

    def test_kpcr_residual_is_binary(self):
        """1 - z phi is exactly 1 below the cutoff, 0 to one ulp at/above."""
        lam = 0.2
        below = np.linspace(0.0, lam, 50, endpoint=False)
        resid_below = 1.0 - below * filter_apply("kpcr", lam, below)
        assert np.all(resid_below == 1.0)
        above = np.linspace(lam, 1.0, 50)
        resid_above = 1.0 - above * filter_apply("kpcr", lam, above)
        assert np.max(np.abs(resid_above)) <= np.finfo(float).eps

    def test_gf_continuous_at_origin(self):
        for lam in (1e-3, 1e-2, 1e-1, 0.5, 1.0):
            got = filter_apply("gf", lam, 1e-12)
            assert abs(got - 1.0 / lam) <= 1e-6 / lam, lam

    def test_gf_branch_seam(self):
        # the Taylor branch and -expm1 branch meet smoothly at z/lam = 1e-8
        lam = 0.25
        z_lo = lam * 1e-8 * (1 - 1e-12)
        z_hi = lam * 1e-8 * (1 + 1e-12)
        a = filter_apply("gf", lam, z_lo)
        b = filter_apply("gf", lam, z_hi)
        assert abs(a - b) / abs(a) < 1e-10


class TestQualification:
    def test_residual_constants(self):
        assert FilterSpec("krr", 0.1).residual_constant(1.0) == 1.0
        assert FilterSpec("kpcr", 0.1).residual_constant(3.0) == 1.0
        spec = FilterSpec("gf", 0.1)
        for tau in (1.0, 2.0, 3.5):
            np.testing.assert_allclose(spec.residual_constant(tau),
                                       (tau / math.e) ** tau, rtol=1e-15)

    def test_error_constant(self):
        for kind in ("krr", "gf", "kpcr"):
            assert FilterSpec(kind, 0.1).error_constant == 1.0

    def test_lambda_validation(self):
        with pytest.raises(InputError):
            FilterSpec("krr", 0.0)


class TestLambdaSchedule:
    def test_frozen_example(self):
        np.testing.assert_allclose(lambda_schedule(100, 2.0, 1, 0.5),
                                   math.exp(-0.5 * 100.0 ** 0.4), rtol=0)

    def test_single_sample(self):
        assert lambda_schedule(1, 2.0, 1, 1.0) == math.exp(-1.0)

    def test_monotone_decreasing_in_n(self):
        vals = [lambda_schedule(n, 2.0, 1, 1.0) for n in range(1, 2000, 50)]
        assert all(a > b for a, b in zip(vals, vals[1:]))

    def test_floor_clamp(self):
        assert lambda_schedule(10**9, 0.6, 1, 50.0) == 1e-300

    def test_validation(self):
        with pytest.raises(InputError):
            lambda_schedule(0, 2.0, 1, 1.0)
        with pytest.raises(InputError):
            lambda_schedule(10, 0.5, 1, 1.0)   # m must exceed d/2
        with pytest.raises(InputError):
            lambda_schedule(10, 2.0, 1, 0.0)


def _random_instance(rng, n_max=200):
    n = int(rng.integers(10, n_max + 1))
    x = rng.random((n, 1))
    y = rng.standard_normal(n)
    return Dataset(x=x, y=y)


class TestSpectralFit:
    def test_krr_matches_direct_solve(self):
        """Eigendecomposition route == Cholesky route to 1e-8 abs."""
        rng = np.random.default_rng(2025)
        hs = (0.1, 0.2, 0.4)
        lams = (1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6)
        tx = np.linspace(0.0, 1.0, 101)
        for trial in range(8):
            data = _random_instance(rng)
            kernel = KernelSpec.gaussian(hs[trial % 3])
            lam = lams[trial % 6]
            a = predict(spectral_fit(data, kernel, FilterSpec("krr", lam)), tx)
            b = predict(krr_direct_solve(data, kernel, lam), tx)
            assert np.max(np.abs(a - b)) <= 1e-8, trial

    def test_single_point_closed_form(self):
        """n=1: f_hat(x) = k(x, x1) y1 / (1 + lam)."""
        data = Dataset(x=np.array([[0.4]]), y=np.array([2.0]))
        kernel = KernelSpec.gaussian(0.2)
        lam = 0.3
        model = spectral_fit(data, kernel, FilterSpec("krr", lam))
        tx = np.linspace(0.0, 1.0, 11)
        want = pairwise(tx, data.x, kernel).ravel() * 2.0 / (1.0 + lam)
        np.testing.assert_allclose(predict(model, tx), want, rtol=1e-12)

    def test_kpcr_cutoff_above_spectrum(self):
        """lam above every eigenvalue of G/n kills all components."""
        rng = np.random.default_rng(3)
        data = _random_instance(rng, n_max=50)
        kernel = KernelSpec.gaussian(0.2)
        model = spectral_fit(data, kernel, FilterSpec("kpcr", 2.0))
        assert np.all(model.dual_coeffs == 0.0)
        assert np.all(predict(model, np.linspace(0, 1, 7)) == 0.0)

    def test_gf_matches_manual_eigenroute(self):
        rng = np.random.default_rng(4)
        data = _random_instance(rng, n_max=60)
        kernel = KernelSpec.gaussian(0.2)
        lam = 1e-2
        model = spectral_fit(data, kernel, FilterSpec("gf", lam))
        from specshift import gram
        G = gram(data.x, kernel).values
        evals, evecs = np.linalg.eigh(G / data.n)
        evals = np.maximum(evals, 0.0)
        phi = filter_apply("gf", lam, evals)
        alpha = evecs @ (phi * (evecs.T @ data.y)) / data.n
        np.testing.assert_allclose(model.dual_coeffs, alpha, rtol=0,
                                   atol=1e-12)

    def test_duplicate_points_are_handled(self):
        """Numerically negative eigenvalues are clamped, not propagated."""
        x = np.array([[0.2], [0.2], [0.2], [0.7], [0.7]])
        y = np.array([1.0, 1.0, 1.0, -1.0, -1.0])
        data = Dataset(x=x, y=y)
        kernel = KernelSpec.gaussian(0.2)
        for kind in ("krr", "gf", "kpcr"):
            model = spectral_fit(data, kernel, FilterSpec(kind, 1e-4))
            out = predict(model, np.linspace(0, 1, 9))
            assert np.all(np.isfinite(out)), kind

    def test_model_is_callable(self):
        data = Dataset(x=np.array([[0.1], [0.9]]), y=np.array([1.0, -1.0]))
        model = spectral_fit(data, KernelSpec.gaussian(0.2),
                             FilterSpec("krr", 0.1))
        tx = np.linspace(0, 1, 5)
        assert np.array_equal(model(tx), predict(model, tx))

    def test_dimension_mismatch_rejected(self):
        data = Dataset(x=np.random.default_rng(0).random((10, 2)),
                       y=np.zeros(10))
        model = spectral_fit(data, KernelSpec.gaussian(0.2),
                             FilterSpec("krr", 0.1))
        with pytest.raises(InputError):
            predict(model, np.zeros((4, 3)))
