"""Tests for the infinite-product densities and their ratios."""

import math

import numpy as np
import pytest

from qortho.qcore import NonConvergenceError, ParameterError, support
from qortho.densities import (
    BoundaryError,
    density_eval,
    density_ratio,
    fCN,
    fK,
    fN,
    fR,
    fT,
    fU,
    normalize_check,
    pm_ratio,
)


class TestConstruction:
    def test_q_range(self):
        fN(0.5)
        fN(-0.9)
        fN(1.0)  # fn admits the q = 1 Gaussian limit
        with pytest.raises(ParameterError):
            fU(1.0)
        with pytest.raises(ParameterError):
            fN(1.5)

    def test_fcn_y_must_be_in_support(self):
        L = support(0.5).radius
        fCN(0.99 * L, 0.3, 0.5)
        with pytest.raises(ParameterError):
            fCN(1.01 * L, 0.3, 0.5)
        with pytest.raises(ParameterError):
            fCN(0.0, 1.0, 0.5)

    def test_fr_beta_one_degenerates_to_ft(self):
        d = fR(1.0, 0.5)
        assert d.tag == "ft"

    def test_trunc_eps_validated(self):
        with pytest.raises(ParameterError):
            fN(0.5, trunc_eps=0.0)
        with pytest.raises(ParameterError):
            fN(0.5, trunc_eps=2.0)


class TestEval:
    def test_scalar_and_array_agree(self):
        d = fN(0.4)
        xs = np.linspace(-2.5, 2.5, 11)
        arr = density_eval(d, xs)
        assert isinstance(arr, np.ndarray)
        for i, x in enumerate(xs):
            v = density_eval(d, float(x))
            assert isinstance(v, float)
            assert v == pytest.approx(arr[i], abs=0.0)

    def test_outside_support_is_zero(self):
        q = 0.5
        L = support(q).radius
        for d in (fN(q), fCN(0.3, 0.4, q), fR(0.3, q), fU(q), fK(0.3, 0.4, q)):
            assert density_eval(d, L) == 0.0
            assert density_eval(d, -1.5 * L) == 0.0

    def test_ft_boundary_raises(self):
        q = 0.5
        L = support(q).radius
        with pytest.raises(BoundaryError):
            density_eval(fT(q), L)
        with pytest.raises(BoundaryError):
            density_eval(fT(q), np.array([0.0, -L]))

    def test_gaussian_limit(self):
        d = fN(1.0)
        for x in (0.0, 0.7, -1.3):
            assert density_eval(d, x) == pytest.approx(
                math.exp(-x * x / 2) / math.sqrt(2 * math.pi), rel=1e-14
            )

    def test_conditional_gaussian_limit(self):
        y, rho = 0.6, 0.4
        d = fCN(y, rho, 1.0)
        s2 = 1 - rho * rho
        for x in (0.0, 0.9):
            expect = math.exp(-((x - rho * y) ** 2) / (2 * s2)) / math.sqrt(
                2 * math.pi * s2
            )
            assert density_eval(d, x) == pytest.approx(expect, rel=1e-14)

    def test_no_q1_for_other_densities(self):
        # only fn/fcn admit the q = 1 limit
        with pytest.raises(ParameterError):
            fR(0.3, 1.0)
        with pytest.raises(ParameterError):
            fT(1.0)
        with pytest.raises(ParameterError):
            fK(0.0, 0.3, 1.0)

    def test_fu_closed_form(self):
        q = 0.3
        x = 0.8
        expect = math.sqrt((1 - q) * (4 - (1 - q) * x * x)) / (2 * math.pi)
        assert density_eval(fU(q), x) == pytest.approx(expect, rel=1e-15)

    def test_fk_closed_form_at_origin(self):
        # q = 0, y = 0: f_K(0) = 1 / (pi (1 - rho^2))
        rho = 0.4
        assert density_eval(fK(0.0, rho, 0.0), 0.0) == pytest.approx(
            1.0 / (math.pi * (1 - rho * rho)), rel=1e-14
        )

    def test_nonconvergence_near_unit_q(self):
        with pytest.raises(NonConvergenceError):
            density_eval(fN(0.95), 0.0)


class TestIdentities:
    def test_fcn_rho_zero_is_fn(self):
        q = 0.4
        xs = np.linspace(-2.5, 2.5, 9)
        np.testing.assert_allclose(
            density_eval(fCN(0.7, 0.0, q), xs), density_eval(fN(q), xs), atol=1e-15
        )

    def test_fcn_on_diagonal_is_fr_scaled(self):
        # f_CN(x | y=x, rho, q) = f_R(x | rho, q) / (1 - rho)
        q, rho = 0.4, 0.35
        L = support(q).radius
        xs = L * np.linspace(-0.9, 0.9, 13)
        lhs = np.array([density_eval(fCN(float(x), rho, q), float(x)) for x in xs])
        rhs = density_eval(fR(rho, q), xs) / (1 - rho)
        np.testing.assert_allclose(lhs, rhs, atol=1e-12)

    def test_fk_rho_zero_is_fu(self):
        q = 0.4
        xs = np.linspace(-2.0, 2.0, 9)
        np.testing.assert_allclose(
            density_eval(fK(0.5, 0.0, q), xs), density_eval(fU(q), xs), atol=1e-15
        )


class TestPmRatio:
    def test_symmetry_and_broadcast(self):
        q, rho = 0.5, 0.4
        xs = np.linspace(-2.0, 2.0, 7)
        a = pm_ratio(xs, 0.3, rho, q)
        b = pm_ratio(0.3, xs, rho, q)
        np.testing.assert_allclose(a, b, atol=0.0)
        assert a.shape == xs.shape

    def test_equals_density_quotient(self):
        q, rho, y = 0.5, 0.4, 0.3
        xs = np.linspace(-2.0, 2.0, 7)
        num = density_eval(fCN(y, rho, q), xs)
        den = density_eval(fN(q), xs)
        np.testing.assert_allclose(pm_ratio(xs, y, rho, q), num / den, rtol=1e-12)

    def test_rho_zero_is_one(self):
        np.testing.assert_allclose(
            pm_ratio(np.array([0.1, 1.0]), 0.5, 0.0, 0.5), 1.0, atol=0.0
        )


class TestDensityRatio:
    def test_merged_pairs_match_direct_quotients(self):
        q, rho, y, beta = 0.5, 0.4, 0.3, 0.35
        L = support(q).radius
        xs = L * np.linspace(-0.95, 0.95, 11)
        pairs = [
            (fCN(y, rho, q), fN(q)),
            (fR(beta, q), fN(q)),
            (fN(q), fU(q)),
            (fCN(y, rho, q), fU(q)),
        ]
        for num, den in pairs:
            direct = density_eval(num, xs) / density_eval(den, xs)
            merged = density_ratio(num, den, xs)
            np.testing.assert_allclose(merged, direct, rtol=1e-11)

    def test_merged_form_is_boundary_finite(self):
        # fN/fU stays finite at the support edge where both densities vanish
        q = 0.5
        L = support(q).radius
        v = density_ratio(fN(q), fU(q), np.array([L, -L]))
        assert np.all(np.isfinite(v))
        assert np.all(v > 0)

    def test_mixed_q_rejected(self):
        with pytest.raises(ParameterError):
            density_ratio(fN(0.5), fU(0.4), 0.0)


class TestNormalization:
    def test_all_six_unit_mass(self):
        q = 0.3
        L = support(q).radius
        for d in (fN(q), fCN(0.4 * L, 0.45, q), fR(0.35, q), fU(q), fT(q),
                  fK(0.4 * L, 0.45, q)):
            ok, residual = normalize_check(d)
            assert ok, (d.tag, residual)
            assert residual < 1e-8

    def test_q1_rejected(self):
        with pytest.raises(ParameterError):
            normalize_check(fN(1.0))
