"""Tests for density-expansion kernels and the q-series identity battery."""

import math
from fractions import Fraction

import numpy as np
import pytest

from qortho.qcore import ParameterError, q_bracket, q_factorial, q_pochhammer, support
from qortho.polyfam import ChebU, eval as fam_eval
from qortho.densities import density_eval
from qortho.expand import (
    EXPANSION_IDS,
    ExpansionSpec,
    TruncationError,
    base_density,
    expansion_coeff,
    expansion_eval,
    identity_suite,
    target_density,
)

F = Fraction


class TestCoefficients:
    def test_n_over_u(self):
        q = F(1, 2)
        for k in range(5):
            assert expansion_coeff("n_over_u", 2 * k, q=q) == (-1) ** k * q ** (
                k * (k + 1) // 2
            )
            assert expansion_coeff("n_over_u", 2 * k + 1, q=q) == 0

    def test_u_over_n_closed_form(self):
        # c_{2k} = q^k (1-q)^{k+1} / ((q)_k (q)_{k+1}), equivalently
        # ([2k k]_q - q [2k k-1]_q) (1-q)^{-k} q^k / [2k]_q!
        from qortho.qcore import q_binomial

        q = F(1, 2)
        for k in range(7):
            got = expansion_coeff("u_over_n", 2 * k, q=q)
            direct = q ** k * (1 - q) ** (k + 1) / (
                q_pochhammer(q, q, k) * q_pochhammer(q, q, k + 1)
            )
            alt = (
                (q_binomial(2 * k, k, q) - q * q_binomial(2 * k, k - 1, q))
                * q ** k
                / ((1 - q) ** k * q_factorial(2 * k, q))
            )
            assert got == direct == alt, k
            assert expansion_coeff("u_over_n", 2 * k + 1, q=q) == 0

    def test_cn_over_n(self):
        q, rho = F(1, 2), F(1, 4)
        for n in range(6):
            expect = rho ** n / q_factorial(n, q)
            assert expansion_coeff("cn_over_n", n, rho=rho, q=q) == expect

    def test_n_over_cn(self):
        q, rho = F(1, 2), F(1, 4)
        for n in range(6):
            expect = rho ** n / (
                q_pochhammer(rho * rho, q, n) * q_factorial(n, q)
            )
            assert expansion_coeff("n_over_cn", n, rho=rho, q=q) == expect

    def test_r_over_n_and_back_are_reciprocal_in_series(self):
        # check via the evaluated kernels instead of coefficients: the two
        # expansions multiply to 1 pointwise
        q, beta = 0.5, 0.35
        L = support(q).radius
        xs = L * np.linspace(-0.9, 0.9, 7)
        fwd = expansion_eval(ExpansionSpec("r_over_n", {"beta": beta, "q": q}), xs)
        bwd = expansion_eval(ExpansionSpec("n_over_r", {"gamma": beta, "q": q}), xs)
        fn = density_eval(base_density("r_over_n", {"beta": beta, "q": q}), xs)
        fr = density_eval(base_density("n_over_r", {"gamma": beta, "q": q}), xs)
        np.testing.assert_allclose(
            (fwd.value / fn) * (bwd.value / fr), 1.0, atol=1e-10
        )

    def test_mehler_classical(self):
        rho = F(1, 3)
        for n in range(6):
            assert expansion_coeff("mehler_classical", n, rho=rho) == rho ** n / math.factorial(n)

    def test_pm_q0_uses_chebu(self):
        y, rho = F(2, 5), F(1, 4)
        for n in range(6):
            expect = rho ** n * fam_eval(ChebU(), n, y / 2)
            assert expansion_coeff("pm_q0", n, y=y, rho=rho) == expect

    def test_unknown_id(self):
        with pytest.raises(ParameterError):
            expansion_coeff("n_over_t", 2, q=F(1, 2))


class TestEvaluation:
    @pytest.mark.parametrize("eid,params", [
        ("n_over_u", dict(q=0.5)),
        ("u_over_n", dict(q=0.5)),
        ("cn_over_n", dict(y=0.4, rho=0.45, q=0.3)),
        ("n_over_cn", dict(y=0.4, rho=0.45, q=0.3)),
        ("r_over_n", dict(beta=0.35, q=0.5)),
        ("n_over_r", dict(gamma=0.35, q=0.5)),
        ("cn_over_k", dict(y=0.4, rho=0.45, q=0.3)),
        ("cn_over_u", dict(y=0.4, rho=0.45, q=0.3)),
        ("mehler_classical", dict(y=0.4, rho=0.45)),
        ("pm_q0", dict(y=0.4, rho=0.45)),
    ])
    def test_series_reaches_target_density(self, eid, params):
        q = params.get("q", 1.0)
        L = support(q).radius if q < 1 else 3.0
        xs = L * np.linspace(-0.92, 0.92, 9)
        spec = ExpansionSpec(eid, params)
        res = expansion_eval(spec, xs, tol=1e-10)
        tgt = density_eval(target_density(eid, params), xs)
        np.testing.assert_allclose(res.value, tgt, atol=5e-10)

    def test_tail_reported(self):
        res = expansion_eval(ExpansionSpec("n_over_u", {"q": 0.5}), 0.7, tol=1e-9)
        assert res.tail >= 0.0
        tgt = density_eval(target_density("n_over_u", {"q": 0.5}), 0.7)
        assert abs(res.value - tgt) <= max(res.tail, 1e-12)

    def test_fixed_k_term_count(self):
        res = expansion_eval(ExpansionSpec("n_over_u", {"q": 0.5}, K=7), 0.3)
        assert res.n_terms == 8

    def test_outside_support_rejected(self):
        L = support(0.5).radius
        with pytest.raises(ParameterError):
            expansion_eval(ExpansionSpec("n_over_u", {"q": 0.5}), 1.01 * L)

    def test_truncation_error_near_unit_q(self):
        with pytest.raises(TruncationError):
            expansion_eval(ExpansionSpec("n_over_u", {"q": 0.9999}), 0.0, tol=1e-12)

    def test_reciprocal_gaussian_needs_small_rho(self):
        with pytest.raises(ParameterError):
            expansion_eval(
                ExpansionSpec("n_over_cn", {"q": 1.0, "rho": 0.8, "y": 0.1}), 0.0
            )
        # rho^2 < 1/2 converges
        res = expansion_eval(
            ExpansionSpec("n_over_cn", {"q": 1.0, "rho": 0.5, "y": 0.1}), 0.2
        )
        tgt = density_eval(target_density("n_over_cn", {"q": 1.0, "rho": 0.5, "y": 0.1}), 0.2)
        assert res.value == pytest.approx(tgt, abs=1e-9)

    def test_ids_registry(self):
        assert set(EXPANSION_IDS) == {
            "n_over_u", "u_over_n", "cn_over_n", "n_over_cn", "r_over_n",
            "n_over_r", "cn_over_k", "cn_over_u", "mehler_classical", "pm_q0",
        }


class TestIdentitySuite:
    def test_reduced_grid_passes(self):
        reports = identity_suite(q_grid=(0.5,), rho_grid=(0.4,), tol=1e-10)
        assert reports
        bad = [r for r in reports if not r.passed]
        assert not bad, [(r.check_id, r.residual) for r in bad]

    def test_report_fields(self):
        reports = identity_suite(q_grid=(0.3,), rho_grid=(0.3,))
        r = reports[0]
        assert r.check_id.startswith("i")
        assert isinstance(r.params, dict)
        assert r.tolerance == 1e-10
        assert isinstance(r.residual, float)
