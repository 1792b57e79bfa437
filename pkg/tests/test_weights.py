import math
import warnings

import numpy as np
import pytest
from scipy import integrate as si

from fracvolt import (ExponentialWeight, ExprWeight, StandardWeight,
                      TailExprWeight, WeightError, from_descriptor,
                      from_shorthand)


def std_moment_oracle(beta: float, x: float) -> float:
    """Brute-force moment of the standard weight, integrated in u = 1 - s.

    int_0^1 s^x beta (1-s^2)^(beta-1) ds
      = int_0^1 (1-u)^x beta u^(beta-1) (2-u)^(beta-1) du,
    on geometric u-panels down to 2^-400 with (1-u)^x = exp(x log1p(-u)),
    so the endpoint singularity and the s^x peak are both fully resolved.
    """
    from fracvolt.quad import gauss_rule
    gx, gw = gauss_rule(32)
    edges = np.concatenate([[0.0], 2.0 ** -np.arange(400.0, -1.0, -1.0)])
    lo, hi = edges[:-1], edges[1:]
    half = 0.5 * (hi - lo)
    u = (lo[:, None] + half[:, None] * (gx[None, :] + 1.0)).ravel()
    w = (half[:, None] * gw[None, :]).ravel()
    vals = np.exp(x * np.log1p(-u)) * beta * u ** (beta - 1.0) * (2.0 - u) ** (beta - 1.0)
    return float(np.sum(w * vals))


class TestStandardFamily:
    def test_evaluate_examples(self, std1, std2):
        assert std1.density(0.5) == 1.0          # beta = 1 is Lebesgue measure
        assert std2.density(0.0) == 2.0          # 2 (1 - r^2) at r = 0
        np.testing.assert_allclose(std2.density(0.5), 1.5, rtol=1e-15)

    def test_moment_trivial(self, std1, std2):
        np.testing.assert_allclose(std1.moment(3), 0.25, rtol=1e-12)
        np.testing.assert_allclose(std1.moment(201), 1.0 / 202.0, rtol=1e-12)
        # beta = 2: mu_{2n+1} = 1/((n+1)(n+2))
        np.testing.assert_allclose(std2.moment(3), 1.0 / 6.0, rtol=1e-12)
        np.testing.assert_allclose(std2.moment(11), 1.0 / 42.0, rtol=1e-12)

    @pytest.mark.parametrize("beta", [0.5, 1.0, 2.0, 3.0])
    @pytest.mark.parametrize("x", [1.0, 2.0, 7.0, 41.0, 401.0])
    def test_moment_matches_quadrature_oracle(self, beta, x):
        w = StandardWeight(beta)
        np.testing.assert_allclose(w.moment(x), std_moment_oracle(beta, x),
                                   rtol=1e-11)

    def test_tail_closed_forms(self, std1, std2):
        # beta = 1: integral of 1 over [r, 1) is 1 - r
        np.testing.assert_allclose(std1.tail(0.25), 0.75, rtol=1e-13)
        # beta = 2: int_r^1 2(1-s^2) ds = (2/3)(1-r)^2(2+r)
        r = np.array([0.0, 0.3, 0.9, 0.999])
        np.testing.assert_allclose(std2.tail(r), (2.0 / 3.0) * (1 - r) ** 2 * (2 + r),
                                   rtol=1e-12)

    @pytest.mark.parametrize("beta", [0.5, 2.5])
    def test_tail_against_quad(self, beta):
        w = StandardWeight(beta)
        for r in (0.1, 0.6, 0.99):
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")   # quad grumbles at the endpoint
                oracle, _ = si.quad(lambda s: beta * (1 - s * s) ** (beta - 1.0),
                                    r, 1, epsabs=1e-15, epsrel=1e-13)
            np.testing.assert_allclose(w.tail(r), oracle, rtol=1e-10)

    def test_tail_positive_and_monotone(self, std2):
        r = 1.0 - 2.0 ** -np.arange(1.0, 40.0)
        t = std2.tail(r)
        assert np.all(t > 0)
        assert np.all(np.diff(t) < 0)

    def test_moments_strictly_decreasing(self, std1, exp_weight):
        for w in (std1, exp_weight):
            ms = [w.moment(x) for x in (0.5, 1.0, 2.0, 5.0, 17.0)]
            assert all(a > b for a, b in zip(ms, ms[1:]))

    def test_domain_errors(self, std1):
        with pytest.raises(WeightError):
            std1.density(1.0)
        with pytest.raises(WeightError):
            std1.tail(-0.1)
        with pytest.raises(WeightError):
            std1.moment(-1.0)


class TestExponentialFamily:
    def test_density_formula(self, exp_weight):
        # tail exp(-1/(1-r)) differentiates to exp(-1/(1-r))/(1-r)^2
        np.testing.assert_allclose(exp_weight.density(0.5),
                                   math.exp(-2.0) / 0.25, rtol=1e-14)

    def test_tail_exact(self, exp_weight):
        r = np.array([0.0, 0.5, 0.9])
        np.testing.assert_allclose(exp_weight.tail(r), np.exp(-1.0 / (1.0 - r)),
                                   rtol=1e-15)
        np.testing.assert_allclose(exp_weight.log_tail(1.0 - 2.0 ** -36),
                                   -2.0 ** 36)

    def test_tail_is_integral_of_density(self, exp_weight):
        oracle, _ = si.quad(lambda s: math.exp(-1 / (1 - s)) / (1 - s) ** 2,
                            0.3, 1.0)
        np.testing.assert_allclose(exp_weight.tail(0.3), oracle, rtol=1e-9)

    def test_log_moment_matches_plain(self, exp_weight):
        for x in (1.0, 8.0, 64.0):
            np.testing.assert_allclose(math.exp(exp_weight.log_moment(x)),
                                       exp_weight.moment(x), rtol=1e-10)


class TestExprWeights:
    def test_expr_matches_exponential(self, exp_weight):
        w = ExprWeight("exp(-1/(1-r))/(1-r)^2")
        r = np.array([0.1, 0.5, 0.8])
        np.testing.assert_allclose(w.density(r), exp_weight.density(r), rtol=1e-14)
        np.testing.assert_allclose(w.tail(0.5), exp_weight.tail(0.5), rtol=1e-9)

    def test_negative_rejected(self):
        with pytest.raises(WeightError):
            ExprWeight("r-1/2")

    def test_tail_expr_density(self, slow_tail_weight):
        # density = 1/((1-r) (1 + log(1/(1-r)))^2), the exact -d/dr of the tail
        r = np.array([0.2, 0.7])
        expect = 1.0 / ((1 - r) * (1 + np.log(1 / (1 - r))) ** 2)
        np.testing.assert_allclose(slow_tail_weight.density(r), expect, rtol=1e-12)

    def test_tail_expr_requires_monotone(self):
        with pytest.raises(WeightError):
            TailExprWeight("r+1")        # increasing: not a tail

    def test_descriptor_roundtrip(self, std2):
        for w in (std2, ExponentialWeight(2.0, 0.5),
                  ExprWeight("1+r^2"), StandardWeight(0.5).mu_plus()):
            w2 = from_descriptor(w.descriptor())
            r = np.array([0.1, 0.5, 0.9])
            np.testing.assert_allclose(w2.density(r), w.density(r), rtol=1e-12)

    def test_shorthand(self):
        assert from_shorthand("std:2").label() == "std:2"
        assert from_shorthand("exp:1:1").label() == "exp:1:1"
        assert from_shorthand('{"kind":"standard","beta":2.0}').label() == "std:2"
        with pytest.raises(WeightError):
            from_shorthand("nope:1")


class TestDerivedWeights:
    def test_mu_plus_log(self, std1):
        # int_r^1 ds/s = log(1/r)
        mp = std1.mu_plus()
        r = np.array([0.05, 0.3, 0.7, 0.95])
        np.testing.assert_allclose(mp.density(r), np.log(1.0 / r), rtol=1e-12)

    def test_mu_plus_limit_at_one(self, std1):
        # log(1/r)/(1-r) -> 1
        mp = std1.mu_plus()
        r = 1.0 - 1e-6
        np.testing.assert_allclose(mp.density(np.array([r]))[0] / (1.0 - r),
                                   1.0, rtol=1e-5)

    @pytest.mark.parametrize("beta", [1.0, 2.0])
    def test_mu_plus_tail_domination(self, beta):
        # tail of mu_plus <= tail * (1 - r) pointwise
        w = StandardWeight(beta)
        mp = w.mu_plus()
        r = np.arange(0.1, 0.95, 0.1)
        lhs = mp.tail(r)
        rhs = w.tail(r) * (1.0 - r)
        assert np.all(lhs <= rhs * (1.0 + 1e-10))

    def test_mu_plus_tail_lower_bound_for_doubling(self, std1, std2):
        # reverse inequality with a constant, valid for upper-doubling weights
        for w in (std1, std2):
            mp = w.mu_plus()
            r = np.arange(0.1, 0.95, 0.1)
            ratio = mp.tail(r) / (w.tail(r) * (1.0 - r))
            assert np.min(ratio) > 0.2

    def test_iterate_V_closed_forms(self, std1):
        r = np.array([0.0, 0.25, 0.5, 0.9])
        v1 = std1.iterate_V(1)
        np.testing.assert_allclose(v1.density(r), 1.0 - r ** 2, rtol=1e-12, atol=1e-14)
        v2 = std1.iterate_V(2)
        np.testing.assert_allclose(v2.density(r), (1.0 - r ** 2) ** 2 / 2.0,
                                   rtol=1e-12, atol=1e-14)

    @pytest.mark.parametrize("beta,n", [(1.0, 1), (2.0, 1), (1.0, 2), (2.0, 2)])
    def test_V_moment_recursion(self, beta, n):
        # (V_n)_x = 2 (V_{n-1})_{x+2} / (x+1)
        base = StandardWeight(beta)
        prev = base.iterate_V(n - 1) if n > 1 else base
        cur = prev.iterate_V(1)
        for x in (1.0, 3.0, 5.0, 7.0):
            lhs = cur.moment(x)
            rhs = 2.0 * prev.moment(x + 2.0) / (x + 1.0)
            np.testing.assert_allclose(lhs, rhs, rtol=1e-8)

    @pytest.mark.parametrize("beta,n", [(1.0, 1), (1.0, 2), (2.0, 1), (2.0, 2)])
    def test_star_moment_recursion(self, beta, n):
        # (star_n)_x = (star_{n-1})_{x+2} / (x+1)^2
        base = StandardWeight(beta)
        prev = base.iterate_star(n - 1) if n > 1 else base
        cur = prev.iterate_star(1)
        for x in (1.0, 3.0, 5.0, 7.0):
            np.testing.assert_allclose(cur.moment(x),
                                       prev.moment(x + 2.0) / (x + 1.0) ** 2,
                                       rtol=1e-8)

    def test_star_value_oracle(self, std1):
        # W1(1/2) = int_{1/2}^1 s log(2s) ds = log(2)/2 - 3/16
        w1 = std1.iterate_star(1)
        np.testing.assert_allclose(w1.density(np.array([0.5]))[0],
                                   math.log(2.0) / 2.0 - 3.0 / 16.0, rtol=1e-12)

    def test_star_growth_band(self, std1):
        # W1(r)/(1-r)^2 bounded above and below on [1/2, 0.999]
        w1 = std1.iterate_star(1)
        r = np.linspace(0.5, 0.999, 40)
        band = w1.density(r) / (1.0 - r) ** 2
        assert band.max() / band.min() < 2.0
        assert 0.3 < band.min() and band.max() < 1.0

    def test_star_growth_band_second_iterate(self, std1):
        # W2(r)/(1-r)^4 stays in a fixed band as well
        w2 = std1.iterate_star(2)
        r = np.linspace(0.5, 0.999, 40)
        band = w2.density(r) / (1.0 - r) ** 4
        assert band.max() / band.min() < 4.0

    def test_star_rejects_zero(self, std1):
        with pytest.raises(WeightError):
            std1.iterate_star(1).density(0.0)

    def test_depth_cap(self, std1):
        with pytest.raises(WeightError):
            std1.iterate_V(5)

    @pytest.mark.parametrize("beta,n", [(1.0, 1), (1.0, 2), (2.0, 1), (2.0, 2)])
    def test_v_of_mu_plus_upper_bound(self, beta, n):
        # V_n of mu_plus is dominated by tail(r) (1-r)^n up to a constant
        w = StandardWeight(beta)
        vn = w.mu_plus().iterate_V(n)
        r = np.linspace(0.05, 0.98, 30)
        ratio = vn.density(r) / (w.tail(r) * (1.0 - r) ** n)
        assert ratio.max() < 4.0

    @pytest.mark.parametrize("beta,n", [(1.0, 1), (2.0, 1), (1.0, 2)])
    def test_v_of_mu_plus_tail_lower_bound(self, beta, n):
        # tail of V_n(mu_plus) dominates tail(r) (1-r)^(n+1) on [1/2, 1)
        w = StandardWeight(beta)
        vn = w.mu_plus().iterate_V(n)
        r = np.linspace(0.5, 0.999, 25)
        ratio = vn.tail(r) / (w.tail(r) * (1.0 - r) ** (n + 1))
        assert ratio.min() > 0.05

    def test_power_tail_weight(self, std1):
        # tail^2/(1-r)^2 = 1 for beta = 1
        pt = std1.power_tail(2.0)
        r = np.array([0.1, 0.5, 0.9])
        np.testing.assert_allclose(pt.density(r), 1.0, rtol=1e-12)

    def test_times_power(self, std1):
        tw = std1.times_power(2.0)
        r = np.array([0.25, 0.75])
        np.testing.assert_allclose(tw.density(r), (1.0 - r) ** 2, rtol=1e-13)


class TestCaches:
    def test_moment_cache_idempotent(self, std2):
        a = std2.moment(7.0)
        b = std2.moment(7.0)
        assert a == b

    def test_odd_moments_batch(self, std2):
        mus = std2.odd_moments(10)
        expect = [std2.moment(2 * n + 1) for n in range(10)]
        np.testing.assert_allclose(mus, expect, rtol=1e-12)

    def test_concurrent_reads_identical(self):
        # concurrent cache population may duplicate work but never changes
        # the values (pure evaluation, fixed summation order)
        from concurrent.futures import ThreadPoolExecutor
        xs = [1.0, 3.0, 5.0, 7.0, 9.0] * 4
        w1 = StandardWeight(0.5).mu_plus()
        with ThreadPoolExecutor(max_workers=4) as ex:
            got = list(ex.map(w1.moment, xs))
        w2 = StandardWeight(0.5).mu_plus()
        expect = [w2.moment(x) for x in xs]
        assert got == expect
