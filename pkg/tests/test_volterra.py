import math

import numpy as np
import pytest

from fracvolt import TaylorSeries
from fracvolt import norms
from fracvolt import volterra as vo
from fracvolt.geometry import build_lattice
from conftest import random_polynomial


class TestMatrix:
    def test_weighted_shift_entries(self, std1):
        # g = z on H^2: subdiagonal 2/(m+1)
        M = vo.volterra_matrix(std1, TaylorSeries.monomial(1), -1, 12)
        for m in range(1, 12):
            np.testing.assert_allclose(M.entries[m, m - 1], 2.0 / (m + 1),
                                       rtol=1e-12)
        assert np.count_nonzero(np.triu(M.entries, 1)) == 0   # lower triangular

    def test_constant_symbol_is_diagonal(self, std1):
        c = 2.5
        M = vo.volterra_matrix(std1, TaylorSeries.from_coeffs([c]), -1, 8)
        mus = std1.odd_moments(8)
        np.testing.assert_allclose(np.diag(M.entries), c * mus / mus[0],
                                   rtol=1e-12)
        assert np.count_nonzero(M.entries - np.diag(np.diag(M.entries))) == 0

    def test_zero_symbol(self, std1):
        M = vo.volterra_matrix(std1, TaylorSeries.zero(), -1, 8)
        assert not np.any(M.entries)

    def test_apply_matches_composition(self, std1, std2, rng):
        for w in (std1, std2):
            f = random_polynomial(rng, 10)
            g = random_polynomial(rng, 6)
            V = vo.volterra_matrix(w, g, -1, 32)
            a = vo.apply_matrix(V, f)
            b = vo.apply_compositional(w, g, f, 32)
            np.testing.assert_allclose(a.coeffs, b.coeffs[: len(a.coeffs)],
                                       atol=1e-12)

    def test_apply_on_bergman_basis(self, std1, rng):
        # dual path in A^2_0 coordinates as well
        f = random_polynomial(rng, 8)
        g = random_polynomial(rng, 5)
        V = vo.volterra_matrix(std1, g, 0.0, 24)
        a = vo.apply_matrix(V, f)
        b = vo.apply_compositional(std1, g, f, 24)
        np.testing.assert_allclose(a.coeffs, b.coeffs[: len(a.coeffs)],
                                   atol=1e-12)

    def test_image_of_constant_is_symbol(self, std1):
        g = TaylorSeries.monomial(1)
        V = vo.volterra_matrix(std1, g, -1, 8)
        img = vo.apply_matrix(V, TaylorSeries.from_coeffs([1.0]))
        np.testing.assert_allclose(img.coeffs, g.coeffs.tolist() , atol=1e-14)

    def test_zero_input(self, std1):
        V = vo.volterra_matrix(std1, TaylorSeries.monomial(1), -1, 8)
        out = vo.apply_matrix(V, TaylorSeries.zero())
        assert not np.any(out.coeffs)

    def test_dimension_guard(self, std1, rng):
        V = vo.volterra_matrix(std1, TaylorSeries.monomial(1), -1, 8)
        with pytest.raises(vo.OperatorError):
            vo.apply_matrix(V, random_polynomial(rng, 20))

    def test_json_dump_roundtrip(self, std1, rng):
        M = vo.volterra_matrix(std1, random_polynomial(rng, 4), 0.0, 8)
        M2 = vo.OperatorMatrix.from_json(M.to_json())
        np.testing.assert_array_equal(M2.entries, M.entries)
        assert M2.alpha == M.alpha and M2.kind == M.kind


class TestToeplitz:
    def test_zero_symbol(self, std1):
        T = vo.toeplitz_matrix(std1, TaylorSeries.zero(), -1, 6)
        assert not np.any(T.entries)

    def test_corner_entry_matches_lp_integral(self, std1):
        # <T e_0, e_0> = total mass of |D(g)|^2 mu_hat^2/(1-|z|) dA = 1.6
        T = vo.toeplitz_matrix(std1, TaylorSeries.monomial(1), -1, 4)
        np.testing.assert_allclose(T.entries[0, 0].real, 1.6, rtol=1e-11)

    def test_hermitian_psd(self, std1, rng):
        g = random_polynomial(rng, 6)
        T = vo.toeplitz_matrix(std1, g, 0.0, 32)
        np.testing.assert_allclose(T.entries, T.entries.conj().T, atol=1e-12)
        assert np.linalg.eigvalsh(T.entries).min() > -1e-10

    def test_quadratic_form_is_measure_integral(self, std1, rng):
        # <T f, f> = int |f|^2 dmu_g, checked against direct quadrature
        from fracvolt.quad import _panel_grid
        g = TaylorSeries.monomial(1)
        f = random_polynomial(rng, 5)
        T = vo.toeplitz_matrix(std1, g, -1, 16)
        c = vo.basis_norms(-1.0, 16)
        v = np.zeros(16, dtype=complex)
        v[: f.degree + 1] = f.coeffs * c[: f.degree + 1]
        got = float(np.real(np.conj(v) @ (T.entries @ v)))
        _, nodes, weights = _panel_grid(24, 48, 32)
        rr, ww = nodes.ravel(), weights.ravel()
        m = 256
        zeta = rr[:, None] * np.exp(2j * np.pi * np.arange(m)[None, :] / m)
        dens = np.abs(f(zeta)) ** 2 * np.abs(4.0 * zeta) ** 2
        radial = (1.0 - rr) ** 2 / (1.0 - rr)
        expect = float(np.sum(2.0 * ww * rr * radial * dens.mean(axis=1)))
        np.testing.assert_allclose(got, expect, rtol=1e-10)


class TestSpectra:
    def test_zero_matrix(self, std1):
        s = vo.singular_values(vo.volterra_matrix(std1, TaylorSeries.zero(), -1, 6))
        assert not np.any(s.values)

    def test_diagonal_matrix(self, std1):
        M = vo.volterra_matrix(std1, TaylorSeries.from_coeffs([2.0]), -1, 6)
        s = vo.singular_values(M)
        np.testing.assert_allclose(
            s.values, np.sort(np.abs(np.diag(M.entries)))[::-1], rtol=1e-13)

    def test_weighted_shift_column_norms(self, std1, std2):
        # orthogonal columns: singular values equal column norms exactly
        for w, alpha in ((std1, -1.0), (std1, 0.0), (std2, -1.0), (std2, 2.0)):
            M = vo.volterra_matrix(w, TaylorSeries.monomial(1), alpha, 24)
            s = vo.singular_values(M)
            cols = np.sort(np.linalg.norm(M.entries, axis=0))[::-1]
            np.testing.assert_allclose(s.values, cols, atol=1e-12)

    def test_shift_n4_values(self, std1):
        s = vo.singular_values(vo.volterra_matrix(std1, TaylorSeries.monomial(1),
                                                  -1, 4))
        np.testing.assert_allclose(s.values, [1.0, 2.0 / 3.0, 0.5, 0.0],
                                   atol=1e-14)


class TestSchatten:
    def test_zero_spectrum(self):
        s = vo.SingularSpectrum(np.zeros(5), 5)
        assert vo.schatten_norm(s, 2.0).value == 0.0

    def test_s2_closed_form_series(self, std1):
        est = vo.schatten_with_monitor(std1, TaylorSeries.monomial(1), -1,
                                       2.0, 512)
        target = math.sqrt(4.0 * (math.pi ** 2 / 6.0 - 1.0))
        assert abs(est.value - target) / target < 0.01
        assert not est.diverged

    def test_p1_harmonic_divergence(self, std1):
        prof = vo.schatten_truncation_profile(std1, TaylorSeries.monomial(1),
                                              -1, 1.0, [64, 128, 256, 512])
        assert all(a < b for a, b in zip(prof, prof[1:]))
        assert prof[-1] / prof[-2] > vo.NO_PLATEAU_RATIO

    def test_p2_plateau(self, std1):
        prof = vo.schatten_truncation_profile(std1, TaylorSeries.monomial(1),
                                              -1, 2.0, [64, 128, 256, 512])
        assert prof[-1] / prof[-2] < vo.PLATEAU_RATIO

    def test_cutoff_consistency_with_tail_test(self, std1):
        # divergence regime matches the integrability verdict of tail^p/(1-r)^2
        assert norms.tail_weight_test(std1, 1.0) == "not-a-weight"
        est = vo.schatten_with_monitor(std1, TaylorSeries.monomial(1), -1,
                                       1.0, 256)
        assert est.diverged
        assert norms.tail_weight_test(std1, 2.0) == "weight"

    def test_schatten_monotone_in_p(self, std1, rng):
        g = random_polynomial(rng, 5)
        s = vo.singular_values(vo.volterra_matrix(std1, g, -1, 64))
        values = [vo.schatten_norm(s, p).value for p in (0.5, 1.0, 2.0, 4.0)]
        assert all(a >= b for a, b in zip(values, values[1:]))

    def test_comparable_to_besov(self, std1, rng):
        # || V ||_{S_2} against || g ||_{B_2} across a small corpus
        ratios = []
        for g in [TaylorSeries.monomial(1), TaylorSeries.monomial(8),
                  random_polynomial(rng, 12)]:
            s = vo.schatten_with_monitor(std1, g, -1, 2.0, 256).value
            b = norms.besov_mu(g, std1, 2.0).value ** 0.5
            ratios.append(s / b)
        ratios = np.array(ratios)
        assert ratios.max() / ratios.min() < 1e3


class TestLatticeSum:
    def test_zero_symbol(self, std1):
        lat = build_lattice(0.5, seed=0, max_radius=0.99, verify=False)
        est = vo.lattice_schatten_sum(std1, TaylorSeries.zero(), 2.0, lat)
        assert est.value == 0.0

    def test_comparable_with_besov(self, std1):
        g = TaylorSeries.monomial(1)
        lat = build_lattice(0.5, seed=0, verify=False)
        est = vo.lattice_schatten_sum(std1, g, 2.0, lat)
        besov = norms.besov_mu(g, std1, 2.0).value
        assert est.value / besov < 32.0 and besov / est.value < 32.0

    def test_refinement_stability(self, std1):
        g = TaylorSeries.monomial(1)
        a = vo.lattice_schatten_sum(
            std1, g, 2.0, build_lattice(0.5, seed=0, verify=False)).value
        b = vo.lattice_schatten_sum(
            std1, g, 2.0, build_lattice(0.25, seed=0, verify=False)).value
        assert a / b < 4.0 and b / a < 4.0


class TestRayleigh:
    def test_zero_symbol_empty(self, std1, rng):
        out = vo.rayleigh_comparability(std1, TaylorSeries.zero(), -1,
                                        [random_polynomial(rng, 4)], 16)
        assert len(out["ratios"]) == 0

    def test_two_sided_bounds(self, std1, rng):
        corpus = [random_polynomial(rng, int(rng.integers(2, 33)))
                  for _ in range(20)]
        out = vo.rayleigh_comparability(std1, TaylorSeries.monomial(1), -1,
                                        corpus, 256)
        assert out["max_over_min"] < 100.0

    def test_scale_invariance(self, std1, rng):
        f = random_polynomial(rng, 10)
        a = vo.rayleigh_comparability(std1, TaylorSeries.monomial(1), -1,
                                      [f], 64)["ratios"][0]
        b = vo.rayleigh_comparability(std1, TaylorSeries.monomial(1), -1,
                                      [f.scale(2.0)], 64)["ratios"][0]
        np.testing.assert_allclose(a, b, rtol=1e-12)
