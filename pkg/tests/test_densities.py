import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from pytest import approx
from scipy.integrate import quad

from rootflow import chebyshev as ch
from rootflow import densities as dn
from rootflow.errors import ConstructionError, DomainError

SEMICIRCLE = dn.Semicircle(vanish_time=1.0)
MP1 = dn.MarchenkoPastur(ratio=1.0)
MP15 = dn.MarchenkoPastur(ratio=15.0)
ARCSINE = dn.Arcsine()


class TestEval:
    def test_semicircle_center_value(self):
        assert SEMICIRCLE.eval(0.0, 0.0) == approx(2.0 / np.pi)

    def test_semicircle_outside_support(self):
        # at t = 0.75 the support is [-0.5, 0.5]
        assert SEMICIRCLE.eval(0.75, 0.6) == 0.0

    def test_mp_edges_at_zero_ratio(self):
        fam = dn.MarchenkoPastur(ratio=0.0)
        sup = fam.support(0.0)
        assert sup.a == approx(0.0)
        assert sup.b == approx(4.0)

    def test_zero_at_support_endpoints(self):
        for fam, t in ((SEMICIRCLE, 0.3), (MP1, 0.2)):
            sup = fam.support(t)
            assert fam.eval(t, sup.a) == 0.0
            assert fam.eval(t, sup.b) == 0.0

    def test_time_window_enforced(self):
        with pytest.raises(DomainError):
            SEMICIRCLE.eval(1.0, 0.0)
        with pytest.raises(DomainError):
            MP1.eval(-0.1, 1.0)
        with pytest.raises(DomainError):
            dn.MarchenkoPastur(2.0).eval(1.0, 1.0)


class TestSupport:
    def test_semicircle_shrinks(self):
        sup = SEMICIRCLE.support(0.36)
        assert sup.a == approx(-0.8)
        assert sup.b == approx(0.8)

    def test_arcsine_fixed(self):
        for t in (0.0, 3.0, 100.0):
            sup = ARCSINE.support(t)
            assert (sup.a, sup.b) == (-1.0, 1.0)

    def test_mp_unit_ratio(self):
        sup = MP1.support(0.0)
        assert sup.a == approx((math.sqrt(2) - 1) ** 2)
        assert sup.b == approx((math.sqrt(2) + 1) ** 2)


class TestHilbert:
    def test_arcsine_vanishes(self):
        assert ARCSINE.hilbert(0.0, 0.5) == 0.0

    def test_semicircle_linear(self):
        assert SEMICIRCLE.hilbert(0.0, 0.3) == approx(0.6 / np.pi)

    def test_mp_zero_at_ratio_point(self):
        assert MP1.hilbert(0.0, 1.0) == approx(0.0)

    def test_outside_open_support_rejected(self):
        with pytest.raises(DomainError):
            SEMICIRCLE.hilbert(0.0, 1.0)

    @pytest.mark.parametrize(
        "fam,t", [(SEMICIRCLE, 0.0), (SEMICIRCLE, 0.4), (MP1, 0.0), (MP15, 0.5)]
    )
    def test_matches_principal_value_quadrature(self, fam, t):
        # brute-force oracle: pv integral via the substitution
        # y = center + halfwidth*cos(theta), symmetric exclusion at the pole
        sup = fam.support(t)
        mid, hw = sup.center, 0.5 * sup.width
        for frac in (-0.52, 0.11, 0.6):
            x0 = mid + frac * hw
            theta0 = np.arccos((x0 - mid) / hw)
            integrand = lambda th: np.asarray(
                fam.eval(t, mid + hw * np.cos(th))
            ) * hw * np.sin(th) / (x0 - mid - hw * np.cos(th))
            eps = 1e-7
            pv = (
                quad(integrand, 0, theta0 - eps, limit=400)[0]
                + quad(integrand, theta0 + eps, np.pi, limit=400)[0]
            )
            assert fam.hilbert(t, x0) == approx(pv / np.pi, abs=2e-6)


class TestMass:
    def test_semicircle_linear_loss(self):
        assert SEMICIRCLE.mass(0.25) == approx(0.75)

    def test_mp_probability(self):
        assert dn.MarchenkoPastur(2.0).mass(0.0) == approx(1.0)

    def test_arcsine_default_probability(self):
        assert ARCSINE.mass(0.0) == approx(1.0)

    @pytest.mark.parametrize(
        "fam,t",
        [
            (SEMICIRCLE, 0.0),
            (SEMICIRCLE, 0.6),
            (MP1, 0.0),
            (MP1, 0.5),
            (MP15, 0.25),
            (ARCSINE, 0.0),
        ],
    )
    def test_matches_adaptive_quadrature(self, fam, t):
        sup = fam.support(t)
        val, err = quad(
            lambda x: np.asarray(fam.eval(t, x)), sup.a, sup.b, limit=400
        )
        assert fam.mass(t) == approx(val, abs=max(1e-10, 4 * err))

    def test_mass_linearity_exact(self):
        for fam in (SEMICIRCLE, MP1, MP15):
            for t in (0.1, 0.37, 0.62):
                assert fam.mass(t) == approx(fam.mass(0.0) - t, abs=1e-14)


class TestCdfQuantile:
    def test_arcsine_median(self):
        assert ARCSINE.quantile(0.0, 0.5) == approx(0.0, abs=1e-12)

    def test_semicircle_median(self):
        assert SEMICIRCLE.quantile(0.0, 0.5) == approx(0.0, abs=1e-12)

    def test_semicircle_quartile_against_quadrature_oracle(self):
        # frozen from bisection on the quad-integrated CDF
        assert SEMICIRCLE.quantile(0.0, 0.25) == approx(-0.40397275329952, abs=1e-11)

    def test_arcsine_analytic(self):
        qs = np.array([0.1, 0.25, 0.77])
        assert ARCSINE.quantile(0.0, qs) == approx(-np.cos(np.pi * qs))

    @pytest.mark.parametrize("fam,t", [(SEMICIRCLE, 0.2), (MP1, 0.0), (MP15, 0.5)])
    def test_cdf_matches_quadrature(self, fam, t):
        sup = fam.support(t)
        mass = fam.mass(t)
        for frac in (0.15, 0.5, 0.83):
            x = sup.a + frac * sup.width
            val = quad(lambda y: np.asarray(fam.eval(t, y)), sup.a, x, limit=400)[0]
            assert fam.cdf(t, x) == approx(val / mass, abs=1e-9)

    def test_quantile_strictly_increasing(self):
        qs = np.linspace(0.01, 0.99, 41)
        for fam, t in ((SEMICIRCLE, 0.0), (MP1, 0.3), (ARCSINE, 0.0)):
            xs = fam.quantile(t, qs)
            assert np.all(np.diff(xs) > 0)

    def test_quantile_inverts_cdf(self):
        qs = np.linspace(0.05, 0.95, 19)
        for fam, t in ((SEMICIRCLE, 0.1), (MP1, 0.0), (MP15, 0.4)):
            xs = fam.quantile(t, qs)
            assert fam.cdf(t, xs) == approx(qs, abs=1e-10)

    def test_rejects_bad_level(self):
        with pytest.raises(DomainError):
            SEMICIRCLE.quantile(0.0, 1.5)


class TestSampleRoots:
    def test_arcsine_two_points(self):
        cfg = ARCSINE.sample_roots(0.0, 2)
        assert cfg.roots == approx([-np.sqrt(2) / 2, np.sqrt(2) / 2])

    def test_semicircle_median_element(self):
        cfg = SEMICIRCLE.sample_roots(0.0, 3)
        assert cfg.roots[1] == approx(0.0, abs=1e-12)

    @pytest.mark.parametrize("fam", [SEMICIRCLE, MP1, ARCSINE])
    def test_sorted_and_inside_support(self, fam):
        cfg = fam.sample_roots(0.0, 5)
        assert np.all(np.diff(cfg.roots) > 0)
        sup = fam.support(0.0)
        assert np.all((cfg.roots > sup.a) & (cfg.roots < sup.b))

    def test_ks_bound(self):
        n = 64
        for fam in (SEMICIRCLE, MP1):
            cfg = fam.sample_roots(0.0, n)
            qs = fam.cdf(0.0, cfg.roots)
            upper = np.arange(1, n + 1) / n
            lower = np.arange(n) / n
            ks = max(np.max(np.abs(upper - qs)), np.max(np.abs(lower - qs)))
            assert ks <= 1.0 / n + 1e-12

    def test_needs_two(self):
        with pytest.raises(DomainError):
            SEMICIRCLE.sample_roots(0.0, 1)


class TestTransportResidual:
    @pytest.mark.parametrize("t", [0.0, 0.4, 0.8])
    def test_semicircle_solves_equation(self, t):
        sup = SEMICIRCLE.support(t)
        xs = sup.center + 0.9 * 0.5 * sup.width * np.linspace(-1, 1, 101)
        assert np.max(dn.transport_residual(SEMICIRCLE, t, xs)) < 1e-6

    @pytest.mark.parametrize("fam", [MP1, MP15])
    @pytest.mark.parametrize("t", [0.0, 0.5])
    def test_mp_solves_equation(self, fam, t):
        sup = fam.support(t)
        xs = sup.center + 0.9 * 0.5 * sup.width * np.linspace(-1, 1, 101)
        assert np.max(dn.transport_residual(fam, t, xs)) < 1e-6

    def test_semicircle_flux_derivative_formula(self):
        # (1/pi) d/dx arctan(x / sqrt(s - x^2)) = 1/(pi sqrt(s - x^2))
        t = 0.2
        xs = np.linspace(-0.6, 0.6, 25)
        h = 1e-5
        fd = (dn.flux(SEMICIRCLE, t, xs + h) - dn.flux(SEMICIRCLE, t, xs - h)) / (2 * h)
        assert fd == approx(dn.flux_derivative(SEMICIRCLE, t, xs), abs=1e-6)

    def test_mp_flux_derivative_formula(self):
        t = 0.3
        sup = MP1.support(t)
        xs = np.linspace(sup.a + 0.3, sup.b - 0.3, 25)
        h = 1e-5
        fd = (dn.flux(MP1, t, xs + h) - dn.flux(MP1, t, xs - h)) / (2 * h)
        assert fd == approx(dn.flux_derivative(MP1, t, xs), abs=1e-6)
        # and the time derivative of the density is its negative
        ut = (np.asarray(MP1.eval(t + h, xs)) - np.asarray(MP1.eval(t - h, xs))) / (
            2 * h
        )
        assert ut == approx(-dn.flux_derivative(MP1, t, xs), abs=1e-6)


class TestSpectralAgreement:
    @pytest.mark.parametrize(
        "fam,t", [(SEMICIRCLE, 0.0), (SEMICIRCLE, 0.5), (MP1, 0.0), (MP15, 0.3)]
    )
    def test_hilbert_matches_chebyshev_pipeline(self, fam, t):
        sup = fam.support(t)
        xmap = lambda xi: sup.center + 0.5 * sup.width * xi
        g_w = lambda xi: np.asarray(fam.eval(t, xmap(xi))) * np.sqrt(1 - xi * xi)
        series = ch.project_weighted(g_w, 128)
        hu = ch.finite_hilbert_weighted(series)
        xi = np.linspace(-0.9, 0.9, 41)
        spectral = ch.eval_series(hu, xi)
        exact = np.asarray(fam.hilbert(t, xmap(xi)))
        assert np.max(np.abs(spectral - exact)) < 1e-8

    def test_arcsine_weighted_projection_annihilated(self):
        g_w = lambda xi: np.asarray(ARCSINE.eval(0.0, xi)) * np.sqrt(1 - xi * xi)
        series = ch.project_weighted(g_w, 128)
        hu = ch.finite_hilbert_weighted(series)
        _, nodes = ch.gauss_chebyshev_nodes(101)
        assert np.max(np.abs(ch.eval_series(hu, nodes))) < 1e-8

    def test_sqrtweight_route_for_semicircle(self):
        # u = (2/pi) sqrt(1-x^2) is U_0 in the sqrt-weighted basis
        series = ch.ChebSeries("U", [2.0 / np.pi])
        hu = ch.finite_hilbert_sqrtweight(series)
        xs = np.linspace(-0.9, 0.9, 21)
        assert ch.eval_series(hu, xs) == approx(
            np.asarray(SEMICIRCLE.hilbert(0.0, xs)), abs=1e-14
        )


class TestValidation:
    def test_support_interval_orders(self):
        with pytest.raises(ConstructionError):
            dn.SupportInterval(1.0, -1.0)

    def test_family_parameter_validation(self):
        with pytest.raises(ConstructionError):
            dn.Semicircle(vanish_time=-1.0)
        with pytest.raises(ConstructionError):
            dn.MarchenkoPastur(ratio=-0.5)
        with pytest.raises(ConstructionError):
            dn.Arcsine(amplitude=0.0)

    @settings(max_examples=25, deadline=None)
    @given(st.floats(0.01, 0.95), st.floats(0.0, 20.0))
    def test_mp_mass_and_support_consistent(self, t, c):
        fam = dn.MarchenkoPastur(ratio=c)
        sup = fam.support(t)
        # support width 4 sqrt((1-t)(c+1)) follows from the edge formulas
        assert sup.width == approx(4 * math.sqrt((1 - t) * (c + 1)), rel=1e-12)
        assert fam.mass(t) == approx(1 - t)
