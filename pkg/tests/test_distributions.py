# SPDX-FileCopyrightText: 2024-present Brian McClune <bpmcclune@gmail.com>
#
# SPDX-License-Identifier: MIT
import itertools
import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate, stats

from pyzaqr.distributions import (
    NORMAL_CLAMP_LOW,
    ContinuousFamily,
    MeanDispersionParams,
    ZeroAdjustedParams,
    cdf_continuous,
    cdf_zar,
    interval_probability,
    logpdf_zar,
    normal_cdf,
    normal_quantile,
    normal_quantile_log,
    pdf_continuous,
    pdf_zar,
    quantile_continuous,
    sample_continuous,
    sample_zar,
    sf_continuous,
    sf_zar,
    variance_continuous,
)
from pyzaqr.errors import DomainError

BETA = ContinuousFamily.BETA01
GAMMA = ContinuousFamily.GAMMA
IG = ContinuousFamily.INVERSE_GAUSSIAN

mpmath.mp.dps = 50

GRIDS = {
    BETA: ([0.2, 0.35, 0.5, 0.65, 0.8], [5.0, 10.0, 20.0, 50.0, 100.0]),
    GAMMA: ([0.5, 1.0, 2.0, 5.0, 10.0], [0.05, 0.1, 0.25, 0.5, 1.0]),
    IG: ([0.5, 1.0, 2.0, 5.0, 10.0], [0.05, 0.1, 0.25, 0.5, 1.0]),
}


def grid(family):
    mus, phis = GRIDS[family]
    return [MeanDispersionParams(mu, phi)
            for mu, phi in itertools.product(mus, phis)]


def all_grid_params():
    return [(family, p) for family in GRIDS for p in grid(family)]


def mp_beta_pdf(y, mu, phi):
    a, b = mpmath.mpf(mu) * phi, (1 - mpmath.mpf(mu)) * phi
    return y ** (a - 1) * (1 - y) ** (b - 1) / mpmath.beta(a, b)


def mp_ig_pdf(y, mu, phi):
    y, mu, phi = mpmath.mpf(y), mpmath.mpf(mu), mpmath.mpf(phi)
    return mpmath.exp(-(y - mu) ** 2 / (2 * phi * mu ** 2 * y)) / \
        mpmath.sqrt(2 * mpmath.pi * phi * y ** 3)


class TestFamily:

    def test_parse_aliases(self):
        assert ContinuousFamily.parse('zabe') is BETA
        assert ContinuousFamily.parse('Gamma') is GAMMA
        assert ContinuousFamily.parse('inverse-gaussian') is IG
        assert ContinuousFamily.parse('ZAIG') is IG

    def test_parse_unknown(self):
        with pytest.raises(DomainError):
            ContinuousFamily.parse('zarbs')

    def test_short_names(self):
        assert [f.short_name for f in ContinuousFamily] == \
            ['ZABE', 'ZAGA', 'ZAIG']


class TestContinuous:

    def test_beta_uniform_cdf(self):
        assert cdf_continuous(BETA, MeanDispersionParams(0.5, 2.0), 0.25) == \
            pytest.approx(0.25, abs=1e-14)

    def test_gamma_exponential_pdf(self):
        assert pdf_continuous(GAMMA, MeanDispersionParams(1.0, 1.0), 1.0) == \
            pytest.approx(math.exp(-1.0), rel=1e-14)

    def test_inverse_gaussian_pdf_oracle(self):
        expected = float(mp_ig_pdf(2, 2, 0.5))
        assert pdf_continuous(IG, MeanDispersionParams(2.0, 0.5), 2.0) == \
            pytest.approx(expected, rel=1e-12)

    @pytest.mark.parametrize('family, p', all_grid_params())
    def test_pdf_integrates_to_one(self, family, p):
        # split at the quartiles so quadrature sees the peak
        cuts = [0.0] + list(quantile_continuous(family, p, [0.25, 0.5, 0.75]))
        cuts.append(family.support[1])
        total = sum(
            integrate.quad(lambda y: pdf_continuous(family, p, y), lo, hi,
                           epsabs=1e-12, epsrel=1e-12, limit=200)[0]
            for lo, hi in zip(cuts[:-1], cuts[1:]))
        assert total == pytest.approx(1.0, abs=1e-7)

    @pytest.mark.parametrize('family, p', all_grid_params())
    def test_quantile_round_trip(self, family, p):
        q = np.linspace(0.01, 0.99, 99)
        y = quantile_continuous(family, p, q)
        np.testing.assert_allclose(cdf_continuous(family, p, y), q,
                                   rtol=0, atol=1e-9)

    @pytest.mark.parametrize('family, p', all_grid_params())
    def test_sf_complements_cdf(self, family, p):
        y = quantile_continuous(family, p, [0.1, 0.5, 0.9])
        np.testing.assert_allclose(
            cdf_continuous(family, p, y) + sf_continuous(family, p, y), 1.0,
            atol=1e-12)

    def test_variance_conventions(self):
        p = MeanDispersionParams(2.0, 0.5)
        assert variance_continuous(BETA, MeanDispersionParams(0.3, 9.0)) == \
            pytest.approx(0.3 * 0.7 / 10.0)
        assert variance_continuous(GAMMA, p) == pytest.approx(2.0)
        assert variance_continuous(IG, p) == pytest.approx(4.0)

    @pytest.mark.parametrize('family, p', all_grid_params())
    def test_moments_match_variance(self, family, p):
        cuts = [0.0] + list(quantile_continuous(
            family, p, [0.01, 0.25, 0.5, 0.75, 0.99, 0.9999]))
        cuts.append(family.support[1])

        def moment(func):
            return sum(
                integrate.quad(
                    lambda y: func(y) * pdf_continuous(family, p, y), lo, hi,
                    epsabs=1e-12, epsrel=1e-12, limit=200)[0]
                for lo, hi in zip(cuts[:-1], cuts[1:]))

        assert moment(lambda y: y) == pytest.approx(p.mu, rel=1e-6)
        assert moment(lambda y: (y - p.mu) ** 2) == \
            pytest.approx(variance_continuous(family, p), rel=1e-6)

    @pytest.mark.parametrize('family, p', [
        (BETA, MeanDispersionParams(0.3, 20.0)),
        (GAMMA, MeanDispersionParams(2.0, 0.5)),
        (IG, MeanDispersionParams(2.0, 0.5)),
    ])
    def test_sampler_matches_cdf(self, family, p):
        rng = np.random.default_rng(20190)
        draws = sample_continuous(family, p, rng, (100_000,))
        result = stats.kstest(draws, lambda y: cdf_continuous(family, p, y))
        assert result.pvalue > 0.001
        assert np.all(draws > 0.0)

    @pytest.mark.slow
    def test_sampler_matches_cdf_on_grid(self):
        rng = np.random.default_rng(2019)
        pvalues = []
        for family, p in all_grid_params():
            draws = sample_continuous(family, p, rng, (100_000,))
            assert np.all(draws > 0.0)
            pvalues.append(stats.kstest(
                draws, lambda y: cdf_continuous(family, p, y)).pvalue)
        pvalues = np.array(pvalues)
        # a handful below 0.01 is expected over the whole grid
        assert np.sum(pvalues < 0.01) <= 4
        assert pvalues.min() > 1e-4

    @pytest.mark.parametrize('bad', [
        MeanDispersionParams(0.0, 1.0),
        MeanDispersionParams(1.0, 1.0),
        MeanDispersionParams(0.5, 0.0),
        MeanDispersionParams(0.5, -2.0),
        MeanDispersionParams(math.nan, 1.0),
    ])
    def test_beta_parameter_domain(self, bad):
        with pytest.raises(DomainError):
            cdf_continuous(BETA, bad, 0.5)

    @pytest.mark.parametrize('y', [-0.1, 1.0, 1.5])
    def test_beta_support(self, y):
        with pytest.raises(DomainError):
            pdf_continuous(BETA, MeanDispersionParams(0.5, 2.0), y)

    def test_positive_support(self):
        with pytest.raises(DomainError):
            pdf_continuous(GAMMA, MeanDispersionParams(1.0, 1.0), 0.0)

    @pytest.mark.parametrize('q', [0.0, 1.0, -0.5])
    def test_quantile_level_domain(self, q):
        with pytest.raises(DomainError):
            quantile_continuous(GAMMA, MeanDispersionParams(1.0, 1.0), q)


class TestZeroAdjusted:

    def test_beta_density_is_scaled(self):
        zp = ZeroAdjustedParams.from_arrays(BETA, 0.2, 0.3, 54.6)
        expected = 0.8 * float(mp_beta_pdf(mpmath.mpf('0.3'), 0.3, 54.6))
        assert pdf_zar(zp, 0.3) == pytest.approx(expected, rel=1e-11)

    def test_mass_at_zero(self):
        zp = ZeroAdjustedParams.from_arrays(GAMMA, 0.37, 2.0, 0.5)
        assert pdf_zar(zp, 0.0) == pytest.approx(0.37, rel=1e-15)
        assert logpdf_zar(zp, 0.0) == pytest.approx(math.log(0.37))

    @pytest.mark.parametrize('family, mu, phi', [
        (BETA, 0.3, 54.6), (GAMMA, 2.0, 0.5), (IG, 2.0, 0.5)])
    def test_cdf_at_zero_is_alpha(self, family, mu, phi):
        zp = ZeroAdjustedParams.from_arrays(family, 0.2718, mu, phi)
        assert cdf_zar(zp, 0.0) == 0.2718

    @pytest.mark.parametrize('family, mu, phi, y', [
        (BETA, 0.3, 54.6, 0.31), (GAMMA, 2.0, 0.5, 1.7), (IG, 2.0, 0.5, 2.2)])
    def test_cdf_matches_integrated_density(self, family, mu, phi, y):
        zp = ZeroAdjustedParams.from_arrays(family, 0.25, mu, phi)
        mass, _ = integrate.quad(lambda t: pdf_zar(zp, t), 0.0, y,
                                 epsabs=1e-12, epsrel=1e-12, limit=200)
        assert cdf_zar(zp, y) == pytest.approx(0.25 + mass, abs=1e-8)

    @pytest.mark.parametrize('family, mu, phi, upper', [
        (BETA, 0.3, 54.6, 1.0), (GAMMA, 2.0, 0.5, 40.0), (IG, 2.0, 0.5, 40.0)])
    def test_cdf_nondecreasing(self, family, mu, phi, upper):
        zp = ZeroAdjustedParams.from_arrays(family, 0.4, mu, phi)
        y = np.linspace(0.0, upper, 2001)
        values = cdf_zar(zp, y)
        assert np.all(np.diff(values) >= 0.0)
        assert np.all((values >= 0.4) & (values <= 1.0))

    def test_sf_complements_cdf(self):
        zp = ZeroAdjustedParams.from_arrays(IG, 0.3, 2.0, 0.5)
        y = np.array([0.5, 2.0, 8.0])
        np.testing.assert_allclose(cdf_zar(zp, y) + sf_zar(zp, y), 1.0,
                                   atol=1e-12)

    def test_interval_probability(self):
        zp = ZeroAdjustedParams.from_arrays(BETA, 0.2, 0.3, 54.6)
        p = interval_probability(zp, 0.0, 0.01)
        cont = cdf_continuous(BETA, MeanDispersionParams(0.3, 54.6), 0.01)
        assert p == pytest.approx(0.8 * cont, rel=1e-12)
        with pytest.raises(DomainError):
            interval_probability(zp, 0.5, 0.2)

    @pytest.mark.parametrize('alpha', [0.0, 1.0, 1.2])
    def test_alpha_domain(self, alpha):
        with pytest.raises(DomainError):
            ZeroAdjustedParams.from_arrays(BETA, alpha, 0.3, 54.6)

    def test_negative_response(self):
        zp = ZeroAdjustedParams.from_arrays(GAMMA, 0.3, 1.0, 1.0)
        with pytest.raises(DomainError):
            cdf_zar(zp, -1.0)

    def test_take_broadcasts(self):
        zp = ZeroAdjustedParams.from_arrays(GAMMA, 0.3, [1.0, 2.0, 3.0], 0.5)
        assert len(zp) == 3
        sub = zp.take([0, 2])
        np.testing.assert_array_equal(sub.cont.mu, [1.0, 3.0])
        np.testing.assert_array_equal(sub.alpha, [0.3, 0.3])

    @pytest.mark.parametrize('family, mu, phi', [
        (BETA, 0.3, 54.6), (GAMMA, 2.0, 0.5), (IG, 2.0, 0.5)])
    def test_sampler_zero_fraction_and_mean(self, family, mu, phi):
        n = 1_000_000
        alpha = 0.3
        zp = ZeroAdjustedParams.from_arrays(family, alpha, mu, phi)
        y = sample_zar(zp, np.random.default_rng(2019), (n,))
        zero = y == 0.0
        band = 4.0 * math.sqrt(alpha * (1.0 - alpha) / n)
        assert abs(zero.mean() - alpha) < band
        positive = y[~zero]
        sd = math.sqrt(variance_continuous(
            family, MeanDispersionParams(mu, phi)) / positive.size)
        assert abs(positive.mean() - mu) < 4.0 * sd

    def test_sampler_is_reproducible(self):
        zp = ZeroAdjustedParams.from_arrays(BETA, 0.3, 0.3, 54.6)
        a = sample_zar(zp, np.random.default_rng(5), (50,))
        b = sample_zar(zp, np.random.default_rng(5), (50,))
        np.testing.assert_array_equal(a, b)


class TestNormal:

    def test_cdf(self):
        assert normal_cdf(0.0) == 0.5
        assert normal_cdf(-1.3) == pytest.approx(1.0 - normal_cdf(1.3),
                                                 abs=1e-15)

    def test_quantile_oracle(self):
        expected = float(mpmath.sqrt(2) * mpmath.erfinv(
            2 * mpmath.mpf('0.975') - 1))
        assert normal_quantile(0.975) == pytest.approx(expected, rel=1e-14)
        assert normal_quantile(0.975) == pytest.approx(1.959963985, abs=1e-9)

    @pytest.mark.parametrize('q', [0.0, 1.0])
    def test_quantile_domain(self, q):
        with pytest.raises(DomainError):
            normal_quantile(q)

    def test_quantile_log_matches_quantile(self):
        assert normal_quantile_log(math.log(1e-20)) == pytest.approx(
            normal_quantile(1e-20), rel=1e-12)

    def test_quantile_log_clamps_deep_tail(self):
        assert normal_quantile_log(-800.0) == pytest.approx(
            normal_quantile(NORMAL_CLAMP_LOW), rel=1e-12)

    @settings(max_examples=200)
    @given(st.floats(min_value=1e-12, max_value=1.0 - 1e-12))
    def test_quantile_inverts_cdf(self, q):
        assert normal_cdf(normal_quantile(q)) == pytest.approx(q, rel=1e-9)
