import math

import numpy as np
import pytest
from scipy import stats

from conftest import ks_critical_1pct, ks_statistic
from crsar.distribution import CrParams, cdf
from crsar.errors import DomainError
from crsar.sampling import (
    GENERATOR_ID,
    LocationDecomposition,
    make_rng,
    sample_amplitude,
    sample_complex,
    sample_isotropic_cauchy_radius,
)


def test_radius_examples():
    assert sample_isotropic_cauchy_radius(0.5, 1.0) == pytest.approx(math.sqrt(3), rel=1e-15)
    assert sample_isotropic_cauchy_radius(0.75, 2.0) == pytest.approx(2 * math.sqrt(15), rel=1e-15)
    r = sample_isotropic_cauchy_radius(np.array([0.1, 0.9]), 1.0)
    assert r.shape == (2,)


@pytest.mark.parametrize("u", [0.0, 1.0, -0.1, 1.5, math.nan])
def test_radius_domain(u):
    with pytest.raises(DomainError):
        sample_isotropic_cauchy_radius(u, 1.0)


def test_radius_small_u_no_cancellation():
    # r ~ gamma * sqrt(2u) for tiny u
    assert sample_isotropic_cauchy_radius(1e-20, 1.0) == pytest.approx(math.sqrt(2e-20), rel=1e-12)


def test_radius_inverts_radial_cdf():
    u = np.linspace(0.01, 0.99, 99)
    r = sample_isotropic_cauchy_radius(u, 3.0)
    np.testing.assert_allclose(1 - 3.0 / np.hypot(3.0, r), u, rtol=1e-13)


def test_unit_circle_mass():
    # P(|C| <= 1) = 1 - 1/sqrt(2) for the standard isotropic Cauchy
    z = sample_complex(CrParams(1, 0), LocationDecomposition(0, 0), 200_000, 7)
    frac = np.mean(np.hypot(z[:, 0], z[:, 1]) <= 1.0)
    expected = 1 - 1 / math.sqrt(2)
    se = math.sqrt(expected * (1 - expected) / 200_000)
    assert abs(frac - expected) < 4 * se


def test_radius_against_gaussian_construction():
    # an isotropic bivariate Cauchy is a 2-d Gaussian over an independent |N(0,1)|
    rng = np.random.default_rng(12)
    n = 50_000
    g = rng.standard_normal((n, 2)) / np.abs(rng.standard_normal(n))[:, None]
    ref = np.hypot(g[:, 0], g[:, 1])
    ours = sample_isotropic_cauchy_radius(make_rng(13).random(n) * (1 - 1e-16) + 1e-17, 1.0)
    assert stats.ks_2samp(ours, ref).pvalue > 0.01


def test_isotropy():
    z = sample_complex(CrParams(1, 0), LocationDecomposition(0, 0), 72_000, 5)
    angle = np.arctan2(z[:, 1], z[:, 0])
    counts, _ = np.histogram(angle, bins=36, range=(-math.pi, math.pi))
    chi2 = ((counts - 2000.0) ** 2 / 2000.0).sum()
    assert chi2 < stats.chi2.ppf(0.999, 35)


def test_degenerate_gamma():
    p = CrParams(1e-12, 10.0)
    x = sample_amplitude(p, 1000, 3).amplitudes
    np.testing.assert_allclose(np.median(x), 10.0, rtol=1e-9)


def test_determinism_and_seed_sensitivity():
    p = CrParams(5, 20)
    a = sample_amplitude(p, 1000, 42).amplitudes
    b = sample_amplitude(p, 1000, 42).amplitudes
    c = sample_amplitude(p, 1000, 43).amplitudes
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)
    t1 = sample_amplitude(p, 10, (1, 2, 3)).amplitudes
    assert np.array_equal(t1, sample_amplitude(p, 10, [1, 2, 3]).amplitudes)


def test_batch_metadata():
    b = sample_amplitude(CrParams(2, 3), 50, 9)
    assert b.count == 50 and b.seed == 9 and b.generator == GENERATOR_ID
    assert 0 <= b.phase < 2 * math.pi
    assert np.all(b.amplitudes >= 0)


@pytest.mark.parametrize("n", [0, -3, 2.5])
def test_bad_count(n):
    with pytest.raises(DomainError):
        sample_amplitude(CrParams(1, 1), n, 0)


def test_negative_seed():
    with pytest.raises(DomainError):
        make_rng(-1)


def test_ks_against_cdf():
    p = CrParams(5, 20)
    n = 20_000
    x = np.sort(sample_amplitude(p, n, 2024).amplitudes)
    assert ks_statistic(x, cdf(p, x)) < ks_critical_1pct(n)


def test_phase_invariance():
    p = CrParams(5, 20)
    a = sample_amplitude(p, 20_000, 1, phase=0.0).amplitudes
    b = sample_amplitude(p, 20_000, 2, phase=2.0).amplitudes
    assert stats.ks_2samp(a, b).pvalue > 0.01


class TestDecomposition:
    def test_from_phase(self):
        loc = LocationDecomposition.from_phase(5.0, 0.9)
        assert loc.norm == pytest.approx(5.0, rel=1e-15)
        loc.check(5.0)

    def test_mismatch(self):
        with pytest.raises(DomainError):
            LocationDecomposition(3.0, 4.0).check(5.1)
        with pytest.raises(DomainError):
            sample_complex(CrParams(1, 5), LocationDecomposition(3.0, 3.0), 10, 0)

    def test_complex_mean_location(self):
        # the median of each coordinate sits at the location
        z = sample_complex(CrParams(1, 5), LocationDecomposition(3.0, 4.0), 100_000, 8)
        np.testing.assert_allclose(np.median(z, axis=0), [3.0, 4.0], atol=0.03)


def test_degenerate_complex_scale():
    z = sample_complex(CrParams(1e-12, 5.0), LocationDecomposition(3.0, 4.0), 5, 11)
    np.testing.assert_allclose(z, np.tile([3.0, 4.0], (5, 1)), atol=1e-6)


def test_radius_at_gamma_quantile():
    assert sample_isotropic_cauchy_radius(1 - 1 / math.sqrt(2), 1.0) == pytest.approx(1.0, rel=1e-14)


def test_amplitude_cdf_at_one():
    x = sample_amplitude(CrParams(1, 0), 10**6, 77).amplitudes
    p = 1 - 1 / math.sqrt(2)
    assert abs(np.mean(x <= 1.0) - p) < 3 * math.sqrt(p * (1 - p) / 1e6)


@pytest.mark.parametrize("g,d", [(5.0, 20.0), (50.0, 100.0), (20.0, 1.0)])
def test_binned_chi_square(g, d):
    p = CrParams(g, d)
    n = 100_000
    x = sample_amplitude(p, n, (3, int(g), int(d))).amplitudes
    # 40 roughly equiprobable bins placed from one batch, counted on another
    edges = np.quantile(x, np.linspace(0, 1, 41)[1:-1])
    probs = np.diff(np.concatenate([[0.0], cdf(p, edges), [1.0]]))
    y = sample_amplitude(p, n, (4, int(g), int(d))).amplitudes
    counts = np.bincount(np.searchsorted(edges, y), minlength=40)
    chi2 = (((counts - n * probs) ** 2) / (n * probs)).sum()
    assert chi2 < stats.chi2.ppf(0.99, 39)
