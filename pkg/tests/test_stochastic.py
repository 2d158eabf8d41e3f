import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate, stats

from sfrc import stochastic as sto
from sfrc.errors import DomainError, UndefinedCorrelationError


def test_weibull_pdf_normalized():
    val, _ = integrate.quad(sto.weibull_pdf, 0, np.inf)
    assert val == pytest.approx(1.0, abs=1e-8)


def test_weibull_mean_formula():
    assert sto.FIBER_LENGTH.mean == pytest.approx(258.9, abs=0.1)


def test_weibull_negative_length():
    with pytest.raises(DomainError):
        sto.weibull_pdf(-1.0)


def test_elliptic_pdf_normalized():
    val, _ = integrate.quad(sto.elliptic_pdf, -90, 90 - 1e-12, points=[0.0], limit=200)
    assert val == pytest.approx(1.0, abs=1e-8)


def test_elliptic_pdf_shape():
    p = sto.elliptic_pdf(np.array([-60.0, 0.0, 60.0]))
    assert p[1] > p[0]
    assert p[0] == pytest.approx(p[2])
    # h2 = 1 and h1 = ratio: peak-to-tail ratio equals the axis ratio
    assert sto.elliptic_pdf(0.0) / sto.elliptic_pdf(-90.0) == pytest.approx(22.1)


def test_elliptic_pdf_domain():
    with pytest.raises(DomainError):
        sto.elliptic_pdf(90.0)


def test_length_sampler_matches_weibull(rng):
    z = sto.sample_fiber_length(rng, 20_000)
    ks = stats.kstest(z, "weibull_min", args=(1.96, 0, 292.0))
    assert ks.pvalue > 1e-3
    assert z.min() > 0


def test_length_mean_large_sample(rng):
    assert sto.sample_fiber_length(rng, 10**6).mean() == pytest.approx(260.0, abs=2.0)


def test_diameter_sampler_bounds(rng):
    p = sto.NormalParams(1.0, 1.0)
    d = sto.sample_fiber_diameter(rng, 50_000, p)
    assert d.min() > 0 and d.max() <= 7.0
    d = sto.sample_fiber_diameter(rng, 50_000)
    assert d.mean() == pytest.approx(10.9, abs=0.02)
    assert d.std() == pytest.approx(0.9, abs=0.02)


def test_orientation_sampler_matches_cdf(rng):
    z = sto.sample_fiber_orientation(rng, 20_000)
    assert z.min() >= -90 and z.max() < 90
    ks = stats.kstest(z, sto.orientation_cdf)
    assert ks.pvalue > 1e-3


def test_orientation_cdf_symmetric():
    assert sto.orientation_cdf(0.0) == pytest.approx(0.5, abs=1e-6)
    assert sto.orientation_cdf(-90.0) == 0.0
    assert sto.orientation_cdf(90.0) == pytest.approx(1.0)


def test_scalar_samplers(rng):
    assert isinstance(sto.sample_fiber_diameter(rng), float)
    assert isinstance(sto.sample_fiber_orientation(rng), float)


def test_derive_seed_deterministic_and_distinct():
    a = sto.derive_seed(7, 0)
    assert a == sto.derive_seed(7, 0)
    seeds = {sto.derive_seed(7, i) for i in range(1000)}
    assert len(seeds) == 1000
    assert sto.derive_seed(7, 1, 2) != sto.derive_seed(7, 2, 1)
    assert 0 <= a < 2**63


def test_sample_stats_population_convention():
    s = sto.sample_stats([1.0, 2.0, 3.0, 4.0])
    assert s.mean == 2.5
    assert s.variance == pytest.approx(1.25)
    assert s.count == 4


def test_sample_stats_cancellation():
    z = 1e9 + np.array([0.0, 1.0, 2.0])
    assert sto.sample_stats(z).variance == pytest.approx(2.0 / 3.0, rel=1e-6)


def test_correlation_extremes(rng):
    z = rng.normal(size=100)
    assert sto.correlation_coefficient(z, z) == pytest.approx(1.0)
    assert sto.correlation_coefficient(z, -2 * z + 3) == pytest.approx(-1.0)


@settings(max_examples=40, deadline=None)
@given(st.lists(st.floats(-1e3, 1e3), min_size=3, max_size=40), st.integers(0, 1000))
def test_correlation_bounded_and_symmetric(values, seed):
    z1 = np.array(values)
    z2 = np.random.default_rng(seed).normal(size=z1.size)
    try:
        r = sto.correlation_coefficient(z1, z2)
    except UndefinedCorrelationError:
        return
    assert -1.0 <= r <= 1.0
    assert sto.correlation_coefficient(z2, z1) == r


def test_correlation_matches_numpy(rng):
    a, b = rng.normal(size=500), rng.normal(size=500)
    b += 0.5 * a
    assert sto.correlation_coefficient(a, b) == pytest.approx(np.corrcoef(a, b)[0, 1], rel=1e-12)


def test_correlation_undefined():
    with pytest.raises(UndefinedCorrelationError):
        sto.correlation_coefficient(np.ones(10), np.arange(10.0))


def test_correlation_length_mismatch():
    with pytest.raises(DomainError):
        sto.correlation_coefficient(np.arange(3.0), np.arange(4.0))


def test_fit_recovers_weibull(rng):
    z = sto.sample_fiber_length(rng, 50_000)
    fit = sto.fit_distribution(z)
    assert fit.preferred == "weibull"
    assert fit.weibull.shape == pytest.approx(1.96, rel=0.02)
    assert fit.weibull.scale == pytest.approx(292.0, rel=0.01)
    ref = stats.weibull_min.fit(z, floc=0)
    assert fit.weibull.shape == pytest.approx(ref[0], rel=1e-4)


def test_fit_prefers_normal_for_normal_data(rng):
    z = rng.normal(10.9, 0.9, 20_000)
    fit = sto.fit_distribution(z)
    assert fit.preferred == "normal"
    assert fit.normal.mean == pytest.approx(10.9, abs=0.02)
    assert fit.loglik_gap < 0


def test_fit_non_positive_sample_is_normal(rng):
    fit = sto.fit_distribution(rng.normal(0.0, 1.0, 200))
    assert fit.weibull is None and fit.preferred == "normal"


@pytest.mark.parametrize("z", [np.ones(100), np.arange(10.0)])
def test_fit_degenerate(z):
    with pytest.raises(DomainError):
        sto.fit_distribution(z)


@pytest.mark.parametrize("factory", [lambda: sto.WeibullParams(0, 1), lambda: sto.NormalParams(1, 0),
                                     lambda: sto.EllipticOrientationParams(0.5)])
def test_parameter_validation(factory):
    with pytest.raises(DomainError):
        factory()
