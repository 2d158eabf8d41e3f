"""Fiber-property distributions, samplers and discrete estimators.

Lengths are in micrometres, orientations in degrees on [-90, 90).  The
moment estimators use the population (1/N) convention throughout.
"""
from dataclasses import dataclass
from functools import lru_cache
import math

import numpy as np
from scipy import integrate, optimize, special

from .errors import DomainError, UndefinedCorrelationError


@dataclass(frozen=True)
class WeibullParams:
    scale: float  # a
    shape: float  # b

    def __post_init__(self):
        if not (self.scale > 0 and self.shape > 0):
            raise DomainError("Weibull scale and shape must be positive")

    @property
    def mean(self):
        return self.scale * special.gamma(1.0 + 1.0 / self.shape)


@dataclass(frozen=True)
class NormalParams:
    mean: float
    std: float

    def __post_init__(self):
        if not self.std > 0:
            raise DomainError("standard deviation must be positive")


@dataclass(frozen=True)
class EllipticOrientationParams:
    """Elliptic orientation density with semi-axes h1 = axis_ratio, h2 = 1."""

    axis_ratio: float

    def __post_init__(self):
        if not self.axis_ratio >= 1:
            raise DomainError("axis ratio must be >= 1")

    @property
    def normalization(self):
        return _elliptic_normalization(self.axis_ratio)


FIBER_LENGTH = WeibullParams(292.0, 1.96)
FIBER_DIAMETER = NormalParams(10.9, 0.9)
FIBER_ORIENTATION = EllipticOrientationParams(22.1)


def weibull_pdf(l, p=FIBER_LENGTH):
    l = np.asarray(l, dtype=float)
    if np.any(l < 0):
        raise DomainError("fiber length must be non-negative")
    a, b = p.scale, p.shape
    z = l / a
    with np.errstate(divide="ignore", invalid="ignore"):
        f = (b / a) * z ** (b - 1.0) * np.exp(-(z**b))
    return f


def _elliptic_raw(theta_deg, ratio):
    h1, h2 = ratio, 1.0
    c = np.cos(np.deg2rad(theta_deg))
    return h2 / np.sqrt(1.0 - (h1**2 - h2**2) / h1**2 * c * c)


@lru_cache(maxsize=None)
def _elliptic_normalization(ratio):
    # Integration in degrees; the peak at 0 is resolved by splitting there.
    val, _ = integrate.quad(_elliptic_raw, -90.0, 90.0, args=(ratio,), points=[0.0],
                            epsabs=1e-13, epsrel=1e-13, limit=200)
    return val


def elliptic_pdf(theta, p=FIBER_ORIENTATION):
    """Normalized orientation density per degree on [-90, 90)."""
    theta = np.asarray(theta, dtype=float)
    if np.any((theta < -90.0) | (theta >= 90.0)):
        raise DomainError("orientation must lie in [-90, 90) degrees")
    return _elliptic_raw(theta, p.axis_ratio) / p.normalization


@lru_cache(maxsize=8)
def _orientation_table(ratio, n=10_000):
    grid = np.linspace(-90.0, 90.0, n)
    pdf = _elliptic_raw(grid, ratio) / _elliptic_normalization(ratio)
    cdf = integrate.cumulative_trapezoid(pdf, grid, initial=0.0)
    cdf /= cdf[-1]
    return grid, cdf


def orientation_cdf(theta, p=FIBER_ORIENTATION):
    """Tabulated CDF used by the inverse-transform sampler."""
    grid, cdf = _orientation_table(p.axis_ratio)
    return np.interp(theta, grid, cdf)


def sample_fiber_length(rng, size=None, p=FIBER_LENGTH):
    u = 1.0 - rng.random(size)  # (0, 1]
    return p.scale * (-np.log(u)) ** (1.0 / p.shape)


def sample_fiber_diameter(rng, size=None, p=FIBER_DIAMETER):
    """Normal diameters, resampled outside (0, mean + 6 std]."""
    hi = p.mean + 6.0 * p.std
    d = np.asarray(rng.normal(p.mean, p.std, size), dtype=float)
    bad = (d <= 0) | (d > hi)
    while np.any(bad):
        d[bad] = rng.normal(p.mean, p.std, int(bad.sum()))
        bad = (d <= 0) | (d > hi)
    return float(d) if size is None else d


def sample_fiber_orientation(rng, size=None, p=FIBER_ORIENTATION):
    grid, cdf = _orientation_table(p.axis_ratio)
    theta = np.interp(rng.random(size), cdf, grid)
    # keep the half-open interval: the CDF reaches 1 only at +90
    theta = np.where(theta >= 90.0, -90.0, theta)
    return float(theta) if size is None else theta


def derive_seed(master_seed, *keys):
    """Deterministic 63-bit seed for a substream, e.g. ``(master, realization)``.

    Uses numpy's SeedSequence hashing so the mapping is order independent and
    stable across platforms.
    """
    state = np.random.SeedSequence([int(master_seed), *map(int, keys)]).generate_state(2)
    return int((int(state[0]) << 32 | int(state[1])) & (2**63 - 1))


@dataclass(frozen=True)
class SampleStats:
    mean: float
    variance: float
    count: int

    @property
    def std(self):
        return math.sqrt(self.variance)


def sample_stats(values):
    z = np.asarray(values, dtype=float).ravel()
    if z.size < 2:
        raise DomainError("need at least two values")
    mean = z.mean()
    # mean(z^2) - mean(z)^2, evaluated in centered form to avoid cancellation
    var = float(np.mean((z - mean) ** 2))
    return SampleStats(float(mean), var, int(z.size))


def correlation_coefficient(z1, z2):
    z1 = np.asarray(z1, dtype=float).ravel()
    z2 = np.asarray(z2, dtype=float).ravel()
    if z1.size != z2.size:
        raise DomainError("samples must have equal length")
    if z1.size < 2:
        raise DomainError("need at least two samples")
    d1, d2 = z1 - z1.mean(), z2 - z2.mean()
    s1, s2 = np.sqrt(np.mean(d1 * d1)), np.sqrt(np.mean(d2 * d2))
    scale1 = max(np.abs(z1).max(), 1e-300)
    scale2 = max(np.abs(z2).max(), 1e-300)
    if s1 <= 1e-13 * scale1 or s2 <= 1e-13 * scale2:
        raise UndefinedCorrelationError("zero-variance sample")
    rho = float(np.mean(d1 * d2) / (s1 * s2))
    return min(1.0, max(-1.0, rho))


@dataclass(frozen=True)
class DistributionFit:
    weibull: object  # WeibullParams or None
    normal: NormalParams
    weibull_loglik: float
    normal_loglik: float
    count: int

    @property
    def preferred(self):
        if self.weibull is None or self.normal_loglik >= self.weibull_loglik:
            return "normal"
        return "weibull"

    @property
    def loglik_gap(self):
        """Per-sample log-likelihood advantage of Weibull over normal."""
        if self.weibull is None:
            return -math.inf
        return (self.weibull_loglik - self.normal_loglik) / self.count


def _weibull_mle(x, tol=1e-10):
    x = x / x.max()  # scale-free shape equation, avoids overflow of x**k
    lx = np.log(x)
    mean_lx = lx.mean()

    def shape_eq(k):
        w = x**k
        return np.sum(w * lx) / np.sum(w) - 1.0 / k - mean_lx

    lo, hi = 1e-3, 1.0
    while shape_eq(hi) < 0:
        hi *= 2.0
        if hi > 1e7:
            raise DomainError("Weibull shape diverges (degenerate sample)")
    k = optimize.brentq(shape_eq, lo, hi, xtol=tol, rtol=4 * np.finfo(float).eps)
    lam = np.mean(x**k) ** (1.0 / k)
    return k, lam


def fit_distribution(values):
    """Maximum-likelihood Weibull and normal fits with log-likelihoods."""
    z = np.asarray(values, dtype=float).ravel()
    if z.size < 50:
        raise DomainError("need at least 50 values to fit")
    n = z.size
    mu = z.mean()
    sigma = np.sqrt(np.mean((z - mu) ** 2))
    if sigma <= 1e-12 * max(abs(mu), 1e-300):
        raise DomainError("constant sample has a degenerate likelihood")
    normal = NormalParams(float(mu), float(sigma))
    ll_n = float(-0.5 * n * np.log(2 * np.pi * sigma**2) - 0.5 * n)

    weibull, ll_w = None, -math.inf
    if np.all(z > 0):
        k, lam_rel = _weibull_mle(z)
        lam = lam_rel * z.max()
        weibull = WeibullParams(float(lam), float(k))
        zl = z / lam
        ll_w = float(n * np.log(k / lam) + (k - 1) * np.sum(np.log(zl)) - np.sum(zl**k))
    return DistributionFit(weibull, normal, ll_w, ll_n, n)
