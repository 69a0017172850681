"""Scaling constants, Gumbel targets and statistics of the rescaled maximum."""
import math
from dataclasses import dataclass

import numpy as np
from scipy import special, stats

from .exceptions import DomainError

LOG_4PI = math.log(4 * math.pi)


@dataclass(frozen=True)
class ScalingConstants:
    N: float
    g0: float
    b_N: float
    a_N: float

    def threshold(self, z):
        return self.a_N * z + self.b_N

    def rescale(self, raw):
        return (np.asarray(raw, dtype=float) - self.b_N) / self.a_N


def scaling_constants(N, g0):
    """b_N = sqrt(g0) (sqrt(2 log N) - (log log N + log 4 pi) / (2 sqrt(2 log N))), a_N = g0 / b_N."""
    if N <= 2:
        raise DomainError(f'scaling constants need N >= 3, got {N}')
    if g0 <= 0:
        raise DomainError('g0 must be positive')
    root = math.sqrt(2 * math.log(N))
    b = math.sqrt(g0) * (root - (math.log(math.log(N)) + LOG_4PI) / (2 * root))
    if b <= 0:
        raise DomainError(f'b_N is not positive at N={N}')
    return ScalingConstants(N=N, g0=g0, b_N=b, a_N=g0 / b)


def threshold(sc, z):
    """u_N(z) = a_N z + b_N."""
    return sc.threshold(z)


def gumbel_cdf(z):
    return np.exp(-np.exp(-np.asarray(z, dtype=float)))


def shifted_gumbel_cdf(z, d, delta):
    """Limit law of the maximum over the bulk, rescaled with the full-box constants."""
    return gumbel_cdf(np.asarray(z, dtype=float) - d * math.log(1 - 2 * delta))


def ks_distance(samples, cdf):
    samples = np.asarray(samples, dtype=float)
    if samples.size < 2:
        raise DomainError('the KS distance needs at least two samples')
    if np.isnan(samples).any():
        raise DomainError('samples contain NaN')
    return float(stats.kstest(samples, cdf).statistic)


def normal_density(t):
    return math.exp(-t * t / 2) / math.sqrt(2 * math.pi)


def normal_tail(t):
    return float(special.ndtr(-t))


def mills_bounds(t):
    """(1 - t^-2) phi(t) / t <= P(N(0,1) > t) <= phi(t) / t."""
    if t <= 0:
        raise DomainError('Mills bounds need t > 0')
    upper = normal_density(t) / t
    return (1 - 1 / t ** 2) * upper, upper


def tail_upper(t):
    """Mills upper bound clamped to a probability; 1 for t <= 0."""
    if t <= 0:
        return 1.0
    return min(1.0, normal_density(t) / t)


def tail_calibration(N, g0, z):
    """N P(N(0, g0) > u_N(z)); tends to e^{-z}."""
    sc = scaling_constants(N, g0)
    return N * normal_tail(sc.threshold(z) / math.sqrt(g0))


@dataclass(frozen=True)
class MaxStatistic:
    raw_max: float
    rescaled: float
    N: float
    law: str


def rescaled_max(field, sc):
    raw = field.max()
    return MaxStatistic(raw_max=raw, rescaled=float(sc.rescale(raw)), N=sc.N, law=field.law)


def cot_ratios(N, delta, d, g0):
    """(a_m / a_N, (b_m - b_N) / a_N) for the bulk size m = (1 - 2 delta)^d N."""
    if not 0 < delta < 0.5:
        raise DomainError(f'delta must lie in (0, 1/2), got {delta}')
    m = (1 - 2 * delta) ** d * N
    if m < 3:
        raise DomainError(f'bulk size {m:.3g} is below 3')
    full = scaling_constants(N, g0)
    bulk_sc = scaling_constants(m, g0)
    return bulk_sc.a_N / full.a_N, (bulk_sc.b_N - full.b_N) / full.a_N


@dataclass(frozen=True)
class LLNEstimate:
    mean: float
    stderr: float
    samples: int


def lln_ratio(maxima, g0, N):
    """Mean and standard error of max / sqrt(2 g0 log N)."""
    maxima = np.asarray(maxima, dtype=float)
    if maxima.size < 100:
        raise DomainError('the LLN ratio needs at least 100 samples')
    moments = RunningMoments().extend(maxima / math.sqrt(2 * g0 * math.log(N)))
    return LLNEstimate(moments.mean, moments.stderr, moments.count)


def bulk_mask(box, delta):
    """Sites whose l-infinity distance to the complement of the box exceeds delta * n.

    Along each axis exactly n - 2 floor(delta n) coordinates qualify.
    """
    if not 0 < delta < 0.5:
        raise DomainError(f'delta must lie in (0, 1/2), got {delta}')
    sites = box.sites()
    distance = np.minimum(sites + 1, box.n - sites).min(axis=1)
    mask = distance > delta * box.n
    if not mask.any():
        raise DomainError(f'bulk of the side-{box.n} box is empty at delta={delta}')
    return mask


def bulk(box, delta):
    return box.sites()[bulk_mask(box, delta)]


def independent_lower_bound(site_variances, u, g0):
    """Lower bounds on P(max <= u) for a positively correlated field.

    Returns (prod_alpha Phi(u / sqrt(g_N(alpha))), (1 - Mills upper(u / sqrt(g0)))^N).
    """
    site_variances = np.asarray(site_variances, dtype=float)
    exact = float(np.exp(np.sum(special.log_ndtr(u / np.sqrt(site_variances)))))
    mills = (1 - tail_upper(u / math.sqrt(g0))) ** site_variances.size
    return exact, mills


def empirical_cdf(samples, z):
    """Fraction of samples strictly below each z."""
    samples = np.sort(np.asarray(samples, dtype=float))
    return np.searchsorted(samples, np.asarray(z, dtype=float), side='left') / samples.size


def wilson_interval(successes, trials, level=0.99):
    if trials == 0:
        return 0.0, 1.0
    ci = stats.binomtest(int(successes), int(trials)).proportion_ci(confidence_level=level, method='wilson')
    return float(ci.low), float(ci.high)


@dataclass
class RunningMoments:
    """Welford mean and variance; ``merge`` combines accumulators in any grouping."""

    count: int = 0
    mean: float = 0.0
    m2: float = 0.0

    def push(self, value):
        self.count += 1
        delta = value - self.mean
        self.mean += delta / self.count
        self.m2 += delta * (value - self.mean)

    def extend(self, values):
        for value in np.asarray(values, dtype=float).ravel():
            self.push(float(value))
        return self

    def merge(self, other):
        if other.count == 0:
            return RunningMoments(self.count, self.mean, self.m2)
        if self.count == 0:
            return RunningMoments(other.count, other.mean, other.m2)
        count = self.count + other.count
        delta = other.mean - self.mean
        mean = self.mean + delta * other.count / count
        m2 = self.m2 + other.m2 + delta ** 2 * self.count * other.count / count
        return RunningMoments(count, mean, m2)

    @property
    def variance(self):
        return self.m2 / (self.count - 1) if self.count > 1 else 0.0

    @property
    def stderr(self):
        return math.sqrt(self.variance / self.count) if self.count > 1 else math.inf
