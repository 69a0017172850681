"""Poisson approximation of the exceedance count W by the Stein-Chen method.

The analytic evaluators drop every o(1) term and replace the unspecified constants
by explicit counting: a neighbourhood B_alpha is the l-infinity ball of radius
r = (log N)^(2 + 2 eps), so |B_alpha| <= (2 floor(r) + 1)^d.
"""
import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy import stats

from . import extremes, lattice_green
from .exceptions import DomainError
from .field_sampler import CholeskySampler
from .replicates import make_rng

logger = logging.getLogger(__name__)

ANALYTIC = 'analytic-bound'
EXACT = 'exact-small-instance'


@dataclass(frozen=True)
class ExceedanceProcess:
    sites: np.ndarray
    u: float
    indicators: np.ndarray
    p: float = None

    @property
    def N(self):
        return len(self.indicators)

    @property
    def W(self):
        return int(self.indicators.sum())

    @property
    def lam(self):
        return None if self.p is None else self.N * self.p

    @property
    def no_exceedance(self):
        return self.W == 0


def exceedance_process(field, u, g0=None):
    """Indicators X_alpha = 1{phi_alpha > u}; ``p`` is filled in when the marginal variance g0 is known."""
    if len(field) == 0:
        raise DomainError('exceedances of an empty field are undefined')
    p = None if g0 is None else extremes.normal_tail(u / math.sqrt(g0))
    return ExceedanceProcess(field.sites, u, field.values > u, p)


def neighbourhood_radius(N, epsilon):
    return math.log(N) ** (2 + 2 * epsilon)


def max_neighbourhood_size(d, N, epsilon):
    return (2 * math.floor(neighbourhood_radius(N, epsilon)) + 1) ** d


@dataclass(frozen=True)
class DependenceNeighborhood:
    center: tuple
    radius: float
    members: np.ndarray
    epsilon: float

    @property
    def size(self):
        return len(self.members)


def _check_epsilon(epsilon):
    if epsilon <= 0:
        raise DomainError('epsilon must be positive')


def neighborhood(alpha, sites, epsilon, radius=None):
    """B_alpha = B(alpha, r) intersected with the site set, r defaulting to (log N)^(2+2 eps)."""
    sites = lattice_green.as_sites(sites)
    _check_epsilon(epsilon)
    if len(sites) < 3:
        raise DomainError('neighbourhoods need N >= 3')
    alpha = lattice_green.as_point(alpha, sites.shape[1])
    radius = neighbourhood_radius(len(sites), epsilon) if radius is None else radius
    inside = np.abs(sites - np.array(alpha)).max(axis=1) <= radius
    if not (sites == np.array(alpha)).all(axis=1).any():
        raise DomainError(f'{alpha} is not in the site set')
    return DependenceNeighborhood(alpha, radius, sites[inside], epsilon)


def neighbourhood_sizes(sites, radius):
    sites = lattice_green.as_sites(sites)
    return np.array([int((np.abs(sites - s).max(axis=1) <= radius).sum()) for s in sites])


def _check_n(N):
    if N < 16:
        raise DomainError(f'the bounds need N >= 16, got {N}')


def b1_bound(N, d, epsilon, z, g0):
    """N |B| Mills_upper(u_N(z) / sqrt(g0))^2."""
    _check_n(N)
    _check_epsilon(epsilon)
    u = extremes.scaling_constants(N, g0).threshold(z)
    return N * max_neighbourhood_size(d, N, epsilon) * extremes.tail_upper(u / math.sqrt(g0)) ** 2


def exact_b1(sites, epsilon, p, radius=None):
    """sum_alpha sum_{beta in B_alpha} p^2 for a stationary field."""
    sites = lattice_green.as_sites(sites)
    radius = neighbourhood_radius(len(sites), epsilon) if radius is None else radius
    return float(neighbourhood_sizes(sites, radius).sum() * p * p)


@dataclass(frozen=True)
class BivariateGaussianSpec:
    g0: float
    rho: float

    def __post_init__(self):
        if self.g0 <= 0 or abs(self.rho) >= self.g0:
            raise DomainError(f'covariance [[{self.g0}, {self.rho}], [{self.rho}, {self.g0}]] is not positive definite')

    @property
    def matrix(self):
        return np.array([[self.g0, self.rho], [self.rho, self.g0]])

    @property
    def det(self):
        return self.g0 ** 2 - self.rho ** 2

    def deltas(self, u):
        return u / (self.g0 + self.rho), u / (self.g0 + self.rho)


def savage_tail_bound(spec, u):
    """Savage's bound on P(X > u, Y > u) for the pair, clamped at 1."""
    if u <= 0:
        raise DomainError('the Savage bound needs u > 0')
    d1, d2 = spec.deltas(u)
    quadratic = 2 * u * u / (spec.g0 + spec.rho)
    value = math.exp(-quadratic / 2) / (2 * math.pi * math.sqrt(spec.det) * d1 * d2)
    return min(1.0, value)


def b2_exponent(kappa):
    return -kappa / (2 - kappa)


def b2_turning_point(d, epsilon, kappa):
    """N beyond which (log N)^(d(2+2eps)) N^(-kappa/(2-kappa)) decreases."""
    return math.exp(d * (2 + 2 * epsilon) * (2 - kappa) / kappa)


def b2_bound(N, d, epsilon, z, g0, kappa=None, neighborhood_size=None):
    """|B| (2-kappa)^(3/2) kappa^(-1/2) N^(-kappa/(2-kappa)) max(e^{-2z} 1{z<=0}, e^{-2z/(2-kappa)} 1{z>0})."""
    _check_n(N)
    _check_epsilon(epsilon)
    kappa = 1.0 / g0 if kappa is None else kappa
    if not 0 < kappa < 1:
        raise DomainError(f'kappa must lie in (0, 1), got {kappa}')
    size = max_neighbourhood_size(d, N, epsilon) if neighborhood_size is None else neighborhood_size
    z_factor = math.exp(-2 * z) if z <= 0 else math.exp(-2 * z / (2 - kappa))
    return size * (2 - kappa) ** 1.5 / math.sqrt(kappa) * N ** b2_exponent(kappa) * z_factor


def b2_instance_bound(N, neighborhood_size, g0, rho_max, u):
    return N * neighborhood_size * savage_tail_bound(BivariateGaussianSpec(g0, rho_max), u)


def b2_from_pairs(joint, sites, radius):
    """sum_alpha sum_{beta in B_alpha, beta != alpha} E[X_alpha X_beta] from a matrix of joint probabilities."""
    sites = lattice_green.as_sites(sites)
    near = np.abs(sites[:, None, :] - sites[None, :, :]).max(axis=2) <= radius
    np.fill_diagonal(near, False)
    return float(np.asarray(joint)[near].sum())


def pair_exceedance_probabilities(sites, green, u):
    """[P(phi_alpha > u, phi_beta > u)] under the infinite-volume law, by the bivariate normal CDF."""
    sites = lattice_green.as_sites(sites, green.d)
    covariance = green.covariance(sites)
    g0 = green.g0
    levels, inverse = np.unique(covariance, return_inverse=True)
    probabilities = np.empty(len(levels))
    for k, rho in enumerate(levels):
        if rho >= g0:
            probabilities[k] = extremes.normal_tail(u / math.sqrt(g0))
        else:
            # (phi_alpha, phi_beta) and its negative have the same law
            law = stats.multivariate_normal(mean=[0.0, 0.0], cov=BivariateGaussianSpec(g0, rho).matrix)
            probabilities[k] = law.cdf([-u, -u])
    return probabilities[inverse].reshape(covariance.shape)


def exact_b2(sites, green, u, radius):
    return b2_from_pairs(pair_exceedance_probabilities(sites, green, u), sites, radius)


@dataclass(frozen=True)
class DriftVariance:
    exact: float
    bound: float
    g_U: float
    defect: float = 0.0


def drift_variance_bound(sites, alpha, epsilon, green, radius=None, trunc_radius=None):
    """Var(mu_alpha) for K = A minus B_alpha, next to sup_{beta in K} g(alpha, beta).

    g_U(alpha, alpha) = g(0) - Var(mu_alpha) is returned alongside.
    """
    sites = lattice_green.as_sites(sites, green.d)
    ball = neighborhood(alpha, sites, epsilon, radius)
    inside = np.abs(sites - np.array(ball.center)).max(axis=1) <= ball.radius
    targets = sites[~inside]
    if len(targets) == 0:
        return DriftVariance(0.0, 0.0, green.g0)
    hitting = lattice_green.hitting_distribution(ball.center, targets, trunc_radius, green=green)
    g_to_targets = green.cross([ball.center], targets)[0]
    exact = float(hitting.weights @ g_to_targets)
    return DriftVariance(exact, float(g_to_targets.max()), green.g0 - exact, hitting.defect)


@dataclass(frozen=True)
class B3Surrogate:
    value: float
    tail_shape: float
    mismatch: float
    tail_evaluated: float
    g_U: float


def b3_surrogate(N, d, epsilon, z, g0, drift_var):
    """N [tail + 2 |1 - sqrt(g_U/g0) exp((1 - g0/g_U) u^2 / 2g0)| Mills_upper(u / sqrt(g0))].

    The tail term is the decay shape exp(-(log N)^((2d-5)(1+eps))); the two conditional
    variance terms are counted alike.
    """
    lattice_green.check_dimension(d)
    _check_n(N)
    if not 0 <= drift_var < g0:
        raise DomainError(f'drift variance must lie in [0, g0), got {drift_var}')
    u = extremes.scaling_constants(N, g0).threshold(z)
    g_u = g0 - drift_var
    exponent = (1 - g0 / g_u) * u * u / (2 * g0)
    mismatch = abs(1 - math.sqrt(g_u / g0) * math.exp(exponent))
    if drift_var == 0:
        tail_shape = tail_evaluated = 0.0
    else:
        tail_shape = math.exp(-math.log(N) ** ((2 * d - 5) * (1 + epsilon)))
        a = u ** (-1 - epsilon) / math.sqrt(drift_var)
        tail_evaluated = math.exp(-a * a / 2)
    value = N * (tail_shape + 2 * mismatch * extremes.tail_upper(u / math.sqrt(g0)))
    return B3Surrogate(value, tail_shape, mismatch, tail_evaluated, g_u)


@dataclass(frozen=True)
class SteinChenBounds:
    lam: float
    b1: float
    b2: float
    b3_surrogate: float
    provenance: str = ANALYTIC

    def __post_init__(self):
        if min(self.b1, self.b2, self.b3_surrogate) < 0:
            raise DomainError('Stein-Chen terms must be nonnegative')

    @property
    def total(self):
        return self.b1 + self.b2 + self.b3_surrogate

    @property
    def tv_bound(self):
        return 2 * self.total

    @property
    def w0_gap_bound(self):
        return min(1.0, 1.0 / self.lam) * self.total if self.lam > 0 else self.total


def tabulation_drift_variance(N, d, epsilon, quad_tol=None):
    """g at l-infinity distance floor(r) + 1: the sup bound for a neighbourhood of radius r."""
    step = math.floor(neighbourhood_radius(N, epsilon)) + 1
    return lattice_green.green_infinite((step,) + (0,) * (d - 1), d, quad_tol)


def analytic_bounds(N, d, epsilon, z, g0, kappa=None, drift_var=None):
    u = extremes.scaling_constants(N, g0).threshold(z)
    lam = N * extremes.normal_tail(u / math.sqrt(g0))
    drift_var = tabulation_drift_variance(N, d, epsilon) if drift_var is None else drift_var
    return SteinChenBounds(
        lam=lam,
        b1=b1_bound(N, d, epsilon, z, g0),
        b2=b2_bound(N, d, epsilon, z, g0, kappa),
        b3_surrogate=b3_surrogate(N, d, epsilon, z, g0, drift_var).value,
        provenance=ANALYTIC,
    )


@dataclass(frozen=True)
class BernoulliControl:
    bounds: SteinChenBounds
    p_w0: float


def bernoulli_control(N, p):
    """N independent Bernoulli(p) indicators: b1 = N p^2, b2 = b3 = 0, P(W=0) = (1-p)^N."""
    if not 0 <= p <= 1:
        raise DomainError('p must be a probability')
    bounds = SteinChenBounds(lam=N * p, b1=N * p * p, b2=0.0, b3_surrogate=0.0, provenance=EXACT)
    return BernoulliControl(bounds, (1 - p) ** N)


@dataclass(frozen=True)
class PoissonGapCheck:
    empirical: float
    target: float
    gap: float
    bound: float
    radius: float

    @property
    def passed(self):
        return self.gap <= self.bound + self.radius


def poisson_gap(bounds, empirical_p_w0, trials=None, level=0.99):
    """|P(W=0) - e^{-lambda}| against min(1, 1/lambda)(b1 + b2 + b3), widened by the Wilson radius."""
    if bounds.lam <= 0:
        raise DomainError('lambda must be positive')
    radius = 0.0
    if trials:
        low, high = extremes.wilson_interval(round(empirical_p_w0 * trials), trials, level)
        radius = max(empirical_p_w0 - low, high - empirical_p_w0)
    target = math.exp(-bounds.lam)
    return PoissonGapCheck(empirical_p_w0, target, abs(empirical_p_w0 - target), bounds.w0_gap_bound, radius)


def drift_tail_bound(max_drift_var, m, epsilon, a_m):
    """Markov plus the Gaussian maximal inequality: P(max |mu| > eps a_m) <= 2 sqrt(v log m) / (eps a_m)."""
    if max_drift_var <= 0:
        return 0.0
    return min(1.0, 2 * math.sqrt(max_drift_var * math.log(m)) / (epsilon * a_m))


@dataclass(frozen=True)
class OracleEstimate:
    samples: int
    p_w0: float
    p_w0_interval: tuple
    mean_w: float
    mean_w_stderr: float
    joint: np.ndarray
    joint_radius: np.ndarray


def exceedance_indicators(sampler, u, samples, rng):
    return sampler.draw_many(rng, samples) > u


def exact_small_oracle(sites, u, green, mc_budget, seed=0, level=0.99):
    """Monte Carlo ground truth from exact Cholesky samples on at most 12 sites."""
    sites = lattice_green.as_sites(sites, green.d)
    if not 1 <= len(sites) <= 12:
        raise DomainError(f'the small-instance oracle handles 1 to 12 sites, got {len(sites)}')
    if mc_budget < 10_000:
        raise DomainError(f'Monte Carlo budget {mc_budget} is below 10^4')
    sampler = CholeskySampler(green.covariance(sites))
    indicators = exceedance_indicators(sampler, u, mc_budget, make_rng(seed))
    counts = indicators.sum(axis=1)
    zero = int((counts == 0).sum())
    pair_counts = indicators.T.astype(np.int64) @ indicators.astype(np.int64)
    joint = pair_counts / mc_budget
    radius = np.zeros_like(joint)
    for (i, j), k in np.ndenumerate(pair_counts):
        low, high = extremes.wilson_interval(int(k), mc_budget, level)
        radius[i, j] = max(joint[i, j] - low, high - joint[i, j])
    logger.debug('Oracle on %d sites: P(W=0)=%.4f', len(sites), zero / mc_budget)
    return OracleEstimate(
        samples=mc_budget,
        p_w0=zero / mc_budget,
        p_w0_interval=extremes.wilson_interval(zero, mc_budget, level),
        mean_w=float(counts.mean()),
        mean_w_stderr=float(counts.std(ddof=1) / math.sqrt(mc_budget)),
        joint=joint,
        joint_radius=radius,
    )
