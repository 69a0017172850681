"""Exact samplers for the discrete Gaussian free field.

Three laws are supported: the infinite-volume field restricted to a finite window
(Cholesky of the Green covariance), the zero-boundary field on a box (sine-basis
spectral sampler) and the conditional field given its values on a finite set.
"""
import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy import fft, linalg, special

from . import lattice_green
from .conf import gffx_setting
from .exceptions import CovarianceError, DomainError
from .replicates import make_rng

logger = logging.getLogger(__name__)

LAW_INFINITE = 'infinite-window'
LAW_DIRICHLET = 'dirichlet-box'
LAW_CONDITIONAL = 'conditional'
LAW_IID = 'iid'
LAWS = (LAW_INFINITE, LAW_DIRICHLET, LAW_CONDITIONAL, LAW_IID)


@dataclass(frozen=True)
class BoxDomain:
    """The box [0, n-1]^d."""

    d: int
    n: int

    def __post_init__(self):
        lattice_green.check_dimension(self.d)
        if int(self.n) != self.n or self.n < 1:
            raise DomainError(f'box side must be a positive integer, got {self.n}')

    @property
    def N(self):
        return self.n ** self.d

    @property
    def shape(self):
        return (self.n,) * self.d

    def sites(self):
        return lattice_green.box_sites(self.n, self.d)

    def outer_boundary(self):
        return lattice_green.box_outer_boundary(self.n, self.d)[0]

    def index(self, sites):
        return np.ravel_multi_index(tuple(lattice_green.as_sites(sites, self.d).T), self.shape)

    def center(self):
        return ((self.n - 1) // 2,) * self.d


@dataclass(frozen=True)
class FieldSample:
    sites: np.ndarray
    values: np.ndarray
    law: str
    seed: object = None

    def __post_init__(self):
        if self.law not in LAWS:
            raise DomainError(f'unknown law tag {self.law!r}')
        if len(self.sites) != len(self.values):
            raise DomainError('a field sample needs exactly one value per site')
        if not np.isfinite(self.values).all():
            raise DomainError('field values must be finite')

    def __len__(self):
        return len(self.values)

    def max(self):
        if len(self.values) == 0:
            raise DomainError('the maximum of an empty field is undefined')
        return float(self.values.max())


class CholeskySampler:
    """Centred Gaussian vectors with a given covariance, via its lower Cholesky factor."""

    def __init__(self, covariance):
        covariance = np.asarray(covariance, dtype=float)
        min_eigenvalue = gffx_setting('MIN_EIGENVALUE')
        try:
            self.factor = linalg.cholesky(covariance, lower=True)
        except linalg.LinAlgError as e:
            raise CovarianceError(f'covariance is not positive definite: {e}', min_pivot=float('nan')) from e
        min_pivot = float(np.min(np.diag(self.factor))) if len(covariance) else math.inf
        if min_pivot ** 2 < min_eigenvalue:
            raise CovarianceError(
                'covariance is numerically singular; tighten the quadrature tolerance', min_pivot=min_pivot
            )
        self.min_pivot = min_pivot

    @property
    def size(self):
        return len(self.factor)

    def draw(self, rng):
        return self.factor @ rng.standard_normal(self.size)

    def draw_many(self, rng, count):
        """``count`` independent draws, one per row."""
        return rng.standard_normal((count, self.size)) @ self.factor.T


class SpectralBoxSampler:
    """Zero-boundary field on a box from a type-I discrete sine transform.

    phi = S diag(sqrt(lambda)) xi where S is the orthonormal sine basis, applied as
    an orthonormal DST-I of the scaled white noise.
    """

    def __init__(self, box):
        self.box = box
        self.eigenvalues = lattice_green.box_eigenvalues(box.n, box.d)
        self.scale = np.sqrt(self.eigenvalues)

    def draw(self, rng):
        noise = rng.standard_normal(self.box.shape)
        return fft.dstn(self.scale * noise, type=1, norm='ortho').ravel()

    def variances(self):
        """g_V(alpha, alpha) at every site, in C order."""
        squared = lattice_green.sine_basis(self.box.n) ** 2
        values = self.eigenvalues
        for axis in range(self.box.d):
            values = np.moveaxis(np.tensordot(squared, values, axes=([1], [axis])), 0, axis)
        return values.ravel()


def box_covariance_spectral(box):
    return lattice_green.box_green_spectral(box.n, box.d).matrix


def _check_dense(count):
    limit = gffx_setting('DENSE_SITE_LIMIT')
    if count > limit:
        raise DomainError(f'{count} sites exceed the dense factorisation limit of {limit}')


def sample_infinite_window(sites, green, seed):
    sites = lattice_green.as_sites(sites, green.d)
    if len(sites) == 0:
        raise DomainError('window must be nonempty')
    _check_dense(len(sites))
    sampler = CholeskySampler(green.covariance(sites))
    return FieldSample(sites, sampler.draw(make_rng(seed)), LAW_INFINITE, seed)


def sample_box_dirichlet(box, seed):
    values = SpectralBoxSampler(box).draw(make_rng(seed))
    return FieldSample(box.sites(), values, LAW_DIRICHLET, seed)


class BoundarySampler:
    """Infinite-volume field on the outer boundary of a box."""

    def __init__(self, box, green):
        self.box = box
        self.sites = box.outer_boundary()
        _check_dense(len(self.sites))
        self.sampler = CholeskySampler(green.covariance(self.sites))

    def draw(self, rng):
        return self.sampler.draw(rng)


def sample_boundary(box, green, seed):
    sampler = BoundarySampler(box, green)
    return FieldSample(sampler.sites, sampler.draw(make_rng(seed)), LAW_INFINITE, seed)


def hitting_matrix(window, targets, trunc_radius=None, green=None):
    """Rows P_alpha(H_K < infinity, S_{H_K} = beta) for alpha in ``window``, beta in K.

    Exact from g unless ``trunc_radius`` asks for the killed walk on a box.
    """
    window = lattice_green.as_sites(window)
    targets = lattice_green.as_sites(targets, window.shape[1])
    if trunc_radius is None:
        return lattice_green.green_hitting_matrix(window, targets, green)
    walk = lattice_green.KilledWalk(targets, trunc_radius, extra_sites=window)
    return np.array([walk.hitting_weights(walk.row(alpha)) for alpha in window])


@dataclass(frozen=True)
class ConditionalDecomposition:
    targets: np.ndarray
    target_values: np.ndarray
    window: np.ndarray
    drift: np.ndarray
    fluctuation: FieldSample

    @property
    def field(self):
        return FieldSample(self.window, self.fluctuation.values + self.drift, LAW_CONDITIONAL, self.fluctuation.seed)


class ConditionalSampler:
    """Markov decomposition phi = psi + mu on a window off the conditioning set K.

    mu is the harmonic extension of the K-values through the hitting distribution;
    psi is the field killed on K, with covariance g_U = g - H g_K restricted to the window.
    """

    def __init__(self, targets, window, green, trunc_radius=None):
        self.targets = lattice_green.as_sites(targets, green.d)
        self.window = lattice_green.as_sites(window, green.d)
        if len(self.targets) == 0:
            raise DomainError('conditioning set must be nonempty')
        overlap = {tuple(s) for s in self.targets.tolist()} & {tuple(s) for s in self.window.tolist()}
        if overlap:
            raise DomainError(f'window intersects the conditioning set at {sorted(overlap)[:3]}')
        _check_dense(len(self.window))
        self.hitting = hitting_matrix(self.window, self.targets, trunc_radius, green)
        covariance = green.covariance(self.window) - self.hitting @ green.cross(self.targets, self.window)
        self.covariance = 0.5 * (covariance + covariance.T)
        self.sampler = CholeskySampler(self.covariance)
        logger.debug('Conditional sampler: |K|=%d, window=%d sites', len(self.targets), len(self.window))

    def drift(self, target_values):
        target_values = np.asarray(target_values, dtype=float)
        if target_values.shape != (len(self.targets),):
            raise DomainError('one conditioning value per site of K is required')
        return self.hitting @ target_values

    def drift_variances(self, green):
        """Var(mu_alpha) = sum_beta H(alpha, beta) g(alpha, beta) under the infinite-volume law."""
        return np.einsum('ij,ij->i', self.hitting, green.cross(self.window, self.targets))

    def draw(self, target_values, rng, seed=None):
        drift = self.drift(target_values)
        fluctuation = FieldSample(self.window, self.sampler.draw(rng), LAW_DIRICHLET, seed)
        return ConditionalDecomposition(self.targets, np.asarray(target_values, dtype=float), self.window, drift, fluctuation)


def sample_conditional(targets, target_values, window, green, seed, trunc_radius=None):
    sampler = ConditionalSampler(targets, window, green, trunc_radius)
    return sampler.draw(target_values, make_rng(seed), seed)


def sample_iid(count, g0, rng):
    return math.sqrt(g0) * rng.standard_normal(count)


def iid_max_sample(N, g0, rng, size=None):
    """Exact maximum of N i.i.d. N(0, g0) variables by inverting Phi(x)^N = u."""
    u = np.maximum(rng.random(size), np.finfo(float).tiny)
    return -special.ndtri(-np.expm1(np.log(u) / N)) * math.sqrt(g0)
