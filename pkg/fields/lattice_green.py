"""Green's functions of simple random walk on Z^d, d >= 3.

All values are in counting units: g(x) is the expected number of visits to x of a
walk started at the origin, so g(0) is the variance of the free field at a site.
"""
import json
import logging
import math
from dataclasses import dataclass, field
from functools import lru_cache
from itertools import combinations_with_replacement, permutations, product
from pathlib import Path

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy import linalg, special
from scipy.sparse.linalg import LinearOperator, cg

from .conf import gffx_setting
from .exceptions import DimensionError, DomainError, QuadratureError, SolverError, TruncationError

logger = logging.getLogger(__name__)

QUADRATURE_ORDERS = (16, 32, 64, 128, 256)


def check_dimension(d):
    if int(d) != d or d < 3:
        raise DimensionError(f'd={d}: the Green function of simple random walk is finite only for d >= 3')
    return int(d)


def as_point(x, d=None):
    point = tuple(int(c) for c in x)
    if d is not None and len(point) != d:
        raise DomainError(f'point {point} does not have {d} coordinates')
    return point


def as_sites(sites, d=None):
    """Return ``sites`` as an (n, d) integer array."""
    array = np.asarray(sites, dtype=np.int64)
    if array.ndim == 1:
        array = array.reshape(1, -1)
    if array.ndim != 2:
        raise DomainError('site sets must be given as a sequence of lattice points')
    if d is not None and array.shape[1] != d:
        raise DomainError(f'sites have {array.shape[1]} coordinates, expected {d}')
    return array


def canonical(x):
    """Representative of x under signed coordinate permutations."""
    return tuple(sorted(abs(int(c)) for c in x))


# Continuous-time representation: g(x) = d * int_0^inf prod_j e^{-s} I_{x_j}(s) ds.

def _bessel_rule(scale, order):
    """Gauss-Legendre nodes on [0, inf).

    Geometric panels cover [0, top]; the tail s = top / t**2 turns the s^{-d/2}
    decay into a smooth integrand on (0, 1].
    """
    x, w = leggauss(order)
    top = 2.0 ** math.ceil(math.log2(max(scale, 1.0)))
    breaks = [0.0] + [2.0 ** k for k in range(-2, int(math.log2(top)) + 1)]
    nodes, weights = [], []
    for a, b in zip(breaks[:-1], breaks[1:]):
        nodes.append(0.5 * (b - a) * x + 0.5 * (b + a))
        weights.append(0.5 * (b - a) * w)
    for a, b in ((0.0, 0.5), (0.5, 1.0)):
        t = 0.5 * (b - a) * x + 0.5 * (b + a)
        nodes.append(top / t ** 2)
        weights.append(0.5 * (b - a) * w * 2.0 * top / t ** 3)
    return np.concatenate(nodes), np.concatenate(weights)


def _bessel_values(points, d, order, block=4096):
    points = np.asarray(points, dtype=np.int64)
    scale = 4.0 * float(np.max(np.sum(points.astype(float) ** 2, axis=1), initial=0.0)) + 16.0
    nodes, weights = _bessel_rule(scale, order)
    orders = np.arange(int(points.max(initial=0)) + 1)
    table = special.ive(orders[:, None], nodes[None, :])
    values = np.empty(len(points))
    for start in range(0, len(points), block):
        chunk = points[start:start + block]
        integrand = np.prod(table[chunk], axis=1)
        values[start:start + block] = d * integrand @ weights
    return values


def _green_quadrature(points, d, tol):
    previous = None
    achieved = math.inf
    for order in QUADRATURE_ORDERS:
        values = _bessel_values(points, d, order)
        if previous is not None:
            achieved = float(np.max(np.abs(values - previous)))
            if achieved <= tol:
                return values, achieved
        previous = values
    raise QuadratureError(f'Green quadrature did not reach tolerance {tol:.1e} in d={d}', achieved)


@lru_cache(maxsize=4096)
def _green_cached(key, d, tol):
    values, _ = _green_quadrature(np.array([key]), d, tol)
    return float(values[0])


def green_infinite(x, d, tol=None, method='bessel'):
    """g(x) for simple random walk on Z^d, within absolute tolerance ``tol``."""
    d = check_dimension(d)
    tol = gffx_setting('QUAD_TOL') if tol is None else float(tol)
    if tol <= 0:
        raise DomainError('quadrature tolerance must be positive')
    key = canonical(as_point(x, d))
    if method == 'fourier':
        return green_fourier(key, d, tol=max(tol, 1e-9))
    if method != 'bessel':
        raise DomainError(f'unknown quadrature method {method!r}')
    return _green_cached(key, d, tol)


def green_fourier(x, d, tol=1e-6, damping=2.0):
    """g(x) from the Fourier integral with tensorised Gauss-Legendre quadrature.

    g(x) = pi^{-d} int_{[0,pi]^d} prod_j cos(x_j t_j) / (1 - phi(t)) dt, with the
    singular part 2d exp(-a|t|^2)/|t|^2 subtracted and integrated in closed form.
    Panels are graded geometrically towards the origin.
    """
    d = check_dimension(d)
    key = canonical(as_point(x, d))
    levels = max(4, math.ceil(math.log2(1.0 / tol) / d) + 1)
    breaks = [0.0] + [math.pi * 2.0 ** -k for k in range(levels, -1, -1)]
    half = d / 2.0 - 1.0
    singular = 2 * d * math.pi ** (d / 2.0) / (half * damping ** half) / 2 ** d

    previous = None
    achieved = math.inf
    for order in (4, 8, 16, 32):
        gx, gw = leggauss(order)
        nodes = np.concatenate([0.5 * (b - a) * gx + 0.5 * (b + a) for a, b in zip(breaks[:-1], breaks[1:])])
        weights = np.concatenate([0.5 * (b - a) * gw for a, b in zip(breaks[:-1], breaks[1:])])
        sin2 = np.sin(nodes / 2.0) ** 2
        sq = nodes ** 2
        cosines = [np.cos(c * nodes) for c in key]

        total = 0.0
        for outer in product(range(len(nodes)), repeat=d - 2):
            s_out = sum(sin2[i] for i in outer)
            r_out = sum(sq[i] for i in outer)
            w_out = math.prod(weights[i] for i in outer)
            c_out = math.prod(cosines[j][i] for j, i in enumerate(outer))
            s2 = s_out + sin2[:, None] + sin2[None, :]
            r2 = r_out + sq[:, None] + sq[None, :]
            cos_block = c_out * cosines[d - 2][:, None] * cosines[d - 1][None, :]
            remainder = cos_block / ((2.0 / d) * s2) - 2 * d * np.exp(-damping * r2) / r2
            total += w_out * float(weights @ remainder @ weights)
        value = (total + singular) / math.pi ** d
        if previous is not None:
            achieved = abs(value - previous)
            if achieved <= tol:
                return value
        previous = value
    raise QuadratureError(f'Fourier quadrature did not reach tolerance {tol:.1e}', achieved)


def escape_probability(d, tol=None):
    """kappa = P_0(no return to 0) = 1 / g(0)."""
    return 1.0 / green_infinite((0,) * check_dimension(d), d, tol)


def green_far_field_constant(d):
    """a_d with g(x) ~ a_d |x|^{2-d} as |x| -> infinity."""
    d = check_dimension(d)
    return d * math.gamma(d / 2.0 - 1.0) / (2.0 * math.pi ** (d / 2.0))


@dataclass(frozen=True)
class GreenTable:
    """g on the l-infinity window of radius ``radius``, stored by canonical representative."""

    d: int
    radius: int
    quad_tol: float
    values: dict
    achieved: float = 0.0
    _grid: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        grid = np.full((self.radius + 1,) * self.d, np.nan)
        for key, value in self.values.items():
            for perm in set(permutations(key)):
                grid[perm] = value
        if np.isnan(grid).any():
            raise DomainError('Green table is missing canonical representatives')
        grid.setflags(write=False)
        object.__setattr__(self, '_grid', grid)

    @property
    def g0(self):
        return self.values[(0,) * self.d]

    @property
    def kappa(self):
        return 1.0 / self.g0

    def value(self, x):
        x = np.abs(np.asarray(x, dtype=np.int64))
        if x.shape != (self.d,) or x.max() > self.radius:
            raise DomainError(f'{tuple(x)} lies outside the Green table window of radius {self.radius}')
        return float(self._grid[tuple(x)])

    __getitem__ = value

    def covers(self, sites):
        sites = as_sites(sites, self.d)
        return bool((np.ptp(sites, axis=0) <= self.radius).all())

    def cross(self, left, right):
        """Matrix [g(a - b)] for a in ``left`` and b in ``right``."""
        left = as_sites(left, self.d)
        right = as_sites(right, self.d)
        diff = np.abs(left[:, None, :] - right[None, :, :])
        if diff.size and diff.max() > self.radius:
            raise DomainError(
                f'pairwise differences reach {int(diff.max())}, beyond the table radius {self.radius}'
            )
        return self._grid[tuple(np.moveaxis(diff, -1, 0))]

    def covariance(self, sites):
        return self.cross(sites, sites)

    def harmonicity_residuals(self):
        """(I - P) g - delta_0 at every stored point whose neighbours are stored."""
        residuals = {}
        units = np.eye(self.d, dtype=np.int64)
        for key, value in self.values.items():
            if max(key) >= self.radius:
                continue
            x = np.array(key)
            neighbours = sum(self.value(x + e) + self.value(x - e) for e in units)
            source = 1.0 if not any(key) else 0.0
            residuals[key] = value - neighbours / (2 * self.d) - source
        return residuals

    def validate(self):
        """Raise QuadratureError unless g(0) > 1, g > 0 and g is harmonic off the origin."""
        values = np.fromiter(self.values.values(), dtype=float)
        if self.g0 <= 1.0 or (values <= 0).any():
            raise QuadratureError('Green table violates g(0) > 1 and g > 0', self.achieved)
        limit = 10 * max(self.quad_tol, self.achieved)
        worst = max((abs(r) for r in self.harmonicity_residuals().values()), default=0.0)
        if worst > limit:
            raise QuadratureError(f'Green table harmonicity residual {worst:.2e} exceeds {limit:.2e}', worst)
        return self

    def to_dict(self):
        return {
            'd': self.d,
            'radius': self.radius,
            'quad_tol': self.quad_tol,
            'achieved': self.achieved,
            'values': [[*key, value] for key, value in sorted(self.values.items())],
        }

    @classmethod
    def from_dict(cls, data):
        values = {tuple(int(c) for c in row[:-1]): float(row[-1]) for row in data['values']}
        return cls(
            d=int(data['d']),
            radius=int(data['radius']),
            quad_tol=float(data['quad_tol']),
            values=values,
            achieved=float(data.get('achieved', 0.0)),
        )


def build_green_table(d, radius, quad_tol=None):
    d = check_dimension(d)
    if radius < 0:
        raise DomainError('Green table radius must be non-negative')
    quad_tol = gffx_setting('QUAD_TOL') if quad_tol is None else float(quad_tol)
    keys = list(combinations_with_replacement(range(radius + 1), d))
    values, achieved = _green_quadrature(np.array(keys), d, quad_tol)
    table = GreenTable(d, radius, quad_tol, dict(zip(keys, values.tolist())), achieved).validate()
    logger.info('Built Green table d=%d R=%d (%d points, achieved %.2e)', d, radius, len(keys), achieved)
    return table


def green_table_path(d, radius, quad_tol):
    cache_dir = Path(gffx_setting('CACHE_DIR'))
    return cache_dir / f'green-d{d}-R{radius}-tol{float(quad_tol)!r}.json'


def load_or_build_green_table(d, radius, quad_tol=None, use_cache=True):
    """Green table for (d, radius, quad_tol), read from or written to the cache directory."""
    quad_tol = gffx_setting('QUAD_TOL') if quad_tol is None else float(quad_tol)
    path = green_table_path(d, radius, quad_tol)
    if use_cache and path.exists():
        try:
            with open(path, encoding='utf-8') as f:
                table = GreenTable.from_dict(json.load(f))
            if (table.d, table.radius, table.quad_tol) != (d, radius, quad_tol):
                raise ValueError(f'cache holds d={table.d} R={table.radius} tol={table.quad_tol}')
            return table.validate()
        except (OSError, ValueError, KeyError, DomainError, QuadratureError) as e:
            logger.warning('Ignoring unusable Green cache %s: %s', path, e)
    table = build_green_table(d, radius, quad_tol)
    if use_cache:
        try:
            path.parent.mkdir(parents=True, exist_ok=True)
            with open(path, 'w', encoding='utf-8') as f:
                json.dump(table.to_dict(), f)
        except OSError as e:
            logger.warning('Could not write Green cache %s: %s', path, e)
    return table


@dataclass(frozen=True)
class DirichletGreen:
    """Green's function of the walk killed on leaving the finite set ``sites``."""

    sites: np.ndarray
    matrix: np.ndarray

    @property
    def size(self):
        return len(self.sites)

    def diagonal(self):
        return np.diag(self.matrix).copy()

    def residual(self):
        """max |(I - P_Lambda) G - I|."""
        operator = restricted_laplacian(self.sites)
        return float(np.max(np.abs(operator @ self.matrix - np.eye(self.size))))

    def min_eigenvalue(self):
        return float(linalg.eigvalsh(self.matrix, subset_by_index=[0, 0])[0])


def _neighbour_offsets(d):
    units = np.eye(d, dtype=np.int64)
    return np.concatenate([units, -units])


def restricted_laplacian(sites):
    """Dense I - P_Lambda for simple random walk restricted to ``sites``."""
    sites = as_sites(sites)
    n, d = sites.shape
    index = {tuple(s): i for i, s in enumerate(sites.tolist())}
    if len(index) != n:
        raise DomainError('site set contains repeated sites')
    operator = np.eye(n)
    for offset in _neighbour_offsets(d):
        for i, s in enumerate((sites + offset).tolist()):
            j = index.get(tuple(s))
            if j is not None:
                operator[i, j] -= 1.0 / (2 * d)
    return operator


def green_dirichlet(sites):
    """Dense solve of (I - P_Lambda) G = I."""
    sites = as_sites(sites)
    if len(sites) == 0:
        raise DomainError('Dirichlet domain must be nonempty')
    limit = gffx_setting('DENSE_SITE_LIMIT')
    if len(sites) > limit:
        raise DomainError(f'{len(sites)} sites exceed the dense solve limit of {limit}')
    operator = restricted_laplacian(sites)
    try:
        factor = linalg.cho_factor(operator, lower=True)
    except linalg.LinAlgError as e:
        raise SolverError(f'Dirichlet operator could not be factorised: {e}') from e
    matrix = linalg.cho_solve(factor, np.eye(len(sites)))
    return DirichletGreen(sites, 0.5 * (matrix + matrix.T))


# Boxes [0, n-1]^d: the killed walk diagonalises in the sine basis.

def box_sites(n, d):
    """Sites of [0, n-1]^d in C order (last coordinate fastest)."""
    return np.indices((n,) * d).reshape(d, -1).T.astype(np.int64)


def sine_basis(n):
    """Orthonormal eigenvectors sqrt(2/(n+1)) sin(pi k (a+1)/(n+1)), rows a, columns k-1."""
    a = np.arange(1, n + 1)
    return math.sqrt(2.0 / (n + 1)) * np.sin(np.pi * np.outer(a, a) / (n + 1))


def box_eigenvalues(n, d):
    """Covariance eigenvalues 1 / (1 - (1/d) sum_j cos(pi k_j / (n+1))) on the (n,)*d grid."""
    cosines = np.cos(np.pi * np.arange(1, n + 1) / (n + 1))
    mean = sum(np.meshgrid(*([cosines] * d), indexing='ij', sparse=True)) / d
    return 1.0 / (1.0 - mean)


def _sine_rows(sites, n):
    """Rows of the tensor sine basis at the given box sites, columns in C order of k."""
    basis = sine_basis(n)
    sites = as_sites(sites)
    rows = basis[sites[:, 0]]
    for axis in range(1, sites.shape[1]):
        rows = (rows[:, :, None] * basis[sites[:, axis]][:, None, :]).reshape(len(sites), -1)
    return rows


def box_green_rows(n, d, rows, cols):
    """g_V(alpha, beta) for alpha in ``rows`` and beta in ``cols``, both (m, d) arrays of box sites."""
    d = check_dimension(d)
    weights = box_eigenvalues(n, d).ravel()
    return (_sine_rows(rows, n) * weights) @ _sine_rows(cols, n).T


def box_green_spectral(n, d):
    """Dirichlet Green's function of the box reconstructed from its sine eigenbasis."""
    d = check_dimension(d)
    if n < 1:
        raise DomainError('box side must be at least 1')
    limit = gffx_setting('DENSE_SITE_LIMIT')
    if n ** d > limit:
        raise DomainError(f'{n ** d} sites exceed the dense limit of {limit}')
    sites = box_sites(n, d)
    matrix = box_green_rows(n, d, sites, sites)
    return DirichletGreen(sites, 0.5 * (matrix + matrix.T))


def box_outer_boundary(n, d):
    """Sites outside [0, n-1]^d adjacent to it, with their unique neighbour inside."""
    outer, inner = [], []
    face = box_sites(n, d - 1) if d > 1 else np.zeros((1, 0), dtype=np.int64)
    for axis in range(d):
        for side, inside in ((-1, 0), (n, n - 1)):
            points = np.insert(face, axis, side, axis=1)
            outer.append(points)
            inner.append(np.insert(face, axis, inside, axis=1))
    return np.concatenate(outer), np.concatenate(inner)


def box_exit_kernel(n, d, rows=None):
    """Exit distribution P_alpha(S_tau = beta) from box sites onto the outer boundary.

    ``rows`` are flat C-order indices of the starting sites. Returns (boundary_sites,
    kernel) with kernel[i, j] for the i-th start. Rows sum to one: the walk leaves a
    finite box almost surely.
    """
    boundary, inner = box_outer_boundary(n, d)
    sites = box_sites(n, d)
    starts = sites if rows is None else sites[np.asarray(rows)]
    kernel = box_green_rows(n, d, starts, inner) / (2 * d)
    return boundary, kernel


# Truncated solves for hitting distributions of finite sets.

class KilledWalk:
    """Simple random walk killed on a finite target set K and on leaving a truncation box.

    The operator I - P_D on D = box minus K is applied matrix-free on the grid and
    inverted one row at a time by conjugate gradients.
    """

    def __init__(self, targets, radius, center=None, extra_sites=None, rtol=None):
        self.targets = as_sites(targets)
        self.d = check_dimension(self.targets.shape[1])
        self.radius = int(radius)
        everything = self.targets if extra_sites is None else np.concatenate([self.targets, as_sites(extra_sites, self.d)])
        if center is None:
            center = (everything.min(axis=0) + everything.max(axis=0)) // 2
        self.center = np.asarray(center, dtype=np.int64)
        self.shape = (2 * self.radius + 1,) * self.d
        self.rtol = gffx_setting('SOLVER_RTOL') if rtol is None else rtol
        self._check_interior(everything)
        self.free = np.ones(self.shape, dtype=bool)
        self.free[self._local(self.targets)] = False
        size = self.free.size
        self.operator = LinearOperator((size, size), matvec=self._apply, dtype=float)

    def _check_interior(self, points):
        offsets = np.abs(points - self.center)
        if offsets.size and offsets.max() >= self.radius:
            raise TruncationError(
                f'sites reach l-infinity distance {int(offsets.max())} from the centre; '
                f'truncation radius {self.radius} is too small'
            )

    def _local(self, points):
        return tuple((as_sites(points, self.d) - self.center + self.radius).T)

    def neighbour_sum(self, u):
        total = np.zeros_like(u)
        for axis in range(self.d):
            head = [slice(None)] * self.d
            tail = [slice(None)] * self.d
            head[axis] = slice(1, None)
            tail[axis] = slice(None, -1)
            total[tuple(head)] += u[tuple(tail)]
            total[tuple(tail)] += u[tuple(head)]
        return total

    def _apply(self, v):
        grid = v.reshape(self.shape)
        spread = self.neighbour_sum(grid * self.free)
        return (grid - self.free * spread / (2 * self.d)).ravel()

    def row(self, alpha):
        """g_D(alpha, .) on the grid; zero on K."""
        alpha = as_sites([alpha], self.d)
        self._check_interior(alpha)
        local = self._local(alpha)
        if not self.free[local][0]:
            raise DomainError(f'{tuple(alpha[0])} belongs to the target set')
        rhs = np.zeros(self.shape)
        rhs[local] = 1.0
        solution, info = cg(self.operator, rhs.ravel(), rtol=self.rtol, maxiter=20 * self.free.size)
        if info != 0:
            raise SolverError(f'conjugate gradients failed with status {info}')
        return solution.reshape(self.shape) * self.free

    def values(self, row, sites):
        return row[self._local(sites)]

    def hitting_weights(self, row):
        """P_alpha(H_K < exit, S_{H_K} = beta) for beta in K from a row of g_D."""
        arrivals = self.neighbour_sum(row) / (2 * self.d)
        return np.clip(arrivals[self._local(self.targets)], 0.0, None)


@dataclass(frozen=True)
class HittingDistribution:
    start: tuple
    targets: np.ndarray
    weights: np.ndarray
    radius: int = 0
    converged: bool = True
    change: float = 0.0

    @property
    def defect(self):
        """Mass of walks that escape (to infinity, or past the truncation box)."""
        return float(1.0 - self.weights.sum())

    def as_dict(self):
        return {tuple(b): float(w) for b, w in zip(self.targets.tolist(), self.weights)}

    def weight(self, beta):
        return self.as_dict().get(tuple(int(c) for c in beta), 0.0)


def default_truncation_radius(points):
    points = as_sites(points)
    diameter = int(np.ptp(points, axis=0).max()) if len(points) else 0
    return max(4 * diameter, 32)


def green_hitting_matrix(starts, targets, green=None):
    """Rows P_alpha(H_K < infinity, S_{H_K} = beta) from g alone.

    Last-exit decomposition: g(alpha, gamma) = sum_beta H(alpha, beta) g(beta, gamma)
    for gamma in K, so H = g(starts, K) g_KK^{-1} for any finite K and starts off K.
    """
    targets = as_sites(targets)
    d = check_dimension(targets.shape[1])
    starts = as_sites(starts, d)
    limit = gffx_setting('DENSE_SITE_LIMIT')
    if len(targets) > limit:
        raise DomainError(f'{len(targets)} target sites exceed the dense solve limit of {limit}')
    everything = np.concatenate([targets, starts])
    if green is None or not green.covers(everything):
        green = load_or_build_green_table(d, int(np.ptp(everything, axis=0).max()))
    try:
        factor = linalg.cho_factor(green.covariance(targets), lower=True)
    except linalg.LinAlgError as e:
        raise SolverError(f'g restricted to the target set could not be factorised: {e}') from e
    return linalg.cho_solve(factor, green.cross(targets, starts)).T


def hitting_distribution(alpha, targets, trunc_radius=None, tol=None, max_sites=None, green=None,
                         method='green'):
    """Hitting distribution of the finite set K = ``targets`` from ``alpha``.

    ``method='green'`` solves the last-exit identity exactly with a Green table (``green``
    or one built to cover alpha and K). With ``trunc_radius`` the Dirichlet problem is
    instead solved once on that box. ``method='truncated'`` doubles the default radius
    max(4 diam, 32) until the weights move less than ``tol`` or the grid would exceed
    ``max_sites``; walks that leave the box are lost, so those weights sit below the
    exact ones by O(1/R).
    """
    targets = as_sites(targets)
    d = check_dimension(targets.shape[1])
    alpha = as_point(alpha, d)
    if len(targets) == 0:
        raise DomainError('target set must be nonempty')
    if method not in ('green', 'truncated'):
        raise DomainError(f'unknown hitting method {method!r}')
    hits = (targets == np.array(alpha)).all(axis=1)
    if hits.any():
        return HittingDistribution(alpha, targets, hits.astype(float), radius=0)

    if trunc_radius is None and method == 'green':
        weights = green_hitting_matrix([alpha], targets, green)[0]
        return HittingDistribution(alpha, targets, weights, radius=0, converged=True, change=0.0)

    everything = np.concatenate([targets, [alpha]])
    tol = gffx_setting('HITTING_TOL') if tol is None else tol
    max_sites = gffx_setting('HITTING_MAX_SITES') if max_sites is None else max_sites
    radius = default_truncation_radius(everything) if trunc_radius is None else int(trunc_radius)

    walk = KilledWalk(targets, radius, extra_sites=[alpha])
    weights = walk.hitting_weights(walk.row(alpha))
    if trunc_radius is not None:
        return HittingDistribution(alpha, targets, weights, radius=radius, converged=True, change=0.0)

    change = math.inf
    while (4 * radius + 1) ** d <= max_sites:
        radius *= 2
        walk = KilledWalk(targets, radius, center=walk.center)
        refined = walk.hitting_weights(walk.row(alpha))
        change = float(np.max(np.abs(refined - weights)))
        weights = refined
        if change < tol:
            return HittingDistribution(alpha, targets, weights, radius=radius, converged=True, change=change)
    logger.warning(
        'Hitting distribution from %s not converged at radius %d (last change %.2e)', alpha, radius, change
    )
    return HittingDistribution(alpha, targets, weights, radius=radius, converged=False, change=change)


@dataclass(frozen=True)
class WalkOracle:
    steps: int
    walks: int
    visits: float
    visits_stderr: float
    tail: float
    return_probability: float
    return_stderr: float

    @property
    def green_estimate(self):
        """Visits to the origin with the analytic tail beyond ``steps`` added back."""
        return self.visits + self.tail


def walk_visits_oracle(d, walks, max_steps, seed=0):
    """Monte Carlo count of visits to the origin by ``walks`` walks of ``max_steps`` steps."""
    d = check_dimension(d)
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))
    position = np.zeros((walks, d), dtype=np.int64)
    visits = np.ones(walks)
    returned = np.zeros(walks, dtype=bool)
    rows = np.arange(walks)
    for _ in range(max_steps):
        move = rng.integers(0, 2 * d, size=walks)
        position[rows, move // 2] += 2 * (move % 2) - 1
        at_origin = ~position.any(axis=1)
        visits += at_origin
        returned |= at_origin
    p = returned.mean()
    tail = (d / (2 * math.pi)) ** (d / 2) * max_steps ** (1 - d / 2) / (d / 2 - 1)
    return WalkOracle(
        steps=max_steps,
        walks=walks,
        visits=float(visits.mean()),
        visits_stderr=float(visits.std(ddof=1) / math.sqrt(walks)),
        tail=tail,
        return_probability=float(p),
        return_stderr=float(math.sqrt(p * (1 - p) / walks)),
    )
