"""Reproducible experiments on the extremes of the free field.

Each ``run_*`` function takes a validated ExperimentConfig and returns an
ExperimentResult whose rows depend only on the config and its master seed.
"""
import json
import logging
import math
import time
from dataclasses import asdict, dataclass, field, fields

import numpy as np

from . import extremes, lattice_green, stein_chen
from .conf import gffx_setting
from .exceptions import ConfigError, DomainError, GffxError
from .field_sampler import (
    LAW_DIRICHLET, LAW_IID, LAW_INFINITE, BoundarySampler, BoxDomain, CholeskySampler, FieldSample,
    SpectralBoxSampler, iid_max_sample,
)
from .forms import ExperimentConfigForm
from .replicates import make_rng, run_replicates

logger = logging.getLogger(__name__)

DEFAULT_TOLERANCES = {
    'gumbel': 0.06,
    'identity': 1e-7,
    'hitting': 1e-5,
    'lln_low': 0.85,
    'lln_high': 1.0,
}
MIN_CHECKED_REPLICATES = 100


@dataclass(frozen=True)
class ExperimentConfig:
    name: str = 'gumbel'
    d: int = 3
    sides: list = field(default_factory=lambda: [8, 16])
    window_sides: list = field(default_factory=lambda: [8, 12])
    laws: list = field(default_factory=lambda: [LAW_DIRICHLET, LAW_INFINITE, LAW_IID])
    z_grid: list = field(default_factory=lambda: [-2.0, -1.0, 0.0, 1.0, 2.0, 3.0])
    check_z: list = field(default_factory=lambda: [-1.0, 0.0, 1.0, 2.0])
    delta: float = 0.1
    epsilon: float = 0.05
    replicates: int = 10_000
    master_seed: int = 0
    workers: int = 1
    output_dir: str = 'results'
    quad_tol: float = 1e-8
    tolerances: dict = field(default_factory=dict)
    n_grid: list = field(default_factory=lambda: [1e3, 1e4, 1e5, 1e6, 1e7, 1e8])
    instance_side: int = 12
    lambdas: list = field(default_factory=lambda: [0.5, 1.0, 2.0])
    control_sites: int = 64
    check_side: int = 6
    ball_radius: int = 1
    hitting_radius: int = None

    def tolerance(self, key):
        return self.tolerances.get(key, DEFAULT_TOLERANCES[key])

    def to_dict(self):
        return asdict(self)

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    @classmethod
    def from_dict(cls, data):
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ConfigError({key: ['Unknown config key.'] for key in unknown})
        form = ExperimentConfigForm(data={**asdict(cls()), **data})
        if not form.is_valid():
            raise ConfigError(form.errors)
        return cls(**form.cleaned_data)

    @classmethod
    def from_json(cls, text):
        try:
            data = json.loads(text)
        except ValueError as e:
            raise ConfigError({'__all__': [f'Config is not valid JSON: {e}']}) from e
        if not isinstance(data, dict):
            raise ConfigError({'__all__': ['Config must be a JSON object.']})
        return cls.from_dict(data)

    def with_overrides(self, **overrides):
        changes = {key: value for key, value in overrides.items() if value is not None}
        return self.from_dict({**self.to_dict(), **changes}) if changes else self


def load_config(path=None, name=None, **overrides):
    """Config from a JSON file over the project defaults, with ``name`` and CLI overrides applied."""
    data = {}
    if path:
        try:
            with open(path, encoding='utf-8') as f:
                data = json.loads(f.read())
        except OSError as e:
            raise ConfigError({'config': [f'Cannot read {path}: {e}']}) from e
        except ValueError as e:
            raise ConfigError({'config': [f'{path} is not valid JSON: {e}']}) from e
        if not isinstance(data, dict):
            raise ConfigError({'config': ['Config must be a JSON object.']})
    defaults = {'workers': gffx_setting('WORKERS'), 'output_dir': str(gffx_setting('OUTPUT_DIR'))}
    config = ExperimentConfig.from_dict({**defaults, **data})
    return config.with_overrides(name=name, **overrides)


@dataclass
class ExperimentResult:
    config: ExperimentConfig
    columns: list
    rows: list = field(default_factory=list)
    summary: dict = field(default_factory=dict)
    checks: dict = field(default_factory=dict)
    wall_clock: float = 0.0
    partial: bool = False
    error: str = ''
    plot: dict = None

    @property
    def passed(self):
        return not self.partial and all(self.checks.values())

    @property
    def failed_checks(self):
        return sorted(name for name, ok in self.checks.items() if not ok)

    def add_row(self, **values):
        self.rows.append({column: values.get(column) for column in self.columns})

    def sidecar(self):
        return {
            'config': self.config.to_dict(),
            'master_seed': self.config.master_seed,
            'workers': self.config.workers,
            'columns': self.columns,
            'summary': self.summary,
            'checks': self.checks,
            'passed': self.passed,
            'partial': self.partial,
            'error': self.error,
            'wall_clock': self.wall_clock,
        }


def experiment(columns, plot=None):
    """Time the run and turn library failures into a partial result."""
    def decorate(func):
        def run(config, **kwargs):
            result = ExperimentResult(config, list(columns), plot=plot)
            started = time.perf_counter()
            try:
                func(config, result, **kwargs)
            except GffxError as e:
                logger.error('%s aborted: %s', config.name, e)
                result.partial = True
                result.error = str(e)
            result.wall_clock = time.perf_counter() - started
            return result
        run.__name__ = func.__name__
        run.__doc__ = func.__doc__
        return run
    return decorate


def origin(d):
    return (0,) * d


def green_for(config, radius):
    return lattice_green.load_or_build_green_table(config.d, radius, config.quad_tol)


def replicate_series(config, task, series):
    return run_replicates(task, config.replicates, config.master_seed, config.workers, stream=(series,))


# Picklable replicate tasks.

class BoxMaxTask:
    def __init__(self, box, mask=None):
        self.sampler = SpectralBoxSampler(box)
        self.mask = mask

    def __call__(self, index, rng):
        values = self.sampler.draw(rng)
        bulk_max = float(values[self.mask].max()) if self.mask is not None else math.nan
        return float(values.max()), bulk_max


class WindowMaxTask:
    def __init__(self, sampler):
        self.sampler = sampler

    def __call__(self, index, rng):
        return float(self.sampler.draw(rng).max())


class IIDMaxTask:
    def __init__(self, N, g0):
        self.N = N
        self.g0 = g0

    def __call__(self, index, rng):
        return float(iid_max_sample(self.N, self.g0, rng))


class BernoulliZeroTask:
    def __init__(self, N, p):
        self.N = N
        self.p = p

    def __call__(self, index, rng):
        return not (rng.random(self.N) < self.p).any()


class NoExceedanceTask:
    def __init__(self, sampler, u):
        self.sampler = sampler
        self.u = u

    def __call__(self, index, rng):
        return not (self.sampler.draw(rng) > self.u).any()


class DriftMaxTask:
    def __init__(self, sampler, kernel):
        self.sampler = sampler
        self.kernel = kernel

    def __call__(self, index, rng):
        return float(np.abs(self.kernel @ self.sampler.draw(rng)).max())


def _gumbel_rows(result, law, n, N, rescaled, target, z_grid, lower_bound=None):
    ks = extremes.ks_distance(rescaled, target) if rescaled.size >= 2 else math.nan
    below = extremes.empirical_cdf(rescaled, z_grid)
    for z, p in zip(z_grid, below):
        k = int(round(p * rescaled.size))
        low, high = extremes.wilson_interval(k, rescaled.size)
        result.add_row(
            law=law, n=n, N=N, z=z, empirical_P=float(p), ci_low=low, ci_high=high,
            gumbel_P=float(target(z)), ks=ks, lower_bound=None if lower_bound is None else lower_bound(z),
        )
    return ks


def _band(rescaled, target, check_z):
    if not check_z:
        return 0.0
    return float(np.max(np.abs(extremes.empirical_cdf(rescaled, check_z) - target(np.asarray(check_z)))))


GUMBEL_COLUMNS = ['law', 'n', 'N', 'z', 'empirical_P', 'ci_low', 'ci_high', 'gumbel_P', 'ks', 'lower_bound']


@experiment(GUMBEL_COLUMNS, plot={'x': 'z', 'y': ['empirical_P', 'gumbel_P'], 'group': ['law', 'n']})
def run_gumbel(config, result):
    """Empirical P((max - b_N)/a_N < z) against exp(-e^{-z}) for every law and size."""
    d = config.d
    g0 = lattice_green.green_infinite(origin(d), d, config.quad_tol)
    result.summary.update(g0=g0, kappa=1 / g0, ks={}, band={})
    checked = config.replicates >= MIN_CHECKED_REPLICATES
    series = 0
    for law in config.laws:
        sizes = config.window_sides if law == LAW_INFINITE else config.sides
        ks_values = []
        for n in sizes:
            series += 1
            N = n ** d
            sc = extremes.scaling_constants(N, g0)
            logger.info('gumbel: law=%s n=%d (%d replicates)', law, n, config.replicates)
            lower_bound = None
            if law == LAW_DIRICHLET:
                box = BoxDomain(d, n)
                mask = extremes.bulk_mask(box, config.delta)
                outcomes = np.array(replicate_series(config, BoxMaxTask(box, mask), series))
                maxima, bulk_maxima = outcomes[:, 0], outcomes[:, 1]
                variances = SpectralBoxSampler(box).variances()
                lower_bound = lambda z, v=variances, sc=sc: extremes.independent_lower_bound(v, sc.threshold(z), g0)[0]
                bulk_lower = lambda z, v=variances[mask], sc=sc: extremes.independent_lower_bound(v, sc.threshold(z), g0)[0]
                shifted = lambda z: extremes.shifted_gumbel_cdf(z, d, config.delta)
                _gumbel_rows(result, f'{law}-bulk', n, N, sc.rescale(bulk_maxima), shifted, config.z_grid, bulk_lower)
            elif law == LAW_INFINITE:
                green = green_for(config, n - 1)
                sampler = CholeskySampler(green.covariance(lattice_green.box_sites(n, d)))
                maxima = np.array(replicate_series(config, WindowMaxTask(sampler), series))
            else:
                maxima = np.array(replicate_series(config, IIDMaxTask(N, g0), series))
            rescaled = sc.rescale(maxima)
            ks = _gumbel_rows(result, law, n, N, rescaled, extremes.gumbel_cdf, config.z_grid, lower_bound)
            ks_values.append(ks)
            result.summary['ks'][f'{law}/{n}'] = ks
            result.summary['band'][f'{law}/{n}'] = _band(rescaled, extremes.gumbel_cdf, config.check_z)
        if checked and sizes:
            band = result.summary['band'][f'{law}/{sizes[-1]}']
            result.checks[f'gumbel_band[{law},n={sizes[-1]}]'] = band <= config.tolerance('gumbel')
        if checked and len(ks_values) > 1:
            result.checks[f'ks_decreasing[{law}]'] = ks_values[-1] < ks_values[0]


LLN_COLUMNS = ['law', 'n', 'N', 'ratio', 'stderr', 'flag']


@experiment(LLN_COLUMNS, plot={'x': 'n', 'y': ['ratio'], 'group': ['law']})
def run_lln(config, result):
    """E[max] / sqrt(2 g0 log N) along increasing boxes; the limit is 1."""
    d = config.d
    g0 = lattice_green.green_infinite(origin(d), d, config.quad_tol)
    result.summary.update(g0=g0, ratios={})
    series = 0
    for law in config.laws:
        sizes = config.window_sides if law == LAW_INFINITE else config.sides
        ratios = []
        for n in sizes:
            series += 1
            N = n ** d
            if N < 3 or config.replicates < 100:
                result.add_row(law=law, n=n, N=N, flag='single-site' if N < 3 else 'too-few-replicates')
                continue
            if law == LAW_DIRICHLET:
                outcomes = np.array(replicate_series(config, BoxMaxTask(BoxDomain(d, n)), series))
                maxima = outcomes[:, 0]
            elif law == LAW_INFINITE:
                green = green_for(config, n - 1)
                sampler = CholeskySampler(green.covariance(lattice_green.box_sites(n, d)))
                maxima = np.array(replicate_series(config, WindowMaxTask(sampler), series))
            else:
                maxima = np.array(replicate_series(config, IIDMaxTask(N, g0), series))
            estimate = extremes.lln_ratio(maxima, g0, N)
            ratios.append(estimate.mean)
            result.summary['ratios'][f'{law}/{n}'] = estimate.mean
            result.add_row(law=law, n=n, N=N, ratio=estimate.mean, stderr=estimate.stderr, flag='')
        if len(ratios) > 1:
            result.checks[f'lln_increasing[{law}]'] = ratios[-1] > ratios[0]
        if ratios:
            low, high = config.tolerance('lln_low'), config.tolerance('lln_high')
            result.checks[f'lln_band[{law}]'] = low <= ratios[-1] <= high


BOUNDS_COLUMNS = [
    'kind', 'N', 'z', 'epsilon', 'lambda', 'b1', 'b2', 'b3_surrogate', 'tv_bound', 'empirical_gap', 'gap_bound',
]


def _decreasing(values):
    return all(b < a for a, b in zip(values, values[1:]))


@experiment(BOUNDS_COLUMNS, plot={'x': 'N', 'y': ['b1', 'b2', 'b3_surrogate'], 'group': ['kind', 'z'], 'log': True})
def run_bounds(config, result):
    """Stein-Chen terms over the N grid, Poisson gaps on independent controls and a field instance."""
    d, epsilon = config.d, config.epsilon
    if not config.n_grid:
        raise DomainError('the N grid is empty')
    g0 = lattice_green.green_infinite(origin(d), d, config.quad_tol)
    kappa = 1 / g0
    turning = stein_chen.b2_turning_point(d, epsilon, kappa)
    result.summary.update(g0=g0, kappa=kappa, b2_exponent=stein_chen.b2_exponent(kappa), b2_turning_point=turning)

    z_check = 0.0 if 0.0 in config.z_grid else config.z_grid[0]
    decay = {'b1': [], 'b2': [], 'b3': []}
    for N in config.n_grid:
        drift_var = stein_chen.tabulation_drift_variance(N, d, epsilon, config.quad_tol)
        for z in config.z_grid:
            bounds = stein_chen.analytic_bounds(N, d, epsilon, z, g0, kappa, drift_var)
            result.add_row(
                kind='analytic', N=N, z=z, epsilon=epsilon, **{'lambda': bounds.lam}, b1=bounds.b1, b2=bounds.b2,
                b3_surrogate=bounds.b3_surrogate, tv_bound=bounds.tv_bound, gap_bound=bounds.w0_gap_bound,
            )
            if z == z_check:
                decay['b1'].append(bounds.b1)
                decay['b3'].append(bounds.b3_surrogate)
                if N >= turning:
                    decay['b2'].append(bounds.b2)
    result.checks['b1_decreasing'] = _decreasing(decay['b1'])
    result.checks['b3_decreasing'] = _decreasing(decay['b3'])
    # b2 rises up to the turning point; its decay is only checkable on two or more later grid points.
    result.summary['b2_points_past_turning_point'] = len(decay['b2'])
    if len(decay['b2']) > 1:
        result.checks['b2_decreasing_past_turning_point'] = _decreasing(decay['b2'])
    else:
        logger.info('bounds: fewer than two grid points past N=%.3g, b2 decay not checked', turning)

    low, high = min(config.n_grid), max(config.n_grid)
    if high > low:
        slope = (
            math.log(stein_chen.b2_bound(high, d, epsilon, 0.0, g0, kappa, neighborhood_size=1))
            - math.log(stein_chen.b2_bound(low, d, epsilon, 0.0, g0, kappa, neighborhood_size=1))
        ) / (math.log(high) - math.log(low))
        result.summary['b2_log_slope'] = slope
        result.checks['b2_exponent'] = abs(slope - stein_chen.b2_exponent(kappa)) <= 1e-6

    series = 0
    for lam in config.lambdas:
        series += 1
        N = config.control_sites
        if lam >= N:
            raise DomainError(f'lambda={lam} needs more than {N} control sites')
        control = stein_chen.bernoulli_control(N, lam / N)
        zeros = replicate_series(config, BernoulliZeroTask(N, lam / N), series)
        check = stein_chen.poisson_gap(control.bounds, float(np.mean(zeros)), trials=len(zeros))
        result.add_row(
            kind='iid-control', N=N, z=None, epsilon=None, **{'lambda': control.bounds.lam}, b1=control.bounds.b1,
            b2=0.0, b3_surrogate=0.0, tv_bound=control.bounds.tv_bound, empirical_gap=check.gap,
            gap_bound=check.bound + check.radius,
        )
        result.checks[f'poisson_gap[iid,lambda={lam:g}]'] = check.passed

    series += 1
    n = config.instance_side
    sites = lattice_green.box_sites(n, d)
    N = len(sites)
    green = green_for(config, n - 1)
    sc = extremes.scaling_constants(N, g0)
    u = sc.threshold(0.0)
    p = extremes.normal_tail(u / math.sqrt(g0))
    radius = stein_chen.neighbourhood_radius(N, epsilon)
    largest = int(stein_chen.neighbourhood_sizes(sites, radius).max())
    b3 = stein_chen.b3_surrogate(N, d, epsilon, 0.0, g0, stein_chen.tabulation_drift_variance(N, d, epsilon, config.quad_tol))
    bounds = stein_chen.SteinChenBounds(
        lam=N * p,
        b1=stein_chen.exact_b1(sites, epsilon, p, radius),
        b2=stein_chen.b2_instance_bound(N, largest, g0, green.value((1,) + (0,) * (d - 1)), u),
        b3_surrogate=b3.value,
        provenance=stein_chen.EXACT,
    )
    sampler = CholeskySampler(green.covariance(sites))
    zeros = replicate_series(config, NoExceedanceTask(sampler, u), series)
    check = stein_chen.poisson_gap(bounds, float(np.mean(zeros)), trials=len(zeros))
    result.add_row(
        kind='field-instance', N=N, z=0.0, epsilon=epsilon, **{'lambda': bounds.lam}, b1=bounds.b1, b2=bounds.b2,
        b3_surrogate=bounds.b3_surrogate, tv_bound=bounds.tv_bound, empirical_gap=check.gap,
        gap_bound=check.bound + check.radius,
    )
    result.summary['instance_tail_evaluated'] = b3.tail_evaluated
    result.checks[f'poisson_gap[field,n={n}]'] = check.passed
    exact_b2 = stein_chen.exact_b2(sites, green, u, radius)
    result.summary['instance_exact_b2'] = exact_b2
    result.checks['exact_b2_below_instance_bound'] = exact_b2 <= bounds.b2


MARKOV_COLUMNS = ['kind', 'n', 'N', 'delta', 'epsilon', 'value', 'tolerance', 'bound', 'ci_low', 'ci_high']


def shell_walk(n, d, hitting_radius=None):
    """Walk killed on the outer boundary of the side-n box; every start inside hits it surely."""
    boundary = lattice_green.box_outer_boundary(n, d)[0]
    radius = hitting_radius or n // 2 + 2
    return boundary, lattice_green.KilledWalk(boundary, radius, extra_sites=lattice_green.box_sites(n, d))


@experiment(MARKOV_COLUMNS, plot={'x': 'n', 'y': ['value', 'bound'], 'group': ['kind']})
def run_markov_check(config, result):
    """Markov decomposition identities on a small box and bulk drift exceedances along box sizes."""
    d, delta, epsilon = config.d, config.delta, config.epsilon
    n = config.check_side
    green = green_for(config, max([n] + list(config.sides)) + 1)
    g0 = green.g0
    tolerance = config.tolerance('identity')
    result.summary['g0'] = g0

    sites = lattice_green.box_sites(n, d)
    boundary, walk = shell_walk(n, d, config.hitting_radius)
    hitting = np.array([walk.hitting_weights(walk.row(alpha)) for alpha in sites])
    residual = float(np.max(np.abs(green.cross(sites, boundary) - hitting @ green.covariance(boundary))))
    result.add_row(kind='identity', n=n, N=len(sites), value=residual, tolerance=tolerance)
    result.checks['markov_identity'] = residual <= tolerance

    exact = lattice_green.green_hitting_matrix(sites, boundary, green)
    agreement = float(np.max(np.abs(exact - hitting)))
    result.add_row(
        kind='hitting-agreement', n=n, N=len(sites), value=agreement, tolerance=config.tolerance('hitting'),
    )
    result.checks['hitting_methods_agree'] = agreement <= config.tolerance('hitting')

    drift_var = np.einsum('ij,ij->i', hitting, green.cross(sites, boundary))
    site_residual = float(np.max(np.abs(g0 - SpectralBoxSampler(BoxDomain(d, n)).variances() - drift_var)))
    result.add_row(kind='site-identity', n=n, N=len(sites), value=site_residual, tolerance=tolerance)
    result.checks['site_identity'] = site_residual <= tolerance

    center = BoxDomain(d, n).center()
    drift = stein_chen.drift_variance_bound(
        sites, center, epsilon, green, radius=config.ball_radius, trunc_radius=config.hitting_radius,
    )
    result.add_row(kind='drift-variance', n=n, N=len(sites), value=drift.exact, bound=drift.bound)
    result.checks['drift_variance_below_sup'] = drift.exact <= drift.bound

    exceedances = []
    for series, side in enumerate(config.sides, start=1):
        box = BoxDomain(d, side)
        mask = extremes.bulk_mask(box, delta)
        m = (1 - 2 * delta) ** d * box.N
        a_m = extremes.scaling_constants(m, g0).a_N
        level = epsilon * a_m
        _, kernel = lattice_green.box_exit_kernel(side, d, rows=np.flatnonzero(mask))
        task = DriftMaxTask(BoundarySampler(box, green), kernel)
        maxima = np.array(replicate_series(config, task, series))
        hits = int((maxima > level).sum())
        p = hits / len(maxima)
        low, high = extremes.wilson_interval(hits, len(maxima))
        worst = float(np.max(g0 - SpectralBoxSampler(box).variances()[mask]))
        bound = stein_chen.drift_tail_bound(worst, m, epsilon, a_m)
        logger.info('markov_check: n=%d P(max |mu| > %.4f) = %.4f', side, level, p)
        result.add_row(
            kind='drift-exceedance', n=side, N=box.N, delta=delta, epsilon=epsilon, value=p, tolerance=level,
            bound=bound, ci_low=low, ci_high=high,
        )
        exceedances.append(p)
    if len(exceedances) > 1:
        result.checks['drift_exceedance_decreasing'] = exceedances[-1] <= exceedances[0]


@experiment([])
def run_green(config, result, radius):
    """g(x) on every canonical point of the window of the given radius."""
    d = config.d
    result.columns = [f'x{j + 1}' for j in range(d)] + ['g']
    table = green_for(config, radius)
    for key, value in sorted(table.values.items()):
        result.add_row(**{f'x{j + 1}': c for j, c in enumerate(key)}, g=value)
    worst = max((abs(r) for r in table.harmonicity_residuals().values()), default=0.0)
    result.summary.update(g0=table.g0, kappa=table.kappa, achieved=table.achieved, harmonicity=worst)
    result.checks['harmonicity'] = worst <= 10 * config.quad_tol


@experiment([])
def run_sample(config, result, law, side):
    """One field realisation on the side-n box (or window) under the given law."""
    d = config.d
    result.columns = [f'x{j + 1}' for j in range(d)] + ['value']
    rng = make_rng(config.master_seed)
    sites = lattice_green.box_sites(side, d)
    if law == LAW_DIRICHLET:
        values = SpectralBoxSampler(BoxDomain(d, side)).draw(rng)
    elif law == LAW_INFINITE:
        values = CholeskySampler(green_for(config, side - 1).covariance(sites)).draw(rng)
    elif law == LAW_IID:
        g0 = lattice_green.green_infinite(origin(d), d, config.quad_tol)
        values = math.sqrt(g0) * rng.standard_normal(len(sites))
    else:
        raise DomainError(f'cannot sample law {law!r} directly')
    sample = FieldSample(sites, values, law, config.master_seed)
    for site, value in zip(sample.sites.tolist(), sample.values):
        result.add_row(**{f'x{j + 1}': c for j, c in enumerate(site)}, value=float(value))
    result.summary.update(law=law, side=side, seed=config.master_seed, max=sample.max())


ORACLE_COLUMNS = ['statistic', 'alpha', 'beta', 'value', 'ci_low', 'ci_high', 'bound']


@experiment(ORACLE_COLUMNS)
def run_oracle(config, result, side, z, budget):
    """Ground truth on the side-n box (at most 12 sites) against the Mills and Savage bounds."""
    d = config.d
    sites = lattice_green.box_sites(side, d)
    green = green_for(config, side)
    N = max(len(sites), 3)
    u = extremes.scaling_constants(N, green.g0).threshold(z)
    estimate = stein_chen.exact_small_oracle(sites, u, green, budget, seed=config.master_seed)
    p = extremes.normal_tail(u / math.sqrt(green.g0))
    low, high = estimate.p_w0_interval
    result.add_row(statistic='P(W=0)', value=estimate.p_w0, ci_low=low, ci_high=high, bound=math.exp(-len(sites) * p))
    result.add_row(
        statistic='E[W]', value=estimate.mean_w, ci_low=estimate.mean_w - 3 * estimate.mean_w_stderr,
        ci_high=estimate.mean_w + 3 * estimate.mean_w_stderr, bound=len(sites) * p,
    )
    savage_ok = True
    for i in range(len(sites)):
        for j in range(i + 1, len(sites)):
            rho = green.value(sites[i] - sites[j])
            bound = stein_chen.savage_tail_bound(stein_chen.BivariateGaussianSpec(green.g0, rho), u)
            value, radius = float(estimate.joint[i, j]), float(estimate.joint_radius[i, j])
            result.add_row(
                statistic='E[X_a X_b]', alpha=str(tuple(sites[i].tolist())), beta=str(tuple(sites[j].tolist())), value=value,
                ci_low=value - radius, ci_high=value + radius, bound=bound,
            )
            savage_ok &= value - radius <= bound
    result.summary.update(u=u, p=p, samples=estimate.samples)
    result.checks['savage_bound'] = savage_ok


EXPERIMENT_RUNNERS = {
    'gumbel': run_gumbel,
    'lln': run_lln,
    'bounds': run_bounds,
    'markov_check': run_markov_check,
}
