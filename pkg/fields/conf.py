from pathlib import Path

from django.conf import settings

DEFAULTS = {
    'CACHE_DIR': Path('cache'),
    'OUTPUT_DIR': Path('results'),
    'QUAD_TOL': 1e-8,
    'DENSE_SITE_LIMIT': 8000,
    'MIN_EIGENVALUE': 1e-10,
    'HITTING_TOL': 1e-6,
    'HITTING_MAX_SITES': 2_500_000,
    'SOLVER_RTOL': 1e-12,
    'WORKERS': 1,
}


def gffx_setting(name):
    """Return one entry of ``settings.GFFX`` with the package defaults applied."""
    overrides = getattr(settings, 'GFFX', {})
    if name in overrides:
        return overrides[name]
    return DEFAULTS[name]
