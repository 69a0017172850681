"""
Django settings for the gffx project.

The project has no web surface: Django provides settings, the management-command CLI,
form validation for experiment configs and a small ORM store of finished runs.

For the full list of settings and their values, see
https://docs.djangoproject.com/en/5.2/ref/settings/
"""

import os
from pathlib import Path

# Build paths inside the project like this: BASE_DIR / 'subdir'.
BASE_DIR = Path(__file__).resolve().parent.parent


# SECURITY WARNING: keep the secret key used in production secret!
SECRET_KEY = os.environ.get('GFFX_SECRET_KEY', 'gffx-local-only-key')

DEBUG = bool(os.environ.get('GFFX_DEBUG'))

ALLOWED_HOSTS = []


# Application definition

INSTALLED_APPS = [
    'fields',
]

MIDDLEWARE = []


# Database
# https://docs.djangoproject.com/en/5.2/ref/settings/#databases

DATABASES = {
    'default': {
        'ENGINE': 'django.db.backends.sqlite3',
        'NAME': BASE_DIR / 'db.sqlite3',
    }
}


# Internationalization
# https://docs.djangoproject.com/en/5.2/topics/i18n/

LANGUAGE_CODE = 'en-us'

TIME_ZONE = 'UTC'

USE_I18N = False

USE_TZ = True


# Default primary key field type
# https://docs.djangoproject.com/en/5.2/ref/settings/#default-auto-field

DEFAULT_AUTO_FIELD = 'django.db.models.BigAutoField'


# Logging
# https://docs.djangoproject.com/en/5.2/topics/logging/

LOGGING = {
    'version': 1,
    'disable_existing_loggers': False,
    'formatters': {
        'plain': {
            'format': '{asctime} {levelname} {name}: {message}',
            'style': '{',
        },
    },
    'handlers': {
        'console': {
            'class': 'logging.StreamHandler',
            'formatter': 'plain',
        },
    },
    'loggers': {
        'fields': {
            'handlers': ['console'],
            'level': 'DEBUG' if DEBUG else 'INFO',
            'propagate': False,
        },
    },
}


# Lattice computations
# GFFX_CACHE overrides the directory holding cached Green tables.

GFFX = {
    'CACHE_DIR': Path(os.environ.get('GFFX_CACHE', BASE_DIR / 'cache')),
    'OUTPUT_DIR': BASE_DIR / 'results',
    'QUAD_TOL': 1e-8,
    'DENSE_SITE_LIMIT': 8000,
    'MIN_EIGENVALUE': 1e-10,
    'HITTING_TOL': 1e-6,
    'HITTING_MAX_SITES': 2_500_000,
    'SOLVER_RTOL': 1e-12,
    'WORKERS': 1,
}
