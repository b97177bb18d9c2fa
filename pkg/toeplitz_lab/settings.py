import os
from pathlib import Path
from decouple import config

# Build paths inside the project like this: BASE_DIR / 'subdir'.
BASE_DIR = Path(__file__).resolve().parent.parent

# The project has no web surface; the key only satisfies Django's startup checks.
SECRET_KEY = config('SECRET_KEY', default='toeplitz-lab-local-key')

DEBUG = config('DEBUG', default=False, cast=bool)

ALLOWED_HOSTS = []

# Application definition
INSTALLED_APPS = [
    'django.contrib.contenttypes',
    'django.contrib.auth',

    # Third-party apps
    'rest_framework',

    # Local apps
    'toeplitz_lab.apps.geometry',
    'toeplitz_lab.apps.superform',
    'toeplitz_lab.apps.spaces',
    'toeplitz_lab.apps.toeplitz',
    'toeplitz_lab.apps.asymptotics',
    'toeplitz_lab.apps.sampling',
    'toeplitz_lab.apps.experiments',
]

# No persistence: every artifact is a CSV/JSON file under OUTPUT_DIR.
DATABASES = {}

USE_I18N = False
USE_TZ = True
TIME_ZONE = config('TIME_ZONE', default='UTC')

DEFAULT_AUTO_FIELD = 'django.db.models.BigAutoField'

# Experiment output and execution
# TOEPLITZ_LAB_OUTPUT_DIR beats the output_dir of an experiment config; --out beats both
OUTPUT_DIR_OVERRIDE = config('TOEPLITZ_LAB_OUTPUT_DIR', default=None)
OUTPUT_DIR = BASE_DIR / 'output'
THREADS = config('TOEPLITZ_LAB_THREADS', default=1, cast=int)
SEED = config('TOEPLITZ_LAB_SEED', default=20240601, cast=int)

# Numerical defaults shared by all apps
TOEPLITZ_LAB = {
    # |λ| below this classifies a node as DEGENERATE
    'CURVATURE_EPS': 1e-9,
    # Gauss-Legendre nodes per radial segment, trapezoid nodes in angle
    'CURVE_RESOLUTION': (64, 128),
    'PRODUCT_RESOLUTION': (16, 32),
    'MIN_RESOLUTION': (4, 8),
    # anchors for the off-diagonal mass (coarse outer rule) and inner polar rule
    'ANCHOR_RESOLUTION': (4, 8),
    'PRODUCT_ANCHOR_RESOLUTION': (4, 8),
    'POLAR_RESOLUTION': (48, 64),
    'PRODUCT_POLAR_RESOLUTION': (16, 16),
    'PAIR_BUDGET': 10_000,
    'GRAM_SINGULAR_RTOL': 1e-13,
    'HERMITIAN_TOL': 1e-12,
    'JACOBI_TOL': 1e-13,
    'JACOBI_MAX_SWEEPS': 100,
    'FRAME_RANK_TOL': 1e-12,
    'CURVE_SWEEP': tuple(range(4, 41, 2)),
    'PRODUCT_SWEEP': tuple(range(2, 13)),
    'GAMMAS': (0.25, 0.5, 0.75),
    'SEPARATION': 0.5,
    # acceptance bands; experiment configs may override any of them
    'TOLERANCES': {
        'bergman_oracle': 1e-8,
        'l1_slope': 0.1,
        'counting': 1.0,
        'trace': 3.0,
        'trace_routes': 1e-8,
        'kernel_pairing': 3.0,
        'pushforward': 0.15,
        'offdiag_r2': 0.99,
        'offdiag_oracle': 1e-8,
        'morse': 1.0,
        'super_reduction': 1e-10,
        'spectral_invariance': 1e-12,
        'quadrature_frame': 2.0,
    },
}

# Logging configuration
LOG_LEVEL = config('TOEPLITZ_LAB_LOG_LEVEL', default='INFO')
LOGS_DIR = os.path.join(BASE_DIR, 'logs')
if not os.path.exists(LOGS_DIR):
    os.makedirs(LOGS_DIR)

def is_test_environment():
    """Check if we're running tests"""
    if 'pytest' in os.sys.modules:
        return True
    for arg in ['test', 'pytest']:
        if arg in os.sys.argv:
            return True
    return False

TEST_MODE = is_test_environment()

def test_filter_callback(record):
    """Filter out logs during testing"""
    return not TEST_MODE

LOGGING = {
    'version': 1,
    'disable_existing_loggers': False,
    'formatters': {
        'verbose': {
            'format': '{levelname} {asctime} {module} {message}',
            'style': '{',
        },
        'simple': {
            'format': '{levelname} {message}',
            'style': '{',
        },
    },
    'filters': {
        'test_filter': {
            '()': 'django.utils.log.CallbackFilter',
            'callback': test_filter_callback,
        },
    },
    'handlers': {
        'console': {
            'level': LOG_LEVEL,
            'class': 'logging.StreamHandler',
            'formatter': 'simple',
            'filters': ['test_filter'],
        },
        'file': {
            'level': LOG_LEVEL,
            'class': 'logging.FileHandler',
            'filename': os.path.join(LOGS_DIR, 'app.log'),
            'formatter': 'verbose',
            'filters': ['test_filter'],
        },
    },
    'loggers': {
        'django': {
            'handlers': ['console', 'file'],
            'level': 'INFO',
            'propagate': True,
        },
        'toeplitz_lab': {
            'handlers': ['console', 'file'],
            'level': LOG_LEVEL,
            'propagate': False,
        },
    },
}
