"""
Django settings for divkit_project project.

The project hosts the ``divergences`` app: exact alpha-beta divergences between
decomposable models, exposed as management commands.

For the full list of settings and their values, see
https://docs.djangoproject.com/en/5.2/ref/settings/
"""

from decouple import config


# SECURITY WARNING: keep the secret key used in production secret!
SECRET_KEY = config('SECRET_KEY', default='django-insecure-divkit-local-development-key')

DEBUG = config('DEBUG', default=False, cast=bool)

ALLOWED_HOSTS = []


# Application definition

INSTALLED_APPS = [
    'rest_framework',
    'divergences',
]

# Database
# Nothing is persisted; Django falls back to its dummy backend.

DATABASES = {}

LANGUAGE_CODE = 'en-us'

TIME_ZONE = 'UTC'

USE_I18N = False

USE_TZ = True

# Divergence toolkit configuration

# Worker threads for grids and reports. 0 means "not set": the --threads
# option, then the machine's parallelism, decide.
DIVKIT_THREADS = config('DIVKIT_THREADS', default=0, cast=int)

# The oracle command refuses joint tables with more cells than this
# (12 binary variables). The library default is far larger.
DIVKIT_ORACLE_MAX_CELLS = config('DIVKIT_ORACLE_MAX_CELLS', default=2 ** 12, cast=int)

# Dirichlet pseudocount used when --pseudocount is not given.
DIVKIT_DEFAULT_PSEUDOCOUNT = config('DIVKIT_DEFAULT_PSEUDOCOUNT', default=1.0, cast=float)

# Number of tuples listed in report summaries.
DIVKIT_REPORT_TOP_K = config('DIVKIT_REPORT_TOP_K', default=10, cast=int)

DIVKIT_LOG_LEVEL = config('DIVKIT_LOG_LEVEL', default='WARNING')

# Logs go to stderr; stdout is reserved for command payloads.
LOGGING = {
    'version': 1,
    'disable_existing_loggers': False,
    'formatters': {
        'plain': {
            'format': '%(asctime)s %(levelname)s %(name)s: %(message)s',
        },
    },
    'handlers': {
        'stderr': {
            'class': 'logging.StreamHandler',
            'stream': 'ext://sys.stderr',
            'formatter': 'plain',
        },
    },
    'loggers': {
        'divergences': {
            'handlers': ['stderr'],
            'level': DIVKIT_LOG_LEVEL,
            'propagate': False,
        },
    },
}
