"""
Django settings for regimecast project.

The project has no web surface: Django provides the settings layer, the
app registry, templates for graph export and the management commands
that make up the pipeline command line.
"""
from pathlib import Path

import os


# Build paths inside the project like this: BASE_DIR / 'subdir'.
BASE_DIR = Path(__file__).resolve().parent.parent

SECRET_KEY = os.environ.get('REGIMECAST_SECRET_KEY', 'regimecast-offline')

DEBUG = False

ALLOWED_HOSTS = []


# Application definition

INSTALLED_APPS = [
    'hmm.apps.HmmConfig',
    'bayesnet.apps.BayesnetConfig',
    'structure.apps.StructureConfig',
    'timeseries.apps.TimeseriesConfig',
    'backtest.apps.BacktestConfig',
    'acquisition.apps.AcquisitionConfig',
    'forecast.apps.ForecastConfig',
]

TEMPLATES = [
    {
        'BACKEND': 'django.template.backends.django.DjangoTemplates',
        'DIRS': [],
        'APP_DIRS': True,
        'OPTIONS': {
            'autoescape': False,
        },
    },
]

DATABASES = {}


# Internationalization

LANGUAGE_CODE = 'ru-RU'

TIME_ZONE = 'UTC'

USE_I18N = True

USE_TZ = False


# Logging

LOG_LEVEL = os.environ.get('REGIMECAST_LOG_LEVEL', 'INFO')

LOGGING = {
    'version': 1,
    'disable_existing_loggers': False,
    'formatters': {
        'verbose': {
            'format': '{asctime} {levelname} {name}: {message}',
            'style': '{',
        },
    },
    'handlers': {
        'console': {
            'class': 'logging.StreamHandler',
            'formatter': 'verbose',
        },
    },
    'loggers': {
        app: {
            'handlers': ['console'],
            'level': LOG_LEVEL,
            'propagate': True,
        }
        for app in (
            'regimecast', 'hmm', 'bayesnet', 'structure', 'timeseries',
            'backtest', 'acquisition', 'forecast',
        )
    },
}


# Directories

CACHE_DIR = BASE_DIR.parent / 'cache'
FIXTURES_DIR = BASE_DIR.parent / 'fixtures'
ARTIFACTS_DIR = BASE_DIR.parent / 'out'


# Data sources

EIA_API_URL = 'https://api.eia.gov/series/'
FRED_API_URL = 'https://api.stlouisfed.org/fred/series/observations'
EIA_API_KEY_ENV = 'EIA_API_KEY'
FRED_API_KEY_ENV = 'FRED_API_KEY'

HTTP_TIMEOUT = 15
HTTP_RETRIES = 3
HTTP_BACKOFF = 0.5

EIA_DATASETS = [
    'STEO.RGDPQ_NONOECD.M',
    'STEO.RGDPQ_OECD.M',
    'STEO.PAPR_NONOPEC.M',
    'STEO.PAPR_OPEC.M',
    'STEO.PATC_OECD.M',
    'STEO.PATC_NON_OECD.M',
    'STEO.COPRPUS.M',
    'STEO.CORIPUS.M',
    'STEO.FOREX_WORLD.M',
    'STEO.PASC_OECD_T3.M',
    'STEO.COPS_OPEC.M',
    'STEO.COPC_OPEC.M',
    'STEO.T3_STCHANGE_OOECD.M',
    'STEO.T3_STCHANGE_NOECD.M',
]

FRED_DATASETS = [
    'CPIENGSL',
    'CAPG211S',
    'CAPUTLG211S',
    'IPG211S',
    'IPG211111CN',
    'INDPRO',
    'IPN213111N',
    'PCU211211',
]

PRICE_ID = 'WTISPLC'
TARGET_ID = 'forecast'

EXPERT_EDGES = [
    ('STEO.PAPR_NONOPEC.M', 'WTISPLC'),
    ('STEO.PAPR_OPEC.M', 'WTISPLC'),
    ('STEO.PATC_OECD.M', 'WTISPLC'),
    ('STEO.PATC_NON_OECD.M', 'WTISPLC'),
    ('STEO.RGDPQ_OECD.M', 'STEO.PATC_OECD.M'),
    ('STEO.RGDPQ_NONOECD.M', 'STEO.PATC_NON_OECD.M'),
]


# Models

PROBABILITY_TOLERANCE = 1e-9
REGIME_LABELS = [0, 1, 2]

HMM_N_STATES = 3
HMM_N_SYMBOLS = 2
HMM_BW_ITERS = 100
HMM_CONVERGENCE = 1e-7
HMM_CHUNK = 32

SPLIT_FRACTIONS = (0.80, 0.10, 0.10)
MIN_SPLIT_LENGTH = 10

SEARCH_SCORE = 'k2'
SEARCH_TABU_SIZE = 100
SEARCH_MAX_ITERS = 1000
SEARCH_RANDOM_OPS = 5
SEARCH_RESTARTS = 0
SEARCH_MAX_PARENTS = 4
BDEU_ESS = 10.0
FIT_PRIOR = 'k2'

CHI2_MIN_EXPECTED = 5
IC_ALPHA = 0.05

BACKTEST_MODE = 'paper'
