"""
Django settings for the VaCoAl reasoner.

This module configures the command-line pipeline that learns genealogy
graphs into the block-voting associative memory and traces them.

Features:
- Engine defaults (vector length, blocks, depth, search limits) read from the
  environment, overridable per run by a manifest file or command flags
- Console and file logging for the ``vacoal`` engine and ``genealogy`` app
- No database; every artifact is a plain file

For more information on this file, see
https://docs.djangoproject.com/en/4.2/topics/settings/
"""

import os
from pathlib import Path
from dotenv import load_dotenv

from vacoal import config as engine

# Load environment variables
load_dotenv()

# Build paths inside the project like this: BASE_DIR / 'subdir'.
BASE_DIR = Path(__file__).resolve().parent.parent

# SECURITY WARNING: keep the secret key used in production secret!
SECRET_KEY = os.getenv('SECRET_KEY', 'django-insecure-vacoal-local-key')

DEBUG = os.getenv('DEBUG', 'True').lower() == 'true'

ALLOWED_HOSTS = []

# Application definition
INSTALLED_APPS = [
    'genealogy',
]

# Pipeline artifacts live on disk, not in a database
DATABASES = {}

LANGUAGE_CODE = 'en-us'
TIME_ZONE = 'UTC'
USE_I18N = False
USE_TZ = True

DEFAULT_AUTO_FIELD = 'django.db.models.BigAutoField'


def _env_int(name, default):
    value = os.getenv(name)
    return int(value) if value not in (None, '') else default


def _env_float(name, default):
    value = os.getenv(name)
    return float(value) if value not in (None, '') else default


# Engine defaults; a run manifest or command flags override them
VACOAL = {
    'length': _env_int('VACOAL_LENGTH', engine.default_length),
    'blocks': _env_int('VACOAL_BLOCKS', engine.default_blocks),
    'depth_exp': _env_int('VACOAL_DEPTH_EXP', engine.default_depth_exp),
    'seed': _env_int('VACOAL_SEED', 0),
    'fs': _env_int('VACOAL_FS', engine.default_fs),
    'max_depth': _env_int('VACOAL_MAX_DEPTH', engine.default_max_depth),
    'cr2_halt': _env_float('VACOAL_CR2_HALT', engine.default_cr2_halt),
    'mode': os.getenv('VACOAL_MODE', 'dont_care'),
    'rr': _env_float('VACOAL_RR', 1.0),
    'threads': _env_int('VACOAL_THREADS', 1),
    'dense_cell_limit': _env_int('VACOAL_DENSE_CELL_LIMIT', engine.dense_cell_limit),
    'collision_policy': os.getenv('VACOAL_COLLISION_POLICY', 'flag'),
    'era_window': engine.default_era_window,
    'top_k': 20,
    'out_dir': os.getenv('VACOAL_OUT_DIR', 'runs'),
}

# Logging configuration
LOGGING = {
    'version': 1,
    'disable_existing_loggers': False,
    'formatters': {
        'verbose': {
            'format': '{levelname} {asctime} {module} {process:d} {thread:d} {message}',
            'style': '{',
        },
        'simple': {
            'format': '{levelname} {message}',
            'style': '{',
        },
    },
    'handlers': {
        'file': {
            'level': 'DEBUG',
            'class': 'logging.FileHandler',
            'filename': BASE_DIR / 'logs' / 'vacoal.log',
            'formatter': 'verbose',
        },
        'console': {
            'level': 'INFO',
            'class': 'logging.StreamHandler',
            'formatter': 'simple',
        },
    },
    'root': {
        'handlers': ['console', 'file'],
        'level': 'WARNING',
    },
    'loggers': {
        'vacoal': {
            'handlers': ['file', 'console'],
            'level': os.getenv('VACOAL_LOG_LEVEL', 'INFO'),
            'propagate': False,
        },
        'genealogy': {
            'handlers': ['file', 'console'],
            'level': os.getenv('VACOAL_LOG_LEVEL', 'INFO'),
            'propagate': False,
        },
    },
}

# Create logs directory if it doesn't exist
os.makedirs(BASE_DIR / 'logs', exist_ok=True)
