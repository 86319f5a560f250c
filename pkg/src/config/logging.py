"""
Logging Configuration Module

Sets up logging for the toolkit from the settings: DEBUG or INFO depending
on `settings.debug`, a human-readable or a one-line JSON formatter, and an
optional log file next to the console stream.

Features:
- Console records go to stderr, so the result lines the CLI prints on
  stdout stay machine readable
- `ISTIEFEL_LOG_FILE` adds a file handler with the same formatter
- Flask and Dash request logs are capped at WARNING

Usage:
Call `setup_logging()` at import time of every module that logs; only the
first call configures anything.
"""

import sys
from logging.config import dictConfig

from config.settings import settings

FORMATS = {
    'standard': '%(asctime)s - %(name)s - %(levelname)s - %(message)s',
    'json': '{"time": "%(asctime)s", "logger": "%(name)s", "level": "%(levelname)s", "message": "%(message)s"}',
}

_configured = False


def build_logging_config(debug: bool, log_format: str, log_file=None) -> dict:
    """dictConfig document for the given settings values."""
    log_level = 'DEBUG' if debug else 'INFO'
    handlers = {
        'console': {
            'class': 'logging.StreamHandler',
            'stream': sys.stderr,
            'formatter': log_format,
        },
    }
    if log_file is not None:
        handlers['file'] = {
            'class': 'logging.FileHandler',
            'filename': str(log_file),
            'formatter': log_format,
            'level': log_level,
            'delay': True,
        }
    quiet = {'level': 'WARNING', 'handlers': list(handlers), 'propagate': False}

    return {
        'version': 1,
        'disable_existing_loggers': False,
        'formatters': {name: {'format': fmt} for name, fmt in FORMATS.items()},
        'handlers': handlers,
        'root': {'handlers': list(handlers), 'level': log_level},
        'loggers': {
            'werkzeug': dict(quiet),
            'dash': dict(quiet),
        },
    }


def setup_logging(force: bool = False):
    """Configure logging for the toolkit once per process."""
    global _configured
    if _configured and not force:
        return
    dictConfig(build_logging_config(settings.debug, settings.log_format, settings.log_file))
    _configured = True
