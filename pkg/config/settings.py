import os
import sys
from pathlib import Path

from django.core.exceptions import ImproperlyConfigured
from dotenv import load_dotenv

load_dotenv()

BASE_DIR = Path(__file__).resolve().parent.parent

# =============================================================================
# CORE SETTINGS
# =============================================================================

# Only used by Django internals; nothing here is served over HTTP.
SECRET_KEY = os.environ.get("SECRET_KEY", "ontoclust-cli-only")

DEBUG = os.environ.get("DEBUG", "True") == "True"

# =============================================================================
# APPS
# =============================================================================

INSTALLED_APPS = [
    "ontology",
    "textproc",
    "matching",
    "graphs",
    "clustering",
    "profiles",
]

# No database: profiles and requests live in line-delimited JSON files.
DATABASES: dict = {}

DEFAULT_AUTO_FIELD = "django.db.models.BigAutoField"

USE_TZ = True
TIME_ZONE = "UTC"


def _env_float(name: str, default: float) -> float:
    raw = os.environ.get(name)
    if raw is None or raw == "":
        return default
    try:
        return float(raw)
    except ValueError:
        raise ImproperlyConfigured(f"{name} must be a number, got {raw!r}")


def _env_int(name: str, default: int) -> int:
    raw = os.environ.get(name)
    if raw is None or raw == "":
        return default
    try:
        return int(raw)
    except ValueError:
        raise ImproperlyConfigured(f"{name} must be an integer, got {raw!r}")


# =============================================================================
# CLUSTERING
# =============================================================================

# Defaults are the values of the two-cluster handling-systems experiment.
CLUSTERING_EPSILON = _env_float("CLUSTERING_EPSILON", 0.001)
CLUSTERING_CC_WEIGHT = _env_float("CLUSTERING_CC_WEIGHT", 0.2)
CLUSTERING_CA_WEIGHT = _env_float("CLUSTERING_CA_WEIGHT", 0.2)
CLUSTERING_D_MAX = _env_float("CLUSTERING_D_MAX", 0.6)

# Grid points evaluated concurrently by the sweep harness
SWEEP_WORKERS = _env_int("SWEEP_WORKERS", 1)

# =============================================================================
# MATCHING
# =============================================================================

# Class similarities below this are dropped
MATCHING_CLASS_THRESHOLD = _env_float("MATCHING_CLASS_THRESHOLD", 0.3)

# =============================================================================
# TEXT PROCESSING
# =============================================================================

TEXT_LANGUAGE = os.environ.get("TEXT_LANGUAGE", "en")
TEXT_LEXICON_DIR = Path(os.environ.get("TEXT_LEXICON_DIR", BASE_DIR / "textproc" / "lexicons"))

SPELLING_MAX_DISTANCE = _env_int("SPELLING_MAX_DISTANCE", 2)
SPELLING_MIN_LENGTH = _env_int("SPELLING_MIN_LENGTH", 4)

# =============================================================================
# TESTS
# =============================================================================

# Wall-clock scaling checks are slow and machine dependent
TIMING_TESTS = "test" in sys.argv and os.environ.get("ONTOCLUST_TIMING_TESTS") == "1"

# =============================================================================
# LOGGING
# =============================================================================

LOGGING = {
    "version": 1,
    "disable_existing_loggers": False,
    "formatters": {
        "verbose": {"format": "[{asctime}] {levelname} {name}: {message}", "style": "{"},
        "simple": {"format": "{levelname}: {message}", "style": "{"},
    },
    "handlers": {
        "console": {
            "level": "INFO",
            "class": "logging.StreamHandler",
            "formatter": "simple" if DEBUG else "verbose",
        },
    },
    "loggers": {
        "django": {"handlers": ["console"], "level": "WARNING", "propagate": True},
        "config": {"handlers": ["console"], "level": "INFO", "propagate": False},
        "ontology": {"handlers": ["console"], "level": "INFO", "propagate": False},
        "textproc": {"handlers": ["console"], "level": "INFO", "propagate": False},
        "matching": {"handlers": ["console"], "level": "INFO", "propagate": False},
        "graphs": {"handlers": ["console"], "level": "INFO", "propagate": False},
        "clustering": {"handlers": ["console"], "level": "INFO", "propagate": False},
        "profiles": {"handlers": ["console"], "level": "INFO", "propagate": False},
    },
}
