"""
Django settings for the SpectralLab project.

The project has no web surface: it is driven entirely through management
commands (``verify``, ``scan``, ``oracles``, ``norms``) that write flat
files. Lab defaults below can be overridden from the environment or a
``.env`` file next to ``manage.py``.
"""

import os
from pathlib import Path

from django.core.exceptions import ImproperlyConfigured
from dotenv import load_dotenv

# Build paths inside the project like this: BASE_DIR / 'subdir'.
BASE_DIR = Path(__file__).resolve().parent.parent

# Real environment variables win over the .env file.
load_dotenv(BASE_DIR / ".env", override=False)


def _env_int(name: str, default: int) -> int:
    raw = os.getenv(name)
    if raw is None or raw.strip() == "":
        return default
    try:
        return int(raw.replace("_", ""))
    except ValueError as exc:
        raise ImproperlyConfigured(f"{name} must be an integer, got {raw!r}") from exc


def _env_float(name: str, default: float) -> float:
    raw = os.getenv(name)
    if raw is None or raw.strip() == "":
        return default
    try:
        return float(raw)
    except ValueError as exc:
        raise ImproperlyConfigured(f"{name} must be a number, got {raw!r}") from exc


# Nothing is signed; the key only satisfies Django's startup checks.
SECRET_KEY = os.getenv("SECRET_KEY", "spectrallab-local")

DEBUG = os.getenv("DEBUG", "False").lower() == "true"

# Application definition

INSTALLED_APPS = [
    "geometry",
    "domains",
    "spectral",
    "kernels",
    "asymptotics",
    "lab",
]

# Flat-file outputs only.
DATABASES = {}

LANGUAGE_CODE = "en-us"

TIME_ZONE = "UTC"

USE_I18N = False

USE_TZ = True

# ---------------------------------------------------------------------------
# Logging
# ---------------------------------------------------------------------------

LAB_LOG_LEVEL = os.getenv("LAB_LOG_LEVEL", "INFO").upper()

LOGGING = {
    "version": 1,
    "disable_existing_loggers": False,
    "formatters": {
        "verbose": {
            "format": "{asctime} {levelname} {name}: {message}",
            "style": "{",
        },
    },
    "handlers": {
        "console": {
            "class": "logging.StreamHandler",
            "formatter": "verbose",
        },
    },
    "loggers": {
        app: {"handlers": ["console"], "level": LAB_LOG_LEVEL, "propagate": False}
        for app in INSTALLED_APPS
    },
}

# ---------------------------------------------------------------------------
# Verification lab configuration
# ---------------------------------------------------------------------------

LAB_OUTPUT_DIR = Path(os.getenv("LAB_OUTPUT_DIR", str(BASE_DIR / "output")))
LAB_CONFIG_DIR = Path(os.getenv("LAB_CONFIG_DIR", str(BASE_DIR / "configs")))
LAB_SEED = _env_int("LAB_SEED", 20240601)
LAB_JOBS = _env_int("LAB_JOBS", 1)

# Budgets guard the combinatorial and quadrature blow-ups.
LAB_MAX_INDICES = _env_int("LAB_MAX_INDICES", 10_000_000)
LAB_MAX_QUADRATURE_NODES = _env_int("LAB_MAX_QUADRATURE_NODES", 2_000_000)

LAB_MC_SAMPLES = _env_int("LAB_MC_SAMPLES", 200_000)
LAB_SUMMATION_LOG_RANGE = _env_float("LAB_SUMMATION_LOG_RANGE", 300.0)

# Helffer-Sjostrand oracle: almost-analytic order, nodes per axis, refinements.
LAB_HS_ORDER = _env_int("LAB_HS_ORDER", 8)
LAB_HS_NODES = _env_int("LAB_HS_NODES", 200)
LAB_HS_MAX_REFINEMENTS = _env_int("LAB_HS_MAX_REFINEMENTS", 6)

LAB_SPHERE_POINTS = _env_int("LAB_SPHERE_POINTS", 64)

if LAB_MAX_INDICES <= 0 or LAB_MAX_QUADRATURE_NODES <= 0:
    raise ImproperlyConfigured("LAB_MAX_INDICES and LAB_MAX_QUADRATURE_NODES must be positive")
