"""
This file defines the package level settings such as:
- logger settings
- numerical defaults (ridge, quadrature, summation)
- simulator defaults (emission box)
- experiment defaults (bandwidth sweep, learners)
Anything can be overridden by a settings_private.py placed next to this file.
"""

import os
from datetime import datetime

import pytz

APP_FOLDER = os.path.dirname(__file__)
APP_NAME = "crm"

# timestamps written into sidecar files
TIMEZONE = "Europe/Brussels"


def run_timestamp(zone: str = TIMEZONE) -> str:
    """ISO timestamp localized to the configured timezone."""
    return datetime.now(pytz.UTC).astimezone(pytz.timezone(zone)).isoformat()


# logger settings
# "level:target" where target is stdout, stderr or a file name.
# stdout carries CSV/JSON output, keep logs on stderr.
LOGGERS = [
    "info:stderr",
]

# estimator
# "pairwise" uses numpy's pairwise summation, "exact" uses math.fsum
SUMMATION = "pairwise"

# learners
DEFAULT_RIDGE = 1e-8
DEFAULT_FALLBACK = "error"  # or "uniform-weights"

# oracle quadrature (per axis)
DEFAULT_QUADRATURE_RESOLUTION = 512
DEFAULT_ORACLE_METHOD = "quadrature"  # or "polygon"

# kernel axiom verification
DEFAULT_AXIOM_RADIUS = 8.0
DEFAULT_AXIOM_RESOLUTION = 256
DEFAULT_AXIOM_TOLERANCE = 1e-3
DEFAULT_HOLDER_PAIRS = 10_000
MAX_QUADRATURE_DIM = 4

# simulator, pre-rescaling box [[lo, hi], [lo, hi]]
EMISSION_BOX = [[0.0, 10.0], [0.0, 10.0]]
NUM_STATES = 4
MIN_SELF_LOOP = 0.2

# experiments
DEFAULT_BANDWIDTHS = [0.05, 0.1, 0.2, 0.4, 0.8]
DEFAULT_HISTORY_LENGTHS = [1, 4]
DEFAULT_LEARNERS = ["ecrm", "erm", "sliding-window"]
DEFAULT_KERNEL_FAMILY = "stratified-set"
DEFAULT_N_TRAIN = 2000
DEFAULT_EVALUATION = "full"  # "full" prefix or last-"history"

# try import private settings
try:
    from .settings_private import *  # noqa: F401,F403
except (ImportError, ModuleNotFoundError):
    pass
