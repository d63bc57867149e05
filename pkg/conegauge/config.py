"""Runtime configuration for conegauge.

Values can be overridden through environment variables or a local .env file.
"""
import os

from dotenv import load_dotenv

# Load environment variables from .env file
load_dotenv()

# Configuration
SCHEMA_VERSION = 1
DEFAULT_SEED = int(os.getenv("CONEGAUGE_SEED", "7"))
DEFAULT_SAMPLES = int(os.getenv("CONEGAUGE_SAMPLES", "200"))
LOG_LEVEL = os.getenv("CONEGAUGE_LOG_LEVEL", "WARNING").upper()

# Tolerances
MEMBERSHIP_TOL = 1e-9
INTERIOR_TOL = 1e-12
BISECTION_TOL = 1e-12
BISECTION_MAX_ITER = 200
FD_STEP = 1e-5
FD_CONDITION_LIMIT = 1e8
TOL_FD = 1e-6
CAUCHY_TOL = 1e-8
CLASSIFY_TOL = 1e-8
DEGREE_TOL = 0.05

# Sizes
FACE_ENUMERATION_MAX_DIM = 6
EXTREMAL_SAMPLE_COUNT = 64
POSITIVITY_PAIRS = 1000
ALPHA_GRID = tuple(2.0 ** k for k in range(21))
LAMBDA_GRID = tuple(2.0 ** k for k in range(-4, 5))
