"""
This module contains all the settings required
"""
import os
from dotenv import load_dotenv

# Load environment variables from .env file
load_dotenv()

# Project directories
PROJECT_DIR = os.path.dirname(os.path.dirname(os.path.realpath(__file__)))
REPORT_DIR = os.path.join(PROJECT_DIR, 'reports')
EVIDENCE_PATH = os.path.join(REPORT_DIR, 'evidences')

# Output configuration
DEFAULT_OUTPUT_DIR = os.getenv("RECUR_OUTPUT_DIR", "results")
DEFAULT_SEED = int(os.getenv("RECUR_SEED", "20240917"))

# Parallelism (0 = one worker per CPU)
RECUR_THREADS = int(os.getenv("RECUR_THREADS", "0"))

# Logging
LOG_LEVEL = os.getenv("RECUR_LOG_LEVEL", "INFO").upper()
LOG_FORMAT = "%(asctime)s [%(levelname)8s] %(name)s - %(message)s"
LOG_DATE_FORMAT = "%Y-%m-%d %H:%M:%S"

# Exact return-time oracle
LATTICE_BUDGET = int(os.getenv("RECUR_LATTICE_BUDGET", "20000000"))
LATTICE_CHUNK = 1 << 20
BOUNDARY_MARGIN = 1e-9

# Numerical thresholds
ZERO_EXPONENT_TOL = 1e-9
DEGENERATE_STRETCH = 1e-300
CELL_BOUNDARY_TOL = 1e-12

# Recurrence dimension spectrum
ESSSUP_PERCENTILE = 90.0
