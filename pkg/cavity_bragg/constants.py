"""Constants and configuration for cavity-bragg."""

import math
from pathlib import Path

# Enumeration configuration
DEFAULT_EPSILON = 1e-10
DEFAULT_MAX_CONFIGURATIONS = 10_000_000
ENUMERATION_CHUNK_SIZE = 200_000

# Spectrum configuration
LINE_MERGE_TOLERANCE = 1e-9
INTEGER_SPECTRUM_TOLERANCE = 1e-12
DEFAULT_BIN_ORIGIN = 0.0

# Sampling configuration
DEFAULT_SAMPLE_COUNT = 100_000
DEFAULT_SEED = 2007
DEFAULT_WORKERS = 1

# Time grid configuration (units of 1/g)
DEFAULT_T_MAX = math.pi
DEFAULT_TIME_STEPS = 2001
INTENSITY_TIME_CHUNK = 512

# Collapse measurement
DEFAULT_COLLAPSE_THRESHOLD = math.exp(-0.5)

# Two-well exact evolution
NORMALIZATION_TOLERANCE = 1e-10
FOCK_CUTOFF_WIDTH = 8.0
DEFAULT_Q_GRID_MARGIN = 3.0
DEFAULT_Q_GRID_SPACING = 0.1
CAT_STATE_TIME = math.pi / 2

# Analytic laws
LAW_TRUNCATION_WIDTH = 8.0
CLASS_LAW_PRUNE_MASS = 1e-14

# Output configuration
OUTPUT_DIR_ENV_VAR = "CAVITY_BRAGG_OUTPUT_DIR"
DEFAULT_OUTPUT_DIR = Path("results")
CSV_FLOAT_FORMAT = ".17g"
MANIFEST_FILENAME = "manifest.json"

# Exit codes
EXIT_OK = 0
EXIT_VALIDATION_ERROR = 2
EXIT_BUDGET_EXCEEDED = 3

# Error messages
ERROR_BUDGET_HINT = "exact enumeration exceeds the configuration budget; use --method sampled"
ERROR_TWO_WELLS_REQUIRED = "this operation requires exactly two wells (M = 2)"
ERROR_SITE_MISMATCH = "state and geometry disagree on the number of sites"
ERROR_INVALID_EPSILON = "epsilon must lie in (0, 1)"
