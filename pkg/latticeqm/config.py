import logging

logger = logging.getLogger("lqm.config")
logger.addHandler(logging.NullHandler())


ARTIFACT_VERSION = "0.1.0"

# lattice_core
UNITARY_TOLERANCE = 1e-12
NORMALIZATION_TOLERANCE = 1e-12
SERIES_TERM_TOLERANCE = 1e-16
MAX_SERIES_TERMS = 64
SERIES_SCALING_NORM = 0.5
DEFAULT_DT = 1.0
DEFAULT_HBAR = 1.0
DEFAULT_BOUNDARY = "ring"
BOUNDARIES = ("ring", "open")

# amplitude_engine
BRUTEFORCE_PATH_LIMIT = 10**7
BRUTEFORCE_CHUNK = 2**18
NEAR_ZERO_AMPLITUDE = 1e-14
TINY_SCALE = 1e-300
CONSISTENCY_TOLERANCE = 1e-10
RULE_TOLERANCE = 1e-12

# born_theorem / composite_systems
PRODUCT_STATE_LIMIT = 10**7
BORN_DIRECT_TOLERANCE = 1e-12
BORN_DIRECT_MAX_REPLICAS = 12
WINDOW_ROUNDING_SLACK = 1e-9

# regrade_solver
REGRADE_GRID_N = 256
REGRADE_MIN_GRID_N = 16
REGRADE_FD_STEP = 1e-5
REGRADE_H_STEP = 1e-3
REGRADE_ASSOCIATIVITY_GATE = 1e-8
REGRADE_TRIPLE_N = 17
REGRADE_PAIR_N = 64
REGRADE_INTERIOR_FRACTION = 0.8
REGRADE_MIN_DERIVATIVE = 1e-12
PRODUCT_RULE_TOLERANCE = 1e-10
PRODUCT_RULE_GRID_N = 17

# cli
CSV_FORMAT = "csv"
JSON_FORMAT = "json"
MANIFEST_SUFFIX = ".manifest.json"
EXIT_OK = 0
EXIT_INVALID = 1
EXIT_CONSISTENCY = 2
