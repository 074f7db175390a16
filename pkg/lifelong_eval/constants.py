TOOL_NAME: str = "lifelong-eval"
TOOL_VERSION: str = "0.1.0"
REPORT_SCHEMA_VERSION: str = "1.0"

# --- Metric defaults ---

DEFAULT_EPSILON: float = 1.0
DEFAULT_PHI: float = 30.0
DEFAULT_DELTA: float = 1.0
DEFAULT_TAU: float = 60.0
DEFAULT_RPE_INTERVAL: float = 1.0

# ATE threshold per scene kind, in meters
SCENE_EPSILON: dict[str, float] = {
    "office": 1.0,
    "home": 3.0,
    "cafe": 3.0,
    "corridor": 5.0,
    "market": 5.0,
}

# Controlled-factor pair scoring
PAIR_EPSILON: float = 0.3
PAIR_PHI: float = float("inf")
PAIR_TAU: float = 60.0

# --- Numerical tolerances ---

QUATERNION_NORM_TOLERANCE: float = 1e-9
SLERP_DOT_THRESHOLD: float = 1.0 - 1e-9
MIN_ALIGNMENT_PAIRS: int = 3
DEGENERACY_RATIO: float = 1e-10

# --- Sync defaults ---

SYNC_WINDOW: float = 0.5
SYNC_COARSE_STEP: float = 0.005
SYNC_RESOLUTION: float = 1e-4
SYNC_FLAT_TOLERANCE: float = 1e-6
SYNC_MIN_OVERLAP_FRACTION: float = 0.5

# --- Output precision ---

TIMESTAMP_DECIMALS: int = 9
METRIC_DECIMALS: int = 6
SCORE_DECIMALS: int = 3

# --- Timeline rendering ---

SVG_WIDTH: int = 960
SVG_TRACK_HEIGHT: int = 28
SVG_MARGIN: int = 40
SVG_LABEL_WIDTH: int = 140
COLOR_CORRECT: str = "#1f5fbf"
COLOR_INCORRECT: str = "#d62728"
COLOR_AXIS: str = "#333333"

# --- Run store ---

SCENE_NAME_MAX_LENGTH: int = 255
PATH_MAX_LENGTH: int = 1024
LABEL_MAX_LENGTH: int = 255
