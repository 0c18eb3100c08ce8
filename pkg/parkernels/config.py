"""
Runtime configuration: defaults, env overrides and worker-count resolution.
Reads .env.local / .env so PARKERNELS_THREADS can live in a local env file.
"""

import os
from pathlib import Path
from typing import Optional

from dotenv import load_dotenv

from parkernels.errors import ConfigError

load_dotenv(dotenv_path=os.path.join(os.path.dirname(__file__), "..", ".env.local"))
load_dotenv()  # Fallback to .env

THREADS_ENV_VAR = "PARKERNELS_THREADS"
DEFAULT_CALIBRATION_PATH = Path("parkernels-calib.json")

DEFAULT_REPS = 11
DEFAULT_WARMUP = 2
DEFAULT_SEED = 42
DEFAULT_SEQ_CUTOFF = 2048

# Sort keys are drawn uniformly from this closed range.
SORT_VALUE_RANGE = (0, 10**6)
# Float matrices are drawn from [lo, hi).
MATRIX_VALUE_RANGE = (-1.0, 1.0)

DEFAULT_MATMUL_CROSSOVER_SIZES = [8, 16, 32, 64, 128, 256, 512, 1024]
DEFAULT_SORT_CROSSOVER_SIZES = [1_000, 10_000, 100_000, 1_000_000]


def detect_workers() -> int:
    """Usable hardware parallelism of this process, at least 1."""
    counter = getattr(os, "process_cpu_count", None) or os.cpu_count
    return max(1, counter() or 1)


def _env_workers() -> Optional[int]:
    raw = os.getenv(THREADS_ENV_VAR, "").strip()
    if not raw:
        return None
    try:
        value = int(raw)
    except ValueError:
        raise ConfigError(f"{THREADS_ENV_VAR} must be a positive integer, got {raw!r}.")
    if value < 1:
        raise ConfigError(f"{THREADS_ENV_VAR} must be a positive integer, got {raw!r}.")
    return value


def resolve_workers(flag: Optional[int] = None, profile_workers: Optional[int] = None) -> int:
    """Pick P: --threads, then the profile's P, then the env var, then the hardware."""
    for candidate in (flag, profile_workers, _env_workers()):
        if candidate is not None:
            return candidate
    return detect_workers()
