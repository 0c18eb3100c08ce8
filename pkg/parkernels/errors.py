"""Exception types raised across the kernels, the harness and the CLI."""


class ParKernelsError(Exception):
    """Base class for every error this package raises on purpose."""


# ── Value-domain errors ─────────────────────────────────────────


class InvalidRangeError(ParKernelsError, ValueError):
    """Generator bounds with lo > hi, or outside the 64-bit signed domain."""


class EmptyInputError(ParKernelsError, ValueError):
    pass


class InconsistentInputError(ParKernelsError, ValueError):
    pass


class ShapeError(ParKernelsError, ValueError):
    pass


class KindError(ParKernelsError, ValueError):
    pass


class InvalidWorkerCountError(ParKernelsError, ValueError):
    pass


class RangeError(ParKernelsError, IndexError):
    """Index range [q, r] that is empty or falls outside the array."""


class InvalidRepsError(ParKernelsError, ValueError):
    pass


class InvalidInputError(ParKernelsError, ValueError):
    pass


class NotCalibratedError(ParKernelsError, ValueError):
    pass


class UsageError(ParKernelsError, ValueError):
    pass


class ConfigError(ParKernelsError, ValueError):
    pass


# ── Runtime failures ────────────────────────────────────────────


class CorrectnessError(ParKernelsError, RuntimeError):
    """A kernel produced output that failed verification."""

    def __init__(self, message: str, *, variant: str, n: int, seed: int):
        super().__init__(f"{message} (variant={variant!r}, n={n}, seed={seed})")
        self.variant = variant
        self.n = n
        self.seed = seed


class CalibrationFileError(ParKernelsError, RuntimeError):
    """The calibration profile is missing or cannot be read back."""
