"""
Core domain types shared by every other module, plus seeded workload
generation, the sortedness and permutation predicates and timing aggregation.
"""

import math
from dataclasses import dataclass
from enum import Enum, IntEnum
from typing import Iterable, Sequence

import numpy as np

from parkernels.errors import (
    EmptyInputError,
    InconsistentInputError,
    InvalidInputError,
    InvalidWorkerCountError,
    KindError,
    ShapeError,
)
from parkernels.rng import fill_uniform_float, fill_uniform_int, int_span, seed_state


class Workload(str, Enum):
    MATMUL = "matmul"
    SORT = "sort"


class ElementKind(str, Enum):
    INT = "int"
    FLOAT = "float"

    @property
    def dtype(self) -> np.dtype:
        return np.dtype(np.int64) if self is ElementKind.INT else np.dtype(np.float64)


class PivotStrategy(IntEnum):
    """Pivot selection policies. The integer values are the kernel codes."""

    LEFTMOST = 0
    RIGHTMOST = 1
    MEAN = 2
    RANDOM = 3

    @property
    def flag_name(self) -> str:
        return _PIVOT_FLAG_NAMES[self]

    @property
    def column_label(self) -> str:
        return f"parallel {self.flag_name} pivot"

    @classmethod
    def from_flag(cls, name: str) -> "PivotStrategy":
        for strategy, flag in _PIVOT_FLAG_NAMES.items():
            if flag == name.strip().lower():
                return strategy
        raise InvalidInputError(
            f"Unknown pivot strategy {name!r}; expected one of "
            + ", ".join(_PIVOT_FLAG_NAMES.values())
        )


_PIVOT_FLAG_NAMES = {
    PivotStrategy.LEFTMOST: "left",
    PivotStrategy.RIGHTMOST: "right",
    PivotStrategy.MEAN: "mean",
    PivotStrategy.RANDOM: "random",
}

# Column order of the sort result table.
TABLE_PIVOT_ORDER = (
    PivotStrategy.LEFTMOST,
    PivotStrategy.MEAN,
    PivotStrategy.RIGHTMOST,
    PivotStrategy.RANDOM,
)

SERIAL_LABEL = "serial"
PARALLEL_LABEL = "parallel"
VARIANT_LABELS = frozenset(
    [SERIAL_LABEL, PARALLEL_LABEL] + [strategy.column_label for strategy in PivotStrategy]
)


@dataclass(frozen=True)
class ExecutionMode:
    """Serial, or Parallel over ``workers`` workers."""

    is_parallel: bool = False
    workers: int = 1

    def __post_init__(self):
        if self.workers < 1:
            raise InvalidWorkerCountError(f"Worker count must be at least 1, got {self.workers}.")
        if not self.is_parallel and self.workers != 1:
            raise InvalidWorkerCountError("Serial mode always runs on exactly one worker.")

    @classmethod
    def serial(cls) -> "ExecutionMode":
        return cls(False, 1)

    @classmethod
    def with_workers(cls, workers: int) -> "ExecutionMode":
        return cls(True, workers)

    @property
    def label(self) -> str:
        return PARALLEL_LABEL if self.is_parallel else SERIAL_LABEL

    def __str__(self) -> str:
        return f"parallel(P={self.workers})" if self.is_parallel else "serial"


# ── Matrices and key arrays ─────────────────────────────────────


def _coerce(values, ndim: int, what: str) -> np.ndarray:
    array = np.asarray(values)
    if array.ndim != ndim:
        raise ShapeError(f"{what} must be {ndim}-dimensional, got shape {array.shape}.")
    if array.dtype.kind in "iu":
        target = np.int64
    elif array.dtype.kind == "f":
        target = np.float64
    else:
        raise KindError(f"{what} elements must be integers or floats, got {array.dtype}.")
    return np.require(array.astype(target, copy=False), requirements="C")


@dataclass(frozen=True, eq=False)
class Matrix:
    """Dense row-major matrix of int64 or float64 elements.

    The matrix takes ownership of ``data`` and marks it read-only.
    """

    data: np.ndarray

    def __post_init__(self):
        data = _coerce(self.data, 2, "Matrix")
        if data.shape[0] < 1 or data.shape[1] < 1:
            raise ShapeError(f"Matrix dimensions must be positive, got {data.shape}.")
        data.setflags(write=False)
        object.__setattr__(self, "data", data)

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence[float]]) -> "Matrix":
        return cls(np.array(rows))

    @classmethod
    def identity(cls, n: int, kind: ElementKind = ElementKind.INT) -> "Matrix":
        return cls(np.eye(n, dtype=kind.dtype))

    @property
    def rows(self) -> int:
        return self.data.shape[0]

    @property
    def cols(self) -> int:
        return self.data.shape[1]

    @property
    def kind(self) -> ElementKind:
        return ElementKind.INT if self.data.dtype == np.int64 else ElementKind.FLOAT

    @property
    def elems(self) -> np.ndarray:
        """Flat row-major view of the elements."""
        return self.data.ravel()

    def bit_equal(self, other: "Matrix") -> bool:
        """Same shape, same kind and the same bit pattern in every element."""
        if self.data.shape != other.data.shape or self.kind is not other.kind:
            return False
        return bool(np.array_equal(self.data.view(np.uint64), other.data.view(np.uint64)))

    def tolist(self) -> list:
        return self.data.tolist()


@dataclass(eq=False)
class NumArray:
    """Keys to sort: a 1-D int64 buffer. Sort kernels rearrange it in place."""

    elems: np.ndarray

    def __post_init__(self):
        elems = _coerce(self.elems, 1, "NumArray")
        if elems.dtype != np.int64:
            raise KindError("NumArray keys must be 64-bit signed integers.")
        if not elems.flags.writeable:
            elems = elems.copy()
        self.elems = elems

    @classmethod
    def of(cls, values: Iterable[int]) -> "NumArray":
        return cls(np.array(list(values), dtype=np.int64))

    @property
    def n(self) -> int:
        return int(self.elems.shape[0])

    def copy(self) -> "NumArray":
        return NumArray(self.elems.copy())

    def tolist(self) -> list[int]:
        return self.elems.tolist()

    def __len__(self) -> int:
        return self.n


# ── Workload generation ─────────────────────────────────────────


def gen_random_array(seed: int, n: int, lo: int, hi: int) -> NumArray:
    """n integers uniform in [lo, hi], fully determined by ``seed``."""
    span = int_span(lo, hi)
    if n < 0:
        raise InvalidInputError(f"Array length must be non-negative, got {n}.")
    out = np.empty(n, dtype=np.int64)
    fill_uniform_int(seed_state(seed), out, np.int64(lo), span)
    return NumArray(out)


def gen_random_matrix(
    seed: int,
    rows: int,
    cols: int,
    kind: ElementKind = ElementKind.FLOAT,
    lo: float = -1.0,
    hi: float = 1.0,
) -> Matrix:
    """Seeded rows×cols matrix: integers in [lo, hi] or floats in [lo, hi)."""
    if rows < 1 or cols < 1:
        raise ShapeError(f"Matrix dimensions must be positive, got {rows}x{cols}.")
    state = seed_state(seed)
    out = np.empty(rows * cols, dtype=kind.dtype)
    if kind is ElementKind.INT:
        fill_uniform_int(state, out, np.int64(int(lo)), int_span(int(lo), int(hi)))
    else:
        fill_uniform_float(state, out, float(lo), float(hi) - float(lo))
    return Matrix(out.reshape(rows, cols))


# ── Predicates ──────────────────────────────────────────────────


def is_sorted(a: NumArray) -> bool:
    elems = a.elems
    return bool(np.all(elems[:-1] <= elems[1:])) if elems.shape[0] > 1 else True


def multiset_equal(a: NumArray, b: NumArray) -> bool:
    if a.n != b.n:
        return False
    return bool(np.array_equal(np.sort(a.elems), np.sort(b.elems)))


# ── Timing statistics ───────────────────────────────────────────


@dataclass(frozen=True)
class TimingSample:
    workload: Workload
    variant_label: str
    n: int
    duration_ns: int
    rep_index: int
    seed: int

    def __post_init__(self):
        if self.duration_ns < 0:
            raise InvalidInputError(f"Durations cannot be negative, got {self.duration_ns}.")
        if self.variant_label not in VARIANT_LABELS:
            raise InvalidInputError(f"Unknown variant label {self.variant_label!r}.")


@dataclass(frozen=True)
class RunStats:
    n: int
    variant_label: str
    median_ns: int
    mean_ns: float
    stddev_ns: float
    min_ns: int
    rep_count: int

    @classmethod
    def constant(cls, n: int, variant_label: str, duration_ns: int) -> "RunStats":
        """Stats of a single observed duration; used for injected medians."""
        return cls(n, variant_label, duration_ns, float(duration_ns), 0.0, duration_ns, 1)


def aggregate(samples: Sequence[TimingSample]) -> RunStats:
    """Median (lower for even counts), population mean/stddev and min.

    Sums are exact integer arithmetic so the result does not depend on the
    order of ``samples``.
    """
    if not samples:
        raise EmptyInputError("Cannot aggregate an empty sample list.")

    first = samples[0]
    key = (first.workload, first.variant_label, first.n)
    if any((s.workload, s.variant_label, s.n) != key for s in samples):
        raise InconsistentInputError(
            "Samples mix workloads, variant labels or sizes; aggregate them separately."
        )

    durations = sorted(s.duration_ns for s in samples)
    count = len(durations)
    total = sum(durations)
    variance_numerator = count * sum(d * d for d in durations) - total * total

    return RunStats(
        n=first.n,
        variant_label=first.variant_label,
        median_ns=durations[(count - 1) // 2],
        mean_ns=total / count,
        stddev_ns=math.sqrt(variance_numerator / (count * count)),
        min_ns=durations[0],
        rep_count=count,
    )


def speedup(serial_ns: float, parallel_ns: float) -> float:
    """Serial time over parallel time at one problem size."""
    if parallel_ns <= 0:
        return math.inf
    return serial_ns / parallel_ns
