"""
Quicksort with four pivot strategies: the classic single-pass partition, a
serial range sort and the master/fork-join parallel decomposition.

The partition loop keeps ``x := A[q]`` as pivot and moves every element
``<= x`` to the left block. Non-leftmost pivots are swapped into position q
first, so all strategies share the same loop. Recursion continues on
[q, s-1] and [s+1, r]; the pivot slot is excluded from both sides, which is
what makes all-equal inputs terminate.
"""

import logging
import math
from dataclasses import dataclass
from functools import partial
from typing import Optional

import numba
import numpy as np

from parkernels.config import DEFAULT_SEQ_CUTOFF
from parkernels.core import ExecutionMode, NumArray, PivotStrategy, Workload
from parkernels.errors import InvalidInputError, InvalidWorkerCountError, RangeError
from parkernels.forkjoin import run_forked
from parkernels.rng import SeededGenerator, next_u64

logger = logging.getLogger(__name__)

# Explicit stack for the range sort; the smaller side is always handled first,
# so depth stays below log2(n) + 1.
_STACK_SLOTS = 256


@dataclass(frozen=True)
class PartitionResult:
    s: int


@dataclass(frozen=True)
class ParallelSortConfig:
    workers: int
    seq_cutoff: int = DEFAULT_SEQ_CUTOFF
    depth_cap: int = 2

    def __post_init__(self):
        if self.workers < 1:
            raise InvalidWorkerCountError(f"Worker count must be at least 1, got {self.workers}.")
        if self.seq_cutoff < 1:
            raise InvalidInputError(f"Sequential cutoff must be at least 1, got {self.seq_cutoff}.")
        if self.depth_cap < 0:
            raise InvalidInputError(f"Depth cap must be non-negative, got {self.depth_cap}.")

    @classmethod
    def for_workers(
        cls,
        workers: int,
        seq_cutoff: Optional[int] = None,
        depth_cap: Optional[int] = None,
    ) -> "ParallelSortConfig":
        """Defaults: cutoff 2048 elements, depth cap ceil(log2(P)) + 2."""
        if workers < 1:
            raise InvalidWorkerCountError(f"Worker count must be at least 1, got {workers}.")
        return cls(
            workers=workers,
            seq_cutoff=DEFAULT_SEQ_CUTOFF if seq_cutoff is None else seq_cutoff,
            depth_cap=default_depth_cap(workers) if depth_cap is None else depth_cap,
        )


def default_depth_cap(workers: int) -> int:
    return math.ceil(math.log2(workers)) + 2


# ── Kernels ─────────────────────────────────────────────────────


@numba.njit(nogil=True, cache=True)
def _select_pivot(a, q, r, strategy, state):
    if strategy == 0:
        return q
    if strategy == 1:
        return r
    if strategy == 2:
        total = 0.0
        for i in range(q, r + 1):
            total += a[i]
        mean = total / (r - q + 1)
        best = q
        best_distance = abs(a[q] - mean)
        for i in range(q + 1, r + 1):
            distance = abs(a[i] - mean)
            if distance < best_distance:
                best = i
                best_distance = distance
        return best
    return q + np.int64(next_u64(state) % np.uint64(r - q + 1))


@numba.njit(nogil=True, cache=True)
def _partition(a, q, r):
    x = a[q]
    s = q
    for i in range(q + 1, r + 1):
        if a[i] <= x:
            s += 1
            a[s], a[i] = a[i], a[s]
    a[q], a[s] = a[s], a[q]
    return s


@numba.njit(nogil=True, cache=True)
def _place_pivot(a, q, r, strategy, state):
    p = _select_pivot(a, q, r, strategy, state)
    if p != q:
        a[q], a[p] = a[p], a[q]
    return _partition(a, q, r)


@numba.njit(nogil=True, cache=True)
def _quicksort_range(a, q, r, strategy, state):
    stack = np.empty(_STACK_SLOTS, dtype=np.int64)
    top = 0
    while True:
        while q < r:
            s = _place_pivot(a, q, r, strategy, state)
            if s - q < r - s:
                if s + 1 < r:
                    stack[top] = s + 1
                    stack[top + 1] = r
                    top += 2
                r = s - 1
            else:
                if q < s - 1:
                    stack[top] = q
                    stack[top + 1] = s - 1
                    top += 2
                q = s + 1
        if top == 0:
            break
        top -= 2
        q = stack[top]
        r = stack[top + 1]


# ── Library API ─────────────────────────────────────────────────


def _check_range(a: NumArray, q: int, r: int) -> None:
    if not 0 <= q <= r < a.n:
        raise RangeError(f"Invalid range [{q}, {r}] for an array of {a.n} elements.")


def select_pivot(
    a: NumArray,
    q: int,
    r: int,
    strategy: PivotStrategy,
    rng: SeededGenerator,
) -> int:
    """Index in [q, r] chosen by ``strategy``; Mean picks the element closest
    to the range's arithmetic mean, smallest index on ties."""
    _check_range(a, q, r)
    return int(_select_pivot(a.elems, q, r, int(strategy), rng.state))


def partition(a: NumArray, q: int, r: int) -> PartitionResult:
    """Partition a[q..r] around a[q]; returns the pivot's final index s."""
    _check_range(a, q, r)
    return PartitionResult(int(_partition(a.elems, q, r)))


def quicksort_serial(a: NumArray, strategy: PivotStrategy, rng: SeededGenerator) -> NumArray:
    if a.n > 1:
        _quicksort_range(a.elems, 0, a.n - 1, int(strategy), rng.state)
    return a


def _sort_task(
    data: np.ndarray,
    q: int,
    r: int,
    depth: int,
    strategy: int,
    parent: SeededGenerator,
    cfg: ParallelSortConfig,
) -> None:
    if q >= r:
        return
    rng = parent.split(q)
    if r - q + 1 <= cfg.seq_cutoff or depth >= cfg.depth_cap:
        _quicksort_range(data, q, r, strategy, rng.state)
        return
    s = int(_place_pivot(data, q, r, strategy, rng.state))
    run_forked(
        [
            partial(_sort_task, data, q, s - 1, depth + 1, strategy, rng, cfg),
            partial(_sort_task, data, s + 1, r, depth + 1, strategy, rng, cfg),
        ]
    )


def quicksort_parallel(
    a: NumArray,
    strategy: PivotStrategy,
    cfg: ParallelSortConfig,
    rng: SeededGenerator,
) -> NumArray:
    """Master places the first pivot, then both sides are sorted as forked tasks.

    Tasks keep forking until ``cfg.depth_cap`` or ``cfg.seq_cutoff`` is hit and
    then fall back to the serial range sort. Each task's generator is split from
    its parent's seed and its range start.
    """
    if cfg.workers == 1 or cfg.depth_cap == 0 or a.n <= cfg.seq_cutoff:
        return quicksort_serial(a, strategy, rng)

    data = a.elems
    code = int(strategy)
    s = int(_place_pivot(data, 0, a.n - 1, code, rng.state))
    run_forked(
        [
            partial(_sort_task, data, 0, s - 1, 1, code, rng, cfg),
            partial(_sort_task, data, s + 1, a.n - 1, 1, code, rng, cfg),
        ]
    )
    return a


def sort_adaptive(
    a: NumArray,
    strategy: PivotStrategy,
    params,
    rng: SeededGenerator,
    cfg: Optional[ParallelSortConfig] = None,
) -> tuple[NumArray, ExecutionMode]:
    """Sort in whichever mode the calibrated cost model predicts is faster."""
    from parkernels.overhead import choose_mode

    cfg = cfg or ParallelSortConfig.for_workers(params.workers)
    mode = choose_mode(Workload.SORT, a.n, params, cfg)
    logger.debug("sort n=%d strategy=%s -> %s", a.n, strategy.flag_name, mode)
    if mode.is_parallel:
        return quicksort_parallel(a, strategy, cfg, rng), mode
    return quicksort_serial(a, strategy, rng), mode
