"""
Overhead management. Calibrates this machine's fork, join and dispatch
costs, predicts serial vs. parallel runtimes with an affine cost model,
chooses the execution mode and locates the measured serial/parallel crossover.

Cost model, for work(n) = n^3 (matmul) or n·log2(n) (sort), work(0)=work(1)=1:

    serial   = rate·work(n)
    parallel = rate·work(n)/P + c_fork·tasks(n) + c_sync + c_dispatch·n
"""

import logging
import math
import threading
import time
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
from functools import partial
from typing import Callable, Optional, Sequence

import numba
import numpy as np
from tenacity import retry, retry_if_result, stop_after_attempt

from parkernels.config import DEFAULT_REPS, SORT_VALUE_RANGE, resolve_workers
from parkernels.core import (
    ExecutionMode,
    PARALLEL_LABEL,
    SERIAL_LABEL,
    PivotStrategy,
    TimingSample,
    Workload,
    aggregate,
    gen_random_array,
    gen_random_matrix,
)
from parkernels.errors import (
    InvalidInputError,
    InvalidRepsError,
    InvalidWorkerCountError,
    NotCalibratedError,
)
from parkernels.forkjoin import run_forked
from parkernels.matmul import matmul_serial, partition_rows
from parkernels.rng import SeededGenerator
from parkernels.sort import ParallelSortConfig, quicksort_serial

logger = logging.getLogger(__name__)

MIN_REPS = 3
DISPATCH_PROBE_ELEMENTS = 1_000_000
MATMUL_PROBE_SIZES = (64, 128, 256)
SORT_PROBE_SIZES = (10**4, 10**5, 10**6)
PROBE_ATTEMPTS = 3
CALIBRATION_SEED = 0x5EED
# Relative gap below which two predictions count as a tie.
TIE_TOLERANCE = 1e-9

Runner = Callable[[int, ExecutionMode], int]


@dataclass
class OverheadParams:
    """Calibrated per-machine costs. Durations in ns; rates in ns per unit of work."""

    c_fork_ns: int
    c_sync_ns: int
    c_dispatch_ns_per_elem: float
    workers: int
    calibrated_at: str
    serial_rate: dict[str, float] = field(default_factory=dict)
    warnings: list[str] = field(default_factory=list)

    def __post_init__(self):
        if min(self.c_fork_ns, self.c_sync_ns, self.c_dispatch_ns_per_elem) < 0:
            raise InvalidInputError("Overhead costs must be non-negative.")
        if self.workers < 1:
            raise InvalidWorkerCountError(f"Worker count must be at least 1, got {self.workers}.")
        for workload, rate in self.serial_rate.items():
            if rate <= 0:
                raise InvalidInputError(f"serial_rate[{workload!r}] must be positive, got {rate}.")

    def rate(self, workload: Workload) -> float:
        try:
            return self.serial_rate[workload.value]
        except KeyError:
            raise NotCalibratedError(
                f"No serial rate for {workload.value}; run `calibrate` first."
            ) from None

    def to_dict(self) -> dict:
        return asdict(self)


# ── Cost model ──────────────────────────────────────────────────


def work(workload: Workload, n: int) -> float:
    if n <= 1:
        return 1.0
    if workload is Workload.MATMUL:
        return float(n) ** 3
    return n * math.log2(n)


def sort_tasks(n: int, cfg: ParallelSortConfig) -> int:
    """Fork-tree nodes: limited by the depth cap and by the sequential cutoff."""
    capped = 2 ** (cfg.depth_cap + 1) - 1
    if n <= cfg.seq_cutoff:
        return 1
    levels = math.ceil(math.log2(n / cfg.seq_cutoff))
    return min(capped, 2 ** (levels + 1) - 1)


def predict_time(
    workload: Workload,
    n: int,
    mode: ExecutionMode,
    params: OverheadParams,
    sort_config: Optional[ParallelSortConfig] = None,
) -> float:
    """Predicted runtime in ns. Pure function of its arguments."""
    serial = params.rate(workload) * work(workload, n)
    if not mode.is_parallel:
        return serial

    if workload is Workload.MATMUL:
        tasks = mode.workers
    else:
        tasks = sort_tasks(n, sort_config or ParallelSortConfig.for_workers(mode.workers))
    return (
        serial / mode.workers
        + params.c_fork_ns * tasks
        + params.c_sync_ns
        + params.c_dispatch_ns_per_elem * n
    )


def choose_mode(
    workload: Workload,
    n: int,
    params: OverheadParams,
    sort_config: Optional[ParallelSortConfig] = None,
) -> ExecutionMode:
    """Serial unless parallel is faster by more than TIE_TOLERANCE of the larger prediction."""
    serial_ns = predict_time(workload, n, ExecutionMode.serial(), params)
    if params.workers == 1:
        return ExecutionMode.serial()

    parallel = ExecutionMode.with_workers(params.workers)
    parallel_ns = predict_time(workload, n, parallel, params, sort_config)
    if serial_ns - parallel_ns > TIE_TOLERANCE * max(serial_ns, parallel_ns):
        return parallel
    return ExecutionMode.serial()


# ── Crossover search ────────────────────────────────────────────


@dataclass(frozen=True)
class CrossoverReport:
    workload: Workload
    sizes_tested: list[int]
    medians: dict[int, dict[str, int]]
    crossover_n: Optional[int]

    @property
    def found(self) -> bool:
        return self.crossover_n is not None


def find_crossover(
    workload: Workload,
    sizes: Sequence[int],
    reps: int,
    runner: Runner,
    workers: Optional[int] = None,
    seed: int = 0,
) -> CrossoverReport:
    """Time serial and parallel at every size; report the first size where the
    parallel median is strictly below the serial median."""
    if not sizes:
        raise InvalidInputError("Crossover search needs at least one size.")
    if any(b <= a for a, b in zip(sizes, sizes[1:])):
        raise InvalidInputError(f"Sizes must be strictly increasing, got {list(sizes)}.")
    if reps < MIN_REPS:
        raise InvalidRepsError(f"Crossover search needs at least {MIN_REPS} reps, got {reps}.")

    parallel = ExecutionMode.with_workers(resolve_workers(workers))
    medians: dict[int, dict[str, int]] = {}
    crossover_n = None

    for n in sizes:
        samples = {SERIAL_LABEL: [], PARALLEL_LABEL: []}
        # Interleaved so slow drift hits both variants alike.
        for rep in range(reps):
            for mode in (ExecutionMode.serial(), parallel):
                duration = runner(n, mode)
                samples[mode.label].append(
                    TimingSample(workload, mode.label, n, duration, rep, seed)
                )
        medians[n] = {label: aggregate(runs).median_ns for label, runs in samples.items()}
        logger.info(
            "%s n=%d serial=%dns parallel=%dns",
            workload.value,
            n,
            medians[n][SERIAL_LABEL],
            medians[n][PARALLEL_LABEL],
        )
        if crossover_n is None and medians[n][PARALLEL_LABEL] < medians[n][SERIAL_LABEL]:
            crossover_n = n

    return CrossoverReport(workload, list(sizes), medians, crossover_n)


# ── Calibration ─────────────────────────────────────────────────


def _noop() -> None:
    pass


@numba.njit(nogil=True, cache=True)
def _touch(buf, begin, end):
    """Reads every element of buf[begin:end]; the per-element dispatch cost."""
    total = 0.0
    for i in range(begin, end):
        total += buf[i]
    return total


@dataclass(frozen=True)
class _Probe:
    name: str
    samples: list[int]

    @property
    def median(self) -> int:
        ordered = sorted(self.samples)
        return ordered[(len(ordered) - 1) // 2]

    @property
    def noisy(self) -> bool:
        """Interquartile spread wider than the median itself."""
        ordered = sorted(self.samples)
        quarter = len(ordered) // 4
        return ordered[-1 - quarter] - ordered[quarter] > self.median


def _is_noisy(probe: _Probe) -> bool:
    return probe.noisy


@retry(
    stop=stop_after_attempt(PROBE_ATTEMPTS),
    retry=retry_if_result(_is_noisy),
    retry_error_callback=lambda state: state.outcome.result(),
)
def _run_probe(name: str, measure: Callable[[], int], reps: int) -> _Probe:
    """Repeat ``measure`` reps times; re-run the whole probe while it is noisy."""
    return _Probe(name, [measure() for _ in range(reps)])


def _timed(fn: Callable[[], object]) -> int:
    start = time.perf_counter_ns()
    fn()
    return time.perf_counter_ns() - start


def _spawn_and_join() -> None:
    thread = threading.Thread(target=_noop)
    thread.start()
    thread.join()


def _fit_rate(points: list[tuple[float, int]]) -> float:
    """Least-squares slope through the origin of time against work."""
    numerator = sum(w * t for w, t in points)
    denominator = sum(w * w for w, _ in points)
    return numerator / denominator


def _warm_up_kernels() -> None:
    """Compile every kernel the probes touch before any clock starts."""
    tiny = gen_random_matrix(1, 2, 2)
    matmul_serial(tiny, tiny)
    quicksort_serial(gen_random_array(1, 8, 0, 9), PivotStrategy.LEFTMOST, SeededGenerator(1))
    _touch(np.zeros(2), 0, 2)


def _matmul_probe_time(n: int, reps: int) -> _Probe:
    a = gen_random_matrix(CALIBRATION_SEED, n, n)
    b = gen_random_matrix(CALIBRATION_SEED + 1, n, n)
    return _run_probe(f"matmul n={n}", partial(_timed, partial(matmul_serial, a, b)), reps)


def _sort_probe_time(n: int, reps: int) -> _Probe:
    source = gen_random_array(CALIBRATION_SEED, n, *SORT_VALUE_RANGE)

    def measure() -> int:
        keys = source.copy()
        rng = SeededGenerator(CALIBRATION_SEED)
        return _timed(partial(quicksort_serial, keys, PivotStrategy.LEFTMOST, rng))

    return _run_probe(f"sort n={n}", measure, reps)


def calibrate(
    reps: int = DEFAULT_REPS,
    workers: Optional[int] = None,
    matmul_probe_sizes: Sequence[int] = MATMUL_PROBE_SIZES,
    sort_probe_sizes: Sequence[int] = SORT_PROBE_SIZES,
) -> OverheadParams:
    """Measure fork, join and dispatch costs plus per-workload serial rates."""
    if reps < MIN_REPS:
        raise InvalidRepsError(f"Calibration needs at least {MIN_REPS} reps, got {reps}.")

    workers = resolve_workers(workers)
    warnings: list[str] = []

    resolution = time.get_clock_info("perf_counter").resolution
    if resolution > 1e-6:
        warnings.append(
            f"calibration unreliable: timer resolution {resolution:.2e}s is coarser than 1µs"
        )

    _warm_up_kernels()

    def settled(probe: _Probe) -> _Probe:
        if probe.noisy:
            warnings.append(f"{probe.name} probe stayed noisy after {PROBE_ATTEMPTS} attempts")
        logger.debug("%s probe median %dns", probe.name, probe.median)
        return probe

    c_fork = settled(_run_probe("fork", partial(_timed, _spawn_and_join), reps)).median

    # run_forked keeps one task on the calling thread
    spawned = workers - 1
    noops = [_noop] * workers
    barrier = settled(_run_probe("sync", partial(_timed, partial(run_forked, noops)), reps))
    c_sync = max(0, barrier.median - spawned * c_fork)

    buf = np.zeros(DISPATCH_PROBE_ELEMENTS)
    spread = [
        partial(_touch, buf, block.begin, block.end)
        for block in partition_rows(DISPATCH_PROBE_ELEMENTS, workers)
    ]
    dispatch = settled(_run_probe("dispatch", partial(_timed, partial(run_forked, spread)), reps))
    c_dispatch = max(0, dispatch.median - spawned * c_fork - c_sync) / DISPATCH_PROBE_ELEMENTS

    serial_rate = {}
    for workload, sizes, probe_time in (
        (Workload.MATMUL, matmul_probe_sizes, _matmul_probe_time),
        (Workload.SORT, sort_probe_sizes, _sort_probe_time),
    ):
        points = [(work(workload, n), settled(probe_time(n, reps)).median) for n in sizes]
        rate = _fit_rate(points)
        if rate <= 0:
            warnings.append(f"{workload.value} serial rate fit was not positive; clamped")
            rate = 1e-9
        serial_rate[workload.value] = rate

    for message in warnings:
        logger.warning(message)

    params = OverheadParams(
        c_fork_ns=int(c_fork),
        c_sync_ns=int(c_sync),
        c_dispatch_ns_per_elem=float(c_dispatch),
        workers=workers,
        calibrated_at=datetime.now(timezone.utc).isoformat(timespec="seconds"),
        serial_rate=serial_rate,
        warnings=warnings,
    )
    logger.info(
        "calibrated P=%d fork=%dns sync=%dns dispatch=%.4fns/elem",
        params.workers,
        params.c_fork_ns,
        params.c_sync_ns,
        params.c_dispatch_ns_per_elem,
    )
    return params
