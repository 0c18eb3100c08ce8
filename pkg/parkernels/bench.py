"""
Benchmark harness: seeded workloads, warmup + timed repetitions on fresh
copies, verification before any timing is accepted, and CSV / Markdown /
plot-data / PNG figure emission of the result tables.
"""

import hashlib
import logging
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import BinaryIO, Callable, Optional, Sequence, TextIO, Union

import matplotlib
import numpy as np
import pandas as pd

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from parkernels.config import (
    DEFAULT_REPS,
    DEFAULT_SEED,
    DEFAULT_WARMUP,
    MATRIX_VALUE_RANGE,
    SORT_VALUE_RANGE,
    resolve_workers,
)
from parkernels.core import (
    PARALLEL_LABEL,
    SERIAL_LABEL,
    TABLE_PIVOT_ORDER,
    ElementKind,
    ExecutionMode,
    Matrix,
    NumArray,
    PivotStrategy,
    RunStats,
    TimingSample,
    Workload,
    aggregate,
    gen_random_array,
    gen_random_matrix,
    is_sorted,
    multiset_equal,
    speedup,
)
from parkernels.errors import CorrectnessError, InvalidInputError, InvalidRepsError
from parkernels.incidents import report_incident
from parkernels.matmul import matmul_parallel, matmul_serial
from parkernels.overhead import CrossoverReport, OverheadParams, Runner
from parkernels.rng import SeededGenerator, derive_seed
from parkernels.sort import ParallelSortConfig, quicksort_parallel, quicksort_serial

logger = logging.getLogger(__name__)

SIZE_COLUMN = "Elements"
# Pivot used by the serial sort column.
SERIAL_SORT_STRATEGY = PivotStrategy.LEFTMOST


@dataclass(frozen=True)
class BenchSpec:
    workload: Workload
    sizes: list[int]
    reps: int = DEFAULT_REPS
    warmup: int = DEFAULT_WARMUP
    seed: int = DEFAULT_SEED
    strategies: tuple[PivotStrategy, ...] = TABLE_PIVOT_ORDER
    workers: Optional[int] = None
    seq_cutoff: Optional[int] = None
    depth_cap: Optional[int] = None

    def __post_init__(self):
        if self.reps < 1:
            raise InvalidRepsError(f"reps must be at least 1, got {self.reps}.")
        if self.warmup < 0:
            raise InvalidInputError(f"warmup must be non-negative, got {self.warmup}.")
        if any(b <= a for a, b in zip(self.sizes, self.sizes[1:])):
            raise InvalidInputError(f"Sizes must be strictly increasing, got {self.sizes}.")
        if any(n < 1 for n in self.sizes):
            raise InvalidInputError(f"Sizes must be positive, got {self.sizes}.")
        if self.workload is Workload.SORT and not self.strategies:
            raise InvalidInputError("A sort benchmark needs at least one pivot strategy.")

    @property
    def columns(self) -> list[str]:
        if self.workload is Workload.MATMUL:
            return [SERIAL_LABEL, PARALLEL_LABEL]
        return [SERIAL_LABEL] + [
            strategy.column_label for strategy in TABLE_PIVOT_ORDER if strategy in self.strategies
        ]


@dataclass
class ResultTable:
    """Median timings keyed by size, one cell per variant column."""

    workload: Workload
    columns: list[str]
    cells: dict[int, dict[str, RunStats]] = field(default_factory=dict)
    notes: list[str] = field(default_factory=list)
    input_digests: dict[int, str] = field(default_factory=dict)
    output_digests: dict[int, dict[str, str]] = field(default_factory=dict)

    def __post_init__(self):
        for n, row in self.cells.items():
            missing = [label for label in self.columns if label not in row]
            if missing:
                raise InvalidInputError(f"Row {n} has no cell for {missing}.")

    @classmethod
    def from_medians(
        cls,
        workload: Workload,
        columns: Sequence[str],
        medians: dict[int, dict[str, int]],
    ) -> "ResultTable":
        cells = {
            n: {label: RunStats.constant(n, label, row[label]) for label in columns}
            for n, row in medians.items()
        }
        return cls(workload, list(columns), cells)

    @property
    def sizes(self) -> list[int]:
        return sorted(self.cells)

    def median_ns(self, n: int, label: str) -> int:
        return self.cells[n][label].median_ns


# ── Emission ────────────────────────────────────────────────────


def format_ms(duration_ns: float) -> str:
    """Nanoseconds rendered as milliseconds with three decimals."""
    return f"{duration_ns / 1e6:.3f}"


def _frame(table: ResultTable) -> pd.DataFrame:
    """String cells shared by every output format."""
    rows = [
        [str(n)] + [format_ms(table.median_ns(n, label)) for label in table.columns]
        for n in table.sizes
    ]
    return pd.DataFrame(rows, columns=[SIZE_COLUMN, *table.columns], dtype=str)


def emit_csv(table: ResultTable, destination: TextIO) -> None:
    _frame(table).to_csv(destination, index=False, lineterminator="\n")


def emit_markdown(table: ResultTable, destination: TextIO) -> None:
    frame = _frame(table)
    lines = [
        "| " + " | ".join(frame.columns) + " |",
        "|" + "|".join(" --- " for _ in frame.columns) + "|",
    ]
    lines.extend("| " + " | ".join(row) + " |" for row in frame.itertuples(index=False))
    destination.write("\n".join(lines) + "\n")


def emit_plotdata(table: ResultTable, destination: TextIO) -> None:
    frame = _frame(table)
    header = "# " + " ".join(label.replace(" ", "_") for label in frame.columns)
    lines = [header]
    lines.extend(" ".join(row) for row in frame.itertuples(index=False))
    destination.write("\n".join(lines) + "\n")


def emit_figure(table: ResultTable, destination: Union[Path, BinaryIO]) -> None:
    """Median ms against size, one line per variant column."""
    frame = _frame(table).astype(float)
    fig, ax = plt.subplots()
    for label in table.columns:
        ax.plot(frame[SIZE_COLUMN], frame[label], marker="o", label=label)
    ax.set_title(f"{table.workload.value}: serial vs. parallel")
    ax.set_xlabel(SIZE_COLUMN)
    ax.set_ylabel("median ms")
    ax.grid(color="lightgrey", linestyle="-", linewidth=0.5)
    ax.legend()
    fig.savefig(destination, format="png")
    plt.close(fig)


EMITTERS: dict[str, Callable[[ResultTable, TextIO], None]] = {
    "csv": emit_csv,
    "md": emit_markdown,
    "plot": emit_plotdata,
}

# Binary formats; these need a file destination.
FIGURE_EMITTERS: dict[str, Callable[[ResultTable, Union[Path, BinaryIO]], None]] = {
    "png": emit_figure,
}


def speedups(table: ResultTable) -> dict[int, dict[str, float]]:
    """Serial median over each parallel variant's median, per size."""
    return {
        n: {
            label: speedup(table.median_ns(n, SERIAL_LABEL), table.median_ns(n, label))
            for label in table.columns
            if label != SERIAL_LABEL
        }
        for n in table.sizes
    }


# ── Measurement ─────────────────────────────────────────────────


def _digest(*arrays: np.ndarray) -> str:
    sha = hashlib.sha256()
    for array in arrays:
        sha.update(np.ascontiguousarray(array).tobytes())
    return sha.hexdigest()


def _fail(workload: Workload, variant: str, n: int, seed: int, message: str) -> None:
    report_incident(
        workload=workload.value, variant=variant, n=n, seed=seed, error_message=message
    )
    raise CorrectnessError(message, variant=variant, n=n, seed=seed)


def _verify_sort(result: NumArray, source: NumArray, variant: str, n: int, seed: int) -> None:
    if not is_sorted(result):
        _fail(Workload.SORT, variant, n, seed, "sort output is not sorted")
    if not multiset_equal(result, source):
        _fail(Workload.SORT, variant, n, seed, "sort output is not a permutation of the input")


def _verify_product(parallel: Matrix, serial: Matrix, variant: str, n: int, seed: int) -> None:
    if not parallel.bit_equal(serial):
        _fail(
            Workload.MATMUL,
            variant,
            n,
            seed,
            "parallel product is not bit-identical to the serial product",
        )


def _timed_ns(fn: Callable[[], object]) -> int:
    start = time.perf_counter_ns()
    fn()
    return time.perf_counter_ns() - start


def _sort_variants(
    spec: BenchSpec, cfg: ParallelSortConfig
) -> list[tuple[str, Callable[[NumArray, SeededGenerator], NumArray]]]:
    variants = [
        (SERIAL_LABEL, lambda keys, rng: quicksort_serial(keys, SERIAL_SORT_STRATEGY, rng))
    ]
    for strategy in TABLE_PIVOT_ORDER:
        if strategy in spec.strategies:
            variants.append(
                (
                    strategy.column_label,
                    lambda keys, rng, strategy=strategy: quicksort_parallel(
                        keys, strategy, cfg, rng
                    ),
                )
            )
    return variants


def _single_worker_note(table: ResultTable, workers: int) -> None:
    if workers == 1:
        table.notes.append(
            "parallel variants ran with P=1: same work as serial, medians differ only by noise"
        )


def run_sort_bench(spec: BenchSpec, params: OverheadParams) -> ResultTable:
    """Serial plus one parallel column per pivot strategy, one seeded input per size."""
    if spec.workload is not Workload.SORT:
        raise InvalidInputError("run_sort_bench needs a sort BenchSpec.")

    workers = resolve_workers(spec.workers, params.workers)
    cfg = ParallelSortConfig.for_workers(workers, spec.seq_cutoff, spec.depth_cap)
    table = ResultTable(Workload.SORT, spec.columns)
    _single_worker_note(table, workers)

    for n in spec.sizes:
        seed = derive_seed(spec.seed, n)
        source = gen_random_array(seed, n, *SORT_VALUE_RANGE)
        table.input_digests[n] = _digest(source.elems)
        row: dict[str, RunStats] = {}
        outputs: dict[str, str] = {}

        for label, run in _sort_variants(spec, cfg):
            samples = []
            for index in range(spec.warmup + spec.reps):
                keys = source.copy()
                rng = SeededGenerator(seed)
                duration = _timed_ns(lambda: run(keys, rng))
                _verify_sort(keys, source, label, n, seed)
                if index >= spec.warmup:
                    samples.append(
                        TimingSample(Workload.SORT, label, n, duration, index - spec.warmup, seed)
                    )
            row[label] = aggregate(samples)
            outputs[label] = _digest(keys.elems)

        table.cells[n] = row
        table.output_digests[n] = outputs
        logger.info(
            "sort n=%d %s",
            n,
            " ".join(f"{label}={format_ms(stats.median_ns)}ms" for label, stats in row.items()),
        )

    return table


def run_matmul_bench(spec: BenchSpec, params: OverheadParams) -> ResultTable:
    """Serial vs. row-block parallel product on seeded n×n float matrices."""
    if spec.workload is not Workload.MATMUL:
        raise InvalidInputError("run_matmul_bench needs a matmul BenchSpec.")

    workers = resolve_workers(spec.workers, params.workers)
    table = ResultTable(Workload.MATMUL, spec.columns)
    _single_worker_note(table, workers)
    variants = {
        SERIAL_LABEL: matmul_serial,
        PARALLEL_LABEL: lambda a, b: matmul_parallel(a, b, workers),
    }

    for n in spec.sizes:
        seed = derive_seed(spec.seed, n)
        a = gen_random_matrix(seed, n, n, ElementKind.FLOAT, *MATRIX_VALUE_RANGE)
        b = gen_random_matrix(derive_seed(seed, 1), n, n, ElementKind.FLOAT, *MATRIX_VALUE_RANGE)
        table.input_digests[n] = _digest(a.data, b.data)

        reference = matmul_serial(a, b)
        _verify_product(matmul_parallel(a, b, workers), reference, PARALLEL_LABEL, n, seed)
        table.output_digests[n] = {SERIAL_LABEL: _digest(reference.data)}

        row: dict[str, RunStats] = {}
        for label, run in variants.items():
            samples = []
            for index in range(spec.warmup + spec.reps):
                duration = _timed_ns(lambda: run(a, b))
                if index >= spec.warmup:
                    samples.append(
                        TimingSample(Workload.MATMUL, label, n, duration, index - spec.warmup, seed)
                    )
            row[label] = aggregate(samples)

        table.cells[n] = row
        logger.info(
            "matmul n=%d serial=%sms parallel=%sms",
            n,
            format_ms(row[SERIAL_LABEL].median_ns),
            format_ms(row[PARALLEL_LABEL].median_ns),
        )

    return table


# ── Crossover plumbing ──────────────────────────────────────────


def make_runner(
    workload: Workload,
    seed: int = DEFAULT_SEED,
    strategy: PivotStrategy = PivotStrategy.LEFTMOST,
    seq_cutoff: Optional[int] = None,
    depth_cap: Optional[int] = None,
) -> Runner:
    """Measurement callback for find_crossover: one cached input per size,
    every output verified before its duration is returned."""
    inputs: dict[int, tuple] = {}

    def sort_runner(n: int, mode: ExecutionMode) -> int:
        if n not in inputs:
            size_seed = derive_seed(seed, n)
            inputs[n] = (size_seed, gen_random_array(size_seed, n, *SORT_VALUE_RANGE))
        size_seed, source = inputs[n]
        keys = source.copy()
        rng = SeededGenerator(size_seed)
        if mode.is_parallel:
            cfg = ParallelSortConfig.for_workers(mode.workers, seq_cutoff, depth_cap)
            duration = _timed_ns(lambda: quicksort_parallel(keys, strategy, cfg, rng))
        else:
            duration = _timed_ns(lambda: quicksort_serial(keys, strategy, rng))
        _verify_sort(keys, source, mode.label, n, size_seed)
        return duration

    def matmul_runner(n: int, mode: ExecutionMode) -> int:
        if n not in inputs:
            size_seed = derive_seed(seed, n)
            a = gen_random_matrix(size_seed, n, n, ElementKind.FLOAT, *MATRIX_VALUE_RANGE)
            b = gen_random_matrix(
                derive_seed(size_seed, 1), n, n, ElementKind.FLOAT, *MATRIX_VALUE_RANGE
            )
            inputs[n] = (size_seed, a, b, matmul_serial(a, b))
        size_seed, a, b, reference = inputs[n]
        result = []
        if mode.is_parallel:
            duration = _timed_ns(lambda: result.append(matmul_parallel(a, b, mode.workers)))
            _verify_product(result[0], reference, mode.label, n, size_seed)
        else:
            duration = _timed_ns(lambda: matmul_serial(a, b))
        return duration

    return sort_runner if workload is Workload.SORT else matmul_runner


def crossover_table(report: CrossoverReport) -> ResultTable:
    table = ResultTable.from_medians(
        report.workload, [SERIAL_LABEL, PARALLEL_LABEL], report.medians
    )
    if report.found:
        table.notes.append(f"crossover at n={report.crossover_n}")
    else:
        table.notes.append("no crossover found: parallel never beat serial")
    return table
