"""
Command-line entry point for the calibrate, bench-sort, bench-matmul,
crossover and verify subcommands.

Exit codes: 0 success, 1 correctness (or other runtime) failure, 2 usage
error, 3 missing or invalid calibration profile.
"""

import argparse
import logging
import os
import sys
from contextlib import contextmanager
from dataclasses import dataclass
from pathlib import Path
from typing import Iterator, Optional, Sequence, TextIO

from parkernels.bench import (
    EMITTERS,
    FIGURE_EMITTERS,
    BenchSpec,
    ResultTable,
    crossover_table,
    make_runner,
    run_matmul_bench,
    run_sort_bench,
    speedups,
)
from parkernels.config import (
    DEFAULT_CALIBRATION_PATH,
    DEFAULT_MATMUL_CROSSOVER_SIZES,
    DEFAULT_REPS,
    DEFAULT_SEED,
    DEFAULT_SORT_CROSSOVER_SIZES,
    DEFAULT_WARMUP,
    THREADS_ENV_VAR,
    resolve_workers,
)
from parkernels.core import TABLE_PIVOT_ORDER, PivotStrategy, Workload
from parkernels.data import load_calibration, save_calibration
from parkernels.errors import (
    CalibrationFileError,
    ConfigError,
    CorrectnessError,
    InvalidInputError,
    ParKernelsError,
    UsageError,
)
from parkernels.overhead import MIN_REPS, calibrate, find_crossover
from parkernels.rng import MASK64
from parkernels.verify import DEFAULT_WORKERS, verify_matmul, verify_sort

logger = logging.getLogger(__name__)

DEFAULT_BENCH_SIZES = {
    "bench-sort": [1000, 1100, 1500, 2000],
    "bench-matmul": [64, 128, 256, 512],
}
DEFAULT_VERIFY_CASES = 1000

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_USAGE = 2
EXIT_CALIBRATION = 3


@dataclass(frozen=True)
class CliConfig:
    subcommand: str
    sizes: Optional[list[int]] = None
    reps: int = DEFAULT_REPS
    warmup: int = DEFAULT_WARMUP
    seed: int = DEFAULT_SEED
    threads: Optional[int] = None
    pivots: tuple[PivotStrategy, ...] = TABLE_PIVOT_ORDER
    cutoff: Optional[int] = None
    depth_cap: Optional[int] = None
    output_format: str = "csv"
    out: Optional[Path] = None
    calib: Path = DEFAULT_CALIBRATION_PATH
    workload: Workload = Workload.MATMUL
    cases: int = DEFAULT_VERIFY_CASES
    verbose: bool = False


class _Parser(argparse.ArgumentParser):
    """ArgumentParser that raises UsageError instead of exiting."""

    def error(self, message: str):
        raise UsageError(f"{self.format_usage()}{self.prog}: error: {message}")


# ── Flag value parsers ──────────────────────────────────────────


def _int_at_least(minimum: int):
    def parse(raw: str) -> int:
        try:
            value = int(raw)
        except ValueError:
            raise argparse.ArgumentTypeError(f"expected an integer, got {raw!r}")
        if value < minimum:
            raise argparse.ArgumentTypeError(f"must be at least {minimum}, got {value}")
        return value

    return parse


def _seed(raw: str) -> int:
    value = _int_at_least(0)(raw)
    if value > MASK64:
        raise argparse.ArgumentTypeError("must fit in 64 unsigned bits")
    return value


def _size_list(raw: str) -> list[int]:
    parts = [part.strip() for part in raw.split(",")]
    if not all(parts):
        raise argparse.ArgumentTypeError(f"malformed comma list {raw!r}")
    sizes = [_int_at_least(1)(part) for part in parts]
    if any(b <= a for a, b in zip(sizes, sizes[1:])):
        raise argparse.ArgumentTypeError(f"sizes must be strictly increasing, got {raw!r}")
    return sizes


def _pivot_list(raw: str) -> tuple[PivotStrategy, ...]:
    try:
        chosen = {PivotStrategy.from_flag(part) for part in raw.split(",")}
    except InvalidInputError as exc:
        raise argparse.ArgumentTypeError(str(exc))
    return tuple(strategy for strategy in TABLE_PIVOT_ORDER if strategy in chosen)


def _build_parser() -> _Parser:
    common = _Parser(add_help=False)
    common.add_argument("--sizes", type=_size_list, help="comma list of problem sizes, increasing")
    common.add_argument("--reps", type=_int_at_least(1), default=DEFAULT_REPS, help="timed repetitions")
    common.add_argument("--warmup", type=_int_at_least(0), default=DEFAULT_WARMUP, help="untimed warmup runs")
    common.add_argument("--seed", type=_seed, default=DEFAULT_SEED, help="64-bit workload seed")
    common.add_argument(
        "--threads",
        type=_int_at_least(1),
        help="worker count P (overrides the profile and PARKERNELS_THREADS)",
    )
    common.add_argument(
        "--pivots",
        type=_pivot_list,
        default=TABLE_PIVOT_ORDER,
        help="comma list of left,mean,right,random",
    )
    common.add_argument("--cutoff", type=_int_at_least(1), help="sequential cutoff for parallel sort")
    common.add_argument("--depth-cap", type=_int_at_least(0), help="maximum fork depth for parallel sort")
    common.add_argument(
        "--format",
        choices=sorted([*EMITTERS, *FIGURE_EMITTERS]),
        default="csv",
        dest="output_format",
    )
    common.add_argument("--out", type=Path, help="output file (standard output when omitted)")
    common.add_argument("--calib", type=Path, default=DEFAULT_CALIBRATION_PATH, help="calibration profile")
    common.add_argument("--verbose", action="store_true", help="debug logging")

    parser = _Parser(prog="parkernels", description="Parallel kernels and crossover benchmarks.")
    commands = parser.add_subparsers(dest="subcommand", required=True, metavar="SUBCOMMAND")
    commands.add_parser("calibrate", parents=[common], help="measure overheads, write a profile")
    commands.add_parser("bench-sort", parents=[common], help="serial vs. parallel quicksort table")
    commands.add_parser("bench-matmul", parents=[common], help="serial vs. parallel matmul table")
    crossover = commands.add_parser("crossover", parents=[common], help="find the serial/parallel crossover")
    crossover.add_argument(
        "--workload",
        choices=[workload.value for workload in Workload],
        default=Workload.MATMUL.value,
    )
    verify = commands.add_parser("verify", parents=[common], help="run the correctness suites")
    verify.add_argument(
        "--cases",
        type=_int_at_least(1),
        default=DEFAULT_VERIFY_CASES,
        help="random sort arrays (matmul pairs are a tenth of this)",
    )
    return parser


def parse_flags(argv: Sequence[str]) -> CliConfig:
    """Parse and validate every flag; raises UsageError naming the bad flag."""
    args = _build_parser().parse_args(list(argv))

    if args.subcommand in ("calibrate", "crossover") and args.reps < MIN_REPS:
        raise UsageError(f"argument --reps: {args.subcommand} needs at least {MIN_REPS} reps")
    if args.subcommand == "calibrate" and args.out is None:
        args.out = DEFAULT_CALIBRATION_PATH
    if args.output_format in FIGURE_EMITTERS and args.out is None:
        raise UsageError(f"argument --format: {args.output_format} output needs --out")

    return CliConfig(
        subcommand=args.subcommand,
        sizes=args.sizes,
        reps=args.reps,
        warmup=args.warmup,
        seed=args.seed,
        threads=args.threads,
        pivots=args.pivots,
        cutoff=args.cutoff,
        depth_cap=args.depth_cap,
        output_format=args.output_format,
        out=args.out,
        calib=args.calib,
        workload=Workload(getattr(args, "workload", Workload.MATMUL.value)),
        cases=getattr(args, "cases", DEFAULT_VERIFY_CASES),
        verbose=args.verbose,
    )


# ── Subcommands ─────────────────────────────────────────────────


@contextmanager
def _sink(out: Optional[Path]) -> Iterator[TextIO]:
    if out is None:
        yield sys.stdout
        return
    with open(out, "w", encoding="utf-8", newline="\n") as handle:
        yield handle


def _emit(table: ResultTable, config: CliConfig) -> None:
    if config.output_format in FIGURE_EMITTERS:
        FIGURE_EMITTERS[config.output_format](table, config.out)
    else:
        with _sink(config.out) as destination:
            EMITTERS[config.output_format](table, destination)
    for note in table.notes:
        logger.info("note: %s", note)


def _log_speedups(table: ResultTable) -> None:
    for n, row in speedups(table).items():
        logger.info(
            "speedup n=%d %s", n, " ".join(f"{label}={value:.2f}x" for label, value in row.items())
        )


def _run_calibrate(config: CliConfig) -> int:
    params = calibrate(reps=config.reps, workers=config.threads)
    path = save_calibration(params, config.out)
    logger.info("calibration profile written to %s", path)
    return EXIT_OK


def _run_bench(config: CliConfig) -> int:
    params = load_calibration(config.calib)
    workload = Workload.SORT if config.subcommand == "bench-sort" else Workload.MATMUL
    spec = BenchSpec(
        workload=workload,
        sizes=config.sizes or DEFAULT_BENCH_SIZES[config.subcommand],
        reps=config.reps,
        warmup=config.warmup,
        seed=config.seed,
        strategies=config.pivots,
        workers=config.threads,
        seq_cutoff=config.cutoff,
        depth_cap=config.depth_cap,
    )
    table = run_sort_bench(spec, params) if workload is Workload.SORT else run_matmul_bench(spec, params)
    _emit(table, config)
    _log_speedups(table)
    return EXIT_OK


def _run_crossover(config: CliConfig) -> int:
    params = load_calibration(config.calib)
    default_sizes = (
        DEFAULT_SORT_CROSSOVER_SIZES
        if config.workload is Workload.SORT
        else DEFAULT_MATMUL_CROSSOVER_SIZES
    )
    runner = make_runner(
        config.workload,
        seed=config.seed,
        strategy=config.pivots[0],
        seq_cutoff=config.cutoff,
        depth_cap=config.depth_cap,
    )
    report = find_crossover(
        config.workload,
        config.sizes or default_sizes,
        config.reps,
        runner,
        workers=resolve_workers(config.threads, params.workers),
        seed=config.seed,
    )
    _emit(crossover_table(report), config)
    return EXIT_OK


def _run_verify(config: CliConfig) -> int:
    if config.threads or os.getenv(THREADS_ENV_VAR, "").strip():
        workers_list = (resolve_workers(config.threads),)
    else:
        workers_list = DEFAULT_WORKERS
    reports = [
        verify_sort(cases=config.cases, seed=config.seed, workers_list=workers_list),
        verify_matmul(pairs=max(1, config.cases // 10), seed=config.seed, workers_list=workers_list),
    ]
    for report in reports:
        logger.info(
            "%s: %s (%d checks, %d failures)",
            report.suite,
            "ok" if report.ok else "FAILED",
            report.checks,
            len(report.failures),
        )
    return EXIT_OK if all(report.ok for report in reports) else EXIT_FAILURE


COMMANDS = {
    "calibrate": _run_calibrate,
    "bench-sort": _run_bench,
    "bench-matmul": _run_bench,
    "crossover": _run_crossover,
    "verify": _run_verify,
}


def _configure_logging(verbose: bool) -> None:
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.INFO,
        format="[%(module)s] %(message)s",
        stream=sys.stderr,
        force=True,
    )


def main(argv: Optional[Sequence[str]] = None) -> int:
    try:
        config = parse_flags(sys.argv[1:] if argv is None else argv)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:
        # --help prints and exits through argparse.
        return exc.code if isinstance(exc.code, int) else EXIT_OK

    _configure_logging(config.verbose)
    try:
        return COMMANDS[config.subcommand](config)
    except CalibrationFileError as exc:
        logger.error("%s", exc)
        return EXIT_CALIBRATION
    except (ConfigError, UsageError) as exc:
        logger.error("%s", exc)
        return EXIT_USAGE
    except CorrectnessError as exc:
        logger.error("correctness failure: %s", exc)
        return EXIT_FAILURE
    except (ParKernelsError, OSError) as exc:
        logger.error("%s", exc)
        return EXIT_FAILURE
