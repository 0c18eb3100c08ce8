"""
Correctness suites behind the `verify` subcommand.

Sort: seeded random arrays plus adversarial shapes, every pivot strategy,
serial and parallel. Matmul: seeded integer and float pairs, parallel output
bit-identical to serial, serial checked against a plain triple-loop oracle.
Failures are collected (and reported as incidents) rather than raised, so one
run shows every broken combination.
"""

import logging
from dataclasses import dataclass, field
from typing import Iterator, Sequence

import numpy as np

from parkernels.config import SORT_VALUE_RANGE
from parkernels.core import (
    ElementKind,
    Matrix,
    NumArray,
    PivotStrategy,
    Workload,
    gen_random_array,
    gen_random_matrix,
    is_sorted,
    multiset_equal,
)
from parkernels.incidents import report_incident
from parkernels.matmul import matmul_parallel, matmul_serial
from parkernels.rng import SeededGenerator, derive_seed
from parkernels.sort import ParallelSortConfig, quicksort_parallel, quicksort_serial

logger = logging.getLogger(__name__)

DEFAULT_WORKERS = (2, 4, 8)
DEFAULT_MATMUL_SIZES = (16, 64, 128, 256)
# Small enough that arrays of a few thousand keys really fork.
VERIFY_SEQ_CUTOFF = 64
ORACLE_ORDER = 8
ORACLE_VALUE_RANGE = (-3, 3)
INT_VALUE_RANGE = (-100, 100)


@dataclass
class VerifyReport:
    suite: str
    checks: int = 0
    failures: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.failures

    def record(self, passed: bool, description: str, *, variant: str, n: int, seed: int) -> None:
        self.checks += 1
        if passed:
            return
        self.failures.append(description)
        logger.error("FAIL %s: %s", self.suite, description)
        report_incident(
            workload=self.suite, variant=variant, n=n, seed=seed, error_message=description
        )


def adversarial_arrays() -> Iterator[tuple[str, NumArray]]:
    yield "empty", NumArray.of([])
    yield "single", NumArray.of([42])
    yield "sorted", NumArray(np.arange(5000, dtype=np.int64))
    yield "reverse", NumArray(np.arange(5000, 0, -1, dtype=np.int64))
    yield "all-equal", NumArray(np.full(1000, 7, dtype=np.int64))
    yield "two-valued", NumArray(np.tile(np.array([1, 0], dtype=np.int64), 2500))


def _random_arrays(cases: int, seed: int, max_len: int) -> Iterator[tuple[str, NumArray]]:
    lengths = SeededGenerator(seed)
    for case in range(cases):
        n = lengths.randint(0, max_len)
        yield f"random#{case}", gen_random_array(derive_seed(seed, case), n, *SORT_VALUE_RANGE)


def verify_sort(
    cases: int = 1000,
    seed: int = 0,
    workers_list: Sequence[int] = DEFAULT_WORKERS,
    max_len: int = 5000,
    seq_cutoff: int = VERIFY_SEQ_CUTOFF,
) -> VerifyReport:
    report = VerifyReport(Workload.SORT.value)
    configs = [ParallelSortConfig.for_workers(p, seq_cutoff=seq_cutoff) for p in workers_list]

    inputs = list(adversarial_arrays())
    for name, source in [*inputs, *_random_arrays(cases, seed, max_len)]:
        for strategy in PivotStrategy:
            runs = [("serial", lambda keys, rng: quicksort_serial(keys, strategy, rng))]
            runs.extend(
                (
                    f"parallel P={cfg.workers}",
                    lambda keys, rng, cfg=cfg: quicksort_parallel(keys, strategy, cfg, rng),
                )
                for cfg in configs
            )
            for variant, run in runs:
                keys = source.copy()
                run(keys, SeededGenerator(seed))
                label = f"{variant} {strategy.flag_name} pivot"
                in_order = is_sorted(keys)
                problem = "is not sorted" if not in_order else "is not a permutation of its input"
                report.record(
                    in_order and multiset_equal(keys, source),
                    f"{label} output on {name} (n={source.n}) {problem}",
                    variant=label,
                    n=source.n,
                    seed=seed,
                )

    logger.info("sort suite: %d checks, %d failures", report.checks, len(report.failures))
    return report


def oracle_product(a: Matrix, b: Matrix) -> list[list[int]]:
    """Textbook triple loop over Python lists."""
    left, right = a.tolist(), b.tolist()
    return [
        [sum(left[i][k] * right[k][j] for k in range(a.cols)) for j in range(b.cols)]
        for i in range(a.rows)
    ]


def verify_matmul(
    pairs: int = 100,
    seed: int = 0,
    sizes: Sequence[int] = DEFAULT_MATMUL_SIZES,
    workers_list: Sequence[int] = DEFAULT_WORKERS,
) -> VerifyReport:
    report = VerifyReport(Workload.MATMUL.value)

    for pair in range(pairs):
        pair_seed = derive_seed(seed, pair)
        a = gen_random_matrix(pair_seed, ORACLE_ORDER, ORACLE_ORDER, ElementKind.INT, *ORACLE_VALUE_RANGE)
        b = gen_random_matrix(
            derive_seed(pair_seed, 1), ORACLE_ORDER, ORACLE_ORDER, ElementKind.INT, *ORACLE_VALUE_RANGE
        )
        report.record(
            matmul_serial(a, b).tolist() == oracle_product(a, b),
            f"serial product differs from the oracle at {ORACLE_ORDER}x{ORACLE_ORDER} (pair {pair})",
            variant="serial",
            n=ORACLE_ORDER,
            seed=pair_seed,
        )

    for kind, value_range in ((ElementKind.INT, INT_VALUE_RANGE), (ElementKind.FLOAT, (-1.0, 1.0))):
        for n in sizes:
            for pair in range(pairs):
                pair_seed = derive_seed(derive_seed(seed, n), pair)
                a = gen_random_matrix(pair_seed, n, n, kind, *value_range)
                b = gen_random_matrix(derive_seed(pair_seed, 1), n, n, kind, *value_range)
                reference = matmul_serial(a, b)
                for workers in workers_list:
                    variant = f"parallel P={workers} {kind.value}"
                    report.record(
                        matmul_parallel(a, b, workers).bit_equal(reference),
                        f"{variant} product at n={n} (pair {pair}) is not bit-identical to serial",
                        variant=variant,
                        n=n,
                        seed=pair_seed,
                    )
        logger.info("matmul %s pairs checked for sizes %s", kind.value, list(sizes))

    logger.info("matmul suite: %d checks, %d failures", report.checks, len(report.failures))
    return report
