"""
Dense matrix multiplication: serial triple loop and master/worker row blocks.

Both variants run the same row kernel, which accumulates every dot product in
ascending k order, so the parallel product is bit-identical to the serial one
for integers and floats alike. Workers receive whole output rows; a single dot
product is never split across threads.
"""

import logging
from dataclasses import dataclass
from functools import partial

import numba
import numpy as np

from parkernels.core import ExecutionMode, Matrix, Workload
from parkernels.errors import InvalidWorkerCountError, KindError, ShapeError
from parkernels.forkjoin import run_forked

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class RowRange:
    begin: int
    end: int

    def __len__(self) -> int:
        return self.end - self.begin


@numba.njit(nogil=True, cache=True)
def _multiply_rows(a, b, c, begin, end):
    inner = a.shape[1]
    cols = b.shape[1]
    for i in range(begin, end):
        for j in range(cols):
            acc = c[i, j]
            for k in range(inner):
                acc += a[i, k] * b[k, j]
            c[i, j] = acc


def _check_operands(a: Matrix, b: Matrix) -> None:
    if a.cols != b.rows:
        raise ShapeError(
            f"Cannot multiply {a.rows}x{a.cols} by {b.rows}x{b.cols}: inner dimensions differ."
        )
    if a.kind is not b.kind:
        raise KindError(f"Element kinds differ: {a.kind.value} x {b.kind.value}.")


def _output(a: Matrix, b: Matrix) -> np.ndarray:
    return np.zeros((a.rows, b.cols), dtype=a.data.dtype)


def matmul_serial(a: Matrix, b: Matrix) -> Matrix:
    """c[i][j] = sum over ascending k of a[i][k]·b[k][j], on the calling thread."""
    _check_operands(a, b)
    c = _output(a, b)
    _multiply_rows(a.data, b.data, c, 0, a.rows)
    return Matrix(c)


def partition_rows(rows: int, workers: int) -> list[RowRange]:
    """Balanced contiguous row blocks; the first ``rows % workers`` are one row larger."""
    if workers < 1:
        raise InvalidWorkerCountError(f"Worker count must be at least 1, got {workers}.")
    base, extra = divmod(rows, workers)
    ranges = []
    begin = 0
    for index in range(min(workers, rows)):
        end = begin + base + (1 if index < extra else 0)
        ranges.append(RowRange(begin, end))
        begin = end
    return ranges


def matmul_parallel(a: Matrix, b: Matrix, workers: int) -> Matrix:
    """Master/worker product: each worker fills a disjoint block of output rows."""
    _check_operands(a, b)
    ranges = partition_rows(a.rows, workers)
    c = _output(a, b)
    run_forked(
        [partial(_multiply_rows, a.data, b.data, c, block.begin, block.end) for block in ranges]
    )
    return Matrix(c)


def effective_order(a: Matrix, b: Matrix) -> int:
    """Order n of the square product doing the same number of multiply-adds."""
    return max(1, round((a.rows * a.cols * b.cols) ** (1 / 3)))


def matmul_adaptive(a: Matrix, b: Matrix, params) -> tuple[Matrix, ExecutionMode]:
    """Multiply in whichever mode the calibrated cost model predicts is faster."""
    from parkernels.overhead import choose_mode

    _check_operands(a, b)
    mode = choose_mode(Workload.MATMUL, effective_order(a, b), params)
    logger.debug("matmul %dx%d·%dx%d -> %s", a.rows, a.cols, b.rows, b.cols, mode)
    if mode.is_parallel:
        return matmul_parallel(a, b, mode.workers), mode
    return matmul_serial(a, b), mode
