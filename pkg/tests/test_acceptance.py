"""
Long-running and machine-dependent acceptance runs.

Enabled with PARKERNELS_ACCEPTANCE=1. The crossover checks additionally need
at least four hardware workers and record why they were skipped otherwise.
"""

import os
import unittest

from parkernels import overhead
from parkernels.bench import make_runner
from parkernels.config import DEFAULT_MATMUL_CROSSOVER_SIZES, detect_workers
from parkernels.core import PivotStrategy, Workload
from parkernels.verify import verify_matmul

ENABLED = os.getenv("PARKERNELS_ACCEPTANCE") == "1"
WORKERS = detect_workers()

requires_acceptance = unittest.skipUnless(ENABLED, "set PARKERNELS_ACCEPTANCE=1 to run")
requires_four_workers = unittest.skipUnless(
    WORKERS >= 4, f"crossover needs at least 4 hardware workers, found {WORKERS}"
)


@requires_acceptance
class EquivalenceAcceptanceTests(unittest.TestCase):
    def test_full_matmul_grid_is_bit_identical(self):
        report = verify_matmul(pairs=100, seed=0, sizes=(16, 64, 128, 256), workers_list=(2, 4, 8))

        self.assertTrue(report.ok, report.failures[:5])

    def test_fork_cost_is_stable_between_calibrations(self):
        first = overhead.calibrate(reps=11, workers=4)
        second = overhead.calibrate(reps=11, workers=4)

        low, high = sorted((max(first.c_fork_ns, 1), max(second.c_fork_ns, 1)))
        self.assertLessEqual(high, 2 * low)


@requires_acceptance
@requires_four_workers
class CrossoverAcceptanceTests(unittest.TestCase):
    def test_matmul_crossover_lies_inside_the_grid(self):
        sizes = DEFAULT_MATMUL_CROSSOVER_SIZES
        report = overhead.find_crossover(
            Workload.MATMUL, sizes, 5, make_runner(Workload.MATMUL, seed=1), workers=4
        )
        smallest, largest = report.medians[sizes[0]], report.medians[sizes[-1]]

        self.assertLess(smallest["serial"], smallest["parallel"])
        self.assertLessEqual(largest["parallel"], 0.8 * largest["serial"])
        self.assertTrue(report.found)
        self.assertTrue(sizes[0] < report.crossover_n <= sizes[-1])

    def test_sort_parallel_wins_at_ten_million(self):
        runner = make_runner(Workload.SORT, seed=1, strategy=PivotStrategy.LEFTMOST)

        report = overhead.find_crossover(Workload.SORT, [1000, 10**7], 11, runner, workers=4)
        small, large = report.medians[1000], report.medians[10**7]

        self.assertLessEqual(large["parallel"], 0.9 * large["serial"])
        self.assertGreaterEqual(small["parallel"], 0.9 * small["serial"])


if __name__ == "__main__":
    unittest.main()
