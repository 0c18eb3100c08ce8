import io
import tempfile
import unittest
from pathlib import Path
from unittest.mock import patch

from parkernels import bench
from parkernels.core import ExecutionMode, PivotStrategy, Workload
from parkernels.errors import CorrectnessError, InvalidInputError, InvalidRepsError
from parkernels.overhead import CrossoverReport, OverheadParams

SORT_HEADER = (
    "Elements,serial,parallel left pivot,parallel mean pivot,"
    "parallel right pivot,parallel random pivot"
)
SORT_COLUMNS = SORT_HEADER.split(",")[1:]


def _params(workers=2):
    return OverheadParams(
        c_fork_ns=20_000,
        c_sync_ns=5_000,
        c_dispatch_ns_per_elem=0.25,
        workers=workers,
        calibrated_at="2026-10-19T09:30:00+00:00",
        serial_rate={"matmul": 0.8, "sort": 5.0},
    )


def _fixture_table():
    medians = {
        1000: dict(zip(SORT_COLUMNS, [2_246_000, 1_400_000, 1_247_000, 1_370_000, 2_293_000])),
        1100: dict(zip(SORT_COLUMNS, [2_500_000, 1_500_000, 1_300_000, 1_450_000, 2_400_000])),
    }
    return bench.ResultTable.from_medians(Workload.SORT, SORT_COLUMNS, medians)


def _render(emitter, table):
    buffer = io.StringIO()
    emitter(table, buffer)
    return buffer.getvalue()


class EmissionTests(unittest.TestCase):
    def test_csv_header_and_fixture_row(self):
        lines = _render(bench.emit_csv, _fixture_table()).split("\n")

        self.assertEqual(lines[0], SORT_HEADER)
        self.assertEqual(lines[1], "1000,2.246,1.400,1.247,1.370,2.293")
        self.assertEqual(lines[-1], "")
        self.assertEqual(len(lines), 4)

    def test_csv_of_empty_table_is_header_only(self):
        table = bench.ResultTable(Workload.SORT, SORT_COLUMNS)

        self.assertEqual(_render(bench.emit_csv, table), SORT_HEADER + "\n")

    def test_matmul_csv(self):
        table = bench.ResultTable.from_medians(
            Workload.MATMUL, ["serial", "parallel"], {64: {"serial": 1_000_000, "parallel": 500}}
        )

        self.assertEqual(
            _render(bench.emit_csv, table), "Elements,serial,parallel\n64,1.000,0.001\n"
        )

    def test_markdown_line_count(self):
        lines = _render(bench.emit_markdown, _fixture_table()).splitlines()
        empty = _render(bench.emit_markdown, bench.ResultTable(Workload.SORT, SORT_COLUMNS))

        self.assertEqual(len(lines), 2 + 2)
        self.assertTrue(lines[0].startswith("| Elements | serial |"))
        self.assertEqual(len(empty.splitlines()), 2)

    def test_plotdata_header(self):
        lines = _render(bench.emit_plotdata, _fixture_table()).splitlines()
        empty = _render(bench.emit_plotdata, bench.ResultTable(Workload.SORT, SORT_COLUMNS))

        self.assertEqual(
            lines[0],
            "# Elements serial parallel_left_pivot parallel_mean_pivot "
            "parallel_right_pivot parallel_random_pivot",
        )
        self.assertEqual(lines[1], "1000 2.246 1.400 1.247 1.370 2.293")
        self.assertEqual(empty, lines[0] + "\n")

    def test_formats_agree_on_every_cell(self):
        table = _fixture_table()
        csv_rows = [line.split(",") for line in _render(bench.emit_csv, table).splitlines()[1:]]
        md_rows = [
            [cell.strip() for cell in line.strip("|").split("|")]
            for line in _render(bench.emit_markdown, table).splitlines()[2:]
        ]
        plot_rows = [line.split() for line in _render(bench.emit_plotdata, table).splitlines()[1:]]

        self.assertEqual(csv_rows, md_rows)
        self.assertEqual(csv_rows, plot_rows)

    def test_figure_is_written_as_png(self):
        with tempfile.TemporaryDirectory() as temp_dir:
            path = Path(temp_dir) / "sort.png"

            bench.emit_figure(_fixture_table(), path)

            self.assertEqual(path.read_bytes()[:8], b"\x89PNG\r\n\x1a\n")

    def test_figure_draws_one_line_per_variant(self):
        buffer = io.BytesIO()
        closed = []

        with patch.object(bench.plt, "close", side_effect=closed.append):
            bench.emit_figure(_fixture_table(), buffer)

        lines = closed[0].axes[0].get_lines()
        self.assertEqual([line.get_label() for line in lines], SORT_COLUMNS)
        self.assertEqual(list(lines[0].get_xdata()), [1000.0, 1100.0])
        self.assertEqual(list(lines[0].get_ydata()), [2.246, 2.5])
        self.assertTrue(buffer.getvalue().startswith(b"\x89PNG"))
        bench.plt.close(closed[0])

    def test_speedups(self):
        row = bench.speedups(_fixture_table())[1000]

        self.assertAlmostEqual(row["parallel left pivot"], 2_246_000 / 1_400_000)
        self.assertNotIn("serial", row)

    def test_crossover_table_notes(self):
        report = CrossoverReport(
            Workload.MATMUL, [8, 16], {8: {"serial": 5, "parallel": 9}, 16: {"serial": 9, "parallel": 5}}, 16
        )

        table = bench.crossover_table(report)

        self.assertEqual(table.notes, ["crossover at n=16"])
        self.assertEqual(table.median_ns(8, "parallel"), 9)


class BenchSpecTests(unittest.TestCase):
    def test_sort_columns_follow_table_order(self):
        spec = bench.BenchSpec(Workload.SORT, [10], strategies=(PivotStrategy.RANDOM, PivotStrategy.LEFTMOST))

        self.assertEqual(spec.columns, ["serial", "parallel left pivot", "parallel random pivot"])

    def test_full_sort_column_set(self):
        spec = bench.BenchSpec(Workload.SORT, [1000, 1100, 1500, 2000])

        self.assertEqual(spec.columns, SORT_COLUMNS)

    def test_validation(self):
        with self.assertRaises(InvalidRepsError):
            bench.BenchSpec(Workload.SORT, [10], reps=0)
        with self.assertRaises(InvalidInputError):
            bench.BenchSpec(Workload.SORT, [20, 10])
        with self.assertRaises(InvalidInputError):
            bench.BenchSpec(Workload.SORT, [10], strategies=())


class SortBenchTests(unittest.TestCase):
    def _spec(self, **overrides):
        values = {"sizes": [10, 3000], "reps": 3, "warmup": 1, "seed": 42, "workers": 2, "seq_cutoff": 256}
        values.update(overrides)
        return bench.BenchSpec(Workload.SORT, **values)

    def test_table_schema(self):
        table = bench.run_sort_bench(self._spec(), _params())

        self.assertEqual(table.sizes, [10, 3000])
        self.assertEqual(table.columns, SORT_COLUMNS)
        for n in table.sizes:
            for label in table.columns:
                self.assertEqual(table.cells[n][label].rep_count, 3)
                self.assertGreater(table.median_ns(n, label), 0)
        self.assertEqual(table.notes, [])

    def test_same_seed_reproduces_inputs_and_outputs(self):
        first = bench.run_sort_bench(self._spec(), _params())
        second = bench.run_sort_bench(self._spec(), _params())

        self.assertEqual(first.input_digests, second.input_digests)
        self.assertEqual(first.output_digests, second.output_digests)

    def test_different_seed_changes_inputs(self):
        first = bench.run_sort_bench(self._spec(sizes=[3000]), _params())
        other = bench.run_sort_bench(self._spec(sizes=[3000], seed=43), _params())

        self.assertNotEqual(first.input_digests, other.input_digests)

    def test_single_worker_adds_note(self):
        table = bench.run_sort_bench(self._spec(sizes=[100], workers=1), _params())

        self.assertEqual(len(table.notes), 1)
        self.assertIn("P=1", table.notes[0])

    def test_broken_kernel_is_reported_and_aborts(self):
        def scramble(keys, strategy, cfg, rng):
            keys.elems[:] = keys.elems[::-1]
            keys.elems[0] = keys.elems.max() + 1
            return keys

        with patch.object(bench, "quicksort_parallel", side_effect=scramble):
            with patch.object(bench, "report_incident") as report:
                with self.assertRaises(CorrectnessError) as raised:
                    bench.run_sort_bench(self._spec(sizes=[100]), _params())

        self.assertEqual(raised.exception.n, 100)
        self.assertEqual(raised.exception.variant, "parallel left pivot")
        report.assert_called_once()

    def test_wrong_workload(self):
        with self.assertRaises(InvalidInputError):
            bench.run_sort_bench(bench.BenchSpec(Workload.MATMUL, [8]), _params())


class MatmulBenchTests(unittest.TestCase):
    def test_two_sizes_two_rows(self):
        spec = bench.BenchSpec(Workload.MATMUL, [8, 16], reps=2, warmup=0, workers=2)

        table = bench.run_matmul_bench(spec, _params())
        lines = _render(bench.emit_csv, table).splitlines()

        self.assertEqual(lines[0], "Elements,serial,parallel")
        self.assertEqual([line.split(",")[0] for line in lines[1:]], ["8", "16"])

    def test_mismatched_product_raises(self):
        spec = bench.BenchSpec(Workload.MATMUL, [8], reps=1, warmup=0, workers=2)
        wrong = bench.matmul_serial(*[bench.gen_random_matrix(1, 8, 8)] * 2)

        with patch.object(bench, "matmul_parallel", return_value=wrong):
            with patch.object(bench, "report_incident") as report:
                with self.assertRaises(CorrectnessError):
                    bench.run_matmul_bench(spec, _params())

        self.assertEqual(report.call_args.kwargs["workload"], "matmul")


class RunnerTests(unittest.TestCase):
    def test_sort_runner_returns_durations(self):
        runner = bench.make_runner(Workload.SORT, seed=1, seq_cutoff=64)

        self.assertGreaterEqual(runner(2000, ExecutionMode.serial()), 0)
        self.assertGreaterEqual(runner(2000, ExecutionMode.with_workers(2)), 0)

    def test_matmul_runner_returns_durations(self):
        runner = bench.make_runner(Workload.MATMUL, seed=1)

        self.assertGreaterEqual(runner(16, ExecutionMode.serial()), 0)
        self.assertGreaterEqual(runner(16, ExecutionMode.with_workers(2)), 0)


if __name__ == "__main__":
    unittest.main()
