import threading
import unittest

from parkernels.forkjoin import run_forked


class ForkJoinTests(unittest.TestCase):
    def test_every_task_runs_before_return(self):
        done = []
        lock = threading.Lock()

        def task(index):
            with lock:
                done.append(index)

        run_forked([lambda i=i: task(i) for i in range(8)])

        self.assertEqual(sorted(done), list(range(8)))

    def test_first_task_runs_on_the_calling_thread(self):
        seen = []

        run_forked([lambda: seen.append(threading.current_thread()), lambda: None])

        self.assertIs(seen[0], threading.current_thread())

    def test_worker_error_is_raised_after_join(self):
        finished = threading.Event()

        def slow():
            finished.wait(0.05)
            finished.set()

        def broken():
            raise ValueError("boom")

        with self.assertRaises(ValueError):
            run_forked([slow, broken])
        self.assertTrue(finished.is_set())

    def test_no_tasks(self):
        run_forked([])


if __name__ == "__main__":
    unittest.main()
