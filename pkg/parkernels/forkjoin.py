"""
Fork-join primitive shared by the kernels and the calibration probes.

The calling thread is the master: it spawns one thread per extra task, runs
the first task itself, then blocks at the join barrier. Kernels handed to
workers are numba ``nogil`` functions, so the threads really run in parallel.
"""

import threading
from typing import Callable, Sequence

Task = Callable[[], None]


def run_forked(tasks: Sequence[Task]) -> None:
    """Run ``tasks[1:]`` on fresh threads and ``tasks[0]`` inline, then join all.

    The first exception raised by any task is re-raised on the master after
    every thread has been joined.
    """
    if not tasks:
        return

    errors: list[BaseException] = []

    def guarded(task: Task) -> None:
        try:
            task()
        except BaseException as exc:
            errors.append(exc)

    threads = [threading.Thread(target=guarded, args=(task,), daemon=True) for task in tasks[1:]]
    for thread in threads:
        thread.start()
    try:
        guarded(tasks[0])
    finally:
        for thread in threads:
            thread.join()

    if errors:
        raise errors[0]
