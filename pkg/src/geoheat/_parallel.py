"""Thread budget shared by every parallel phase.

Numba sizes its thread pool from ``NUMBA_NUM_THREADS`` when it is first
imported, so the defaults below must be set before anything imports numba.
The pool is allowed to be larger than the core count so that results can be
compared across thread counts on small machines.
"""

import os
from contextlib import contextmanager

os.environ.setdefault("NUMBA_NUM_THREADS", str(max(os.cpu_count() or 1, 8)))
os.environ.setdefault("NUMBA_THREADING_LAYER_PRIORITY", "omp tbb workqueue")

import numba  # noqa: E402

THREADS_ENV = "GEOHEAT_THREADS"

_state = {"sequential": False}


def max_threads():
    """Largest thread count the numba pool can run."""
    return int(numba.config.NUMBA_NUM_THREADS)


def default_threads():
    """Thread count from ``GEOHEAT_THREADS``, else the hardware count."""
    value = os.environ.get(THREADS_ENV)
    if value:
        try:
            n = int(value)
        except ValueError:
            raise ValueError(f"{THREADS_ENV} must be a positive integer, got {value!r}")
        if n < 1:
            raise ValueError(f"{THREADS_ENV} must be a positive integer, got {value!r}")
        return n
    return os.cpu_count() or 1


def resolve_threads(threads):
    """Clamp a requested thread count to what the pool supports."""
    if threads is None:
        threads = default_threads()
    threads = int(threads)
    if threads < 1:
        raise ValueError(f"threads must be >= 1, got {threads}")
    return min(threads, max_threads())


def is_sequential():
    return _state["sequential"]


@contextmanager
def thread_budget(threads=None, sequential=False):
    """Run the enclosed solver calls with a fixed thread count.

    ``sequential=True`` switches every kernel to its serial build, which must
    produce output identical to the parallel build.
    """
    n = resolve_threads(threads)
    previous_threads = numba.get_num_threads()
    previous_seq = _state["sequential"]
    numba.set_num_threads(n)
    _state["sequential"] = bool(sequential)
    try:
        yield n
    finally:
        numba.set_num_threads(previous_threads)
        _state["sequential"] = previous_seq
