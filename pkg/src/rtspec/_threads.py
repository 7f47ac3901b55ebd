"""BLAS thread control for the small dense problems this solver produces.

Matrices here are a few hundred rows; multithreaded BLAS spends more time
synchronizing than computing on them (measured 20x slowdown), so hot
loops pin BLAS to one thread.  Sweep-level parallelism belongs to the
caller (RTSPEC_THREADS in the CLI).
"""

from __future__ import annotations

import contextlib

try:
    from threadpoolctl import threadpool_limits
except ImportError:  # pragma: no cover
    threadpool_limits = None


def single_threaded_blas():
    if threadpool_limits is None:  # pragma: no cover
        return contextlib.nullcontext()
    return threadpool_limits(limits=1, user_api="blas")
