"""Worker-thread control for the compiled kernels.

Disjoint output slabs make results bit-identical for any thread count; this
knob only trades wall-clock time.
"""

from __future__ import annotations

import numba

__all__ = ["set_thread_count"]


def set_thread_count(n: int) -> int:
    """Set the kernel worker count and return the value actually applied.

    n <= 0 selects all available workers; requests above the launch-time
    maximum are clamped.
    """
    available = numba.config.NUMBA_NUM_THREADS
    effective = available if n <= 0 else max(1, min(n, available))
    numba.set_num_threads(effective)
    return effective
