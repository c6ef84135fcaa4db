"""Small shared helpers."""

import os

from .errors import DataError

THREADS_ENV = "MWDWD_THREADS"


def resolve_threads(n=None):
    """Worker count: explicit argument, else the MWDWD_THREADS env var,
    else available parallelism."""
    if n is None:
        env = os.environ.get(THREADS_ENV)
        if env is not None:
            try:
                n = int(env)
            except ValueError:
                raise DataError(f"{THREADS_ENV} must be an integer, got {env!r}") from None
        else:
            n = os.cpu_count() or 1
    n = int(n)
    if n < 1:
        raise DataError("thread count must be >= 1")
    return n
