# Copyright (C) 2024 ssmseg authors
#
# SPDX-License-Identifier: Apache-2.0

"""Execution layer API used by the pipeline stages that run in parallel."""

from ssmseg.core.base.utils import init_backend, get_backend_proxy
from ssmseg.core.base.backend import BackendProxy


def init():
    """
    Initialize an execution backend.

    Notes
    -----
    The concrete execution backend can be set via
    `SSMSEG_BACKEND` environment variable or ``Backend`` config value.
    """
    if BackendProxy.get_instance() is None:
        init_backend()


def is_initialized():
    """
    Check if an execution backend has already been initialized.

    Returns
    -------
    bool
    """
    backend = BackendProxy.get_instance()
    return backend is not None and backend.is_initialized()


def shutdown():
    """Shutdown the execution backend; the next call re-reads the config."""
    backend = BackendProxy.get_instance()
    if backend is not None:
        backend.shutdown()


def num_workers():
    """
    Get the number of workers used by the execution backend.

    Returns
    -------
    int
    """
    return get_backend_proxy().num_workers()


def map_tasks(func, args_list):
    """
    Apply `func` to every argument tuple of `args_list` on the execution backend.

    Parameters
    ----------
    func : callable
        Function to be executed for each task. It must be importable or
        serializable with ``cloudpickle``.
    args_list : iterable of tuple
        Positional arguments of each task.

    Returns
    -------
    list
        Results in the order of `args_list`, independent of the backend.
    """
    return get_backend_proxy().map(func, list(args_list))


def split_round_robin(count, parts):
    """
    Split ``range(count)`` into at most `parts` interleaved index lists.

    Parameters
    ----------
    count : int
        Number of items.
    parts : int
        Maximal number of chunks.

    Returns
    -------
    list of list of int
        Non-empty chunks; chunk ``c`` holds ``c, c + parts, c + 2 * parts, ...``.
    """
    parts = max(1, min(parts, count))
    return [list(range(c, count, parts)) for c in range(parts)] if count else []
