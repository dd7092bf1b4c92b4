# Copyright (C) 2024 ssmseg authors
#
# SPDX-License-Identifier: Apache-2.0

"""An implementation of ``Backend`` interface using Python Multiprocessing backend."""

from ssmseg.core.backends.pymp.process_manager import ProcessManager
from ssmseg.core.base.backend import Backend


class PyMpBackend(Backend):
    """
    The class that implements the interface in ``Backend`` using Python Multiprocessing backend.

    Parameters
    ----------
    num_workers : int
        Number of worker-processes of the pool.
    """

    def __init__(self, num_workers):
        self._num_workers = max(1, int(num_workers))

    def map(self, func, args_list):
        """
        Execute `func` for every argument tuple in the worker pool.

        Parameters
        ----------
        func : callable
            Function to be executed for each task.
        args_list : list of tuple
            Positional arguments of each task.

        Returns
        -------
        list
            Results in the order of `args_list`.
        """
        args_list = list(args_list)
        if len(args_list) <= 1:
            return [func(*args) for args in args_list]
        return ProcessManager.get_instance(num_workers=self._num_workers).run_batch(
            func, args_list
        )

    def num_workers(self):
        """
        Get the number of workers used by the execution backend.

        Returns
        -------
        int
        """
        return self._num_workers

    def shutdown(self):
        """Stop the worker processes."""
        ProcessManager.drop_instance()

    def is_initialized(self):
        """
        Check if the worker pool has already been started.

        Returns
        -------
        bool
        """
        return ProcessManager.get_instance() is not None
