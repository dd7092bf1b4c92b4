# Copyright (C) 2024 ssmseg authors
#
# SPDX-License-Identifier: Apache-2.0

"""An implementation of ``Backend`` interface using Python Sequential backend."""

from ssmseg.core.base.backend import Backend


class PySeqBackend(Backend):
    """The class that implements the interface in ``Backend`` running every task inline."""

    def map(self, func, args_list):
        """
        Apply `func` to every argument tuple of `args_list` in the calling process.

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
        return [func(*args) for args in args_list]

    def num_workers(self):
        """
        Get the number of workers used by the execution backend.

        Returns
        -------
        int
            Always 1.
        """
        return 1

    def shutdown(self):
        """Shutdown Python Sequential execution backend (nothing to release)."""
        pass

    def is_initialized(self):
        """
        Check if Python Sequential backend has already been initialized.

        Returns
        -------
        bool
            Always True.
        """
        return True
